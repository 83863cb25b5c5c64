# ------------------------------------------------------------------------------
# Reference: https://github.com/facebookresearch/detr/blob/main/util/box_ops.py
# Ported to numpy for integer pixel boxes
# ------------------------------------------------------------------------------
"""
Vectorised helpers over (N, 4) XYXY integer box arrays.
"""
from typing import Iterable, List, Tuple

import numpy as np
from scipy import ndimage

from uidiff.structures import BBox

__all__ = [
    "boxes_to_array",
    "array_to_boxes",
    "box_area",
    "box_iou",
    "pairwise_sq_distance",
    "pairwise_distance",
    "masks_to_boxes",
]


def boxes_to_array(boxes: Iterable[BBox]) -> np.ndarray:
    arr = np.array([b.as_tuple() for b in boxes], dtype=np.int64)
    return arr.reshape(-1, 4)


def array_to_boxes(arr: np.ndarray) -> List[BBox]:
    return [BBox(*(int(v) for v in row)) for row in np.asarray(arr).reshape(-1, 4)]


def box_area(boxes: np.ndarray) -> np.ndarray:
    return (boxes[:, 2] - boxes[:, 0]) * (boxes[:, 3] - boxes[:, 1])


# modified from torchvision to also return the union
def box_iou(boxes1: np.ndarray, boxes2: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    area1 = box_area(boxes1)
    area2 = box_area(boxes2)

    lt = np.maximum(boxes1[:, None, :2], boxes2[None, :, :2])  # [N,M,2]
    rb = np.minimum(boxes1[:, None, 2:], boxes2[None, :, 2:])  # [N,M,2]

    wh = np.clip(rb - lt, 0, None)  # [N,M,2]
    inter = wh[:, :, 0] * wh[:, :, 1]  # [N,M]

    union = area1[:, None] + area2[None, :] - inter

    # valid boxes have positive area so union > 0
    iou = inter.astype(np.float64) / np.maximum(union, 1).astype(np.float64)
    return iou, union


def pairwise_sq_distance(boxes1: np.ndarray, boxes2: np.ndarray) -> np.ndarray:
    """[N, M] exact squared distances between integer boxes viewed as points in R^4."""
    diff = boxes1[:, None, :].astype(np.int64) - boxes2[None, :, :].astype(np.int64)
    return (diff * diff).sum(-1)


def pairwise_distance(boxes1: np.ndarray, boxes2: np.ndarray) -> np.ndarray:
    """[N, M] Euclidean distances between boxes viewed as points in R^4."""
    return np.sqrt(pairwise_sq_distance(boxes1, boxes2).astype(np.float64))


def masks_to_boxes(labels: np.ndarray, num_labels: int) -> np.ndarray:
    """
    Compute the bounding boxes of the components of a label image.

    Args:
        labels: (H, W) int array where component ``i`` (1-based) is marked with ``i``
            and background with 0, as produced by ``scipy.ndimage.label``.
        num_labels: number of components.

    Returns:
        (num_labels, 4) int64 array of exclusive XYXY boxes, in label order.
    """
    out = np.zeros((num_labels, 4), dtype=np.int64)
    if num_labels == 0:
        return out

    for i, sl in enumerate(ndimage.find_objects(labels, max_label=num_labels)):
        if sl is None:
            continue
        ys, xs = sl
        out[i] = (xs.start, ys.start, xs.stop, ys.stop)
    return out
