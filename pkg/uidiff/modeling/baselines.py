"""
Comparison methods that need no graph: pixel-wise comparison of two same-size
screenshots, and region-based comparison of controls found at the same place.
"""
import logging
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from scipy import ndimage

from uidiff.structures import BBox, ConfigError, DetectionSet, DimensionMismatch, Raster
from uidiff.utils.box_ops import array_to_boxes, box_iou, boxes_to_array, masks_to_boxes

from .report import BaselineReport, ChangeRegion
from .similarity import average_hash, hash_difference

__all__ = [
    "PixelWiseParams",
    "RegionBasedParams",
    "difference_mask",
    "merge_overlapping",
    "pixel_wise_detect",
    "pair_by_iou",
    "region_based_detect",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PixelWiseParams:
    min_area: int = 16
    merge_overlapping: bool = True

    def __post_init__(self):
        if self.min_area < 0:
            raise ConfigError(f"min_area must be >= 0, got {self.min_area}")

    @classmethod
    def from_config(cls, cfg) -> "PixelWiseParams":
        return cls(min_area=int(cfg.MODEL.PWC.MIN_AREA), merge_overlapping=bool(cfg.MODEL.PWC.MERGE_OVERLAPPING))


@dataclass(frozen=True)
class RegionBasedParams:
    pair_iou: float = 0.5
    hash_threshold: int = 10

    def __post_init__(self):
        if not 0.0 < self.pair_iou <= 1.0:
            raise ConfigError(f"pair_iou must be in (0, 1], got {self.pair_iou}")
        if not 0 <= self.hash_threshold <= 64:
            raise ConfigError(f"hash_threshold must be in [0, 64], got {self.hash_threshold}")

    @classmethod
    def from_config(cls, cfg) -> "RegionBasedParams":
        return cls(pair_iou=float(cfg.MODEL.RCD.PAIR_IOU), hash_threshold=int(cfg.MODEL.RCD.HASH_THRESHOLD))


def difference_mask(img_a: Raster, img_b: Raster) -> np.ndarray:
    """(H, W) bool mask of pixels whose RGB values differ in any channel."""
    if img_a.size != img_b.size:
        raise DimensionMismatch(img_a.size, img_b.size)
    return np.any(img_a.pixels != img_b.pixels, axis=2)


def merge_overlapping(boxes: List[BBox]) -> List[BBox]:
    """
    Replace every group of transitively overlapping boxes by its enclosing box.
    """
    boxes = list(boxes)
    merged = True
    while merged:
        merged = False
        for i in range(len(boxes)):
            for j in range(i + 1, len(boxes)):
                if boxes[i].intersects(boxes[j]):
                    boxes[i] = boxes[i].enclose(boxes[j])
                    del boxes[j]
                    merged = True
                    break
            if merged:
                break
    return sorted(boxes, key=lambda b: (b.y1, b.x1, b.y2, b.x2))


def pixel_wise_detect(img_a: Raster, img_b: Raster, params: PixelWiseParams = PixelWiseParams()) -> BaselineReport:
    """
    Compare the pixels at the same location of both images.

    Differing pixels are grouped into 4-connected components; components with
    fewer than ``params.min_area`` pixels are dropped and each remaining
    component's box is reported in both images. Images of different sizes cannot
    be compared and give a report flagged ``dimension_mismatch``.
    """
    info = {"min_area": params.min_area, "merge_overlapping": params.merge_overlapping}
    try:
        mask = difference_mask(img_a, img_b)
    except DimensionMismatch as e:
        logger.warning("Cannot compare pixels: {}".format(e))
        return BaselineReport("pwc", img_a.size, img_b.size, params=info, dimension_mismatch=True)

    # the default structuring element of ndimage.label is the 4-connected cross
    labels, num = ndimage.label(mask)
    boxes = masks_to_boxes(labels, num)
    counts = np.bincount(labels.ravel(), minlength=num + 1)[1:]
    kept = array_to_boxes(boxes[counts >= params.min_area])
    if len(kept) < num:
        logger.debug("Dropped {} components below {} px".format(num - len(kept), params.min_area))
    if params.merge_overlapping:
        kept = merge_overlapping(kept)
    regions = tuple(ChangeRegion(b) for b in kept)
    return BaselineReport("pwc", img_a.size, img_b.size, regions, regions, params=info)


def pair_by_iou(dets_a: DetectionSet, dets_b: DetectionSet, min_iou: float) -> List[Tuple[int, int]]:
    """
    One-to-one pairs of control ids whose boxes overlap with IOU >= ``min_iou``,
    accepted greedily by descending IOU (ties by source, then target id).
    """
    if len(dets_a) == 0 or len(dets_b) == 0:
        return []
    iou, _ = box_iou(boxes_to_array(c.bbox for c in dets_a), boxes_to_array(c.bbox for c in dets_b))
    ids_a, ids_b = dets_a.ids, dets_b.ids
    rows, cols = np.nonzero(iou >= min_iou)
    candidates = sorted(zip(rows.tolist(), cols.tolist()), key=lambda rc: (-iou[rc], ids_a[rc[0]], ids_b[rc[1]]))
    pairs, used_a, used_b = [], set(), set()
    for r, c in candidates:
        if r in used_a or c in used_b:
            continue
        used_a.add(r)
        used_b.add(c)
        pairs.append((ids_a[r], ids_b[c]))
    return pairs


def region_based_detect(
    img_a: Raster,
    dets_a: DetectionSet,
    img_b: Raster,
    dets_b: DetectionSet,
    params: RegionBasedParams = RegionBasedParams(),
) -> BaselineReport:
    """
    Compare the controls found at the same place of both images.

    Paired controls whose hashes differ by more than ``params.hash_threshold`` bits
    are changes in both images; controls without a counterpart are changes in their
    own image.
    """
    pairs = pair_by_iou(dets_a, dets_b, params.pair_iou)
    by_a, by_b = dets_a.by_id(), dets_b.by_id()
    changed_a, changed_b = set(by_a), set(by_b)
    for i, j in pairs:
        a, b = by_a[i], by_b[j]
        diff = hash_difference(average_hash(img_a, a.bbox), average_hash(img_b, b.bbox))
        if diff <= params.hash_threshold:
            changed_a.discard(i)
            changed_b.discard(j)

    info = {"pair_iou": params.pair_iou, "hash_threshold": params.hash_threshold}
    return BaselineReport(
        "rcd",
        img_a.size,
        img_b.size,
        tuple(ChangeRegion.of(c) for c in dets_a if c.id in changed_a),
        tuple(ChangeRegion.of(c) for c in dets_b if c.id in changed_b),
        params=info,
    )
