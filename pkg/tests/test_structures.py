import math
import pickle

import numpy as np
import pytest

from uidiff.structures import (
    BBox,
    BoundsError,
    CategoryError,
    Control,
    ControlCategory,
    DegenerateBox,
    DetectionSet,
    Raster,
    SchemaError,
    euclidean_distance,
    iou,
)


def test_bbox_geometry():
    box = BBox(10, 20, 50, 30)
    assert (box.width, box.height, box.area) == (40, 10, 400)
    assert BBox.from_xywh(10, 20, 40, 10) == box
    assert BBox.from_list(box.to_list()) == box


@pytest.mark.parametrize("coords", [(5, 5, 5, 10), (5, 5, 10, 5), (10, 0, 5, 4)])
def test_bbox_degenerate(coords):
    with pytest.raises(DegenerateBox):
        BBox(*coords)


def test_bbox_negative_and_non_integer():
    with pytest.raises(BoundsError):
        BBox(-1, 0, 4, 4)
    with pytest.raises(DegenerateBox):
        BBox(0.5, 0, 4, 4)
    assert BBox(np.int64(1), 2, 3, 4).x1 == 1


def test_iou_hand_cases():
    a = BBox(0, 0, 10, 10)
    assert iou(a, a) == 1.0
    assert iou(a, BBox(20, 20, 30, 30)) == 0.0
    # touching edges do not overlap
    assert iou(a, BBox(10, 0, 20, 10)) == 0.0
    # half of each box overlaps: 50 / 150
    assert abs(iou(a, BBox(5, 0, 15, 10)) - 1.0 / 3.0) < 1e-12


def test_euclidean_distance():
    a, b = BBox(0, 0, 10, 10), BBox(3, 4, 13, 14)
    assert euclidean_distance(a, a) == 0.0
    assert euclidean_distance(a, b) == pytest.approx(math.sqrt(2 * 9 + 2 * 16))
    assert euclidean_distance(a, b) == euclidean_distance(b, a)


def test_expand_and_resize():
    box = BBox(2, 2, 10, 10)
    assert box.expand(5, 12, 12) == BBox(0, 0, 12, 12)
    assert box.resized(0.5) == BBox(2, 2, 6, 6)
    assert box.moved_to(0, 0) == BBox(0, 0, 8, 8)


def test_category_parse():
    assert ControlCategory.parse("BUTTON") is ControlCategory.BUTTON
    assert len(ControlCategory) == 24
    with pytest.raises(CategoryError):
        ControlCategory.parse("SLIDER")


def test_detection_set_validation():
    c0 = Control(0, BBox(0, 0, 10, 10), "TEXT", "hi")
    c1 = Control(1, BBox(10, 10, 20, 20), ControlCategory.ICON)
    dets = DetectionSet(20, 20, (c0, c1))
    assert dets.ids == [0, 1] and dets.size == (20, 20)
    assert dets.get(1) is c1
    with pytest.raises(SchemaError):
        DetectionSet(20, 20, (c1, c0))
    with pytest.raises(BoundsError):
        DetectionSet(15, 15, (c0, c1))
    renumbered = dets.with_controls([c1], renumber=True)
    assert renumbered.ids == [0] and renumbered.controls[0].category is ControlCategory.ICON


def test_raster_is_immutable_copy():
    array = np.zeros((4, 6, 3), dtype=np.uint8)
    raster = Raster(array)
    array[0, 0] = 255
    assert raster.pixels[0, 0, 0] == 0
    assert raster.size == (6, 4)
    with pytest.raises(ValueError):
        raster.pixels[0, 0, 0] = 1
    assert len(raster.tobytes()) == 6 * 4 * 3
    assert Raster.from_bytes(6, 4, raster.tobytes()) == raster
    assert pickle.loads(pickle.dumps(raster)) == raster


def test_raster_rejects_bad_input():
    with pytest.raises(SchemaError):
        Raster(np.zeros((4, 4), dtype=np.uint8))
    with pytest.raises(SchemaError):
        Raster.from_bytes(2, 2, b"\x00" * 5)
    with pytest.raises(BoundsError):
        Raster.blank(4, 4).crop(BBox(0, 0, 5, 4))


def _random_box(rng, size=50):
    x1, y1 = rng.integers(0, size, size=2)
    w, h = rng.integers(1, size, size=2)
    return BBox(int(x1), int(y1), int(x1 + w), int(y1 + h))


def test_iou_is_symmetric_and_bounded():
    rng = np.random.default_rng(0)
    for _ in range(500):
        a, b = _random_box(rng), _random_box(rng)
        assert iou(a, b) == iou(b, a)
        assert 0.0 <= iou(a, b) <= 1.0
        assert (iou(a, b) == 1.0) == (a == b)


def test_euclidean_distance_triangle_inequality():
    rng = np.random.default_rng(1)
    for _ in range(500):
        a, b, c = (_random_box(rng) for _ in range(3))
        assert euclidean_distance(a, c) <= euclidean_distance(a, b) + euclidean_distance(b, c) + 1e-9
