import filecmp
import os

import numpy as np
import pytest

from uidiff.data.annotations import write_annotation_file
from uidiff.data.build import generate_dataset, generate_pair, load_bases, pair_seeds, synthetic_bases
from uidiff.data.manifest import load_manifest
from uidiff.data.mutations import ChangeKind, PairBuilder, apply_change
from uidiff.data.transforms import CutSpec, cut_and_shift, modal_color, recolor, ring_color
from uidiff.modeling.baselines import difference_mask
from uidiff.modeling.similarity import hash_difference, patch_hash
from uidiff.structures import BBox, BoundsError, ConfigError, PlacementFailed, Raster, SchemaError
from uidiff.utils.file_io import save_png

from conftest import checker_raster, make_dets, small_cfg


def _union_mask(width, height, boxes):
    mask = np.zeros((height, width), dtype=bool)
    for box in boxes:
        mask[box.y1 : box.y2, box.x1 : box.x2] = True
    return mask


def _assert_sound(pair):
    """Every changed pixel lies inside a ground-truth region."""
    w, h = pair.original.size
    covered = _union_mask(w, h, pair.gt_changes_original + pair.gt_changes_changed)
    assert not (difference_mask(pair.original, pair.changed) & ~covered).any()


@pytest.mark.parametrize("kind", list(ChangeKind))
def test_each_mutation_is_sound(layout, kind):
    img, dets = layout
    for seed in range(5):
        builder = PairBuilder(img, dets)
        try:
            apply_change(builder, kind, np.random.default_rng(seed))
        except PlacementFailed:
            continue
        pair = builder.build()
        _assert_sound(pair)
        assert pair.gt_changes_original or pair.gt_changes_changed
        for box in pair.gt_changes_original + pair.gt_changes_changed:
            assert box.fits_in(*img.size)


def test_generated_pairs_are_sound(cfg, layout):
    img, dets = layout
    for seed in pair_seeds(3, 20):
        pair = generate_pair(img, dets, seed, cfg)
        assert 1 <= len(pair.applied) <= cfg.DATAGEN.MAX_CHANGES
        assert pair.cut is None
        _assert_sound(pair)


def test_change_color_remaps_each_colour(layout):
    img, dets = layout
    builder = PairBuilder(img, dets)
    change = apply_change(builder, ChangeKind.CHANGE_COLOR, np.random.default_rng(0))
    box = BBox.from_list(change.params["bbox"])
    pair = builder.build()
    before = [tuple(c) for c in img.crop(box).reshape(-1, 3)]
    after = [tuple(c) for c in pair.changed.crop(box).reshape(-1, 3)]
    mapping = {}
    for old, new in zip(before, after):
        assert old != new
        assert mapping.setdefault(old, new) == new
    assert len(set(mapping.values())) == len(mapping)
    assert pair.changed_dets == dets
    assert pair.gt_changes_original == pair.gt_changes_changed == [box]


def test_recolor_does_not_force_a_hash_flip():
    board = checker_raster().pixels
    original = patch_hash(board)
    diffs = {hash_difference(original, patch_hash(recolor(board, np.random.default_rng(s)))) for s in range(20)}
    assert min(diffs) < 64
    assert np.array_equal(recolor(board, np.random.default_rng(3)), recolor(board, np.random.default_rng(3)))


def test_remove_fills_with_surroundings(layout):
    img, dets = layout
    builder = PairBuilder(img, dets)
    change = apply_change(builder, ChangeKind.REMOVE, np.random.default_rng(1))
    pair = builder.build()
    box = BBox.from_list(change.params["bbox"])
    assert change.params["id"] not in pair.changed_dets.ids
    assert len(np.unique(pair.changed.crop(box).reshape(-1, 3), axis=0)) == 1
    assert pair.gt_changes_changed == []


def test_failed_mutation_leaves_pair_untouched():
    img = Raster.blank(20, 20)
    dets = make_dets(20, 20, [(0, 0, 20, 20)])
    builder = PairBuilder(img, dets, retries=5)
    for kind in (ChangeKind.ADD_CONTROL, ChangeKind.SWAP_CONTROLS, ChangeKind.DUPLICATE):
        with pytest.raises(PlacementFailed):
            apply_change(builder, kind, np.random.default_rng(0))
    pair = builder.build()
    assert pair.changed == img and pair.changed_dets == dets
    assert pair.applied == [] and pair.gt_changes_original == [] and pair.gt_changes_changed == []


def test_mutations_do_not_reuse_controls(layout):
    img, dets = layout
    builder = PairBuilder(img, dets)
    rng = np.random.default_rng(4)
    touched = []
    for kind in (ChangeKind.CHANGE_COLOR, ChangeKind.CHANGE_LOCATION, ChangeKind.RESIZE_SMALLER):
        touched.append(apply_change(builder, kind, rng).params["id"])
    assert len(set(touched)) == 3


def test_builder_rejects_size_mismatch(blank):
    with pytest.raises(SchemaError):
        PairBuilder(blank, make_dets(100, 100, []))


def test_cut_crop_and_keep_canvas():
    pixels = np.full((50, 100, 3), 240, dtype=np.uint8)
    pixels[10:30, 10:30] = 20
    pixels[10:30, 80:95] = 90
    img = Raster(pixels)
    dets = make_dets(100, 50, [(10, 10, 30, 30), (80, 10, 95, 30)])
    gt = [BBox(80, 10, 95, 30)]

    cropped, cdets, cgt = cut_and_shift(img, dets, gt, CutSpec("left", 25, keep_canvas=False))
    assert cropped.size == (75, 50)
    # the first control loses 75% of its area
    assert [c.bbox for c in cdets] == [BBox(55, 10, 70, 30)]
    assert cgt == [BBox(55, 10, 70, 30)]
    assert np.array_equal(cropped.pixels, pixels[:, 25:])

    kept, kdets, kgt = cut_and_shift(img, dets, gt, CutSpec("left", 25))
    assert kept.size == (100, 50)
    # content re-centred: 12 px margin on the left, 13 on the right
    assert [c.bbox for c in kdets] == [BBox(67, 10, 82, 30)] == kgt
    assert np.array_equal(kept.pixels[:, 12:87], pixels[:, 25:])
    assert (kept.pixels[:, :12] == 240).all() and (kept.pixels[:, 87:] == 240).all()


def test_cut_keeps_half_clipped_controls():
    img = Raster.blank(100, 50)
    dets = make_dets(100, 50, [(10, 10, 30, 30)])
    _, cdets, _ = cut_and_shift(img, dets, [], CutSpec("left", 20, keep_canvas=False))
    assert [c.bbox for c in cdets] == [BBox(0, 10, 10, 30)]


def test_cut_spec_validation():
    with pytest.raises(BoundsError):
        CutSpec("top", 50).kept_region(100, 50)
    with pytest.raises(ConfigError):
        CutSpec("diagonal", 10)
    with pytest.raises(ConfigError):
        CutSpec("left", -1)
    assert CutSpec.from_dict(CutSpec("bottom", 30, False).to_dict()) == CutSpec("bottom", 30, False)


def test_fill_colours():
    pixels = np.zeros((10, 10, 3), dtype=np.uint8)
    pixels[:, :5] = 7
    assert modal_color(pixels) == (0, 0, 0)
    pixels[...] = 9
    pixels[4:6, 4:6] = 200
    assert ring_color(pixels, BBox(4, 4, 6, 6), width=2) == (9, 9, 9)


def test_dataset_is_deterministic(tmp_path):
    cfg = small_cfg()
    bases = synthetic_bases(2, 5, cfg)
    dirs = [str(tmp_path / name) for name in ("a", "b")]
    for out in dirs:
        generate_dataset(bases, 2, False, 11, out, cfg)
    match, mismatch, errors = filecmp.cmpfiles(
        dirs[0],
        dirs[1],
        ["manifest.json"]
        + [
            os.path.join("pairs", pid, name)
            for pid in ("0000_0", "0000_1", "0001_0", "0001_1")
            for name in ("original.png", "changed.png", "original.json", "changed.json", "gt.json")
        ],
        shallow=False,
    )
    assert not mismatch and not errors and len(match) == 21


def test_generated_manifest(mini_dataset):
    manifest = load_manifest(mini_dataset)
    assert len(manifest) == 12 and not manifest.cut
    for record in manifest.pairs:
        img_a, img_b = record.load_images()
        dets_a, dets_b = record.load_annotations()
        gt_a, gt_b = record.load_gt()
        assert img_a.size == img_b.size == dets_a.size == dets_b.size
        assert record.mutations and record.cut is None
        assert gt_a or gt_b


def test_cut_dataset_changes_size(mini_cut_dataset):
    manifest = load_manifest(mini_cut_dataset)
    assert manifest.cut
    for record in manifest.pairs:
        img_a, img_b = record.load_images()
        assert record.cut is not None and not record.cut.keep_canvas
        assert img_a.size != img_b.size
        dets_b = record.load_annotations()[1]
        assert dets_b.size == img_b.size
        for box in record.load_gt()[1]:
            assert box.fits_in(*img_b.size)


def test_load_bases(tmp_path, layout):
    img, dets = layout
    save_png(img.pixels, str(tmp_path / "home.png"))
    write_annotation_file(dets, str(tmp_path / "home.json"))
    ((loaded_img, loaded_dets),) = load_bases(str(tmp_path))
    assert loaded_img == img and loaded_dets == dets

    save_png(img.pixels[:100], str(tmp_path / "small.png"))
    write_annotation_file(dets, str(tmp_path / "small.json"))
    with pytest.raises(SchemaError):
        load_bases(str(tmp_path))


def test_swap_exchanges_positions():
    pixels = np.full((60, 120, 3), 240, dtype=np.uint8)
    pixels[10:30, 10:50] = 20
    pixels[35:55, 70:110] = 180
    img = Raster(pixels)
    a, b = BBox(10, 10, 50, 30), BBox(70, 35, 110, 55)
    builder = PairBuilder(img, make_dets(120, 60, [a.to_list(), b.to_list()]))
    change = apply_change(builder, ChangeKind.SWAP_CONTROLS, np.random.default_rng(0))
    pair = builder.build()
    assert sorted(change.params["ids"]) == [0, 1]
    assert pair.changed_dets.get(0).bbox == b
    assert pair.changed_dets.get(1).bbox == a
    assert np.array_equal(pair.changed.crop(b), img.crop(a))
    assert np.array_equal(pair.changed.crop(a), img.crop(b))
    assert sorted(pair.gt_changes_original) == sorted(pair.gt_changes_changed) == sorted([a, b])
    _assert_sound(pair)


def test_resize_smaller_keeps_top_left():
    pixels = np.full((60, 100, 3), 240, dtype=np.uint8)
    pixels[12:32, 16:56] = 30
    img = Raster(pixels)
    builder = PairBuilder(img, make_dets(100, 60, [(16, 12, 56, 32)]), resize_smaller=(0.5, 0.5))
    change = apply_change(builder, ChangeKind.RESIZE_SMALLER, np.random.default_rng(0))
    pair = builder.build()
    assert change.params["factor"] == 0.5
    assert pair.changed_dets.get(0).bbox == BBox(16, 12, 36, 22)
    assert pair.gt_changes_original == pair.gt_changes_changed == [BBox(16, 12, 56, 32)]


def test_cut_left_recentres_wide_screenshot():
    img = Raster.blank(1920, 200)
    dets = make_dets(1920, 200, [(200, 40, 260, 80)])
    kept, kdets, _ = cut_and_shift(img, dets, [], CutSpec("left", 100))
    assert kept.size == (1920, 200)
    # 1820 px survive, centred with a 50 px margin on each side
    assert [c.bbox for c in kdets] == [BBox(150, 40, 210, 80)]
