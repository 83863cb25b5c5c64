"""
This file contains the logic to build a synthetic change-detection dataset from
base screenshots: mutate, optionally cut, and write images, annotations, ground
truth and the manifest.
"""
import glob
import logging
import multiprocessing as mp
import os
import posixpath
from typing import List, Optional, Sequence, Tuple

import numpy as np
import tqdm

from uidiff.structures import DetectionSet, PlacementFailed, Raster, SchemaError, UiDiffError
from uidiff.utils.file_io import PathManager, dump_json, read_image, save_png
from uidiff.utils.logger import create_small_table

from .annotations import read_annotation_file, write_annotation_file
from .manifest import Manifest, PairRecord, dump_gt, write_manifest
from .mutations import ChangeKind, GeneratedPair, PairBuilder
from .sprites import synthesize_layout
from .transforms import CutSpec, cut_and_shift

__all__ = [
    "generate_pair",
    "generate_dataset",
    "synthetic_bases",
    "load_bases",
    "pair_seeds",
    "write_pair",
]

logger = logging.getLogger(__name__)

KINDS = list(ChangeKind)
# redraws allowed per requested mutation before giving up on the pair
_ATTEMPTS_PER_CHANGE = 25


def pair_seeds(seed: int, n: int, stream: int = 0) -> List[int]:
    """``n`` independent 64-bit sub-seeds derived from ``seed``."""
    children = np.random.SeedSequence([int(seed), int(stream)]).spawn(n)
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in children]


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def synthetic_bases(n: int, seed: int, cfg) -> List[Tuple[Raster, DetectionSet]]:
    s = cfg.DATAGEN.SYNTHETIC
    return [
        synthesize_layout(_rng(base_seed), s.WIDTH, s.HEIGHT, s.MIN_CONTROLS, s.MAX_CONTROLS, s.GAP)
        for base_seed in pair_seeds(seed, n, stream=1)
    ]


def load_bases(directory: str) -> List[Tuple[Raster, DetectionSet]]:
    """
    Read every ``*.png`` in ``directory`` with its same-stem ``.json`` annotations,
    in file name order.
    """
    images = sorted(glob.glob(os.path.join(directory, "*.png")))
    if not images:
        raise FileNotFoundError(f"no .png base images in {directory}")
    bases = []
    for path in images:
        annots = os.path.splitext(path)[0] + ".json"
        if not PathManager.exists(annots):
            raise FileNotFoundError(f"missing annotations {annots} for {path}")
        img, dets = Raster(read_image(path)), read_annotation_file(annots)
        if img.size != dets.size:
            raise SchemaError(f"{annots} declares {dets.size} but {path} is {img.size}")
        bases.append((img, dets))
    return bases


def generate_pair(original: Raster, dets: DetectionSet, seed: int, cfg) -> GeneratedPair:
    """
    Apply 1..MAX_CHANGES mutations of uniformly drawn kinds, redrawing the kind when
    a mutation finds no placement, then cut the changed side when cutting is enabled.
    """
    rng = _rng(seed)
    builder = PairBuilder.from_config(original, dets, cfg)
    wanted = int(rng.integers(1, cfg.DATAGEN.MAX_CHANGES + 1))
    attempts = 0
    while len(builder.applied) < wanted and attempts < wanted * _ATTEMPTS_PER_CHANGE:
        attempts += 1
        kind = KINDS[int(rng.integers(len(KINDS)))]
        try:
            builder.apply(kind, rng)
        except PlacementFailed as e:
            logger.debug("Skipped {}: {}".format(kind.value, e))
    if not builder.applied:
        raise PlacementFailed(f"no mutation could be applied to the base image (seed {seed})")
    if len(builder.applied) < wanted:
        logger.info("Applied {} of {} requested mutations (seed {})".format(len(builder.applied), wanted, seed))
    pair = builder.build(seed)

    cut_cfg = cfg.DATAGEN.CUT
    if cut_cfg.ENABLED:
        side = cut_cfg.SIDES[int(rng.integers(len(cut_cfg.SIDES)))]
        limit = pair.changed.width if side in ("left", "right") else pair.changed.height
        amounts = [a for a in cut_cfg.AMOUNTS if a < limit]
        if not amounts:
            raise UiDiffError(f"every cut amount is too large for a {pair.changed.size} image")
        spec = CutSpec(side, int(amounts[int(rng.integers(len(amounts)))]), bool(cut_cfg.KEEP_CANVAS))
        changed, changed_dets, gt_changed = cut_and_shift(
            pair.changed, pair.changed_dets, pair.gt_changes_changed, spec, cut_cfg.MAX_CLIPPED
        )
        pair.changed, pair.changed_dets, pair.gt_changes_changed, pair.cut = changed, changed_dets, gt_changed, spec
    return pair


def write_pair(pair: GeneratedPair, pair_id: str, out_dir: str) -> PairRecord:
    rel = posixpath.join("pairs", pair_id)
    files = {
        "original_image": posixpath.join(rel, "original.png"),
        "changed_image": posixpath.join(rel, "changed.png"),
        "original_annotations": posixpath.join(rel, "original.json"),
        "changed_annotations": posixpath.join(rel, "changed.json"),
        "gt": posixpath.join(rel, "gt.json"),
    }
    full = {k: os.path.join(out_dir, *v.split("/")) for k, v in files.items()}
    save_png(pair.original.pixels, full["original_image"])
    save_png(pair.changed.pixels, full["changed_image"])
    write_annotation_file(pair.original_dets, full["original_annotations"])
    write_annotation_file(pair.changed_dets, full["changed_annotations"])
    dump_json(dump_gt(pair.gt_changes_original, pair.gt_changes_changed), full["gt"])
    return PairRecord(
        id=pair_id,
        root=out_dir,
        seed=pair.seed,
        mutations=tuple(pair.applied),
        cut=pair.cut,
        **files,
    )


def _generate_and_write(task) -> PairRecord:
    original, dets, seed, pair_id, out_dir, cfg = task
    return write_pair(generate_pair(original, dets, seed, cfg), pair_id, out_dir)


def generate_dataset(
    bases: Sequence[Tuple[Raster, DetectionSet]],
    variants_per_image: int,
    cut: Optional[bool],
    seed: int,
    out_dir: str,
    cfg,
    jobs: int = 1,
) -> Manifest:
    """
    Generate ``variants_per_image`` pairs per base image under ``out_dir`` and write
    ``out_dir/manifest.json``.

    Pair ``{base:04d}_{variant}`` draws from its own sub-seed, so the output does not
    depend on ``jobs``. ``cut=None`` keeps ``cfg.DATAGEN.CUT.ENABLED``.

    Returns:
        Manifest: the written manifest.
    """
    cfg = cfg.clone()
    cfg.defrost()
    if cut is not None:
        cfg.DATAGEN.CUT.ENABLED = bool(cut)
    cut = bool(cfg.DATAGEN.CUT.ENABLED)
    cfg.freeze()

    PathManager.mkdirs(out_dir)
    total = len(bases) * variants_per_image
    seeds = pair_seeds(seed, total)
    tasks = []
    for b, (img, dets) in enumerate(bases):
        for v in range(variants_per_image):
            k = b * variants_per_image + v
            tasks.append((img, dets, seeds[k], f"{b:04d}_{v}", out_dir, cfg))

    logger.info("Generating {} pairs from {} base images (cut={})".format(total, len(bases), cut))
    if jobs > 1 and total > 1:
        with mp.Pool(jobs) as pool:
            records = list(tqdm.tqdm(pool.imap(_generate_and_write, tasks), total=total, desc="generate"))
    else:
        records = [_generate_and_write(t) for t in tqdm.tqdm(tasks, desc="generate")]

    manifest = Manifest(root=out_dir, seed=int(seed), cut=bool(cut), pairs=records)
    write_manifest(manifest, os.path.join(out_dir, "manifest.json"))
    counts = {}
    for record in records:
        for m in record.mutations:
            counts[m.kind.value] = counts.get(m.kind.value, 0) + 1
    if counts:
        logger.info("Mutation counts:\n" + create_small_table(dict(sorted(counts.items()))))
    return manifest
