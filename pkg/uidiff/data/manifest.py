"""
The dataset manifest: one JSON document listing every generated pair with paths
relative to the manifest's directory.

.. code-block:: json

    {"version": 1, "seed": 0, "cut": false,
     "pairs": [{"id": "0000_0", "seed": 123, "cut": null,
                "original_image": "pairs/0000_0/original.png", ...,
                "mutations": [{"kind": "REMOVE", "params": {...}}]}]}
"""
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from uidiff.structures import BBox, DetectionSet, Raster, SchemaError
from uidiff.utils.file_io import dump_json, load_json, read_image

from .annotations import read_annotation_file
from .detection import GroundTruth
from .mutations import AppliedChange
from .transforms import CutSpec

__all__ = ["PairRecord", "Manifest", "load_manifest", "write_manifest", "split_pairs", "read_gt", "dump_gt"]

MANIFEST_VERSION = 1
_PATH_KEYS = ("original_image", "changed_image", "original_annotations", "changed_annotations", "gt")


@dataclass(frozen=True)
class PairRecord:
    id: str
    root: str
    original_image: str
    changed_image: str
    original_annotations: str
    changed_annotations: str
    gt: str
    seed: int = 0
    mutations: Tuple[AppliedChange, ...] = ()
    cut: Optional[CutSpec] = None

    def path(self, key: str) -> str:
        return os.path.join(self.root, getattr(self, key))

    @property
    def pair_dir(self) -> str:
        return os.path.dirname(self.path("original_annotations"))

    def detector_source(self, side: str) -> GroundTruth:
        return GroundTruth(self.pair_dir, side)

    def load_images(self) -> Tuple[Raster, Raster]:
        return Raster(read_image(self.path("original_image"))), Raster(read_image(self.path("changed_image")))

    def load_annotations(self) -> Tuple[DetectionSet, DetectionSet]:
        return (
            read_annotation_file(self.path("original_annotations")),
            read_annotation_file(self.path("changed_annotations")),
        )

    def load_gt(self) -> Tuple[List[BBox], List[BBox]]:
        return read_gt(self.path("gt"))

    def to_dict(self) -> dict:
        d = {key: getattr(self, key) for key in _PATH_KEYS}
        d.update(
            id=self.id,
            seed=self.seed,
            mutations=[m.to_dict() for m in self.mutations],
            cut=self.cut.to_dict() if self.cut is not None else None,
        )
        return d

    @classmethod
    def from_dict(cls, d: dict, root: str) -> "PairRecord":
        try:
            return cls(
                id=str(d["id"]),
                root=root,
                seed=int(d.get("seed", 0)),
                mutations=tuple(AppliedChange.from_dict(m) for m in d.get("mutations", [])),
                cut=CutSpec.from_dict(d["cut"]) if d.get("cut") else None,
                **{key: d[key] for key in _PATH_KEYS},
            )
        except (KeyError, TypeError, ValueError) as e:
            raise SchemaError(f"invalid manifest entry {d.get('id', '?')!r}: {e}") from None


@dataclass
class Manifest:
    root: str
    seed: int = 0
    cut: bool = False
    pairs: List[PairRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.pairs)

    def to_dict(self) -> dict:
        return {
            "version": MANIFEST_VERSION,
            "seed": self.seed,
            "cut": self.cut,
            "pairs": [p.to_dict() for p in self.pairs],
        }

    def subset(self, pairs: Sequence[PairRecord]) -> "Manifest":
        return Manifest(self.root, self.seed, self.cut, list(pairs))


def load_manifest(path: str) -> Manifest:
    document = load_json(path)
    if not isinstance(document, dict) or not isinstance(document.get("pairs"), list):
        raise SchemaError(f"{path}: not a dataset manifest")
    if document.get("version", MANIFEST_VERSION) != MANIFEST_VERSION:
        raise SchemaError(f"{path}: unsupported manifest version {document.get('version')}")
    root = os.path.dirname(os.path.abspath(path))
    pairs = [PairRecord.from_dict(d, root) for d in document["pairs"]]
    ids = [p.id for p in pairs]
    if len(set(ids)) != len(ids):
        raise SchemaError(f"{path}: duplicate pair ids")
    return Manifest(root=root, seed=int(document.get("seed", 0)), cut=bool(document.get("cut", False)), pairs=pairs)


def write_manifest(manifest: Manifest, path: str) -> None:
    dump_json(manifest.to_dict(), path)


def split_pairs(manifest: Manifest, tune_fraction: float = 0.7, seed: int = 0) -> Tuple[Manifest, Manifest]:
    """
    Deterministic tune/test partition. Both parts keep manifest order.
    """
    n = len(manifest.pairs)
    order = np.random.default_rng(seed).permutation(n)
    n_tune = int(round(tune_fraction * n))
    tune_idx = set(int(i) for i in order[:n_tune])
    tune = [p for i, p in enumerate(manifest.pairs) if i in tune_idx]
    test = [p for i, p in enumerate(manifest.pairs) if i not in tune_idx]
    return manifest.subset(tune), manifest.subset(test)


def dump_gt(gt_original: Sequence[BBox], gt_changed: Sequence[BBox]) -> Dict[str, list]:
    return {"original": [b.to_list() for b in gt_original], "changed": [b.to_list() for b in gt_changed]}


def read_gt(path: str) -> Tuple[List[BBox], List[BBox]]:
    document = load_json(path)
    try:
        return (
            [BBox.from_list(b) for b in document["original"]],
            [BBox.from_list(b) for b in document["changed"]],
        )
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaError(f"{path}: invalid ground truth ({e})") from None
