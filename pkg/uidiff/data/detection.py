import logging
import os
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from uidiff.structures import BBox, DetectionSet

from .annotations import read_annotation_file

__all__ = ["AnnotationFile", "GroundTruth", "DetectorSource", "DetectorNoise", "load_detections", "apply_noise"]

logger = logging.getLogger(__name__)

SIDES = ("original", "changed")


@dataclass(frozen=True)
class AnnotationFile:
    """Detections exported by an external detector to an annotation JSON file."""

    path: str


@dataclass(frozen=True)
class GroundTruth:
    """The annotations stored next to one side of a generated pair."""

    pair_dir: str
    side: str = "original"

    def __post_init__(self):
        if self.side not in SIDES:
            raise ValueError(f"side must be one of {SIDES}, got {self.side!r}")

    @property
    def path(self) -> str:
        return os.path.join(self.pair_dir, f"{self.side}.json")


DetectorSource = Union[AnnotationFile, GroundTruth]


@dataclass(frozen=True)
class DetectorNoise:
    """
    Simulated detector imperfection: each control is missed with probability
    ``drop_prob`` and every coordinate moves by up to ``jitter`` pixels.
    """

    drop_prob: float = 0.0
    jitter: int = 0

    @classmethod
    def from_config(cls, cfg) -> Optional["DetectorNoise"]:
        noise = cls(float(cfg.DETECTOR.NOISE.DROP_PROB), int(cfg.DETECTOR.NOISE.JITTER))
        return noise if noise.enabled else None

    @property
    def enabled(self) -> bool:
        return self.drop_prob > 0 or self.jitter > 0


def _jitter_box(box: BBox, jitter: int, width: int, height: int, rng: np.random.Generator) -> BBox:
    d = rng.integers(-jitter, jitter + 1, size=4)
    x1 = int(np.clip(box.x1 + d[0], 0, width - 1))
    y1 = int(np.clip(box.y1 + d[1], 0, height - 1))
    x2 = int(np.clip(box.x2 + d[2], x1 + 1, width))
    y2 = int(np.clip(box.y2 + d[3], y1 + 1, height))
    return BBox(x1, y1, x2, y2)


def apply_noise(dets: DetectionSet, noise: DetectorNoise, rng: np.random.Generator) -> DetectionSet:
    """
    Drop and jitter controls; the survivors are renumbered 0..N-1.
    """
    kept = []
    for control in dets.controls:
        if noise.drop_prob > 0 and rng.random() < noise.drop_prob:
            continue
        if noise.jitter > 0:
            control = control.replace(
                bbox=_jitter_box(control.bbox, noise.jitter, dets.image_width, dets.image_height, rng)
            )
        kept.append(control)
    return dets.with_controls(kept, renumber=True)


def load_detections(
    source: DetectorSource,
    noise: Optional[DetectorNoise] = None,
    rng: Optional[np.random.Generator] = None,
) -> DetectionSet:
    if not isinstance(source, (AnnotationFile, GroundTruth)):
        raise TypeError(f"unsupported detector source {type(source).__name__}")
    dets = read_annotation_file(source.path)
    if noise is not None and noise.enabled:
        if rng is None:
            rng = np.random.default_rng(0)
        before = len(dets)
        dets = apply_noise(dets, noise, rng)
        logger.debug("Detector noise kept {}/{} controls of {}".format(len(dets), before, source.path))
    return dets
