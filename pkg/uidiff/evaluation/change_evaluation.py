"""
Precision, recall and F-score of change regions against ground-truth regions at
several IOU thresholds, micro-averaged over a dataset.
"""
import logging
from collections import OrderedDict
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from uidiff.change_detector import build_change_detector
from uidiff.config import METHODS
from uidiff.data.detection import DetectorNoise
from uidiff.data.manifest import Manifest, PairRecord, split_pairs
from uidiff.modeling.report import ChangeReport
from uidiff.structures import BBox, ConfigError
from uidiff.utils.box_ops import box_iou, boxes_to_array
from uidiff.utils.file_io import dump_json, write_csv
from uidiff.utils.logger import create_table

from .evaluator import DatasetEvaluator, inference_on_dataset

__all__ = [
    "ScoreTriple",
    "match_count",
    "score_pair",
    "ChangeEvaluator",
    "EvaluationResult",
    "select_split",
    "evaluate_dataset",
    "CSV_COLUMNS",
]

logger = logging.getLogger(__name__)

CSV_COLUMNS = ("pair_id", "method", "iou_threshold", "tp", "fp", "fn", "dimension_mismatch")
SIDES = ("auto", "pooled", "per_side")


@dataclass(frozen=True)
class ScoreTriple:
    """
    Counts at one IOU threshold and the scores derived from them.

    With no predictions precision is 1; with no ground truth recall is 1, so a pair
    without predictions and without ground truth scores perfectly.
    """

    iou_threshold: float
    tp: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def precision(self) -> float:
        if self.tp + self.fp == 0:
            return 1.0
        return self.tp / (self.tp + self.fp)

    @property
    def recall(self) -> float:
        if self.tp + self.fn == 0:
            return 1.0
        return self.tp / (self.tp + self.fn)

    @property
    def fscore(self) -> float:
        p, r = self.precision, self.recall
        if p + r == 0:
            return 0.0
        return 2 * p * r / (p + r)

    def __add__(self, other: "ScoreTriple") -> "ScoreTriple":
        assert self.iou_threshold == other.iou_threshold
        return ScoreTriple(self.iou_threshold, self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)

    def to_dict(self) -> dict:
        return {
            "iou_threshold": self.iou_threshold,
            "precision": self.precision,
            "recall": self.recall,
            "fscore": self.fscore,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
        }


def match_count(predicted: Sequence[BBox], gt: Sequence[BBox], iou_threshold: float) -> int:
    """
    Number of one-to-one prediction/gt pairs with IOU >= ``iou_threshold``, accepted
    greedily by descending IOU, ties by prediction index then gt index.
    """
    if len(predicted) == 0 or len(gt) == 0:
        return 0
    iou, _ = box_iou(boxes_to_array(predicted), boxes_to_array(gt))
    rows, cols = np.nonzero((iou >= iou_threshold) & (iou > 0))
    order = sorted(zip(rows.tolist(), cols.tolist()), key=lambda rc: (-iou[rc], rc[0], rc[1]))
    used_p, used_g = set(), set()
    for p, g in order:
        if p in used_p or g in used_g:
            continue
        used_p.add(p)
        used_g.add(g)
    return len(used_p)


def _unique(boxes: Sequence[BBox]) -> List[BBox]:
    return list(OrderedDict.fromkeys(boxes))


def score_pair(
    predicted: Tuple[Sequence[BBox], Sequence[BBox]],
    gt: Tuple[Sequence[BBox], Sequence[BBox]],
    iou_threshold: float,
    pooled: bool = False,
) -> ScoreTriple:
    """
    Score the (original, changed) predictions of one pair against its (original,
    changed) ground truth.

    Per side, predictions are matched against that image's ground truth and the
    counts are summed. Pooled, both sides' boxes are merged (exact duplicates
    collapsed) and matched once; only meaningful when both images share one
    coordinate frame.
    """
    if pooled:
        sides = [(_unique(list(predicted[0]) + list(predicted[1])), _unique(list(gt[0]) + list(gt[1])))]
    else:
        sides = [(predicted[0], gt[0]), (predicted[1], gt[1])]
    total = ScoreTriple(iou_threshold)
    for pred, truth in sides:
        tp = match_count(pred, truth, iou_threshold)
        total = total + ScoreTriple(iou_threshold, tp, len(pred) - tp, len(truth) - tp)
    return total


def _is_aligned(record: PairRecord, report: ChangeReport) -> bool:
    return record.cut is None and report.size_original == report.size_changed


class ChangeEvaluator(DatasetEvaluator):
    """
    Accumulates TP/FP/FN per IOU threshold over all pairs and keeps a per-pair
    breakdown.
    """

    def __init__(self, method: str, iou_thresholds=(0.25, 0.5, 0.75), sides: str = "auto"):
        if sides not in SIDES:
            raise ConfigError(f"sides must be one of {SIDES}, got {sides!r}")
        self._method = method
        self._thresholds = tuple(float(t) for t in iou_thresholds)
        self._sides = sides
        self.reset()

    def reset(self):
        self._totals = {t: ScoreTriple(t) for t in self._thresholds}
        self._rows = []
        self._mismatches = 0

    def process(self, record, report):
        gt = record.load_gt()
        if self._sides == "auto":
            pooled = _is_aligned(record, report)
        else:
            pooled = self._sides == "pooled"
        if report.dimension_mismatch:
            self._mismatches += 1
        predicted = (report.boxes_original, report.boxes_changed)
        for t in self._thresholds:
            triple = score_pair(predicted, gt, t, pooled=pooled)
            self._totals[t] = self._totals[t] + triple
            self._rows.append(
                (record.id, self._method, t, triple.tp, triple.fp, triple.fn, int(report.dimension_mismatch))
            )

    @property
    def rows(self) -> List[tuple]:
        return list(self._rows)

    def evaluate(self):
        if self._mismatches:
            logger.warning("{}: {} pairs could not be compared (image sizes differ)".format(self._method, self._mismatches))
        return {
            self._method: {
                "scores": [self._totals[t] for t in self._thresholds],
                "rows": list(self._rows),
                "dimension_mismatch": self._mismatches,
            }
        }


@dataclass
class EvaluationResult:
    """Per-method ScoreTriples (in threshold order) and the per-pair CSV rows."""

    scores: Dict[str, List[ScoreTriple]]
    rows: List[tuple]
    dimension_mismatch: Dict[str, int]
    split: str = "all"
    num_pairs: int = 0

    def to_dict(self) -> dict:
        return {
            "split": self.split,
            "num_pairs": self.num_pairs,
            "methods": {
                method: {
                    "scores": [s.to_dict() for s in triples],
                    "dimension_mismatch": self.dimension_mismatch[method],
                }
                for method, triples in self.scores.items()
            },
        }

    def table(self) -> str:
        """Rows = methods; columns = P/R/F at each threshold, strictest first."""
        if not self.scores:
            return ""
        thresholds = sorted((s.iou_threshold for s in next(iter(self.scores.values()))), reverse=True)
        headers = ["method"]
        for t in thresholds:
            headers += [f"P@{t:g}", f"R@{t:g}", f"F@{t:g}"]
        rows = []
        for method, triples in self.scores.items():
            by_t = {s.iou_threshold: s for s in triples}
            row = [method]
            for t in thresholds:
                row += [by_t[t].precision, by_t[t].recall, by_t[t].fscore]
            rows.append(row)
        return create_table(rows, headers)

    def save(self, path: str, csv_path: Optional[str] = None):
        dump_json(self.to_dict(), path)
        if csv_path:
            write_csv(csv_path, CSV_COLUMNS, self.rows)


def select_split(manifest: Manifest, split: str, tune_fraction: float = 0.7, seed: int = 0) -> Manifest:
    if split == "all":
        return manifest
    if split not in ("tune", "test"):
        raise ConfigError(f"split must be all, tune or test, got {split!r}")
    tune, test = split_pairs(manifest, tune_fraction, seed)
    return tune if split == "tune" else test


def evaluate_dataset(
    manifest: Manifest,
    method: str,
    cfg,
    split: Optional[str] = None,
    jobs: Optional[int] = None,
) -> EvaluationResult:
    """
    Run ``method`` (one of gvcd, pwc, rcd, or "all") on the pairs of ``split`` and
    score the reports against the stored ground truth.
    """
    methods = list(METHODS) if method == "all" else [method]
    for m in methods:
        if m not in METHODS:
            raise ConfigError(f"unknown method {m!r}; expected one of {METHODS} or 'all'")
    split = split or cfg.EVAL.SPLIT
    jobs = jobs or cfg.JOBS
    subset = select_split(manifest, split, cfg.EVAL.TUNE_FRACTION, cfg.SEED)
    noise = DetectorNoise.from_config(cfg)

    scores, rows, mismatches = OrderedDict(), [], OrderedDict()
    for m in methods:
        evaluator = ChangeEvaluator(m, cfg.EVAL.IOU_THRESHOLDS, cfg.EVAL.SIDES)
        detector = build_change_detector(cfg, m)
        results = inference_on_dataset(detector, subset.pairs, evaluator, noise=noise, seed=cfg.SEED, jobs=jobs)
        scores[m] = results[m]["scores"]
        rows.extend(results[m]["rows"])
        mismatches[m] = results[m]["dimension_mismatch"]

    result = EvaluationResult(scores, rows, mismatches, split=split, num_pairs=len(subset))
    logger.info("Evaluation results on {} pairs ({} split):\n".format(len(subset), split) + result.table())
    return result
