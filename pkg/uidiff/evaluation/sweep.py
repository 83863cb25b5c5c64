"""
One-parameter-at-a-time hyperparameter sweep of the graph-based detector on the
tuning split, the other parameters held at fixed values.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from uidiff.config import validate_cfg
from uidiff.data.manifest import Manifest
from uidiff.structures import ConfigError
from uidiff.utils.file_io import write_csv
from uidiff.utils.logger import create_table

from .change_evaluation import ScoreTriple, evaluate_dataset

__all__ = ["SWEEP_KEYS", "SweepTable", "parse_values", "parse_fixed", "sweep"]

logger = logging.getLogger(__name__)

# sweepable parameter -> (config key, type)
SWEEP_KEYS = {
    "k": ("MODEL.GRAPH.K", int),
    "h": ("MODEL.SIMILARITY.H", int),
    "ts": ("MODEL.SIMILARITY.TS", float),
    "ns": ("MODEL.SIMILARITY.NS", float),
}


def _key(param: str) -> Tuple[str, type]:
    try:
        return SWEEP_KEYS[param.lower()]
    except KeyError:
        raise ConfigError(f"cannot sweep {param!r}; expected one of {sorted(SWEEP_KEYS)}") from None


def parse_values(text: str, param: str) -> List:
    """
    ``"1..10"`` (inclusive integer range) or a comma separated list such as
    ``"0.6,0.7,0.8"``.
    """
    _, kind = _key(param)
    text = text.strip()
    try:
        if ".." in text and "," not in text:
            lo, hi = text.split("..")
            values = list(range(int(lo), int(hi) + 1))
        else:
            values = [kind(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"invalid values {text!r} for {param}") from None
    if not values:
        raise ConfigError("the sweep grid is empty")
    return [kind(v) for v in values]


def parse_fixed(text: Optional[str]) -> Dict[str, float]:
    """``"h=10,ts=0.7,ns=0.8"`` -> {"h": 10, "ts": 0.7, "ns": 0.8}"""
    fixed = {}
    if not text:
        return fixed
    for item in text.split(","):
        if not item.strip():
            continue
        if "=" not in item:
            raise ConfigError(f"expected name=value, got {item!r}")
        name, value = (s.strip() for s in item.split("=", 1))
        _, kind = _key(name)
        try:
            fixed[name.lower()] = kind(value)
        except ValueError:
            raise ConfigError(f"invalid value {value!r} for {name}") from None
    return fixed


@dataclass
class SweepTable:
    param: str
    rows: List[Tuple[object, List[ScoreTriple]]]

    @property
    def best(self) -> Tuple[object, List[ScoreTriple]]:
        """The row with the highest F-score at IOU 0.5; the first such row on ties."""

        def f_at_half(row):
            return next((s.fscore for s in row[1] if s.iou_threshold == 0.5), row[1][0].fscore)

        best = self.rows[0]
        for row in self.rows[1:]:
            if f_at_half(row) > f_at_half(best):
                best = row
        return best

    def headers(self) -> List[str]:
        headers = [self.param]
        for s in sorted(self.rows[0][1], key=lambda s: -s.iou_threshold):
            t = s.iou_threshold
            headers += [f"P@{t:g}", f"R@{t:g}", f"F@{t:g}"]
        return headers

    def table_rows(self) -> List[list]:
        out = []
        for value, triples in self.rows:
            row = [value]
            for s in sorted(triples, key=lambda s: -s.iou_threshold):
                row += [s.precision, s.recall, s.fscore]
            out.append(row)
        return out

    def table(self) -> str:
        return create_table(self.table_rows(), self.headers())

    def save(self, path: str):
        best_value = self.best[0]
        rows = [row + [int(row[0] == best_value)] for row in self.table_rows()]
        write_csv(path, self.headers() + ["best"], rows)


def sweep(
    manifest: Manifest,
    param: str,
    values: Sequence,
    cfg,
    fixed: Optional[Dict[str, float]] = None,
    jobs: Optional[int] = None,
) -> SweepTable:
    """
    Evaluate the graph-based detector on the tuning split once per value of
    ``param``, every other parameter at its ``fixed`` value or its configured one.
    """
    key, kind = _key(param)
    if not values:
        raise ConfigError("the sweep grid is empty")
    base = cfg.clone()
    base.defrost()
    for name, value in (fixed or {}).items():
        base.merge_from_list([_key(name)[0], value])

    rows = []
    for value in values:
        point = base.clone()
        point.merge_from_list([key, kind(value)])
        validate_cfg(point)
        logger.info("Sweep {} = {}".format(param, value))
        result = evaluate_dataset(manifest, "gvcd", point, split="tune", jobs=jobs)
        rows.append((kind(value), result.scores["gvcd"]))

    table = SweepTable(param.lower(), rows)
    logger.info("Sweep over {}:\n{}".format(param, table.table()))
    logger.info("Best {} by F@0.5: {}".format(param, table.best[0]))
    return table
