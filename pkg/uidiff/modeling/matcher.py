"""
Context similarity between controls of two UI graphs and the greedy one-to-one
assignment built on it.
"""
import logging
import sys
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Set, Tuple

import numpy as np

from uidiff.structures import ConfigError, Raster

from .graph import UiGraph
from .similarity import BaseSimilarityTable, SimilarityParams

__all__ = [
    "PairScore",
    "MatchResult",
    "MatcherParams",
    "Visited",
    "MatchingContext",
    "neighbor_similarity",
    "pair_scores",
    "greedy_assign",
    "assign_matches",
    "GraphMatcher",
]

logger = logging.getLogger(__name__)

REDUCTIONS = ("best", "mean")
# pair scores are compared and stored at the precision reports are written with
SCORE_DECIMALS = 6


@dataclass(frozen=True)
class PairScore:
    source: int
    target: int
    score: float


@dataclass(frozen=True)
class MatchResult:
    """
    One-to-one correspondence between the nodes of two graphs.

    ``matches`` maps source ids to target ids, ``scores`` holds one PairScore per
    match in acceptance order, and the unmatched sets are the complements of the
    matched ids.
    """

    matches: Dict[int, int]
    scores: Tuple[PairScore, ...]
    unmatched_source: FrozenSet[int]
    unmatched_target: FrozenSet[int]

    def to_dict(self) -> dict:
        return {
            "matches": [[s.source, s.target, s.score] for s in self.scores],
            "unmatched_source": sorted(self.unmatched_source),
            "unmatched_target": sorted(self.unmatched_target),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MatchResult":
        scores = tuple(PairScore(int(s), int(t), float(v)) for s, t, v in d.get("matches", []))
        return cls(
            matches={s.source: s.target for s in scores},
            scores=scores,
            unmatched_source=frozenset(int(i) for i in d.get("unmatched_source", [])),
            unmatched_target=frozenset(int(i) for i in d.get("unmatched_target", [])),
        )


@dataclass(frozen=True)
class MatcherParams:
    """
    self_weight: share of the pair's own base similarity in its ranking score.
    context_reduction: how a neighbour cross-product reduces to one score.
    """

    self_weight: float = 0.5
    context_reduction: str = "best"

    def __post_init__(self):
        if not 0.0 <= self.self_weight <= 1.0:
            raise ConfigError(f"self_weight must be in [0, 1], got {self.self_weight}")
        if self.context_reduction not in REDUCTIONS:
            raise ConfigError(f"context_reduction must be one of {REDUCTIONS}, got {self.context_reduction!r}")

    @classmethod
    def from_config(cls, cfg) -> "MatcherParams":
        return cls(
            self_weight=float(cfg.MODEL.SIMILARITY.SELF_WEIGHT),
            context_reduction=cfg.MODEL.MATCHER.CONTEXT_REDUCTION,
        )


@dataclass
class Visited:
    """Nodes already expanded during one top-level pair evaluation, per side."""

    source: Set[int] = field(default_factory=set)
    target: Set[int] = field(default_factory=set)


@dataclass
class MatchingContext:
    """
    Read-only inputs shared by every pair evaluation of one image pair.
    """

    img_a: Raster
    img_b: Raster
    params: SimilarityParams
    matcher: MatcherParams = MatcherParams()
    table: Optional[BaseSimilarityTable] = None

    def base(self, graph_a: UiGraph, graph_b: UiGraph) -> BaseSimilarityTable:
        if self.table is None:
            self.table = BaseSimilarityTable(self.img_a, graph_a.nodes, self.img_b, graph_b.nodes, self.params)
        return self.table


def _reduce(scores: np.ndarray, reduction: str) -> float:
    if reduction == "mean":
        return float(scores.mean())
    # symmetric best-counterpart mean; an identical neighbourhood scores exactly 1
    return float(0.5 * (scores.max(axis=1).mean() + scores.max(axis=0).mean()))


def neighbor_similarity(
    v: int,
    v_prime: int,
    graph_a: UiGraph,
    graph_b: UiGraph,
    visited: Visited,
    ctx: MatchingContext,
) -> float:
    """
    Context similarity of source node ``v`` and target node ``v_prime``.

    A node already expanded on its side, or a node without neighbours, yields the
    base similarity of the pair. Otherwise both nodes are marked visited and every
    neighbour pair is scored recursively, in neighbour-list order (pairs of
    different categories score 0), and the K x K scores are reduced to one value.
    """
    table = ctx.base(graph_a, graph_b)
    a, b = table.control_a(v), table.control_b(v_prime)
    if a.category is not b.category:
        return 0.0
    if v in visited.source or v_prime in visited.target:
        return table.get(v, v_prime)
    visited.source.add(v)
    visited.target.add(v_prime)

    ng_a, ng_b = graph_a.neighbors(v), graph_b.neighbors(v_prime)
    if not ng_a or not ng_b:
        return table.get(v, v_prime)

    scores = np.zeros((len(ng_a), len(ng_b)), dtype=np.float64)
    for p, ng_p in enumerate(ng_a):
        category = table.control_a(ng_p).category
        for q, ng_q in enumerate(ng_b):
            if table.control_b(ng_q).category is not category:
                continue
            scores[p, q] = neighbor_similarity(ng_p, ng_q, graph_a, graph_b, visited, ctx)
    return _reduce(scores, ctx.matcher.context_reduction)


def _ensure_recursion_limit(depth: int):
    needed = depth + 200
    if sys.getrecursionlimit() < needed:
        sys.setrecursionlimit(needed)


def pair_scores(graph_a: UiGraph, graph_b: UiGraph, ctx: MatchingContext) -> Dict[Tuple[int, int], float]:
    """
    Ranking score of every same-category node pair, each evaluated with a fresh
    visited record. The score blends the pair's base similarity ``s`` with its
    context similarity ``c`` as ``c + w * (s - c)``.
    """
    table = ctx.base(graph_a, graph_b)
    _ensure_recursion_limit(min(len(graph_a), len(graph_b)))
    w = ctx.matcher.self_weight
    out = {}
    for a in graph_a.nodes:
        for b in graph_b.nodes:
            if a.category is not b.category:
                continue
            context = neighbor_similarity(a.id, b.id, graph_a, graph_b, Visited(), ctx)
            base = table.get(a.id, b.id)
            out[(a.id, b.id)] = context + w * (base - context)
    return out


def greedy_assign(
    scores: Dict[Tuple[int, int], float],
    threshold: float,
    source_ids,
    target_ids,
) -> MatchResult:
    """
    Accept candidates with score above ``threshold`` by descending score (ties by
    source id, then target id) whenever both endpoints are still free. Scores are
    rounded to ``SCORE_DECIMALS`` before thresholding and sorting.
    """
    rounded = ((s, t, round(v, SCORE_DECIMALS)) for (s, t), v in scores.items())
    candidates = sorted(
        ((s, t, v) for s, t, v in rounded if v > threshold),
        key=lambda c: (-c[2], c[0], c[1]),
    )
    matches: Dict[int, int] = {}
    taken: Set[int] = set()
    accepted: List[PairScore] = []
    for s, t, v in candidates:
        if s in matches or t in taken:
            continue
        matches[s] = t
        taken.add(t)
        accepted.append(PairScore(s, t, v))
    return MatchResult(
        matches=matches,
        scores=tuple(accepted),
        unmatched_source=frozenset(source_ids) - frozenset(matches),
        unmatched_target=frozenset(target_ids) - frozenset(taken),
    )


def assign_matches(graph_a: UiGraph, graph_b: UiGraph, ctx: MatchingContext) -> MatchResult:
    scores = pair_scores(graph_a, graph_b, ctx)
    result = greedy_assign(scores, ctx.params.NS, graph_a.ids, graph_b.ids)
    logger.debug(
        "Matched {} of {}/{} nodes from {} candidates".format(len(result.matches), len(graph_a), len(graph_b), len(scores))
    )
    return result


class GraphMatcher:
    """
    Matches the nodes of two UI graphs.
    """

    def __init__(self, params: SimilarityParams, matcher: MatcherParams = MatcherParams()):
        """Creates the matcher

        Params:
            params: gates and acceptance threshold of the pair scores
            matcher: how base and context similarity combine
        """
        self.params = params
        self.matcher = matcher

    @classmethod
    def from_config(cls, cfg) -> "GraphMatcher":
        return cls(SimilarityParams.from_config(cfg), MatcherParams.from_config(cfg))

    def __call__(self, graph_a: UiGraph, img_a: Raster, graph_b: UiGraph, img_b: Raster) -> MatchResult:
        ctx = MatchingContext(img_a, img_b, self.params, self.matcher)
        return assign_matches(graph_a, graph_b, ctx)

    def __repr__(self, _repr_indent=4):
        head = "Matcher " + self.__class__.__name__
        body = [
            "H: {}".format(self.params.H),
            "TS: {}".format(self.params.TS),
            "NS: {}".format(self.params.NS),
            "self_weight: {}".format(self.matcher.self_weight),
            "context_reduction: {}".format(self.matcher.context_reduction),
        ]
        lines = [head] + [" " * _repr_indent + line for line in body]
        return "\n".join(lines)
