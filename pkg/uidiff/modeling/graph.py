from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Tuple

import numpy as np

from uidiff.structures import ConfigError, Control, DetectionSet
from uidiff.utils.box_ops import boxes_to_array, pairwise_sq_distance

__all__ = ["GraphParams", "UiGraph", "nearest_neighbors", "build_graph", "dump_graph"]


@dataclass(frozen=True)
class GraphParams:
    K: int = 8

    def __post_init__(self):
        if isinstance(self.K, bool) or not isinstance(self.K, (int, np.integer)) or self.K < 1:
            raise ConfigError(f"K must be an integer >= 1, got {self.K}")

    @classmethod
    def from_config(cls, cfg) -> "GraphParams":
        return cls(K=int(cfg.MODEL.GRAPH.K))


@dataclass(frozen=True)
class UiGraph:
    """
    Unweighted, undirected K-nearest-neighbour graph over the controls of one image.

    Attributes:
        nodes: the controls, in detection order.
        neighbor_lists: control id -> ids of its ``min(K, N-1)`` nearest controls,
            closest first.
        edges: ``{n, m}`` for every ``m`` in the neighbour list of ``n``, stored as
            sorted ``(low, high)`` tuples.
    """

    nodes: Tuple[Control, ...]
    neighbor_lists: Dict[int, Tuple[int, ...]]
    edges: FrozenSet[Tuple[int, int]]
    K: int

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def ids(self) -> List[int]:
        return [c.id for c in self.nodes]

    def neighbors(self, node_id: int) -> Tuple[int, ...]:
        return self.neighbor_lists[node_id]

    def has_edge(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.edges


def _ranked(order_keys: np.ndarray, ids: np.ndarray, exclude: int, k: int) -> Tuple[int, ...]:
    # primary key squared distance (same order as the distance), ties by id
    order = np.lexsort((ids, order_keys))
    ranked = [int(ids[i]) for i in order if int(ids[i]) != exclude]
    return tuple(ranked[:k])


def nearest_neighbors(target: Control, all: DetectionSet, K: int) -> List[int]:
    """
    Ids of the ``min(K, N-1)`` controls of ``all`` closest to ``target`` by box
    distance, closest first, ties broken by ascending id.
    """
    if K < 1:
        raise ConfigError(f"K must be >= 1, got {K}")
    if len(all) == 0:
        return []
    boxes = boxes_to_array(c.bbox for c in all.controls)
    ids = np.array(all.ids, dtype=np.int64)
    d2 = pairwise_sq_distance(boxes_to_array([target.bbox]), boxes)[0]
    return list(_ranked(d2, ids, target.id, K))


def build_graph(dets: DetectionSet, params: GraphParams) -> UiGraph:
    controls = tuple(dets.controls)
    if not controls:
        return UiGraph((), {}, frozenset(), params.K)
    boxes = boxes_to_array(c.bbox for c in controls)
    ids = np.array([c.id for c in controls], dtype=np.int64)
    d2 = pairwise_sq_distance(boxes, boxes)

    neighbor_lists = {}
    edges = set()
    for row, control in enumerate(controls):
        ranked = _ranked(d2[row], ids, control.id, params.K)
        neighbor_lists[control.id] = ranked
        for m in ranked:
            edges.add((min(control.id, m), max(control.id, m)))
    return UiGraph(controls, neighbor_lists, frozenset(edges), params.K)


def dump_graph(graph: UiGraph) -> dict:
    return {
        "K": graph.K,
        "nodes": graph.ids,
        "neighbors": {str(i): list(ng) for i, ng in graph.neighbor_lists.items()},
        "edges": [list(e) for e in sorted(graph.edges)],
    }
