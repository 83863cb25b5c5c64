import numpy as np
import pytest

from uidiff.modeling.graph import GraphParams, build_graph, dump_graph, nearest_neighbors
from uidiff.structures import BBox, ConfigError, Control, DetectionSet

from conftest import make_dets


def _random_dets(rng, n, width=200, height=200):
    controls = []
    for i in range(n):
        # a coarse grid makes equal distances common
        x1, y1 = (int(v) * 10 for v in rng.integers(0, 15, size=2))
        w, h = (int(v) * 10 for v in rng.integers(1, 5, size=2))
        controls.append(Control(i, BBox(x1, y1, min(x1 + w, width), min(y1 + h, height)), "ICON"))
    return DetectionSet(width, height, tuple(controls))


def _brute_force(target, dets, k):
    def sq(a, b):
        return sum((p - q) ** 2 for p, q in zip(a.as_tuple(), b.as_tuple()))

    others = [c for c in dets if c.id != target.id]
    others.sort(key=lambda c: (sq(target.bbox, c.bbox), c.id))
    return [c.id for c in others[:k]]


def test_knn_matches_full_sort():
    rng = np.random.default_rng(0)
    for _ in range(100):
        dets = _random_dets(rng, int(rng.integers(1, 20)))
        k = int(rng.integers(1, 10))
        graph = build_graph(dets, GraphParams(K=k))
        for control in dets:
            expected = _brute_force(control, dets, k)
            assert nearest_neighbors(control, dets, k) == expected
            assert list(graph.neighbors(control.id)) == expected


def test_k_larger_than_set():
    dets = make_dets(100, 100, [(0, 0, 10, 10), (20, 0, 30, 10), (60, 60, 70, 70)])
    graph = build_graph(dets, GraphParams(K=8))
    assert graph.neighbors(0) == (1, 2)
    assert graph.neighbors(2) == (1, 0)
    assert len(graph.edges) == 3


def test_ties_break_by_id():
    # 1 and 2 are equally far from 0
    dets = make_dets(100, 100, [(40, 40, 50, 50), (40, 20, 50, 30), (40, 60, 50, 70)])
    assert nearest_neighbors(dets.get(0), dets, 1) == [1]


def test_edges_are_symmetric_union():
    dets = make_dets(100, 100, [(0, 0, 10, 10), (12, 0, 22, 10), (90, 90, 100, 100)])
    graph = build_graph(dets, GraphParams(K=1))
    # 2 points at 1, but 1 points at 0
    assert graph.neighbors(2) == (1,)
    assert graph.has_edge(1, 2) and graph.has_edge(2, 1)
    assert graph.edges == frozenset({(0, 1), (1, 2)})


def test_single_control_and_empty_set():
    single = make_dets(50, 50, [(0, 0, 10, 10)])
    graph = build_graph(single, GraphParams(K=3))
    assert graph.neighbors(0) == () and not graph.edges
    empty = build_graph(DetectionSet(50, 50, ()), GraphParams(K=3))
    assert len(empty) == 0


@pytest.mark.parametrize("k", [0, -1, 2.5, True])
def test_invalid_k(k):
    with pytest.raises(ConfigError):
        GraphParams(K=k)


def test_nearest_neighbors_rejects_zero_k():
    dets = make_dets(50, 50, [(0, 0, 10, 10)])
    with pytest.raises(ConfigError):
        nearest_neighbors(dets.get(0), dets, 0)


def test_dump_graph(layout):
    _, dets = layout
    graph = build_graph(dets, GraphParams(K=3))
    dumped = dump_graph(graph)
    assert dumped["nodes"] == dets.ids
    assert all(len(v) == min(3, len(dets) - 1) for v in dumped["neighbors"].values())
    assert dumped["edges"] == sorted(dumped["edges"])
