import json

import numpy as np
import pytest

from uidiff.modeling.graph import GraphParams, build_graph
from uidiff.modeling.matcher import (
    GraphMatcher,
    MatcherParams,
    MatchingContext,
    MatchResult,
    PairScore,
    Visited,
    greedy_assign,
    neighbor_similarity,
    pair_scores,
)
from uidiff.modeling.similarity import SimilarityParams, base_similarity
from uidiff.structures import BBox, ConfigError, Control, DetectionSet, Raster, euclidean_distance


def _reference_greedy(scores, threshold):
    """Repeatedly take the best remaining candidate between free nodes."""
    free = {k: round(v, 6) for k, v in scores.items() if round(v, 6) > threshold}
    matches = {}
    while free:
        s, t = min(free, key=lambda st: (-free[st], st[0], st[1]))
        matches[s] = t
        free = {(a, b): v for (a, b), v in free.items() if a != s and b != t}
    return matches


def test_greedy_matches_reference():
    rng = np.random.default_rng(0)
    for _ in range(200):
        n, m = int(rng.integers(0, 7)), int(rng.integers(0, 7))
        # few distinct values so ties are frequent
        levels = rng.choice([0.5, 0.8, 0.85, 0.9, 1.0], size=(n, m))
        scores = {(i, j): float(levels[i, j]) for i in range(n) for j in range(m) if rng.random() < 0.8}
        result = greedy_assign(scores, 0.8, range(n), range(m))
        assert result.matches == _reference_greedy(scores, 0.8)
        assert all(s.score > 0.8 for s in result.scores)
        assert len(set(result.matches.values())) == len(result.matches)
        assert result.unmatched_source == frozenset(range(n)) - set(result.matches)
        assert result.unmatched_target == frozenset(range(m)) - set(result.matches.values())


def test_greedy_threshold_is_strict():
    result = greedy_assign({(0, 0): 0.8, (1, 1): 0.80001}, 0.8, [0, 1], [0, 1])
    assert result.matches == {1: 1}


def test_match_result_round_trip():
    result = greedy_assign({(0, 1): 0.912345678, (1, 0): 0.9}, 0.8, [0, 1, 2], [0, 1])
    assert result.scores[0].score == 0.912346
    assert MatchResult.from_dict(result.to_dict()) == result


def test_self_pair_matches_identity(layout, cfg):
    img, dets = layout
    graph = build_graph(dets, GraphParams(K=4))
    result = GraphMatcher.from_config(cfg)(graph, img, graph, img)
    assert result.matches == {i: i for i in dets.ids}
    assert all(s.score == 1.0 for s in result.scores)
    assert not result.unmatched_source and not result.unmatched_target


@pytest.mark.parametrize("reduction", ["best", "mean"])
def test_scores_are_bounded_and_category_preserving(layout, reduction):
    img, dets = layout
    graph = build_graph(dets, GraphParams(K=3))
    ctx = MatchingContext(img, img, SimilarityParams(), MatcherParams(context_reduction=reduction))
    scores = pair_scores(graph, graph, ctx)
    categories = {c.id: c.category for c in dets}
    for (s, t), v in scores.items():
        assert categories[s] is categories[t]
        assert 0.0 <= v <= 1.0
    result = greedy_assign(scores, 0.8, graph.ids, graph.ids)
    for s, t in result.matches.items():
        assert categories[s] is categories[t]


def test_visited_node_falls_back_to_base(layout):
    img, dets = layout
    graph = build_graph(dets, GraphParams(K=3))
    ctx = MatchingContext(img, img, SimilarityParams())
    table = ctx.base(graph, graph)
    for control in dets:
        v = control.id
        assert neighbor_similarity(v, v, graph, graph, Visited(source={v}), ctx) == table.get(v, v)
        assert neighbor_similarity(v, v, graph, graph, Visited(target={v}), ctx) == table.get(v, v)


def test_self_weight_zero_ranks_on_context(layout):
    img, dets = layout
    graph = build_graph(dets, GraphParams(K=3))
    ctx = MatchingContext(img, img, SimilarityParams(), MatcherParams(self_weight=0.0))
    scores = pair_scores(graph, graph, ctx)
    for (s, t), v in scores.items():
        assert v == neighbor_similarity(s, t, graph, graph, Visited(), ctx)


@pytest.mark.parametrize("kwargs", [{"self_weight": 1.5}, {"context_reduction": "max"}])
def test_invalid_matcher_params(kwargs):
    with pytest.raises(ConfigError):
        MatcherParams(**kwargs)


def _random_instance(rng):
    """Two small screenshots of blocky controls where some controls repeat."""
    categories = ["BUTTON", "ICON", "TEXT"]
    sides = []
    palette = rng.integers(0, 256, size=(4, 8, 8, 3), dtype=np.uint8)
    for _ in range(2):
        pixels = np.full((64, 96, 3), 240, dtype=np.uint8)
        controls = []
        for i in range(int(rng.integers(0, 7))):
            x, y = 16 * (i % 6), 32 * (i // 6) + int(rng.integers(0, 16))
            pixels[y : y + 8, x : x + 8] = palette[int(rng.integers(4))]
            category = categories[int(rng.integers(3))]
            text = str(rng.choice(["Save", "Saved", "Open"])) if category == "TEXT" else None
            controls.append(Control(i, BBox(x, y, x + 8, y + 8), category, text))
        sides.append((Raster(pixels), DetectionSet(96, 64, tuple(controls))))
    return sides


def _reference_pair_scores(dets_a, img_a, dets_b, img_b, k, params, self_weight=0.5):
    """Context similarity written out recursively on plain lists, blended with the root pair."""
    ctrl_a, ctrl_b = dets_a.by_id(), dets_b.by_id()

    def knn(ctrl):
        return {
            i: sorted((j for j in ctrl if j != i), key=lambda j: (euclidean_distance(ctrl[i].bbox, ctrl[j].bbox), j))[:k]
            for i in ctrl
        }

    ng_a, ng_b = knn(ctrl_a), knn(ctrl_b)

    def base(i, j):
        return base_similarity(ctrl_a[i], ctrl_b[j], img_a, img_b, params)

    def context(v, w, seen_a, seen_b):
        if ctrl_a[v].category != ctrl_b[w].category:
            return 0.0
        if v in seen_a or w in seen_b:
            return base(v, w)
        seen_a.add(v)
        seen_b.add(w)
        if not ng_a[v] or not ng_b[w]:
            return base(v, w)
        rows = [
            [context(p, q, seen_a, seen_b) if ctrl_a[p].category == ctrl_b[q].category else 0.0 for q in ng_b[w]]
            for p in ng_a[v]
        ]
        row_best = sum(max(row) for row in rows) / len(rows)
        col_best = sum(max(row[j] for row in rows) for j in range(len(rows[0]))) / len(rows[0])
        return 0.5 * (row_best + col_best)

    scores = {}
    for i in ctrl_a:
        for j in ctrl_b:
            if ctrl_a[i].category == ctrl_b[j].category:
                c = context(i, j, set(), set())
                scores[(i, j)] = c + self_weight * (base(i, j) - c)
    return scores


def test_pair_scores_match_recursive_reference():
    rng = np.random.default_rng(1)
    params = SimilarityParams()
    for _ in range(200):
        (img_a, dets_a), (img_b, dets_b) = _random_instance(rng)
        k = int(rng.integers(1, 4))
        graph_a, graph_b = build_graph(dets_a, GraphParams(K=k)), build_graph(dets_b, GraphParams(K=k))
        expected = _reference_pair_scores(dets_a, img_a, dets_b, img_b, k, params)
        assert pair_scores(graph_a, graph_b, MatchingContext(img_a, img_b, params)) == pytest.approx(expected)
        result = GraphMatcher(params)(graph_a, img_a, graph_b, img_b)
        assert result.matches == _reference_greedy(expected, params.NS)


def test_single_node_graphs_score_one(layout):
    img, dets = layout
    first = dets.controls[0]
    single = dets.with_controls([first])
    graph = build_graph(single, GraphParams(K=2))
    ctx = MatchingContext(img, img, SimilarityParams())
    assert neighbor_similarity(first.id, first.id, graph, graph, Visited(), ctx) == 1.0
    assert pair_scores(graph, graph, ctx) == {(first.id, first.id): 1.0}


def _three_controls():
    pixels = np.full((40, 120, 3), 235, dtype=np.uint8)
    pixels[10:30, 10:30] = (200, 30, 30)
    pixels[10:20, 50:70] = (30, 30, 200)
    pixels[20:30, 50:70] = (250, 250, 250)
    pixels[10:30, 90:110:2] = 20
    boxes = [(10, 10, 30, 30), (50, 10, 70, 30), (90, 10, 110, 30)]
    return Raster(pixels), DetectionSet(120, 40, tuple(Control(i, BBox(*b), "BUTTON") for i, b in enumerate(boxes)))


def test_identical_three_node_graphs_score_one():
    img, dets = _three_controls()
    graph = build_graph(dets, GraphParams(K=2))
    ctx = MatchingContext(img, img, SimilarityParams())
    for v in dets.ids:
        assert neighbor_similarity(v, v, graph, graph, Visited(), ctx) == 1.0
    assert GraphMatcher(SimilarityParams())(graph, img, graph, img).matches == {0: 0, 1: 1, 2: 2}


def test_scores_are_rounded_before_threshold():
    result = greedy_assign({(0, 0): 0.8000000001, (1, 1): 0.8000006}, 0.8, [0, 1], [0, 1])
    assert result.matches == {1: 1}
    assert result.scores == (PairScore(1, 1, 0.800001),)
    restored = MatchResult.from_dict(json.loads(json.dumps(result.to_dict())))
    assert all(s.score > 0.8 for s in restored.scores)


def test_scores_are_rounded_before_sorting():
    # equal at the stored precision, so the lower target id wins
    result = greedy_assign({(0, 0): 0.9000001, (0, 1): 0.9000002}, 0.8, [0], [0, 1])
    assert result.matches == {0: 0}


@pytest.mark.parametrize("ns", [0.0, 0.5, 0.99])
def test_self_pair_at_any_threshold(layout, ns):
    img, dets = layout
    graph = build_graph(dets, GraphParams(K=8))
    result = GraphMatcher(SimilarityParams(NS=ns))(graph, img, graph, img)
    assert result.matches == {i: i for i in dets.ids}
