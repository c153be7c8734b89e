import json

import numpy as np
import pytest

from conftest import make_graph
from oracles import floyd_warshall, random_small_graph
from sniffplace.centrality import MEASURES, CentralityVector, compute, degree
from sniffplace.evaluation import LostRule, evaluate
from sniffplace.graph_model import generate_geometric_graph, generate_grid_graph, generate_trajectories
from sniffplace.placement import Placement, PlacementError, place, rank_coefficient
from sniffplace.vertex_cover import CoverSet, compute_cover


def naive_place(graph, cover, cent, k):
    """Direct transcription of the pruning loop with all-pairs distances."""
    dist = floyd_warshall(graph.nodes, graph.edges)
    order = list(cent.ascending_order)
    vc = set(cover)
    out = []
    while vc:
        u = max(vc, key=lambda x: (cent.raw[x], -x))
        c = 1 - order.index(u) / len(graph)
        r = round(k * c)
        out.append((u, c, r))
        vc = {v for v in vc if v != u and dist[u][v] > r}
    return out


def test_p3_hand_trace(p3):
    cover = CoverSet(frozenset({1, 2}), "gavril_yannakakis", p3.graph_id)
    p = place(p3, cover, degree(p3), 3)
    assert len(p.selected) == 1
    s = p.selected[0]
    assert s.node == 2 and s.c == pytest.approx(1 / 3) and s.radius == 1


def test_k0_keeps_cover():
    g = generate_geometric_graph(120, 0.15, 1)
    for alg in ("gavril_yannakakis", "bar_yehuda_even"):
        cover = compute_cover(g, alg)
        for measure in MEASURES:
            p = place(g, cover, compute(g, measure), 0)
            assert set(p.nodes) == cover.members
            assert len(p.nodes) == len(cover)
            assert all(s.radius == 0 for s in p.selected)


def test_single_member_cover(star4):
    cover = CoverSet(frozenset({0}), "exact", star4.graph_id)
    for measure in MEASURES:
        for k in (0, 1, 5, 30):
            assert place(star4, cover, compute(star4, measure), k).nodes == [0]


class TestRankCoefficient:
    def test_most_central_of_1080(self):
        cent = CentralityVector.from_raw("degree", {i: float(i) for i in range(1080)}, "g")
        assert rank_coefficient(cent, 1079, 1080) == pytest.approx(1 / 1080)
        assert rank_coefficient(cent, 0, 1080) == 1.0

    def test_single_node(self):
        cent = CentralityVector.from_raw("degree", {7: 0.0}, "g")
        assert rank_coefficient(cent, 7, 1) == 1.0

    def test_unknown(self, p3):
        with pytest.raises(ValueError):
            rank_coefficient(degree(p3), 9, 3)


def test_rounding_is_half_to_even():
    g = make_graph([(1, 2), (2, 3), (3, 4)])
    cent = CentralityVector.from_raw("degree", {1: 0.0, 2: 1.0, 3: 3.0, 4: 2.0}, g.graph_id)
    cover = CoverSet(frozenset({3}), "exact", g.graph_id)
    # node 3 sits at index 3, c = 1/4; k = 2 gives 0.5 which rounds to 0
    assert place(g, cover, cent, 2).selected[0].radius == 0
    assert place(g, cover, cent, 6).selected[0].radius == 2  # 1.5 -> 2
    assert place(g, cover, cent, 10).selected[0].radius == 2  # 2.5 -> 2


def test_matches_naive_transcription():
    rng = np.random.default_rng(17)
    for _ in range(150):
        nodes, edges = random_small_graph(rng, max_nodes=9)
        g = make_graph(edges, nodes)
        cover = compute_cover(g, "gavril_yannakakis")
        for measure in ("degree", "betweenness", "closeness"):
            cent = compute(g, measure)
            for k in (0, 1, 2, 4, 9):
                got = [(s.node, s.c, s.radius) for s in place(g, cover, cent, k).selected]
                assert got == naive_place(g, cover.members, cent, k)


@pytest.mark.parametrize("measure", MEASURES)
def test_properties(measure):
    g = generate_geometric_graph(200, 0.1, 3)
    cover = compute_cover(g, "bar_yehuda_even")
    cent = compute(g, measure)
    for k in (1, 3, 7, 15):
        p = place(g, cover, cent, k)
        nodes = p.nodes
        assert len(set(nodes)) == len(nodes)
        assert set(nodes) <= cover.members
        # pick order follows non-increasing raw centrality
        raws = [cent.raw[u] for u in nodes]
        assert raws == sorted(raws, reverse=True)
        for s in p.selected:
            assert s.radius == round(k * s.c) and 0 < s.c <= 1
        # pruning witness
        from sniffplace.graph_model import hop_distances

        reach = {s.node: hop_distances(g, s.node, cutoff=s.radius) for s in p.selected}
        for v in cover.members - set(nodes):
            assert any(v in reach[s.node] for s in p.selected)
        assert place(g, cover, cent, k) == p


def test_full_cover_observes_every_trajectory():
    g = generate_grid_graph(8, 8)
    trajs = generate_trajectories(g, 300, 2, seed=4)
    cover = compute_cover(g, "gavril_yannakakis")
    p = place(g, cover, compute(g, "degree"), 0)
    # count rule with threshold 1: lost means never observed
    assert evaluate(g, trajs, p.nodes, LostRule.count(1)).lost_count == 0


def test_mismatch(p3, c4):
    cover = compute_cover(c4, "gavril_yannakakis")
    with pytest.raises(PlacementError):
        place(p3, cover, degree(p3), 1)
    with pytest.raises(PlacementError):
        place(c4, cover, degree(p3), 1)


def test_negative_k(p3):
    cover = compute_cover(p3, "gavril_yannakakis")
    with pytest.raises(PlacementError):
        place(p3, cover, degree(p3), -1)


def test_json_round_trip(p3):
    p = place(p3, compute_cover(p3, "gavril_yannakakis"), degree(p3), 3)
    doc = json.loads(json.dumps(p.to_json()))
    assert doc == {"k": 3, "measure": "degree", "cover_algorithm": "gavril_yannakakis",
                   "selected": [{"node": 2, "c": 1 - 2 / 3, "radius": 1}]}
    assert Placement.from_json(doc, p3.graph_id) == p
