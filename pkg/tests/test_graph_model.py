import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import make_graph
from oracles import components, floyd_warshall, random_small_graph
from sniffplace.graph_model import (
    GraphError,
    GraphFormatError,
    RoadGraph,
    Trajectory,
    TrajectoryError,
    TrajectorySet,
    euclidean_distance,
    generate_geometric_graph,
    generate_grid_graph,
    generate_trajectories,
    hop_distances,
    load_graph,
    load_trajectories,
    save_graph,
    save_trajectories,
)


def write_json(tmp_path, data, name="g.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return path


def p3_json(extra_edges=()):
    return {
        "nodes": [{"id": i, "x": float(i), "y": 0.0} for i in (1, 2, 3)],
        "edges": [[1, 2], [2, 3], *extra_edges],
    }


class TestLoadGraph:
    def test_minimal_json(self, tmp_path):
        g = load_graph(write_json(tmp_path, p3_json()))
        assert g.nodes == (1, 2, 3)
        assert g.edges == ((1, 2), (2, 3))
        assert g.weight(1, 2) == 1.0

    def test_self_loop_rejected(self, tmp_path):
        with pytest.raises(GraphFormatError, match="self-loop") as exc:
            load_graph(write_json(tmp_path, p3_json([[3, 3]])))
        assert exc.value.location.endswith("edges[2]")

    def test_duplicate_undirected_edge(self, tmp_path):
        data = p3_json()
        data["edges"] = [[1, 2], [2, 1]]
        with pytest.raises(GraphFormatError, match="duplicate"):
            load_graph(write_json(tmp_path, data))

    @pytest.mark.parametrize(
        "mutate, message",
        [
            (lambda d: d["nodes"].append({"id": 1, "x": 0, "y": 0}), "duplicate node"),
            (lambda d: d["edges"].append([1, 9]), "unknown node"),
            (lambda d: d["edges"].append([1, 3, -2.0]), "invalid weight"),
        ],
    )
    def test_invariant_violations(self, tmp_path, mutate, message):
        data = p3_json()
        mutate(data)
        with pytest.raises(GraphFormatError, match=message):
            load_graph(write_json(tmp_path, data))

    def test_parse_failure_has_location(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"nodes": [}')
        with pytest.raises(GraphFormatError) as exc:
            load_graph(path)
        assert "bad.json:1" in str(exc.value)

    def test_weights_and_order_independence(self, tmp_path):
        data = p3_json()
        data["edges"] = [[3, 2, 2.5], [2, 1]]
        data["nodes"].reverse()
        g = load_graph(write_json(tmp_path, data))
        ref = load_graph(write_json(tmp_path, {**p3_json(), "edges": [[1, 2], [2, 3, 2.5]]}, "r.json"))
        assert g == ref and g.graph_id == ref.graph_id

    def test_csv_pair(self, tmp_path):
        (tmp_path / "nodes.csv").write_text("id,x,y\n1,0,0\n2,1,0\n3,2,0\n")
        (tmp_path / "edges.csv").write_text("u,v,weight\n1,2,1.5\n2,3\n")
        g = load_graph(tmp_path)
        assert g.edges == ((1, 2), (2, 3))
        assert g.weight(1, 2) == 1.5 and g.weight(2, 3) == 1.0

    def test_csv_error_reports_line(self, tmp_path):
        (tmp_path / "nodes.csv").write_text("id,x,y\n1,0,0\n2,1,0\n")
        (tmp_path / "edges.csv").write_text("u,v\n1,2\n2,2\n")
        with pytest.raises(GraphFormatError, match="edges.csv:3"):
            load_graph(tmp_path)

    def test_latlon_projection(self, tmp_path):
        data = {
            "nodes": [{"id": 1, "lat": 50.0, "lon": 7.0}, {"id": 2, "lat": 50.001, "lon": 7.0}],
            "edges": [[1, 2]],
        }
        g = load_graph(write_json(tmp_path, data))
        assert g.origin == pytest.approx((50.0005, 7.0))
        # 0.001 degree of latitude is ~111 m
        assert euclidean_distance(g, 1, 2) == pytest.approx(111.19, abs=0.05)

    @pytest.mark.parametrize("fmt, name", [("json", "g.json"), ("csv", "gdir")])
    def test_round_trip(self, tmp_path, fmt, name):
        g = generate_geometric_graph(40, 0.3, seed=3)
        g = g.reweighted({e: float(i % 5) for i, e in enumerate(g.edges)})
        save_graph(g, tmp_path / name, fmt)
        assert load_graph(tmp_path / name, fmt) == g


class TestTrajectories:
    def test_load(self, tmp_path, p3):
        path = tmp_path / "t.txt"
        path.write_text("# comment\n1,2,3\n\n3,2\n")
        ts = load_trajectories(path, p3)
        assert [t.node_seq for t in ts] == [(1, 2, 3), (3, 2)]
        assert ts[0].length == 2

    @pytest.mark.parametrize("line, message", [("1,3", "non-adjacent"), ("2", "at least 2"),
                                               ("1,7", "unknown node"), ("1,x", "non-integer")])
    def test_abort_on_bad_line(self, tmp_path, p3, line, message):
        path = tmp_path / "t.txt"
        path.write_text(f"1,2\n{line}\n")
        with pytest.raises(TrajectoryError, match=message) as exc:
            load_trajectories(path, p3)
        assert exc.value.line == 2

    def test_skip_and_report(self, tmp_path, p3):
        path = tmp_path / "t.txt"
        path.write_text("1,2,3\n1,3\n2\n2,3\n")
        ts = load_trajectories(path, p3, on_error="skip")
        assert len(ts) == 2
        assert [line for line, _ in ts.rejected] == [2, 3]

    def test_save_load(self, tmp_path):
        g = generate_grid_graph(4, 4)
        ts = generate_trajectories(g, 20, 2, seed=1)
        save_trajectories(ts, tmp_path / "t.txt")
        assert load_trajectories(tmp_path / "t.txt", g).trajectories == ts.trajectories


class TestGenerators:
    @pytest.mark.parametrize("rows, cols, n, m", [(2, 2, 4, 4), (3, 3, 9, 12), (20, 20, 400, 760)])
    def test_grid_counts(self, rows, cols, n, m):
        g = generate_grid_graph(rows, cols)
        assert len(g) == n and g.number_of_edges == m

    def test_grid_is_four_cycle(self):
        g = generate_grid_graph(2, 2)
        assert all(g.degree(u) == 2 for u in g.nodes)

    def test_grid_bounds(self):
        with pytest.raises(GraphError):
            generate_grid_graph(1, 5)
        with pytest.raises(GraphError):
            generate_grid_graph(10, 10, max_nodes=50)

    def test_geometric_two_nodes(self):
        for seed in range(5):
            g = generate_geometric_graph(2, 1.5, seed)
            assert len(g) == 2 and g.number_of_edges == 1

    def test_geometric_component(self):
        g = generate_geometric_graph(200, 0.12, seed=7)
        comps = components(g.nodes, g.edges)
        assert len(comps) == 1
        assert len(g) >= 150

    def test_geometric_deterministic(self):
        a = generate_geometric_graph(100, 0.15, seed=11)
        b = generate_geometric_graph(100, 0.15, seed=11)
        assert json.dumps(a.to_dict()) == json.dumps(b.to_dict())

    def test_geometric_bad_args(self):
        with pytest.raises(GraphError):
            generate_geometric_graph(1, 0.5, 0)
        with pytest.raises(GraphError):
            generate_geometric_graph(10, 0.0, 0)

    def test_trajectories_p3(self, p3):
        for seed in range(5):
            ts = generate_trajectories(p3, 1, 2, seed)
            assert ts[0].node_seq in ((1, 2, 3), (3, 2, 1))

    def test_trajectories_are_shortest_paths(self):
        g = generate_grid_graph(5, 5)
        ts = generate_trajectories(g, 100, 3, seed=4)
        assert len(ts) == 100
        dist = floyd_warshall(g.nodes, g.edges)
        for t in ts:
            t.validate(g)
            assert t.length >= 3
            assert t.length == dist[t.node_seq[0]][t.node_seq[-1]]

    def test_trajectories_impossible(self, triangle):
        with pytest.raises(TrajectoryError, match="only 0 of 1"):
            generate_trajectories(triangle, 1, 2, seed=0)

    def test_trajectories_disconnected(self):
        with pytest.raises(TrajectoryError, match="connected"):
            generate_trajectories(make_graph([(1, 2), (3, 4)]), 1, 1, seed=0)

    def test_trajectories_deterministic(self):
        g = generate_grid_graph(6, 6)
        assert generate_trajectories(g, 50, 2, 9) == generate_trajectories(g, 50, 2, 9)

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), min_len=st.integers(1, 6))
    def test_trajectory_invariants_property(self, seed, min_len):
        g = generate_grid_graph(6, 5)
        ts = generate_trajectories(g, 10, min_len, seed)
        for t in ts:
            assert len(t.node_seq) >= 2 and t.length >= min_len
            t.validate(g)


class TestHopDistances:
    def test_p3(self, p3):
        assert hop_distances(p3, 1) == {1: 0, 2: 1, 3: 2}
        assert hop_distances(p3, 1, cutoff=1) == {1: 0, 2: 1}
        assert hop_distances(p3, 1, cutoff=0) == {1: 0}

    def test_grid_corner(self):
        assert max(hop_distances(generate_grid_graph(3, 3), 0).values()) == 4

    def test_unknown_source(self, p3):
        with pytest.raises(GraphError):
            hop_distances(p3, 99)

    def test_against_floyd_warshall(self):
        rng = np.random.default_rng(5)
        for _ in range(40):
            nodes, edges = random_small_graph(rng, max_nodes=50, min_nodes=5)
            g = make_graph(edges, nodes)
            dist = floyd_warshall(nodes, edges)
            for s in nodes:
                expected = {t: d for t, d in dist[s].items() if d != float("inf")}
                assert hop_distances(g, s) == expected


def test_trajectory_set_build_validates(p3):
    with pytest.raises(TrajectoryError):
        TrajectorySet.build(p3, [(1, 3)])
    ts = TrajectorySet.build(p3, [Trajectory((1, 2))])
    assert ts.graph_id == p3.graph_id


def test_graph_rejects_self_loop_in_constructor():
    with pytest.raises(GraphError, match="self-loop"):
        RoadGraph({1: (0, 0)}, [(1, 1)])
