"""Vertex cover algorithms.

Two linear-time approximations (maximal matching, and a local-ratio variant
that first strips triangles) plus an exact branch-and-bound solver used as a
test oracle on small graphs. Ties are broken by ascending node id throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .graph_model import GraphError, RoadGraph

__all__ = [
    "CoverSet",
    "CoverError",
    "ALGORITHMS",
    "cover_gavril_yannakakis",
    "cover_bar_yehuda_even",
    "cover_exact",
    "compute_cover",
    "verify_cover",
]

ALGORITHMS = ("gavril_yannakakis", "bar_yehuda_even", "exact")


class CoverError(GraphError):
    pass


@dataclass(frozen=True)
class CoverSet:
    members: frozenset[int]
    algorithm: str
    graph_id: str

    def __len__(self) -> int:
        return len(self.members)

    def to_json(self) -> dict:
        return {"algorithm": self.algorithm, "members": sorted(self.members), "size": len(self.members)}


def verify_cover(graph: RoadGraph, members: Iterable[int]) -> tuple[bool, list[tuple[int, int]]]:
    """Check the cover property; returns ``(ok, uncovered_edges)``."""
    members = set(members)
    unknown = [m for m in members if m not in graph]
    if unknown:
        raise CoverError(f"cover members not in graph: {sorted(unknown)[:10]}")
    bad = [(u, v) for u, v in graph.edges if u not in members and v not in members]
    return not bad, bad


def _finish(graph: RoadGraph, members: set[int], algorithm: str) -> CoverSet:
    ok, bad = verify_cover(graph, members)
    if not ok:  # pragma: no cover - would be an algorithm bug
        raise AssertionError(f"{algorithm} produced an invalid cover; uncovered {bad[:5]}")
    return CoverSet(frozenset(members), algorithm, graph.graph_id)


def cover_gavril_yannakakis(graph: RoadGraph) -> CoverSet:
    """Both endpoints of a greedy maximal matching; at most twice the optimum."""
    cover: set[int] = set()
    for u, v in graph.edges:
        if u not in cover and v not in cover:
            cover.add(u)
            cover.add(v)
    return _finish(graph, cover, "gavril_yannakakis")


def cover_bar_yehuda_even(graph: RoadGraph) -> CoverSet:
    """Local-ratio cover: whole triangles first, then a local-ratio edge pass.

    Phase 1 scans nodes by ascending id and removes every triangle it finds,
    putting all three vertices in the cover (cost 3 against an optimum of at
    least 2 on the triangle). Phase 2 runs the unit-weight local-ratio step on
    the triangle-free rest: for an uncovered edge the endpoint with the smaller
    residual weight joins the cover and that weight is subtracted from the
    other endpoint. A vertex whose residual weight reached zero is only added
    once another uncovered edge needs it, which is what separates this from
    plain matching. The cover stays within the zero-residual vertices, so the
    local-ratio argument bounds it by twice the optimum.
    """
    adj = {u: set(graph.neighbors(u)) for u in graph.nodes}
    residual = dict.fromkeys(graph.nodes, 1)
    cover: set[int] = set()
    for u in graph.nodes:
        if u not in adj:
            continue
        nbrs = sorted(adj[u])
        found = None
        for i, v in enumerate(nbrs):
            for w in nbrs[i + 1:]:
                if w in adj[v]:
                    found = (v, w)
                    break
            if found:
                break
        if found is None:
            continue
        for x in (u, *found):
            cover.add(x)
            residual[x] = 0
            for y in adj.pop(x):
                if y in adj:
                    adj[y].discard(x)
    for u, v in graph.edges:
        if u in cover or v in cover:
            continue
        if residual[u] <= residual[v]:
            cover.add(u)
            residual[v] -= residual[u]
        else:
            cover.add(v)
            residual[u] -= residual[v]
    return _finish(graph, cover, "bar_yehuda_even")


def _pick_branch_vertex(adj: dict[int, set[int]]) -> int:
    return min((u for u in adj if adj[u]), key=lambda u: (-len(adj[u]), u))


def _remove(adj: dict[int, set[int]], nodes: Iterable[int]) -> dict[int, set[int]]:
    nodes = set(nodes)
    return {u: nb - nodes for u, nb in adj.items() if u not in nodes and nb - nodes}


def _search(adj: dict[int, set[int]], budget: int) -> set[int] | None:
    """Return a cover of the edges in ``adj`` of size <= ``budget``, or None."""
    if not adj:
        return set()
    if budget <= 0:
        return None
    n_edges = sum(len(nb) for nb in adj.values()) // 2
    max_deg = max(len(nb) for nb in adj.values())
    if n_edges > budget * max_deg:
        return None
    v = _pick_branch_vertex(adj)
    nbrs = adj[v]
    sub = _search(_remove(adj, [v]), budget - 1)
    if sub is not None:
        return sub | {v}
    if len(nbrs) <= budget:
        sub = _search(_remove(adj, nbrs), budget - len(nbrs))
        if sub is not None:
            return sub | nbrs
    return None


def _feasible(adj: dict[int, set[int]], forced_in: set[int], forced_out: set[int], budget: int) -> bool:
    must = set(forced_in)
    for x in forced_out:
        nb = adj.get(x, set())
        if nb & forced_out:
            return False
        must |= nb
    if len(must) > budget:
        return False
    rest = _remove(adj, must)
    return _search(rest, budget - len(must)) is not None


def cover_exact(graph: RoadGraph, node_limit: int = 32) -> CoverSet:
    """Minimum vertex cover by branch and bound; lexicographically smallest among optima."""
    if len(graph) > node_limit:
        raise CoverError(f"exact cover limited to {node_limit} nodes, graph has {len(graph)}")
    adj = {u: set(graph.neighbors(u)) for u in graph.nodes if graph.neighbors(u)}
    best = set(cover_gavril_yannakakis(graph).members)
    while best:
        smaller = _search(adj, len(best) - 1)
        if smaller is None:
            break
        best = smaller
    opt = len(best)
    forced_in: set[int] = set()
    forced_out: set[int] = set()
    for u in graph.nodes:
        if len(forced_in) == opt:
            break
        if _feasible(adj, forced_in | {u}, forced_out, opt):
            forced_in.add(u)
        else:
            forced_out.add(u)
    return _finish(graph, forced_in, "exact")


def compute_cover(graph: RoadGraph, algorithm: str) -> CoverSet:
    if algorithm == "gavril_yannakakis":
        return cover_gavril_yannakakis(graph)
    if algorithm == "bar_yehuda_even":
        return cover_bar_yehuda_even(graph)
    if algorithm == "exact":
        return cover_exact(graph)
    raise ValueError(f"unknown cover algorithm {algorithm!r}; expected one of {ALGORITHMS}")
