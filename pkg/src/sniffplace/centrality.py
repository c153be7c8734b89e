"""Node centrality measures on road graphs.

Every measure returns a :class:`CentralityVector` holding the raw scores, a
min-max normalization to [0, 1] and the ascending rank order (least central
first, ties by ascending node id) that the placement heuristic indexes into.
Distance-based measures use hop distance.
"""

from __future__ import annotations

import csv
import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .graph_model import GraphError, RoadGraph, connected_components

__all__ = [
    "MEASURES",
    "CentralityError",
    "CentralityParams",
    "CentralityVector",
    "degree",
    "strength",
    "closeness",
    "betweenness",
    "katz",
    "eigenvector",
    "information",
    "accessibility",
    "expected_force",
    "compute",
    "write_centrality_csv",
]

MEASURES = (
    "degree",
    "strength",
    "closeness",
    "betweenness",
    "katz",
    "eigenvector",
    "information",
    "accessibility",
    "expected_force",
)


class CentralityError(GraphError):
    """Non-convergence, capacity overflow or bad parameters."""


@dataclass(frozen=True)
class CentralityParams:
    """Tunables for the iterative and walk-based measures.

    ``katz_alpha`` overrides the spectral choice ``katz_alpha_factor / lambda_max``
    with a literal attenuation factor; it must still satisfy
    ``alpha * lambda_max < 1``.
    """

    katz_alpha_factor: float = 0.9
    katz_tolerance: float = 1e-10
    eigenvector_tolerance: float = 1e-10
    max_iterations: int = 100_000
    accessibility_h: int = 3
    expected_force_transmissions: int = 2
    information_max_component: int = 2000
    katz_alpha: float | None = None

    def __post_init__(self):
        if not 0 < self.katz_alpha_factor < 1:
            raise CentralityError("katz_alpha_factor must lie in (0, 1)")
        if self.katz_tolerance <= 0 or self.eigenvector_tolerance <= 0:
            raise CentralityError("tolerances must be positive")
        if self.max_iterations < 1:
            raise CentralityError("max_iterations must be >= 1")
        if self.accessibility_h < 1:
            raise CentralityError("accessibility_h must be >= 1")
        if self.expected_force_transmissions != 2:
            raise CentralityError("expected force is defined for exactly 2 transmissions")
        if self.katz_alpha is not None and self.katz_alpha <= 0:
            raise CentralityError("katz_alpha must be positive")


@dataclass(frozen=True)
class CentralityVector:
    measure: str
    raw: dict[int, float]
    normalized: dict[int, float]
    ascending_order: tuple[int, ...]
    graph_id: str
    _rank: dict[int, int] = field(repr=False, compare=False, default_factory=dict)

    @classmethod
    def from_raw(cls, measure: str, raw: dict[int, float], graph_id: str) -> CentralityVector:
        raw = {int(k): float(v) for k, v in sorted(raw.items())}
        if raw:
            lo, hi = min(raw.values()), max(raw.values())
        else:
            lo = hi = 0.0
        if hi > lo:
            span = hi - lo
            normalized = {k: (v - lo) / span for k, v in raw.items()}
        else:
            normalized = dict.fromkeys(raw, 0.5)
        order = tuple(sorted(raw, key=lambda k: (raw[k], k)))
        rank = {k: i for i, k in enumerate(order)}
        return cls(measure, raw, normalized, order, graph_id, rank)

    def index_of(self, node: int) -> int:
        """0-based position of ``node`` in :attr:`ascending_order`."""
        try:
            return self._rank[node]
        except KeyError:
            raise GraphError(f"node {node} has no centrality value") from None

    def __len__(self) -> int:
        return len(self.raw)


# -- local measures ----------------------------------------------------------


def degree(graph: RoadGraph) -> CentralityVector:
    return CentralityVector.from_raw(
        "degree", {u: len(graph.neighbors(u)) for u in graph.nodes}, graph.graph_id)


def strength(graph: RoadGraph) -> CentralityVector:
    """Sum of incident edge weights (equals degree on unit weights)."""
    raw = dict.fromkeys(graph.nodes, 0.0)
    for (u, v), w in graph.weights.items():
        raw[u] += w
        raw[v] += w
    return CentralityVector.from_raw("strength", raw, graph.graph_id)


# -- shortest-path measures ----------------------------------------------------


def _bfs_order(graph: RoadGraph, s: int):
    dist = {s: 0}
    sigma = {s: 1}
    preds: dict[int, list[int]] = {s: []}
    order = []
    queue = deque([s])
    while queue:
        v = queue.popleft()
        order.append(v)
        dv = dist[v]
        for w in graph.neighbors(v):
            if w not in dist:
                dist[w] = dv + 1
                sigma[w] = 0
                preds[w] = []
                queue.append(w)
            if dist[w] == dv + 1:
                sigma[w] += sigma[v]
                preds[w].append(v)
    return order, dist, sigma, preds


def closeness(graph: RoadGraph) -> CentralityVector:
    """Inverse mean hop distance to the nodes reachable from each node."""
    raw = {}
    for u in graph.nodes:
        dist = _bfs_order(graph, u)[1]
        total = sum(dist.values())
        raw[u] = (len(dist) - 1) / total if total > 0 else 0.0
    return CentralityVector.from_raw("closeness", raw, graph.graph_id)


def betweenness(graph: RoadGraph) -> CentralityVector:
    """Exact shortest-path betweenness over unordered pairs (Brandes accumulation)."""
    acc = dict.fromkeys(graph.nodes, 0.0)
    for s in graph.nodes:
        order, _, sigma, preds = _bfs_order(graph, s)
        delta = dict.fromkeys(order, 0.0)
        for w in reversed(order):
            coeff = (1.0 + delta[w]) / sigma[w]
            for v in preds[w]:
                delta[v] += sigma[v] * coeff
            if w != s:
                acc[w] += delta[w]
    return CentralityVector.from_raw("betweenness", {u: x / 2.0 for u, x in acc.items()}, graph.graph_id)


# -- spectral measures ---------------------------------------------------------


def _adjacency(graph: RoadGraph, nodes: list[int] | tuple[int, ...]) -> sp.csr_matrix:
    idx = {u: i for i, u in enumerate(nodes)}
    rows, cols = [], []
    for u in nodes:
        for v in graph.neighbors(u):
            if v in idx:
                rows.append(idx[u])
                cols.append(idx[v])
    n = len(nodes)
    return sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))


def _principal(adj: sp.csr_matrix, tol: float, max_iter: int) -> tuple[float, np.ndarray]:
    """Power iteration on ``A + I`` (shift avoids oscillation on bipartite graphs).

    Returns the leading eigenvalue of ``A`` and its eigenvector scaled to unit max.
    """
    n = adj.shape[0]
    x = np.ones(n)
    for _ in range(max_iter):
        y = adj @ x + x
        y /= y.max()
        if np.abs(y - x).max() < tol:
            x = y
            break
        x = y
    else:
        raise CentralityError(f"power iteration did not converge in {max_iter} iterations")
    lam = float(x @ (adj @ x)) / float(x @ x)
    return lam, x


def spectral_radius(graph: RoadGraph, params: CentralityParams | None = None) -> float:
    """Largest adjacency eigenvalue, maximized over components."""
    params = params or CentralityParams()
    best = 0.0
    for comp in connected_components(graph):
        if len(comp) < 2:
            continue
        lam, _ = _principal(_adjacency(graph, comp), params.eigenvector_tolerance, params.max_iterations)
        best = max(best, lam)
    return best


def katz(graph: RoadGraph, params: CentralityParams | None = None) -> CentralityVector:
    """Fixed point of ``x = alpha * A x + 1``, iterated to ``katz_tolerance`` in the max norm."""
    params = params or CentralityParams()
    nodes = graph.nodes
    if graph.number_of_edges == 0:
        return CentralityVector.from_raw("katz", dict.fromkeys(nodes, 1.0), graph.graph_id)
    lam = spectral_radius(graph, params)
    alpha = params.katz_alpha if params.katz_alpha is not None else params.katz_alpha_factor / lam
    if alpha * lam >= 1.0:
        raise CentralityError(f"katz alpha={alpha} too large for spectral radius {lam}")
    adj = _adjacency(graph, nodes)
    x = np.ones(len(nodes))
    for _ in range(params.max_iterations):
        y = alpha * (adj @ x) + 1.0
        if np.abs(y - x).max() < params.katz_tolerance:
            x = y
            break
        x = y
    else:
        raise CentralityError("katz iteration did not converge")
    return CentralityVector.from_raw("katz", dict(zip(nodes, x.tolist())), graph.graph_id)


def eigenvector(graph: RoadGraph, params: CentralityParams | None = None) -> CentralityVector:
    """Principal adjacency eigenvector per component, unit max within each component.

    Isolated nodes score 0.
    """
    params = params or CentralityParams()
    raw: dict[int, float] = {}
    for comp in connected_components(graph):
        if len(comp) == 1:
            raw[comp[0]] = 0.0
            continue
        _, vec = _principal(_adjacency(graph, comp), params.eigenvector_tolerance, params.max_iterations)
        raw.update(zip(comp, vec.tolist()))
    return CentralityVector.from_raw("eigenvector", raw, graph.graph_id)


def information(graph: RoadGraph, params: CentralityParams | None = None) -> CentralityVector:
    """Information centrality from ``C = (L + J)^-1`` on each connected component."""
    params = params or CentralityParams()
    raw: dict[int, float] = {}
    for comp in connected_components(graph):
        n = len(comp)
        if n == 1:
            raw[comp[0]] = 0.0
            continue
        if n > params.information_max_component:
            raise CentralityError(
                f"information centrality: component of {n} nodes exceeds "
                f"cap {params.information_max_component}")
        a = _adjacency(graph, comp).toarray()
        lap = np.diag(a.sum(axis=1)) - a
        c = np.linalg.inv(lap + 1.0)
        diag = np.diag(c)
        rows = c.sum(axis=1)
        vals = 1.0 / (diag + (np.trace(c) - 2.0 * rows) / n)
        raw.update(zip(comp, vals.tolist()))
    return CentralityVector.from_raw("information", raw, graph.graph_id)


# -- walk and cluster enumeration --------------------------------------------


def _walk_endpoints(graph: RoadGraph, start: int, h: int) -> dict[int, float]:
    """Endpoint distribution of uniform self-avoiding walks of up to ``h`` steps.

    A walk with no unvisited neighbour stops where it is.
    """
    probs: dict[int, float] = {}
    visited = {start}

    def expand(u: int, steps: int, p: float) -> None:
        options = [v for v in graph.neighbors(u) if v not in visited]
        if steps == h or not options:
            probs[u] = probs.get(u, 0.0) + p
            return
        q = p / len(options)
        for v in options:
            visited.add(v)
            expand(v, steps + 1, q)
            visited.remove(v)

    if graph.neighbors(start):
        expand(start, 0, 1.0)
    return probs


def accessibility(graph: RoadGraph, params: CentralityParams | None = None) -> CentralityVector:
    """Exponential of the entropy of the self-avoiding walk endpoint distribution."""
    params = params or CentralityParams()
    raw = {}
    for u in graph.nodes:
        probs = _walk_endpoints(graph, u, params.accessibility_h)
        if not probs:
            raw[u] = 0.0
            continue
        ent = -sum(p * math.log(p) for _, p in sorted(probs.items()) if p > 0)
        raw[u] = math.exp(ent)
    return CentralityVector.from_raw("accessibility", raw, graph.graph_id)


def _two_step_out_degrees(graph: RoadGraph, seed: int) -> list[int]:
    """Out-degrees of every ordered two-transmission cluster seeded at ``seed``."""
    out = []
    deg_seed = len(graph.neighbors(seed))
    for a in graph.neighbors(seed):
        front = sorted((set(graph.neighbors(seed)) | set(graph.neighbors(a))) - {seed, a})
        for b in front:
            inner = 1 + graph.has_edge(seed, b) + graph.has_edge(a, b)
            total_deg = deg_seed + len(graph.neighbors(a)) + len(graph.neighbors(b))
            out.append(total_deg - 2 * inner)
    return out


def expected_force(graph: RoadGraph, params: CentralityParams | None = None) -> CentralityVector:
    """Entropy of normalized cluster out-degrees after two transmissions."""
    raw = {}
    for u in graph.nodes:
        degs = _two_step_out_degrees(graph, u)
        total = sum(degs)
        if total == 0:
            raw[u] = 0.0
            continue
        raw[u] = -sum((d / total) * math.log(d / total) for d in degs if d > 0)
    return CentralityVector.from_raw("expected_force", raw, graph.graph_id)


_DISPATCH: dict[str, Callable[..., CentralityVector]] = {
    "degree": lambda g, p: degree(g),
    "strength": lambda g, p: strength(g),
    "closeness": lambda g, p: closeness(g),
    "betweenness": lambda g, p: betweenness(g),
    "katz": katz,
    "eigenvector": eigenvector,
    "information": information,
    "accessibility": accessibility,
    "expected_force": expected_force,
}


def compute(graph: RoadGraph, measure: str, params: CentralityParams | None = None) -> CentralityVector:
    try:
        fn = _DISPATCH[measure]
    except KeyError:
        raise CentralityError(f"unknown centrality {measure!r}; expected one of {MEASURES}") from None
    return fn(graph, params or CentralityParams())


def write_centrality_csv(cent: CentralityVector, path: str | Path) -> None:
    """Write ``node_id, raw, normalized, rank`` rows in node id order."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["node_id", "raw", "normalized", "rank"])
        for node, value in cent.raw.items():
            w.writerow([node, repr(value), repr(cent.normalized[node]), cent.index_of(node)])
