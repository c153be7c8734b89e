"""Slow, independent reference computations used only by the tests.

None of these call into the code paths they check; they work from explicit
edge lists, brute force enumeration or dense linear algebra.
"""

from __future__ import annotations

import itertools
import math
from collections import deque

import numpy as np


def adjacency_sets(nodes, edges):
    adj = {u: set() for u in nodes}
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    return adj


def floyd_warshall(nodes, edges):
    nodes = list(nodes)
    inf = math.inf
    d = {u: {v: (0 if u == v else inf) for v in nodes} for u in nodes}
    for u, v in edges:
        d[u][v] = d[v][u] = 1
    for k in nodes:
        for i in nodes:
            dik = d[i][k]
            if dik == inf:
                continue
            for j in nodes:
                if dik + d[k][j] < d[i][j]:
                    d[i][j] = dik + d[k][j]
    return d


def brute_min_cover(nodes, edges):
    """Smallest cover by enumerating subsets in increasing size."""
    nodes = sorted(nodes)
    for r in range(len(nodes) + 1):
        for subset in itertools.combinations(nodes, r):
            s = set(subset)
            if all(u in s or v in s for u, v in edges):
                return s
    raise AssertionError("unreachable")


def all_shortest_paths(adj, dist, s, t):
    """Every shortest s-t path, built by stepping strictly closer to t."""
    if dist[s][t] == math.inf:
        return []
    out = []

    def walk(path):
        u = path[-1]
        if u == t:
            out.append(tuple(path))
            return
        for v in adj[u]:
            if dist[v][t] == dist[u][t] - 1:
                walk(path + [v])

    walk([s])
    return out


def brute_betweenness(nodes, edges):
    adj = adjacency_sets(nodes, edges)
    dist = floyd_warshall(nodes, edges)
    bc = dict.fromkeys(nodes, 0.0)
    for s, t in itertools.combinations(sorted(nodes), 2):
        paths = all_shortest_paths(adj, dist, s, t)
        if not paths:
            continue
        for u in nodes:
            if u in (s, t):
                continue
            bc[u] += sum(1 for p in paths if u in p) / len(paths)
    return bc


def dense_katz(nodes, edges, alpha):
    nodes = sorted(nodes)
    idx = {u: i for i, u in enumerate(nodes)}
    a = np.zeros((len(nodes), len(nodes)))
    for u, v in edges:
        a[idx[u], idx[v]] = a[idx[v], idx[u]] = 1.0
    x = np.linalg.solve(np.eye(len(nodes)) - alpha * a, np.ones(len(nodes)))
    return dict(zip(nodes, x))


def spectral_radius(nodes, edges):
    nodes = sorted(nodes)
    idx = {u: i for i, u in enumerate(nodes)}
    a = np.zeros((len(nodes), len(nodes)))
    for u, v in edges:
        a[idx[u], idx[v]] = a[idx[v], idx[u]] = 1.0
    return float(np.max(np.linalg.eigvalsh(a))) if len(nodes) else 0.0


def components(nodes, edges):
    adj = adjacency_sets(nodes, edges)
    seen, comps = set(), []
    for s in sorted(nodes):
        if s in seen:
            continue
        comp, queue = [], deque([s])
        seen.add(s)
        while queue:
            u = queue.popleft()
            comp.append(u)
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
        comps.append(sorted(comp))
    return comps


def resistance_information(nodes, edges):
    """Information centrality as n / sum of effective resistances (Laplacian pseudo-inverse)."""
    out = {}
    for comp in components(nodes, edges):
        n = len(comp)
        if n == 1:
            out[comp[0]] = 0.0
            continue
        idx = {u: i for i, u in enumerate(comp)}
        lap = np.zeros((n, n))
        for u, v in edges:
            if u in idx and v in idx:
                i, j = idx[u], idx[v]
                lap[i, j] = lap[j, i] = -1.0
                lap[i, i] += 1.0
                lap[j, j] += 1.0
        pinv = np.linalg.pinv(lap)
        for u in comp:
            i = idx[u]
            total = sum(pinv[i, i] + pinv[j, j] - 2 * pinv[i, j] for j in range(n))
            out[u] = n / total
    return out


def walk_endpoint_distribution(adj, start, h):
    """Breadth-first enumeration of all self-avoiding walks of up to h steps."""
    dist = {}
    queue = deque([((start,), 1.0)])
    if not adj[start]:
        return dist
    while queue:
        path, p = queue.popleft()
        free = sorted(v for v in adj[path[-1]] if v not in path)
        if len(path) - 1 == h or not free:
            dist[path[-1]] = dist.get(path[-1], 0.0) + p
            continue
        for v in free:
            queue.append((path + (v,), p / len(free)))
    return dist


def brute_accessibility(nodes, edges, h):
    adj = adjacency_sets(nodes, edges)
    out = {}
    for u in nodes:
        d = walk_endpoint_distribution(adj, u, h)
        out[u] = math.exp(-sum(p * math.log(p) for p in d.values())) if d else 0.0
    return out


def brute_expected_force(nodes, edges):
    """Enumerate ordered node pairs (a, b) forming two-transmission clusters."""
    edge_set = {frozenset(e) for e in edges}
    out = {}
    for s in nodes:
        degs = []
        for a in nodes:
            if frozenset((s, a)) not in edge_set:
                continue
            for b in nodes:
                if b in (s, a):
                    continue
                if frozenset((s, b)) not in edge_set and frozenset((a, b)) not in edge_set:
                    continue
                cluster = {s, a, b}
                degs.append(sum(1 for e in edge_set if len(e & cluster) == 1))
        total = sum(degs)
        out[s] = -sum(d / total * math.log(d / total) for d in degs if d) if total else 0.0
    return out


def random_small_graph(rng, max_nodes=9, min_nodes=2):
    """Random simple graph on nodes 0..n-1 with a random edge density."""
    n = int(rng.integers(min_nodes, max_nodes + 1))
    p = rng.uniform(0.1, 0.9)
    edges = [(u, v) for u, v in itertools.combinations(range(n), 2) if rng.random() < p]
    return list(range(n)), edges
