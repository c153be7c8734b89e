"""Road graph and trajectory data model, file formats and synthetic generators.

A road graph is undirected and simple: vertices are street intersections with
planar coordinates (meters), edges are street sections with a nonnegative
weight. Trajectories are walks through the graph stored as node sequences.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

logger = logging.getLogger(__name__)

__all__ = [
    "GraphError",
    "GraphFormatError",
    "TrajectoryError",
    "RoadGraph",
    "Trajectory",
    "TrajectorySet",
    "load_graph",
    "save_graph",
    "load_trajectories",
    "save_trajectories",
    "generate_grid_graph",
    "generate_geometric_graph",
    "generate_trajectories",
    "hop_distances",
    "euclidean_distance",
    "connected_components",
    "DEFAULT_MAX_NODES",
]

DEFAULT_MAX_NODES = 10**6
EARTH_RADIUS_M = 6_371_008.8


class GraphError(ValueError):
    """Invalid graph structure or an operation referencing unknown nodes."""


class GraphFormatError(GraphError):
    """A graph file that does not parse or violates the graph invariants.

    ``location`` names the offending file position (e.g. ``edges.csv:4``).
    """

    def __init__(self, message: str, location: str | None = None):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


class TrajectoryError(ValueError):
    """Invalid trajectory, or trajectory generation that cannot be satisfied."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def _edge_key(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


class RoadGraph:
    """Immutable undirected simple graph with planar node coordinates.

    Parameters
    ----------
    nodes : mapping of node id to ``(x, y)`` in meters
    edges : iterable of ``(u, v)`` or ``(u, v, weight)``
    origin : optional ``(lat, lon)`` projection origin, recorded when the
        coordinates were projected from geographic input.

    Invariant violations raise :class:`GraphError` (or its subclass
    :class:`GraphFormatError` when ``locations`` are known, as in loaders).
    """

    def __init__(
        self,
        nodes: Mapping[int, tuple[float, float]],
        edges: Iterable[Sequence[float]] = (),
        origin: tuple[float, float] | None = None,
        *,
        _locations: Sequence[str] | None = None,
    ):
        coords: dict[int, tuple[float, float]] = {}
        for nid, xy in nodes.items():
            coords[int(nid)] = (float(xy[0]), float(xy[1]))
        adj: dict[int, set[int]] = {nid: set() for nid in coords}
        weights: dict[tuple[int, int], float] = {}
        for i, e in enumerate(edges):
            where = _locations[i] if _locations is not None else None
            err = GraphFormatError if where is not None else GraphError
            if len(e) not in (2, 3):
                raise err(f"edge must be [u, v] or [u, v, weight], got {list(e)!r}", where)
            u, v = int(e[0]), int(e[1])
            w = float(e[2]) if len(e) == 3 else 1.0
            if u not in adj or v not in adj:
                missing = u if u not in adj else v
                raise err(f"edge ({u}, {v}) references unknown node {missing}", where)
            if u == v:
                raise err(f"self-loop on node {u} rejected", where)
            if not (w >= 0.0) or math.isinf(w):
                raise err(f"edge ({u}, {v}) has invalid weight {w}", where)
            key = _edge_key(u, v)
            if key in weights:
                raise err(f"duplicate undirected edge ({u}, {v})", where)
            weights[key] = w
            adj[u].add(v)
            adj[v].add(u)
        self._coords = coords
        self._nodes = tuple(sorted(coords))
        self._adj = {nid: tuple(sorted(nbrs)) for nid, nbrs in adj.items()}
        self._weights = dict(sorted(weights.items()))
        self.origin = None if origin is None else (float(origin[0]), float(origin[1]))

    @classmethod
    def from_edges(
        cls, edges: Iterable[Sequence[float]], nodes: Iterable[int] | None = None
    ) -> RoadGraph:
        """Build a graph with all coordinates at the origin (handy for tests)."""
        edges = [tuple(e) for e in edges]
        ids = set(nodes) if nodes is not None else set()
        for e in edges:
            ids.update((int(e[0]), int(e[1])))
        return cls({nid: (0.0, 0.0) for nid in ids}, edges)

    # -- basic accessors -------------------------------------------------

    @property
    def nodes(self) -> tuple[int, ...]:
        """Node ids in ascending order."""
        return self._nodes

    @property
    def edges(self) -> tuple[tuple[int, int], ...]:
        """Edges as ``(min, max)`` pairs in ascending order."""
        return tuple(self._weights)

    @property
    def weights(self) -> dict[tuple[int, int], float]:
        return dict(self._weights)

    def __len__(self) -> int:
        return len(self._nodes)

    def __contains__(self, node: object) -> bool:
        return node in self._adj

    @property
    def number_of_edges(self) -> int:
        return len(self._weights)

    def neighbors(self, node: int) -> tuple[int, ...]:
        """Neighbors of ``node`` in ascending id order."""
        try:
            return self._adj[node]
        except KeyError:
            raise GraphError(f"unknown node {node}") from None

    def degree(self, node: int) -> int:
        return len(self.neighbors(node))

    def has_edge(self, u: int, v: int) -> bool:
        return _edge_key(u, v) in self._weights

    def weight(self, u: int, v: int) -> float:
        try:
            return self._weights[_edge_key(u, v)]
        except KeyError:
            raise GraphError(f"no edge ({u}, {v})") from None

    def coords(self, node: int) -> tuple[float, float]:
        try:
            return self._coords[node]
        except KeyError:
            raise GraphError(f"unknown node {node}") from None

    def reweighted(self, weights: Mapping[tuple[int, int], float]) -> RoadGraph:
        """Copy of this graph with edge weights replaced (missing edges keep theirs)."""
        new = []
        for (u, v), w in self._weights.items():
            new.append((u, v, weights.get((u, v), weights.get((v, u), w))))
        return RoadGraph(self._coords, new, self.origin)

    def index_map(self) -> dict[int, int]:
        """Position of each node id in :attr:`nodes`."""
        return {nid: i for i, nid in enumerate(self._nodes)}

    # -- identity --------------------------------------------------------

    def to_dict(self) -> dict:
        """Canonical JSON-ready form (sorted nodes and edges)."""
        out: dict = {
            "nodes": [
                {"id": nid, "x": self._coords[nid][0], "y": self._coords[nid][1]}
                for nid in self._nodes
            ],
            "edges": [[u, v, w] for (u, v), w in self._weights.items()],
        }
        if self.origin is not None:
            out["origin"] = list(self.origin)
        return out

    @cached_property
    def graph_id(self) -> str:
        """Content fingerprint; equal graphs share it regardless of input order."""
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RoadGraph):
            return NotImplemented
        return (
            self._coords == other._coords
            and self._weights == other._weights
            and self.origin == other.origin
        )

    def __hash__(self) -> int:
        return hash(self.graph_id)

    def __repr__(self) -> str:
        return f"RoadGraph(nodes={len(self)}, edges={self.number_of_edges})"


@dataclass(frozen=True)
class Trajectory:
    """A walk through the road graph, stored as its node sequence."""

    node_seq: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "node_seq", tuple(int(n) for n in self.node_seq))
        if len(self.node_seq) < 2:
            raise TrajectoryError(f"trajectory needs at least 2 nodes, got {len(self.node_seq)}")

    @property
    def length(self) -> int:
        """Number of edges traversed."""
        return len(self.node_seq) - 1

    def edges(self) -> list[tuple[int, int]]:
        return [_edge_key(a, b) for a, b in zip(self.node_seq, self.node_seq[1:])]

    def validate(self, graph: RoadGraph) -> None:
        for n in self.node_seq:
            if n not in graph:
                raise TrajectoryError(f"unknown node id {n}")
        for a, b in zip(self.node_seq, self.node_seq[1:]):
            if not graph.has_edge(a, b):
                raise TrajectoryError(f"non-adjacent step {a} -> {b}")


@dataclass(frozen=True)
class TrajectorySet:
    """Trajectories validated against the graph identified by ``graph_id``.

    ``rejected`` holds ``(line, message)`` pairs for lines skipped on load.
    """

    trajectories: tuple[Trajectory, ...]
    graph_id: str
    rejected: tuple[tuple[int, str], ...] = ()

    @classmethod
    def build(cls, graph: RoadGraph, trajectories: Iterable[Trajectory | Sequence[int]]) -> TrajectorySet:
        items = []
        for t in trajectories:
            t = t if isinstance(t, Trajectory) else Trajectory(tuple(t))
            t.validate(graph)
            items.append(t)
        return cls(tuple(items), graph.graph_id)

    def __len__(self) -> int:
        return len(self.trajectories)

    def __iter__(self):
        return iter(self.trajectories)

    def __getitem__(self, i: int) -> Trajectory:
        return self.trajectories[i]

    @cached_property
    def flat(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(node_ids, starts, sizes)``: all node sequences concatenated."""
        sizes = np.fromiter((len(t.node_seq) for t in self.trajectories), dtype=np.int64,
                            count=len(self.trajectories))
        starts = np.zeros(len(sizes), dtype=np.int64)
        if len(sizes):
            np.cumsum(sizes[:-1], out=starts[1:])
        ids = np.fromiter((n for t in self.trajectories for n in t.node_seq), dtype=np.int64,
                          count=int(sizes.sum()))
        return ids, starts, sizes


# -- file formats ----------------------------------------------------------


def _project(lat: float, lon: float, lat0: float, lon0: float) -> tuple[float, float]:
    """Equirectangular projection around ``(lat0, lon0)``; returns meters."""
    x = math.radians(lon - lon0) * math.cos(math.radians(lat0)) * EARTH_RADIUS_M
    y = math.radians(lat - lat0) * EARTH_RADIUS_M
    return x, y


def _nodes_from_records(records: list[tuple[dict, str]]):
    """Turn parsed node records into coordinates, projecting lat/lon if present."""
    ids: list[int] = []
    seen: set[int] = set()
    geo = None
    for rec, where in records:
        try:
            nid = int(rec["id"])
        except (KeyError, TypeError, ValueError):
            raise GraphFormatError("node needs an integer 'id'", where) from None
        if nid in seen:
            raise GraphFormatError(f"duplicate node id {nid}", where)
        seen.add(nid)
        ids.append(nid)
        has_xy = rec.get("x") not in (None, "") and rec.get("y") not in (None, "")
        has_ll = rec.get("lat") not in (None, "") and rec.get("lon") not in (None, "")
        if not has_xy and not has_ll:
            raise GraphFormatError(f"node {nid} needs x/y or lat/lon", where)
        if geo is None:
            geo = not has_xy
        elif geo == has_xy:
            raise GraphFormatError("mixed planar and lat/lon coordinates", where)
    coords: dict[int, tuple[float, float]] = {}
    origin = None
    try:
        if geo:
            lats = [float(r["lat"]) for r, _ in records]
            lons = [float(r["lon"]) for r, _ in records]
            origin = (sum(lats) / len(lats), sum(lons) / len(lons))
            for nid, lat, lon in zip(ids, lats, lons):
                coords[nid] = _project(lat, lon, *origin)
        else:
            for nid, (rec, _) in zip(ids, records):
                coords[nid] = (float(rec["x"]), float(rec["y"]))
    except (TypeError, ValueError) as exc:
        raise GraphFormatError(f"bad coordinate: {exc}") from None
    return coords, origin


def _load_json_graph(path: Path) -> RoadGraph:
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"invalid JSON: {exc.msg}", f"{path}:{exc.lineno}") from None
    if not isinstance(data, dict) or "nodes" not in data or "edges" not in data:
        raise GraphFormatError("expected an object with 'nodes' and 'edges'", str(path))
    records = []
    for i, rec in enumerate(data["nodes"]):
        if not isinstance(rec, dict):
            raise GraphFormatError("node entry must be an object", f"{path}:nodes[{i}]")
        records.append((rec, f"{path}:nodes[{i}]"))
    coords, origin = _nodes_from_records(records)
    if origin is None and data.get("origin") is not None:
        origin = tuple(data["origin"])
    edges, locs = [], []
    for i, e in enumerate(data["edges"]):
        where = f"{path}:edges[{i}]"
        if not isinstance(e, list) or len(e) not in (2, 3):
            raise GraphFormatError("edge must be [u, v] or [u, v, weight]", where)
        try:
            edges.append([int(e[0]), int(e[1])] + [float(x) for x in e[2:]])
        except (TypeError, ValueError):
            raise GraphFormatError(f"non-numeric edge entry {e!r}", where) from None
        locs.append(where)
    return RoadGraph(coords, edges, origin, _locations=locs)


def _csv_pair_paths(path: Path, edges_path: Path | None) -> tuple[Path, Path]:
    if path.is_dir():
        return path / "nodes.csv", path / "edges.csv"
    if edges_path is None:
        edges_path = path.with_name("edges.csv")
    return path, edges_path


def _load_csv_graph(path: Path, edges_path: Path | None) -> RoadGraph:
    nodes_file, edges_file = _csv_pair_paths(path, edges_path)
    for f in (nodes_file, edges_file):
        if not f.exists():
            raise GraphFormatError("file not found", str(f))
    records = []
    with nodes_file.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "id" not in reader.fieldnames:
            raise GraphFormatError("missing header with 'id' column", f"{nodes_file}:1")
        for rec in reader:
            records.append((rec, f"{nodes_file}:{reader.line_num}"))
    coords, origin = _nodes_from_records(records)
    edges, locs = [], []
    with edges_file.open(newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or row[0].strip().startswith("#"):
                continue
            where = f"{edges_file}:{lineno}"
            try:
                vals = [int(row[0]), int(row[1])] + [float(x) for x in row[2:3]]
            except (ValueError, IndexError):
                if lineno == 1:
                    continue  # header row
                raise GraphFormatError(f"bad edge row {row!r}", where) from None
            if len(row) > 3:
                raise GraphFormatError(f"too many columns in {row!r}", where)
            edges.append(vals)
            locs.append(where)
    return RoadGraph(coords, edges, origin, _locations=locs)


def load_graph(path: str | Path, fmt: str | None = None, edges_path: str | Path | None = None) -> RoadGraph:
    """Load a road graph from ``json`` or ``csv`` (nodes.csv + edges.csv) form.

    ``fmt`` is inferred when omitted: a directory or ``.csv`` path is read as
    a CSV pair, anything else as JSON. For a CSV pair ``path`` may be the
    directory holding both files or the nodes file itself.
    """
    path = Path(path)
    if fmt is None:
        fmt = "csv" if path.is_dir() or path.suffix.lower() == ".csv" else "json"
    if fmt == "json":
        if not path.exists():
            raise GraphFormatError("file not found", str(path))
        return _load_json_graph(path)
    if fmt in ("csv", "csv-pair"):
        return _load_csv_graph(path, Path(edges_path) if edges_path else None)
    raise ValueError(f"unknown graph format {fmt!r}")


def save_graph(graph: RoadGraph, path: str | Path, fmt: str | None = None) -> None:
    path = Path(path)
    if fmt is None:
        fmt = "csv" if path.suffix == "" or path.is_dir() else "json"
    if fmt == "json":
        path.write_text(json.dumps(graph.to_dict(), indent=1) + "\n", encoding="utf-8")
        return
    path.mkdir(parents=True, exist_ok=True)
    with (path / "nodes.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "x", "y"])
        for nid in graph.nodes:
            w.writerow([nid, *map(repr, graph.coords(nid))])
    with (path / "edges.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["u", "v", "weight"])
        for (u, v), wt in graph.weights.items():
            w.writerow([u, v, repr(wt)])


def load_trajectories(path: str | Path, graph: RoadGraph, on_error: str = "abort") -> TrajectorySet:
    """Read one comma-separated trajectory per line and validate it on ``graph``.

    ``on_error`` is ``"abort"`` (raise on the first bad line) or ``"skip"``
    (drop bad lines and record them in ``TrajectorySet.rejected``).
    """
    if on_error not in ("abort", "skip"):
        raise ValueError(f"on_error must be 'abort' or 'skip', got {on_error!r}")
    accepted: list[Trajectory] = []
    rejected: list[tuple[int, str]] = []
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                try:
                    seq = [int(tok) for tok in line.split(",")]
                except ValueError:
                    raise TrajectoryError(f"non-integer node id in {line!r}") from None
                if len(seq) < 2:
                    raise TrajectoryError(f"trajectory needs at least 2 nodes, got {len(seq)}")
                t = Trajectory(tuple(seq))
                t.validate(graph)
            except TrajectoryError as exc:
                msg = str(exc)
                if on_error == "abort":
                    raise TrajectoryError(msg, lineno) from None
                rejected.append((lineno, msg))
                continue
            accepted.append(t)
    if rejected:
        logger.warning("skipped %d invalid trajectory lines", len(rejected))
    return TrajectorySet(tuple(accepted), graph.graph_id, tuple(rejected))


def save_trajectories(trajectories: Iterable[Trajectory], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        for t in trajectories:
            fh.write(",".join(map(str, t.node_seq)) + "\n")


# -- traversal ---------------------------------------------------------------


def hop_distances(graph: RoadGraph, source: int, cutoff: int | None = None) -> dict[int, int]:
    """Unweighted BFS hop counts from ``source``, omitting nodes beyond ``cutoff``."""
    if source not in graph:
        raise GraphError(f"unknown source node {source}")
    dist = {source: 0}
    if cutoff is not None and cutoff <= 0:
        return dist
    queue = deque([source])
    while queue:
        u = queue.popleft()
        du = dist[u] + 1
        for v in graph.neighbors(u):
            if v not in dist:
                dist[v] = du
                if cutoff is None or du < cutoff:
                    queue.append(v)
    return dist


def euclidean_distance(graph: RoadGraph, u: int, v: int) -> float:
    """Straight-line distance in meters between two nodes."""
    (x1, y1), (x2, y2) = graph.coords(u), graph.coords(v)
    return math.hypot(x1 - x2, y1 - y2)


def connected_components(graph: RoadGraph) -> list[list[int]]:
    """Components as sorted id lists, ordered by their smallest id."""
    seen: set[int] = set()
    comps = []
    for s in graph.nodes:
        if s in seen:
            continue
        comp = sorted(hop_distances(graph, s))
        seen.update(comp)
        comps.append(comp)
    return comps


# -- generators --------------------------------------------------------------


def generate_grid_graph(rows: int, cols: int, spacing: float = 100.0,
                        max_nodes: int = DEFAULT_MAX_NODES) -> RoadGraph:
    """Regular ``rows`` x ``cols`` lattice; node ``r * cols + c`` sits at ``(c, r) * spacing``."""
    if rows < 2 or cols < 2:
        raise GraphError(f"grid needs rows, cols >= 2, got {rows}x{cols}")
    if rows * cols > max_nodes:
        raise GraphError(f"grid {rows}x{cols} exceeds max_nodes={max_nodes}")
    if not spacing > 0:
        raise GraphError("spacing must be positive")
    nodes = {r * cols + c: (c * spacing, r * spacing) for r in range(rows) for c in range(cols)}
    edges = []
    for r in range(rows):
        for c in range(cols):
            u = r * cols + c
            if c + 1 < cols:
                edges.append((u, u + 1))
            if r + 1 < rows:
                edges.append((u, u + cols))
    return RoadGraph(nodes, edges)


def generate_geometric_graph(n: int, radius: float, seed: int, scale: float = 1000.0) -> RoadGraph:
    """Random geometric graph in the unit square, restricted to its largest component.

    Points are scaled by ``scale`` meters; edges join points at distance at most
    ``radius`` (unit-square units; any radius >= sqrt(2) gives a complete graph). Ties between equally large components go to
    the one holding the smallest node id. Surviving nodes keep their ids.
    """
    if n < 2:
        raise GraphError(f"n must be >= 2, got {n}")
    if not radius > 0:
        raise GraphError(f"radius must be positive, got {radius}")
    rng = np.random.default_rng(seed)
    pts = rng.random((n, 2))
    diff = pts[:, None, :] - pts[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    iu, ju = np.nonzero(np.triu(d2 <= radius * radius, k=1))
    full = RoadGraph({i: (pts[i, 0] * scale, pts[i, 1] * scale) for i in range(n)},
                     zip(iu.tolist(), ju.tolist()))
    comps = connected_components(full)
    keep = max(comps, key=len)
    if len(keep) < n:
        logger.info("geometric graph: kept largest component of %d/%d nodes", len(keep), n)
    keep_set = set(keep)
    return RoadGraph({i: full.coords(i) for i in keep},
                     [e for e in full.edges if e[0] in keep_set])


def _bfs_parents(graph: RoadGraph, source: int) -> dict[int, int]:
    parent = {source: source}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in graph.neighbors(u):
            if v not in parent:
                parent[v] = u
                queue.append(v)
    return parent


def generate_trajectories(graph: RoadGraph, count: int, min_len: int, seed: int,
                          max_attempts: int | None = None) -> TrajectorySet:
    """Shortest-path trajectories between random origin/destination pairs.

    Paths follow the BFS tree rooted at the origin, scanning neighbors by
    ascending id, so each path is a fixed hop-shortest path. Pairs closer than
    ``min_len`` hops are resampled, at most ``max_attempts`` draws in total
    (default ``1000 * count``).
    """
    if min_len < 1:
        raise TrajectoryError("min_len must be >= 1")
    if count < 0:
        raise TrajectoryError("count must be >= 0")
    nodes = graph.nodes
    if len(nodes) < 2 or len(connected_components(graph)) != 1:
        raise TrajectoryError("graph must be connected with at least 2 nodes")
    if max_attempts is None:
        max_attempts = 1000 * max(count, 1)
    rng = np.random.default_rng(seed)
    trees: dict[int, dict[int, int]] = {}
    out: list[Trajectory] = []
    attempts = 0
    while len(out) < count:
        if attempts >= max_attempts:
            raise TrajectoryError(
                f"only {len(out)} of {count} trajectories with length >= {min_len} "
                f"after {attempts} draws")
        attempts += 1
        a, b = rng.integers(0, len(nodes), size=2)
        origin, dest = nodes[int(a)], nodes[int(b)]
        if origin == dest:
            continue
        parent = trees.get(origin)
        if parent is None:
            parent = trees[origin] = _bfs_parents(graph, origin)
        path = [dest]
        while path[-1] != origin:
            path.append(parent[path[-1]])
        if len(path) - 1 < min_len:
            continue
        path.reverse()
        out.append(Trajectory(tuple(path)))
    return TrajectorySet(tuple(out), graph.graph_id)
