"""Sniffer placement by centrality-ranked pruning of a vertex cover.

The most central remaining cover member is kept, then every cover member
within ``round(k * c)`` hops of it is dropped, where ``c`` shrinks as the
kept node's centrality rank grows. Central (dense) areas therefore keep
more sniffers than peripheral ones.
"""

from __future__ import annotations

from dataclasses import dataclass

from .centrality import CentralityVector
from .graph_model import GraphError, RoadGraph, hop_distances
from .vertex_cover import CoverSet

__all__ = ["Selection", "Placement", "PlacementError", "rank_coefficient", "place"]


class PlacementError(GraphError):
    pass


@dataclass(frozen=True)
class Selection:
    node: int
    c: float
    radius: int


@dataclass(frozen=True)
class Placement:
    selected: tuple[Selection, ...]
    k: int
    measure: str
    cover_algorithm: str
    graph_id: str

    @property
    def nodes(self) -> list[int]:
        """Selected node ids in pick order."""
        return [s.node for s in self.selected]

    def __len__(self) -> int:
        return len(self.selected)

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "measure": self.measure,
            "cover_algorithm": self.cover_algorithm,
            "selected": [{"node": s.node, "c": s.c, "radius": s.radius} for s in self.selected],
        }

    @classmethod
    def from_json(cls, data: dict, graph_id: str = "") -> Placement:
        sel = tuple(Selection(int(s["node"]), float(s["c"]), int(s["radius"])) for s in data["selected"])
        return cls(sel, int(data["k"]), str(data["measure"]), str(data["cover_algorithm"]), graph_id)


def rank_coefficient(cent: CentralityVector, node: int, n: int) -> float:
    """``1 - index / n`` with ``index`` the node's position in the ascending order."""
    if n < 1:
        raise PlacementError("n must be >= 1")
    return 1.0 - cent.index_of(node) / n


def place(graph: RoadGraph, cover: CoverSet, cent: CentralityVector, k: int) -> Placement:
    """Prune ``cover`` into a sniffer placement for pruning parameter ``k``.

    Picks go by decreasing raw centrality (ties: smaller id first); hop
    distances are measured on the full graph. ``round`` is Python's
    round-half-to-even.
    """
    if k < 0:
        raise PlacementError(f"k must be >= 0, got {k}")
    gid = graph.graph_id
    if cover.graph_id != gid or cent.graph_id != gid:
        raise PlacementError("cover, centrality and graph do not belong together")
    n = len(graph)
    remaining = set(cover.members)
    queue = sorted(remaining, key=lambda u: (-cent.raw[u], u))
    selected = []
    for u in queue:
        if u not in remaining:
            continue
        c = rank_coefficient(cent, u, n)
        radius = round(k * c)
        selected.append(Selection(u, c, radius))
        remaining.discard(u)
        if radius > 0 and remaining:
            remaining.difference_update(hop_distances(graph, u, cutoff=radius))
    return Placement(tuple(selected), k, cent.measure, cover.algorithm, gid)
