"""Comparison methods: random placement, trajectory-weighted strength, greedy picks.

The greedy and strength baselines use the trajectories themselves, so they
act as optimistic references rather than deployable strategies.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .centrality import CentralityVector, strength
from .evaluation import (
    EvaluationError,
    EvaluationReport,
    LostRule,
    _report_from_lost,
    efficiency,
    evaluate,
)
from .graph_model import RoadGraph, TrajectorySet

logger = logging.getLogger(__name__)

__all__ = [
    "GreedyMode",
    "GreedyResult",
    "RandomResult",
    "random_placement",
    "trajectory_weights",
    "strength_apriori",
    "greedy_placement",
    "greedy_budget_sweep",
]


# -- random ------------------------------------------------------------------


@dataclass(frozen=True)
class RandomResult:
    best_size: int
    reports: dict[int, EvaluationReport]
    run_efficiencies: dict[int, list[float]]

    @property
    def best(self) -> EvaluationReport:
        return self.reports[self.best_size]


def _mean_report(reports: list[EvaluationReport]) -> EvaluationReport:
    """Average runs of equal size; efficiency stays the product of the mean fractions."""
    first = reports[0]
    runs = len(reports)
    lost_count = sum(r.lost_count for r in reports) / runs
    lost_fraction = sum(r.lost_fraction for r in reports) / runs
    lengths = sorted({k for r in reports for k in r.lost_by_length})
    by_length = {}
    for length in lengths:
        lost = sum(r.lost_by_length.get(length, (0, 0))[0] for r in reports) / runs
        by_length[length] = (lost, first.lost_by_length[length][1])
    return EvaluationReport(first.sniffer_count, first.sniffer_fraction, lost_count, lost_fraction,
                            efficiency(first.sniffer_fraction, lost_fraction), by_length, first.rule,
                            first.trajectory_count, first.node_count)


def random_placement(graph: RoadGraph, trajectories: TrajectorySet, rule: LostRule,
                     sizes: Sequence[int], runs: int = 10, seed: int = 0,
                     threads: int = 1) -> RandomResult:
    """Uniform random node subsets, ``runs`` draws per size, averaged.

    Run ``r`` at size ``s`` draws from a generator seeded with ``(seed, s, r)``,
    so results do not depend on the order or parallelism of the runs.
    """
    n = len(graph)
    if not sizes:
        raise EvaluationError("no sizes given")
    if runs < 1:
        raise EvaluationError("runs must be >= 1")
    for s in sizes:
        if not 1 <= s <= n:
            raise EvaluationError(f"size {s} outside [1, {n}]")
    nodes = np.asarray(graph.nodes, dtype=np.int64)

    def run(job: tuple[int, int]) -> EvaluationReport:
        size, r = job
        rng = np.random.default_rng([seed, size, r])
        pick = rng.choice(nodes, size=size, replace=False)
        return evaluate(graph, trajectories, pick.tolist(), rule)

    jobs = [(s, r) for s in sizes for r in range(runs)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(j) for j in jobs]
    reports, effs = {}, {}
    for i, s in enumerate(sizes):
        chunk = results[i * runs:(i + 1) * runs]
        reports[s] = _mean_report(chunk)
        effs[s] = [rep.efficiency for rep in chunk]
    best = max(reports, key=lambda s: (reports[s].efficiency, -s))
    return RandomResult(best, reports, effs)


# -- a-priori strength -----------------------------------------------------------


def trajectory_weights(graph: RoadGraph, trajectories: TrajectorySet) -> dict[tuple[int, int], int]:
    """Number of trajectories using each edge (each trajectory counted once per edge)."""
    weights = dict.fromkeys(graph.edges, 0)
    for t in trajectories:
        for e in set(t.edges()):
            weights[e] += 1
    return weights


def strength_apriori(graph: RoadGraph, trajectories: TrajectorySet) -> CentralityVector:
    """Strength centrality with edges weighted by trajectory counts.

    The vector keeps the id of ``graph`` so it can drive :func:`placement.place`
    on the original graph.
    """
    cent = strength(graph.reweighted(trajectory_weights(graph, trajectories)))
    return CentralityVector.from_raw("strength_apriori", cent.raw, graph.graph_id)


# -- greedy ------------------------------------------------------------------


@dataclass(frozen=True)
class GreedyMode:
    """``objective`` in {lost, traj}; ``stop`` in {budget, exhaustion}."""

    objective: str
    stop: str
    budget: int | None = None

    def __post_init__(self):
        if self.objective not in ("lost", "traj"):
            raise EvaluationError(f"unknown greedy objective {self.objective!r}")
        if self.stop not in ("budget", "exhaustion"):
            raise EvaluationError(f"unknown greedy stop rule {self.stop!r}")
        if self.stop == "budget" and (self.budget is None or self.budget < 1):
            raise EvaluationError("budget stop needs budget >= 1")

    @property
    def label(self) -> str:
        """Row label used in comparison tables."""
        no = "no_" if self.stop == "exhaustion" else ""
        return f"greedy_{no}{self.objective}"


@dataclass(frozen=True)
class GreedyResult:
    nodes: list[int]
    curve: list[EvaluationReport]
    status: str  # "budget", "exhausted" or "stalled"

    @property
    def final(self) -> EvaluationReport | None:
        return self.curve[-1] if self.curve else None


def greedy_placement(graph: RoadGraph, trajectories: TrajectorySet, rule: LostRule,
                     mode: GreedyMode) -> GreedyResult:
    """Repeatedly monitor the best-scoring unmonitored vertex.

    The ``lost`` objective scores a vertex by the currently lost trajectories
    through it, the ``traj`` objective by all trajectories through it. Ties go
    to the smaller id. The run ends when the budget is spent, when nothing is
    lost any more (``exhausted``), or when no unmonitored vertex can still
    help: either every score is zero or no unmonitored vertex lies on a lost
    trajectory that could ever be recovered (``stalled``).
    """
    n = len(graph)
    if len(trajectories) == 0:
        raise EvaluationError("empty trajectory set: efficiency is undefined")
    if mode.budget is not None and mode.budget > n:
        raise EvaluationError(f"budget {mode.budget} exceeds |V| = {n}")
    idx = graph.index_map()
    # visits[v] -> (trajectory ids, multiplicities) for trajectories through v
    visits: list[dict[int, int]] = [dict() for _ in range(n)]
    for ti, t in enumerate(trajectories):
        for node in t.node_seq:
            d = visits[idx[node]]
            d[ti] = d.get(ti, 0) + 1
    sizes = trajectories.flat[2]
    observed = np.zeros(len(trajectories), dtype=np.int64)
    lost = np.asarray(rule.lost(observed, sizes), dtype=bool)
    recoverable = np.asarray(rule.recoverable(sizes), dtype=bool)
    traj_score = np.array([len(v) for v in visits], dtype=np.int64)
    lost_score = np.array([sum(1 for ti in v if lost[ti]) for v in visits], dtype=np.int64)
    hope = np.array([sum(1 for ti in v if lost[ti] and recoverable[ti]) for v in visits],
                    dtype=np.int64)
    monitored = np.zeros(n, dtype=bool)
    limit = mode.budget if mode.stop == "budget" else n
    picks: list[int] = []
    curve: list[EvaluationReport] = []
    status = "budget"
    while True:
        if not lost.any():
            status = "exhausted"
            break
        if len(picks) >= limit:
            status = "budget"
            break
        score = lost_score if mode.objective == "lost" else traj_score
        masked = np.where(monitored, -1, score)
        best = int(np.argmax(masked))  # first max = smallest id, nodes are sorted
        if masked[best] <= 0 or not (hope[~monitored] > 0).any():
            status = "stalled"
            break
        monitored[best] = True
        picks.append(graph.nodes[best])
        for ti, mult in visits[best].items():
            observed[ti] += mult
            if lost[ti] and not rule.lost(observed[ti], sizes[ti]):
                lost[ti] = False
                for node in set(trajectories[ti].node_seq):
                    j = idx[node]
                    lost_score[j] -= 1
                    if recoverable[ti]:
                        hope[j] -= 1
        curve.append(_report_from_lost(lost, sizes, len(picks), n, rule))
    if status == "stalled":
        logger.info("greedy %s stalled after %d picks with %d lost", mode.label, len(picks),
                    int(lost.sum()))
    return GreedyResult(picks, curve, status)


def greedy_budget_sweep(graph: RoadGraph, trajectories: TrajectorySet, rule: LostRule,
                        objective: str) -> tuple[int, list[EvaluationReport]]:
    """Evaluate every prefix of one greedy run; best prefix length, ties to the shortest."""
    res = greedy_placement(graph, trajectories, rule, GreedyMode(objective, "budget", len(graph)))
    if not res.curve:
        raise EvaluationError("greedy made no pick; nothing to sweep")
    best = max(range(len(res.curve)), key=lambda i: (res.curve[i].efficiency, -i))
    return best + 1, res.curve
