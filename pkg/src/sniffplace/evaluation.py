"""Scoring sniffer placements against trajectory sets.

A trajectory is *lost* when it is observed too rarely: either the share of
its visited positions that are monitored falls below a percentage, or the
number of monitored visits falls below a count. Placements are scored by

    efficiency = (1 - sniffers / |V|) * (1 - lost / |T|)
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .centrality import CentralityVector
from .graph_model import GraphError, RoadGraph, Trajectory, TrajectorySet
from .placement import Placement, place
from .vertex_cover import CoverSet

__all__ = [
    "EvaluationError",
    "LostRule",
    "EvaluationReport",
    "SweepResult",
    "observations",
    "is_lost",
    "efficiency",
    "observation_counts",
    "evaluate",
    "sweep_k",
    "REPORT_COLUMNS",
    "report_row",
    "write_report_csv",
    "write_histogram_csv",
]


class EvaluationError(ValueError):
    pass


@dataclass(frozen=True)
class LostRule:
    """``percent``: lost iff monitored share < threshold; ``count``: lost iff visits < threshold."""

    mode: str
    threshold: float

    def __post_init__(self):
        if self.mode == "percent":
            if not 0 < self.threshold <= 1:
                raise EvaluationError(f"percent threshold must lie in (0, 1], got {self.threshold}")
        elif self.mode == "count":
            if self.threshold < 1 or int(self.threshold) != self.threshold:
                raise EvaluationError(f"count threshold must be an integer >= 1, got {self.threshold}")
            object.__setattr__(self, "threshold", int(self.threshold))
        else:
            raise EvaluationError(f"unknown lost mode {self.mode!r}")

    @classmethod
    def percent(cls, x: float) -> LostRule:
        return cls("percent", x)

    @classmethod
    def count(cls, y: int) -> LostRule:
        return cls("count", y)

    def lost(self, observed, size):
        """Vectorized rule; works on scalars and numpy arrays alike."""
        if self.mode == "percent":
            return observed / size < self.threshold
        return observed < self.threshold

    def recoverable(self, size):
        """Whether a trajectory of ``size`` vertices can escape being lost at all."""
        return np.logical_not(self.lost(size, size))


@dataclass(frozen=True)
class EvaluationReport:
    sniffer_count: int
    sniffer_fraction: float
    lost_count: float
    lost_fraction: float
    efficiency: float
    lost_by_length: dict[int, tuple[float, int]]
    rule: LostRule
    trajectory_count: int = 0
    node_count: int = 0

    def to_json(self) -> dict:
        return {
            "sniffer_count": self.sniffer_count,
            "sniffer_fraction": self.sniffer_fraction,
            "lost_count": self.lost_count,
            "lost_fraction": self.lost_fraction,
            "efficiency": self.efficiency,
            "rule": {"mode": self.rule.mode, "threshold": self.rule.threshold},
            "lost_by_length": {str(k): list(v) for k, v in self.lost_by_length.items()},
        }


def observations(trajectory: Trajectory, monitored: Iterable[int]) -> int:
    """Monitored positions along the walk, revisits counted each time."""
    monitored = monitored if isinstance(monitored, (set, frozenset)) else set(monitored)
    return sum(1 for n in trajectory.node_seq if n in monitored)


def is_lost(trajectory: Trajectory, monitored: Iterable[int], rule: LostRule) -> bool:
    return bool(rule.lost(observations(trajectory, monitored), len(trajectory.node_seq)))


def efficiency(sniffer_fraction: float, lost_fraction: float) -> float:
    for name, val in (("sniffer_fraction", sniffer_fraction), ("lost_fraction", lost_fraction)):
        if not 0.0 <= val <= 1.0:
            raise EvaluationError(f"{name} must lie in [0, 1], got {val}")
    return (1.0 - sniffer_fraction) * (1.0 - lost_fraction)


def observation_counts(trajectories: TrajectorySet, monitored: Iterable[int]) -> np.ndarray:
    """Per-trajectory observation counts, vectorized over the whole set."""
    ids, starts, _ = trajectories.flat
    if len(starts) == 0:
        return np.zeros(0, dtype=np.int64)
    mon = np.fromiter(sorted(set(monitored)), dtype=np.int64)
    hits = np.isin(ids, mon).astype(np.int64)
    return np.add.reduceat(hits, starts)


def _check_monitored(graph: RoadGraph, monitored) -> set[int]:
    monitored = set(monitored)
    unknown = [m for m in monitored if m not in graph]
    if unknown:
        raise GraphError(f"monitored nodes not in graph: {sorted(unknown)[:10]}")
    return monitored


def _report_from_lost(lost: np.ndarray, sizes: np.ndarray, sniffers: int, n_nodes: int,
                      rule: LostRule) -> EvaluationReport:
    total = len(sizes)
    lost_count = int(lost.sum())
    lengths = sizes - 1
    by_length = {}
    for length in np.unique(lengths).tolist():
        mask = lengths == length
        by_length[int(length)] = (int(lost[mask].sum()), int(mask.sum()))
    s_frac = sniffers / n_nodes
    l_frac = lost_count / total
    return EvaluationReport(sniffers, s_frac, lost_count, l_frac, efficiency(s_frac, l_frac),
                            by_length, rule, total, n_nodes)


def evaluate(graph: RoadGraph, trajectories: TrajectorySet, monitored: Iterable[int],
             rule: LostRule) -> EvaluationReport:
    """Classify every trajectory and summarize the placement."""
    if len(trajectories) == 0:
        raise EvaluationError("empty trajectory set: efficiency is undefined")
    if trajectories.graph_id != graph.graph_id:
        raise EvaluationError("trajectories were validated against a different graph")
    monitored = _check_monitored(graph, monitored)
    sizes = trajectories.flat[2]
    lost = rule.lost(observation_counts(trajectories, monitored), sizes)
    return _report_from_lost(lost, sizes, len(monitored), len(graph), rule)


@dataclass(frozen=True)
class SweepResult:
    best_k: int
    curve: list[tuple[int, EvaluationReport]]
    placements: dict[int, Placement] = field(repr=False, default_factory=dict)

    @property
    def best(self) -> EvaluationReport:
        return dict(self.curve)[self.best_k]


def sweep_k(graph: RoadGraph, trajectories: TrajectorySet, cover: CoverSet, cent: CentralityVector,
            rule: LostRule, k_min: int = 0, k_max: int = 30, threads: int = 1) -> SweepResult:
    """Place and evaluate for every k in ``[k_min, k_max]``; best is the smallest k of max efficiency."""
    if k_max < k_min or k_min < 0:
        raise EvaluationError(f"empty or negative k range [{k_min}, {k_max}]")
    if len(trajectories) == 0:
        raise EvaluationError("empty trajectory set: efficiency is undefined")

    def run(k: int) -> tuple[Placement, EvaluationReport]:
        p = place(graph, cover, cent, k)
        return p, evaluate(graph, trajectories, p.nodes, rule)

    ks = list(range(k_min, k_max + 1))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, ks))
    else:
        results = [run(k) for k in ks]
    curve = [(k, rep) for k, (_, rep) in zip(ks, results)]
    best_k = max(curve, key=lambda kr: (kr[1].efficiency, -kr[0]))[0]
    return SweepResult(best_k, curve, {k: p for k, (p, _) in zip(ks, results)})


# -- CSV output --------------------------------------------------------------

REPORT_COLUMNS = ["measure", "cover_algorithm", "rule_mode", "rule_threshold", "k",
                  "sniffers_pct", "lost_pct", "efficiency"]


def report_row(report: EvaluationReport, measure: str, cover_algorithm: str = "",
               k: int | str = "") -> list:
    """One report CSV row at full precision (percentages scaled by 100)."""
    return [measure, cover_algorithm, report.rule.mode, report.rule.threshold, k,
            repr(100.0 * report.sniffer_fraction), repr(100.0 * report.lost_fraction),
            repr(report.efficiency)]


def write_report_csv(rows: Sequence[Sequence], path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        w.writerows(rows)


def write_histogram_csv(report: EvaluationReport, path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["length", "lost", "total"])
        for length, (lost, total) in sorted(report.lost_by_length.items()):
            w.writerow([length, lost, total])
