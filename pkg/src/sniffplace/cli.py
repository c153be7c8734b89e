"""Command-line interface.

Exit codes: 0 success, 1 runtime failure, 2 configuration error. Every
subcommand validates its configuration and inputs before writing anything,
so a failed run leaves no partial artifacts.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import baselines
from .centrality import MEASURES, CentralityVector, compute, write_centrality_csv
from .evaluation import (
    EvaluationReport,
    LostRule,
    evaluate,
    report_row,
    sweep_k,
    write_histogram_csv,
    write_report_csv,
)
from .graph_model import (
    RoadGraph,
    TrajectorySet,
    generate_geometric_graph,
    generate_grid_graph,
    generate_trajectories,
    load_graph,
    load_trajectories,
    save_graph,
    save_trajectories,
)
from .placement import Placement, place
from .vertex_cover import ALGORITHMS, compute_cover

logger = logging.getLogger("sniffplace")

APRIORI_METHODS = ("strength_apriori", "greedy_lost", "greedy_no_lost", "greedy_traj", "greedy_no_traj")
BASELINE_METHODS = APRIORI_METHODS + ("random",)
PLACE_MEASURES = MEASURES + ("strength_apriori",)


class ConfigError(Exception):
    """Invalid or inconsistent run configuration (exit status 2)."""


@dataclass
class RunConfig:
    command: str
    graph: Path | None = None
    trajectories: Path | None = None
    measure: str = "degree"
    cover_alg: str = "bar_yehuda_even"
    k: int | None = None
    k_min: int | None = None
    k_max: int | None = None
    lost_mode: str = "percent"
    lost_threshold: float | None = None
    seed: int = 0
    out: Path = Path(".")
    threads: int = 1
    methods: list[str] = field(default_factory=list)
    placement: Path | None = None
    geojson: bool = False
    sizes: list[float] = field(default_factory=list)
    runs: int = 10
    budget: int | None = None
    on_error: str = "abort"

    @property
    def has_k_range(self) -> bool:
        return self.k_min is not None or self.k_max is not None

    def rule(self) -> LostRule:
        threshold = self.lost_threshold
        if threshold is None:
            threshold = 0.2 if self.lost_mode == "percent" else 4
        try:
            return LostRule(self.lost_mode, threshold)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def validate(self) -> None:
        cmd = self.command
        needs_graph = cmd not in ("generate",)
        needs_traj = cmd in ("evaluate", "sweep", "baseline", "compare", "pipeline") or (
            cmd in ("place",) and self.measure == "strength_apriori")
        if needs_graph:
            if self.graph is None:
                raise ConfigError("--graph is required")
            if not self.graph.exists():
                raise ConfigError(f"graph file not found: {self.graph}")
        if needs_traj:
            if self.trajectories is None:
                raise ConfigError("--trajectories is required")
            if not self.trajectories.exists():
                raise ConfigError(f"trajectories file not found: {self.trajectories}")
        if self.measure not in PLACE_MEASURES and not (cmd == "centrality" and self.measure == "all"):
            raise ConfigError(f"unknown measure {self.measure!r}")
        if self.cover_alg not in ALGORITHMS:
            raise ConfigError(f"unknown cover algorithm {self.cover_alg!r}")
        if self.has_k_range:
            if cmd not in ("sweep", "pipeline", "compare"):
                raise ConfigError(f"--k-min/--k-max only apply to sweeps, not {cmd!r}")
            if self.k is not None:
                raise ConfigError("give either --k or --k-min/--k-max, not both")
        k_lo, k_hi = self.k_range()
        if k_lo < 0 or k_hi < k_lo:
            raise ConfigError(f"invalid k range [{k_lo}, {k_hi}]")
        if self.k is not None and self.k < 0:
            raise ConfigError("--k must be >= 0")
        if cmd in ("place",) and self.k is None:
            raise ConfigError("--k is required")
        if cmd == "evaluate" and self.k is None and self.placement is None:
            raise ConfigError("evaluate needs --k or --placement")
        if cmd == "export-geojson" and self.placement is None:
            raise ConfigError("--placement is required")
        if self.placement is not None and not self.placement.exists():
            raise ConfigError(f"placement file not found: {self.placement}")
        if cmd == "compare" and not self.methods:
            raise ConfigError("--methods must name at least one method")
        if cmd == "baseline" and len(self.methods) != 1:
            raise ConfigError("baseline takes exactly one --methods entry")
        for m in self.methods:
            if m not in PLACE_MEASURES and m not in BASELINE_METHODS:
                raise ConfigError(f"unknown method {m!r}")
        if self.threads < 1:
            raise ConfigError("--threads must be >= 1")
        if self.runs < 1:
            raise ConfigError("--runs must be >= 1")
        self.rule()

    def k_range(self) -> tuple[int, int]:
        lo = 0 if self.k_min is None else self.k_min
        hi = 30 if self.k_max is None else self.k_max
        return lo, hi


# -- helpers -------------------------------------------------------------------


def _dump_json(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n", encoding="utf-8")


def _table_row(label: str, k, report: EvaluationReport) -> str:
    """Display row: percentages to 2 decimals, efficiency to 3."""
    return (f"{label:<18} {str(k):>5} {100 * report.sniffer_fraction:7.2f}% "
            f"{100 * report.lost_fraction:7.2f}% {report.efficiency:.3f}")


def _centrality(graph: RoadGraph, measure: str, trajs: TrajectorySet | None) -> CentralityVector:
    if measure == "strength_apriori":
        if trajs is None:
            raise ConfigError("strength_apriori needs --trajectories")
        return baselines.strength_apriori(graph, trajs)
    return compute(graph, measure)


def placement_geojson(placement: Placement, graph: RoadGraph) -> dict:
    """GeoJSON FeatureCollection of the selected nodes in the graph's planar frame."""
    if placement.graph_id and placement.graph_id != graph.graph_id:
        raise ValueError("placement belongs to a different graph")
    features = []
    for order, sel in enumerate(placement.selected):
        if sel.node not in graph:
            raise ValueError(f"placement node {sel.node} not in graph")
        x, y = graph.coords(sel.node)
        features.append({
            "type": "Feature",
            "geometry": {"type": "Point", "coordinates": [x, y]},
            "properties": {"node": sel.node, "c": sel.c, "radius": sel.radius, "pick_order": order},
        })
    return {
        "type": "FeatureCollection",
        "features": features,
        "properties": {
            "crs": "planar-meters",
            "projection_origin": list(graph.origin) if graph.origin is not None else None,
            "k": placement.k,
            "measure": placement.measure,
            "cover_algorithm": placement.cover_algorithm,
        },
    }


def _size_grid(cfg: RunConfig, n: int) -> list[int]:
    fracs = cfg.sizes or [0.05 * i for i in range(1, 11)]
    out = []
    for f in fracs:
        s = int(f) if f >= 1 else max(1, round(f * n))
        if s not in out:
            out.append(min(s, n))
    return out


def run_method(method: str, cfg: RunConfig, graph: RoadGraph, trajs: TrajectorySet,
               rule: LostRule, cover=None) -> tuple[str, object, EvaluationReport, str]:
    """Run one comparison method; returns (label, k/h/size, report, group)."""
    if method in PLACE_MEASURES:
        if cover is None:
            cover = compute_cover(graph, cfg.cover_alg)
        cent = _centrality(graph, method, trajs)
        k_lo, k_hi = (cfg.k, cfg.k) if cfg.k is not None else cfg.k_range()
        res = sweep_k(graph, trajs, cover, cent, rule, k_lo, k_hi, threads=cfg.threads)
        group = "apriori" if method == "strength_apriori" else "centrality"
        return method, res.best_k, res.best, group
    if method == "random":
        res = baselines.random_placement(graph, trajs, rule, _size_grid(cfg, len(graph)),
                                         runs=cfg.runs, seed=cfg.seed, threads=cfg.threads)
        return method, res.best_size, res.best, "random"
    objective = "lost" if method.endswith("lost") else "traj"
    if method.startswith("greedy_no_"):
        res = baselines.greedy_placement(graph, trajs, rule, baselines.GreedyMode(objective, "exhaustion"))
        if not res.curve:
            return method, 0, evaluate(graph, trajs, [], rule), "apriori"
        return method, len(res.nodes), res.final, "apriori"
    if cfg.budget is not None:
        res = baselines.greedy_placement(graph, trajs, rule,
                                         baselines.GreedyMode(objective, "budget", cfg.budget))
        return method, len(res.nodes), res.final, "apriori"
    h, curve = baselines.greedy_budget_sweep(graph, trajs, rule, objective)
    return method, h, curve[h - 1], "apriori"


# -- commands ------------------------------------------------------------------


def _load(cfg: RunConfig, need_traj: bool) -> tuple[RoadGraph, TrajectorySet | None]:
    graph = load_graph(cfg.graph)
    trajs = None
    if need_traj and cfg.trajectories is not None:
        trajs = load_trajectories(cfg.trajectories, graph, on_error=cfg.on_error)
    return graph, trajs


def cmd_generate(cfg: RunConfig, args: argparse.Namespace) -> int:
    if args.kind == "grid":
        graph = generate_grid_graph(args.rows, args.cols, args.spacing)
    else:
        graph = generate_geometric_graph(args.n, args.radius, cfg.seed)
    trajs = generate_trajectories(graph, args.count, args.min_len, cfg.seed) if args.count else None
    cfg.out.mkdir(parents=True, exist_ok=True)
    save_graph(graph, cfg.out / "graph.json", "json")
    if trajs is not None:
        save_trajectories(trajs, cfg.out / "trajectories.txt")
    print(f"graph: {len(graph)} nodes, {graph.number_of_edges} edges"
          + (f"; {len(trajs)} trajectories" if trajs is not None else ""))
    return 0


def cmd_cover(cfg: RunConfig, args) -> int:
    graph, _ = _load(cfg, False)
    cover = compute_cover(graph, cfg.cover_alg)
    cfg.out.mkdir(parents=True, exist_ok=True)
    _dump_json(cover.to_json(), cfg.out / "cover.json")
    print(f"{cover.algorithm}: {len(cover)} of {len(graph)} nodes")
    return 0


def cmd_centrality(cfg: RunConfig, args) -> int:
    graph, trajs = _load(cfg, True)
    measures = MEASURES if cfg.measure == "all" else (cfg.measure,)
    vectors = [_centrality(graph, m, trajs) for m in measures]
    cfg.out.mkdir(parents=True, exist_ok=True)
    for m, vec in zip(measures, vectors):
        write_centrality_csv(vec, cfg.out / f"centrality_{m}.csv")
    return 0


def cmd_place(cfg: RunConfig, args) -> int:
    graph, trajs = _load(cfg, True)
    cover = compute_cover(graph, cfg.cover_alg)
    p = place(graph, cover, _centrality(graph, cfg.measure, trajs), cfg.k)
    cfg.out.mkdir(parents=True, exist_ok=True)
    _dump_json(p.to_json(), cfg.out / "placement.json")
    print(f"{len(p)} sniffers of {len(graph)} nodes (cover {len(cover)})")
    return 0


def cmd_evaluate(cfg: RunConfig, args) -> int:
    graph, trajs = _load(cfg, True)
    rule = cfg.rule()
    if cfg.placement is not None:
        p = Placement.from_json(json.loads(cfg.placement.read_text(encoding="utf-8")), graph.graph_id)
        label, k = p.measure, p.k
    else:
        cover = compute_cover(graph, cfg.cover_alg)
        p = place(graph, cover, _centrality(graph, cfg.measure, trajs), cfg.k)
        label, k = cfg.measure, cfg.k
    report = evaluate(graph, trajs, p.nodes, rule)
    cfg.out.mkdir(parents=True, exist_ok=True)
    write_report_csv([report_row(report, label, p.cover_algorithm, k)], cfg.out / "report.csv")
    write_histogram_csv(report, cfg.out / "histogram.csv")
    print(_table_row(label, k, report))
    return 0


def cmd_sweep(cfg: RunConfig, args) -> int:
    graph, trajs = _load(cfg, True)
    rule = cfg.rule()
    cover = compute_cover(graph, cfg.cover_alg)
    cent = _centrality(graph, cfg.measure, trajs)
    lo, hi = cfg.k_range()
    res = sweep_k(graph, trajs, cover, cent, rule, lo, hi, threads=cfg.threads)
    cfg.out.mkdir(parents=True, exist_ok=True)
    write_report_csv([report_row(r, cfg.measure, cfg.cover_alg, k) for k, r in res.curve],
                     cfg.out / "sweep.csv")
    print(_table_row(cfg.measure, res.best_k, res.best))
    return 0


def cmd_baseline(cfg: RunConfig, args) -> int:
    graph, trajs = _load(cfg, True)
    rule = cfg.rule()
    label, k, report, _ = run_method(cfg.methods[0], cfg, graph, trajs, rule)
    cfg.out.mkdir(parents=True, exist_ok=True)
    write_report_csv([report_row(report, label, "", k)], cfg.out / f"baseline_{label}.csv")
    print(_table_row(label, k, report))
    return 0


_GROUP_ORDER = {"apriori": 0, "centrality": 1, "random": 2}


def cmd_compare(cfg: RunConfig, args) -> int:
    graph, trajs = _load(cfg, True)
    rule = cfg.rule()
    cover = compute_cover(graph, cfg.cover_alg) if any(m in PLACE_MEASURES for m in cfg.methods) else None
    results = [run_method(m, cfg, graph, trajs, rule, cover) for m in cfg.methods]
    results.sort(key=lambda r: (_GROUP_ORDER[r[3]], -r[2].efficiency, r[0]))
    rows = []
    for label, k, report, group in results:
        alg = cfg.cover_alg if label in PLACE_MEASURES else ""
        rows.append(report_row(report, label, alg, k))
    cfg.out.mkdir(parents=True, exist_ok=True)
    write_report_csv(rows, cfg.out / "comparison.csv")
    print(f"{'method':<18} {'k/h':>5} {'sniffers':>8} {'lost':>8} efficiency")
    for label, k, report, _ in results:
        print(_table_row(label, k, report))
    return 0


def cmd_export_geojson(cfg: RunConfig, args) -> int:
    graph, _ = _load(cfg, False)
    p = Placement.from_json(json.loads(cfg.placement.read_text(encoding="utf-8")), graph.graph_id)
    doc = placement_geojson(p, graph)
    cfg.out.mkdir(parents=True, exist_ok=True)
    _dump_json(doc, cfg.out / "placement.geojson")
    return 0


def cmd_pipeline(cfg: RunConfig, args) -> int:
    graph, trajs = _load(cfg, True)
    rule = cfg.rule()
    cover = compute_cover(graph, cfg.cover_alg)
    cent = _centrality(graph, cfg.measure, trajs)
    if cfg.k is not None:
        p = place(graph, cover, cent, cfg.k)
        report = evaluate(graph, trajs, p.nodes, rule)
    else:
        lo, hi = cfg.k_range()
        res = sweep_k(graph, trajs, cover, cent, rule, lo, hi, threads=cfg.threads)
        p, report = res.placements[res.best_k], res.best
    cfg.out.mkdir(parents=True, exist_ok=True)
    _dump_json(p.to_json(), cfg.out / "placement.json")
    write_report_csv([report_row(report, cfg.measure, cover.algorithm, p.k)], cfg.out / "report.csv")
    write_histogram_csv(report, cfg.out / "histogram.csv")
    if cfg.geojson:
        _dump_json(placement_geojson(p, graph), cfg.out / "placement.geojson")
    print(_table_row(cfg.measure, p.k, report))
    return 0


COMMANDS = {
    "generate": cmd_generate,
    "cover": cmd_cover,
    "centrality": cmd_centrality,
    "place": cmd_place,
    "evaluate": cmd_evaluate,
    "sweep": cmd_sweep,
    "baseline": cmd_baseline,
    "compare": cmd_compare,
    "export-geojson": cmd_export_geojson,
    "pipeline": cmd_pipeline,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--graph", type=Path, help="graph JSON file or CSV-pair directory")
    common.add_argument("--trajectories", type=Path, help="trajectory text file")
    common.add_argument("--measure", default="degree",
                        help=f"centrality: one of {', '.join(PLACE_MEASURES)} ('all' for centrality)")
    common.add_argument("--cover-alg", default="bar_yehuda_even", help=f"one of {', '.join(ALGORITHMS)}")
    common.add_argument("--k", type=int)
    common.add_argument("--k-min", type=int)
    common.add_argument("--k-max", type=int)
    common.add_argument("--lost-mode", choices=("percent", "count"), default="percent")
    common.add_argument("--lost-threshold", type=float,
                        help="fraction for percent mode (default 0.2), integer for count mode (default 4)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", type=Path, default=Path("."))
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    common.add_argument("--on-error", choices=("abort", "skip"), default="abort",
                        help="policy for invalid trajectory lines")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="sniffplace", description="Sniffer placement on road graphs.")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", parents=[common], help="synthetic graph and trajectories")
    gen.add_argument("--kind", choices=("grid", "geometric"), default="grid")
    gen.add_argument("--rows", type=int, default=10)
    gen.add_argument("--cols", type=int, default=10)
    gen.add_argument("--spacing", type=float, default=100.0)
    gen.add_argument("--n", type=int, default=200)
    gen.add_argument("--radius", type=float, default=0.12)
    gen.add_argument("--count", type=int, default=1000)
    gen.add_argument("--min-len", type=int, default=3)

    sub.add_parser("cover", parents=[common], help="compute a vertex cover")
    sub.add_parser("centrality", parents=[common], help="export centrality CSVs")
    sub.add_parser("place", parents=[common], help="run the placement heuristic")
    ev = sub.add_parser("evaluate", parents=[common], help="score one placement")
    ev.add_argument("--placement", type=Path, help="placement JSON (otherwise placed at --k)")
    sub.add_parser("sweep", parents=[common], help="efficiency as a function of k")
    bl = sub.add_parser("baseline", parents=[common], help="run one baseline method")
    cmp_ = sub.add_parser("compare", parents=[common], help="table of methods")
    for p in (bl, cmp_):
        p.add_argument("--methods", default="", help="comma-separated methods")
        p.add_argument("--sizes", default="",
                       help="random baseline sizes: fractions of |V| (<1) or counts (default 5%%..50%%)")
        p.add_argument("--runs", type=int, default=10)
        p.add_argument("--budget", type=int, help="fixed greedy budget h (default: sweep h)")
    ex = sub.add_parser("export-geojson", parents=[common], help="placement as GeoJSON points")
    ex.add_argument("--placement", type=Path)
    pipe = sub.add_parser("pipeline", parents=[common], help="cover, place, evaluate, export")
    pipe.add_argument("--geojson", action="store_true")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    def split(text: str) -> list[str]:
        return [t.strip() for t in text.split(",") if t.strip()]

    try:
        sizes = [float(s) for s in split(getattr(args, "sizes", ""))]
    except ValueError:
        raise ConfigError(f"bad --sizes value {args.sizes!r}") from None
    return RunConfig(
        command=args.command, graph=args.graph, trajectories=args.trajectories,
        measure=args.measure, cover_alg=args.cover_alg, k=args.k, k_min=args.k_min,
        k_max=args.k_max, lost_mode=args.lost_mode, lost_threshold=args.lost_threshold,
        seed=args.seed, out=args.out, threads=args.threads,
        methods=split(getattr(args, "methods", "")), placement=getattr(args, "placement", None),
        geojson=getattr(args, "geojson", False), sizes=sizes, runs=getattr(args, "runs", 10),
        budget=getattr(args, "budget", None), on_error=args.on_error,
    )


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
        cfg.validate()
        return COMMANDS[cfg.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, AssertionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
