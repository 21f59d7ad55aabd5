"""
Командная строка: python -m app <команда> ...

  bounds   эксперимент с удалением рёбер, границы по k и глобальные
  metrics  границы для готового CSV ячеек "p,n"
  orbits   дамп разбиения не-рёбер (орбиты или k-hop классы)
  oracle   переборные проверки замкнутых формул
  stats    характеристики графа
"""
import argparse
import sys
import time
from dataclasses import asdict
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
import structlog
from pydantic import ValidationError

from app import __version__
from app.models.canonical import Coloring
from app.models.experiment import (
    DEFAULT_K_MAX,
    DEFAULT_MAX_REDRAWS,
    DEFAULT_REMOVAL_PROB,
    DEFAULT_STOP_EPSILON,
    DEFAULT_TRIALS,
    DEFAULT_WORKERS,
    ExperimentConfig,
)
from app.models.oracle import OracleBudget, OracleMetric
from app.services.canonical import automorphism_generators
from app.services.experiment import compare_reported, run_experiment
from app.services.graph_core import graph_stats
from app.services.metrics import average_precision, bound_report, max_aupr, sort_cells
from app.services.oracle import aupr_numeric, best_ordering_exhaustive, brute_automorphisms, generated_group
from app.services.partition import global_orbit_partition, khop_partition, partition_rows
from app.utils.cells_csv import read_cells_file
from app.utils.edge_list import read_graph_file
from app.utils.errors import EXIT_DEGENERATE, EXIT_INPUT, EXIT_INTERNAL, EXIT_OK, BoundsError, InputError
from app.utils.logging_config import LOG_LEVEL, configure_logging
from app.utils.reports import (
    build_manifest,
    experiment_payload,
    graph_descriptor,
    render_json,
    summary_table,
    write_bounds_report,
    write_partition_csv,
)

logger = structlog.get_logger()


def _emit(obj) -> None:
    sys.stdout.write(render_json(obj) + "\n")


def _parse_reported(values: Optional[List[str]]) -> Dict[str, float]:
    reported: Dict[str, float] = {}
    for item in values or []:
        metric, sep, value = item.partition("=")
        if not sep:
            raise InputError(f"Reported metric '{item}' must look like metric=value")
        try:
            reported[metric.strip()] = float(value)
        except ValueError:
            raise InputError(f"Reported value '{value}' is not a number")
    return reported


def cmd_bounds(args: argparse.Namespace) -> int:
    started = time.time()
    g, digest = read_graph_file(args.graph, args.directed, include_self_loops=args.include_self_loops)
    cfg = ExperimentConfig(
        removal_prob=args.p,
        trials=args.trials,
        master_seed=args.seed,
        k_max=args.k_max,
        stop_epsilon=args.stop_epsilon,
        downsample=args.downsample,
        directed=args.directed,
        include_self_loops=args.include_self_loops,
        respect_direction=args.respect_direction_in_hops,
        approx_wl=args.approx_wl,
        max_redraws=args.max_redraws,
    )
    if cfg.approx_wl:
        logger.warning("Approximate WL partitions enabled; bounds are not certified")
    reported = _parse_reported(args.reported)
    name = Path(args.graph).stem

    summary = run_experiment(g, cfg, args.workers)
    comparisons = compare_reported(summary, reported) if reported else None
    payload = experiment_payload(graph_descriptor(g, name, digest), cfg, summary, comparisons)
    manifest = build_manifest(name, digest, cfg, started, summary, args.workers)
    report_path, plot_path = write_bounds_report(args.out, payload, manifest, summary)

    if args.record:
        from app.database.connection import create_tables, session_scope
        from app.models.run import BoundRun, RunStatus
        create_tables()
        with session_scope() as db:
            run = BoundRun(graph_name=name, graph_digest=digest, status=RunStatus.COMPLETED.value,
                           config_json=render_json(cfg.model_dump(mode="python")),
                           summary_json=render_json(payload), manifest_json=render_json(manifest))
            db.add(run)
            db.flush()
            logger.info("Run recorded", run_id=run.id)

    print(summary_table(summary))
    for c in comparisons or []:
        print(f"reported {c.metric} = {c.reported:.6f}: {c.verdict.value} "
              f"(bound {c.bound_mean:.6f} ± {c.bound_ci:.6f})" + (f"; {c.note}" if c.note else ""))
    print(f"report: {report_path}")
    print(f"plot data: {plot_path}")
    return EXIT_OK


def cmd_metrics(args: argparse.Namespace) -> int:
    cells = read_cells_file(args.cells)
    rng = np.random.default_rng(args.seed) if args.downsample is not None else None
    report = bound_report(cells, args.downsample, rng)
    out = {"report": report}
    if args.keep_order and cells.positives:
        out["listed_order_ap"] = average_precision(cells)
    _emit(out)
    if not report.defined:
        print(f"error: {report.reason}", file=sys.stderr)
        return EXIT_DEGENERATE
    return EXIT_OK


def cmd_orbits(args: argparse.Namespace) -> int:
    g, _ = read_graph_file(args.graph, args.directed, include_self_loops=args.include_self_loops)
    if args.k is None:
        part = global_orbit_partition(g)
    else:
        part = khop_partition(g, args.k, respect_direction=args.respect_direction_in_hops,
                              approx_wl=args.approx_wl, workers=args.workers)
    rows = partition_rows(part, g)
    if args.out:
        write_partition_csv(args.out, rows)
    else:
        write_partition_csv(sys.stdout, rows)
    print(f"{part.label}: {len(part.pairs)} pairs in {part.num_blocks} blocks", file=sys.stderr)
    return EXIT_OK


def _budget(args: argparse.Namespace) -> OracleBudget:
    return OracleBudget(max_nodes=args.max_nodes, max_cells=args.max_cells, tolerance=args.tolerance)


def cmd_oracle_autos(args: argparse.Namespace) -> int:
    g, _ = read_graph_file(args.graph, args.directed)
    brute = {perm.image for perm in brute_automorphisms(g, _budget(args)).generators}
    generated = generated_group(automorphism_generators(g, Coloring.uniform(g.n)))
    agree = brute == generated
    _emit({"nodes": g.n, "brute_force_order": len(brute), "generated_order": len(generated),
           "agree": agree})
    return EXIT_OK if agree else EXIT_INTERNAL


def cmd_oracle_orderings(args: argparse.Namespace) -> int:
    cells = read_cells_file(args.cells)
    result = best_ordering_exhaustive(cells, OracleMetric(args.metric), _budget(args))
    _emit(result)
    if not result.sorted_is_optimal:
        print(f"density-sorted order is NOT optimal for {result.metric.value}", file=sys.stderr)
    return EXIT_OK


def cmd_oracle_aupr(args: argparse.Namespace) -> int:
    cells = read_cells_file(args.cells)
    budget = _budget(args)
    oc = sort_cells(cells)
    closed = max_aupr(oc)
    numeric = aupr_numeric(oc.cells, budget.tolerance)
    delta = abs(closed - numeric)
    agree = delta < budget.tolerance
    _emit({"closed_form": closed, "numeric": numeric, "delta": delta, "agree": agree})
    return EXIT_OK if agree else EXIT_INTERNAL


def cmd_stats(args: argparse.Namespace) -> int:
    g, digest = read_graph_file(args.graph, args.directed)
    stats = graph_stats(g)
    _emit({"graph": Path(args.graph).stem, "sha256": digest, **asdict(stats)})
    return EXIT_OK


def _add_graph_args(parser: argparse.ArgumentParser, loops: bool = True) -> None:
    parser.add_argument("--graph", required=True, help="Edge list file")
    parser.add_argument("--directed", action="store_true", help="Treat edges as directed")
    if loops:
        parser.add_argument("--include-self-loops", action="store_true",
                            help="Count self-loop pairs as candidate non-edges")


def _add_budget_args(parser: argparse.ArgumentParser) -> None:
    defaults = OracleBudget()
    parser.add_argument("--max-nodes", type=int, default=defaults.max_nodes)
    parser.add_argument("--max-cells", type=int, default=defaults.max_cells)
    parser.add_argument("--tolerance", type=float, default=defaults.tolerance)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="link-limits",
        description="Upper bounds on topology-only link prediction (ROC, AUPR, AP)",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=None, help="Override LPL_LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    bounds = sub.add_parser("bounds", help="Run the edge-removal experiment")
    _add_graph_args(bounds)
    bounds.add_argument("--respect-direction-in-hops", action="store_true",
                        help="Follow only outgoing edges when growing k-hop neighbourhoods")
    bounds.add_argument("--p", type=float, default=DEFAULT_REMOVAL_PROB, help="Edge removal probability")
    bounds.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    bounds.add_argument("--seed", type=int, default=0, help="Master seed (unsigned 64-bit)")
    bounds.add_argument("--k-max", type=int, default=DEFAULT_K_MAX, help="Largest k; 0 computes only the global bound")
    bounds.add_argument("--stop-epsilon", type=float, default=DEFAULT_STOP_EPSILON)
    bounds.add_argument("--downsample", type=float, default=None,
                        help="Positives per negative for the downsampled AP bound (1 = 1:1)")
    bounds.add_argument("--max-redraws", type=int, default=DEFAULT_MAX_REDRAWS)
    bounds.add_argument("--out", default="out", help="Output directory for JSON and CSV")
    bounds.add_argument("--approx-wl", action="store_true", help="WL hashing instead of exact codes (profiling only)")
    bounds.add_argument("--workers", type=int, default=DEFAULT_WORKERS)
    bounds.add_argument("--reported", action="append", metavar="METRIC=VALUE",
                        help="Published score to audit against the bound (roc, aupr, ap)")
    bounds.add_argument("--record", action="store_true", help="Store the run in the run registry")
    bounds.set_defaults(handler=cmd_bounds)

    metrics = sub.add_parser("metrics", help="Bounds for a cells CSV")
    metrics.add_argument("--cells", required=True, help="CSV with p,n rows")
    metrics.add_argument("--keep-order", action="store_true", help="Also report AP in the listed order")
    metrics.add_argument("--downsample", type=float, default=None)
    metrics.add_argument("--seed", type=int, default=0)
    metrics.set_defaults(handler=cmd_metrics)

    orbits = sub.add_parser("orbits", help="Dump the non-edge partition")
    _add_graph_args(orbits)
    orbits.add_argument("--k", type=int, default=None, help="Hop count; omitted means global orbits")
    orbits.add_argument("--respect-direction-in-hops", action="store_true")
    orbits.add_argument("--approx-wl", action="store_true")
    orbits.add_argument("--workers", type=int, default=DEFAULT_WORKERS)
    orbits.add_argument("--out", default=None, help="CSV path (default stdout)")
    orbits.set_defaults(handler=cmd_orbits)

    oracle = sub.add_parser("oracle", help="Brute-force audits")
    oracle_sub = oracle.add_subparsers(dest="oracle_command", required=True)
    autos = oracle_sub.add_parser("autos", help="Canonical generators vs all permutations")
    _add_graph_args(autos, loops=False)
    _add_budget_args(autos)
    autos.set_defaults(handler=cmd_oracle_autos)
    orderings = oracle_sub.add_parser("orderings", help="Exhaustive cell orderings")
    orderings.add_argument("--cells", required=True)
    orderings.add_argument("--metric", choices=[m.value for m in OracleMetric], default=OracleMetric.AP.value)
    _add_budget_args(orderings)
    orderings.set_defaults(handler=cmd_oracle_orderings)
    aupr = oracle_sub.add_parser("aupr", help="Closed-form AUPR vs quadrature")
    aupr.add_argument("--cells", required=True)
    _add_budget_args(aupr)
    aupr.set_defaults(handler=cmd_oracle_aupr)

    stats = sub.add_parser("stats", help="Graph statistics")
    _add_graph_args(stats, loops=False)
    stats.set_defaults(handler=cmd_stats)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level or LOG_LEVEL)
    try:
        return args.handler(args)
    except BoundsError as e:
        print(f"error: {e.message}", file=sys.stderr)
        if e.hint:
            print(f"hint: {e.hint}", file=sys.stderr)
        logger.error("Command failed", command=args.command, error_code=e.error_code.value)
        return e.exit_code
    except ValidationError as e:
        print(f"error: invalid configuration: {e}", file=sys.stderr)
        return EXIT_INPUT
