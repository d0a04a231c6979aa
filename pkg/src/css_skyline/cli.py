"""``css-bench`` command line: run experiment grids, generate graphs and data."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .bench import ConfigError, ExperimentConfig, emit_report, generate_graph_suite, run_experiment
from .causal_graph import GraphError, load_graph
from .tabular import DataError, augment_gaussian, generate_sem, load_csv, write_csv


def _csv_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _int_list(text: str) -> list[int]:
    return [int(t) for t in _csv_list(text)]


def _lambda_pairs(text: str) -> list[tuple[float, float]]:
    """``"0.6,0.4"`` or ``"0.6,0.4;0.8,0.2"``."""
    pairs = []
    for chunk in text.split(";"):
        vals = [float(v) for v in _csv_list(chunk)]
        if len(vals) != 2:
            raise argparse.ArgumentTypeError(f"lambda pair needs two values, got {chunk!r}")
        pairs.append((vals[0], vals[1]))
    return pairs


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="css-bench", description="Skyline de-correlation benchmark harness")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment grid")
    run.add_argument("--config", type=Path)
    run.add_argument("--data")
    run.add_argument("--graph")
    run.add_argument("--prefs")
    run.add_argument("--algos", type=_csv_list, dest="algorithms")
    run.add_argument("--strategies", type=_csv_list)
    run.add_argument("--clusters", type=_int_list)
    run.add_argument("--lambda", type=_lambda_pairs, dest="lambdas")
    run.add_argument("--n", type=_int_list)
    run.add_argument("--seed", type=int)
    run.add_argument("--repetitions", type=int)
    run.add_argument("--max-subset-size", type=int)
    run.add_argument("--out")
    run.add_argument("--format", choices=("csv", "json"), default="csv")
    run.add_argument("--no-warmup", action="store_true")

    gg = sub.add_parser("gen-graphs", help="write random DAGs in the graph JSON format")
    gg.add_argument("--nodes", type=_int_list, required=True)
    gg.add_argument("--density", type=float, default=0.3)
    gg.add_argument("--seed", type=int, default=7)
    gg.add_argument("--out", required=True)

    gd = sub.add_parser("gen-data", help="sample SEM data from a graph, or augment a csv")
    src = gd.add_mutually_exclusive_group(required=True)
    src.add_argument("--graph")
    src.add_argument("--augment", metavar="CSV")
    gd.add_argument("--n", type=int, required=True)
    gd.add_argument("--sigma", type=float, default=0.05)
    gd.add_argument("--seed", type=int, default=7)
    gd.add_argument("--out", required=True)
    return p


def _cmd_run(args) -> int:
    overrides = {k: getattr(args, k) for k in (
        "data", "graph", "prefs", "algorithms", "strategies", "clusters", "lambdas", "n", "seed",
        "repetitions", "max_subset_size", "out")}
    if args.no_warmup:
        overrides["warmup"] = False
    if args.config:
        cfg = ExperimentConfig.load(args.config, overrides)
    else:
        cfg = ExperimentConfig.from_dict({k: v for k, v in overrides.items() if v is not None})
    rows, timings = run_experiment(cfg)
    files = emit_report(rows, cfg.out, args.format, timings)
    failed = sum(r["status"] != "ok" for r in rows)
    print(f"{len(rows)} cells, {failed} failed; wrote {', '.join(str(f) for f in files)}")
    return 2 if failed else 0


def _cmd_gen_graphs(args) -> int:
    gs = generate_graph_suite(args.nodes, args.density, args.seed, args.out)
    print(f"wrote {len(gs)} graphs to {args.out}")
    return 0


def _cmd_gen_data(args) -> int:
    if args.graph:
        ds = generate_sem(load_graph(args.graph), args.n, args.seed)
    else:
        ds = augment_gaussian(load_csv(args.augment), args.n, args.sigma, args.seed)
    write_csv(ds, args.out)
    print(f"wrote {ds.row_count} rows to {args.out}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    handlers = {"run": _cmd_run, "gen-graphs": _cmd_gen_graphs, "gen-data": _cmd_gen_data}
    try:
        return handlers[args.command](args)
    except (ConfigError, GraphError, DataError, OSError, ValueError) as exc:
        print(f"css-bench: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
