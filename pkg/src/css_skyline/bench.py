"""Experiment grid runner, report writer and random graph suite generator."""

from __future__ import annotations

import csv
import json
import logging
import statistics
import time
from dataclasses import asdict, dataclass, field, fields
from itertools import product
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .causal_graph import CausalGraph, Edge, load_graph, save_graph
from .gain import GainReport, select_conditioning_set
from .pipeline import css_run
from .preferences import PreferenceSpec
from .skyline.algorithms import BASE_ALGORITHMS, skyline
from .tabular import Dataset, augment_gaussian, generate_sem, load_csv

log = logging.getLogger(__name__)

CONFIG_VERSION = 1
STRATEGY_NAMES = ("vanilla", "ddsky", "gnsky", "lnsky", "analytic", "pref_decorr")
RESULT_COLUMNS = (
    "algorithm", "strategy", "N", "P", "m", "lambda_o", "lambda_b", "seed", "repetition",
    "skyline_size", "dominance_checks", "decision", "Z", "gain", "m_effective", "status", "error",
)
TIMING_COLUMNS = (
    "algorithm", "strategy", "N", "m", "lambda_o", "lambda_b", "seed", "repetition",
    "step0_time", "pipeline_time", "total_time",
)
SUMMARY_COLUMNS = (
    "algorithm", "strategy", "N", "m", "lambda_o", "lambda_b", "cells",
    "median_checks", "vanilla_median_checks", "reduction_factor", "median_total_time",
)


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    prefs: str
    data: str | None = None
    graph: str | None = None
    n: list[int] = field(default_factory=list)
    seed: int = 7
    algorithms: list[str] = field(default_factory=lambda: ["sfs"])
    strategies: list[str] = field(default_factory=lambda: ["vanilla", "lnsky"])
    clusters: list[int] = field(default_factory=lambda: [10])
    lambdas: list[tuple[float, float]] = field(default_factory=lambda: [(0.6, 0.4)])
    repetitions: int = 1
    max_subset_size: int | None = None
    exclude_preferences: bool = False
    partition_mode: str = "kmeans"
    augment_sigma: float = 0.05
    force_css: bool = False
    warmup: bool = True
    out: str = "results"
    version: int = CONFIG_VERSION

    def __post_init__(self):
        self.lambdas = [tuple(float(v) for v in pair) for pair in self.lambdas]
        self.n = [int(v) for v in self.n]
        self.validate()

    def validate(self) -> None:
        if self.version != CONFIG_VERSION:
            raise ConfigError(f"unsupported config version {self.version}")
        if not self.algorithms:
            raise ConfigError("at least one algorithm is required")
        if not self.strategies:
            raise ConfigError("at least one strategy is required")
        bad = [a for a in self.algorithms if a not in BASE_ALGORITHMS]
        if bad:
            raise ConfigError(f"unknown algorithms {bad}; choose from {BASE_ALGORITHMS}")
        bad = [s for s in self.strategies if s not in STRATEGY_NAMES]
        if bad:
            raise ConfigError(f"unknown strategies {bad}; choose from {STRATEGY_NAMES}")
        for lo, lb in self.lambdas:
            if not (0.0 <= lb < lo <= 1.0):
                raise ConfigError(f"lambda pair ({lo}, {lb}) must satisfy 0 <= lambda_b < lambda_o <= 1")
        if any(m < 1 for m in self.clusters) or not self.clusters:
            raise ConfigError("cluster counts must be >= 1")
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")
        if self.data is None and (self.graph is None or not self.n):
            raise ConfigError("either a data csv or a graph plus row counts (n) is required")
        needs_graph = {"gnsky", "lnsky", "analytic"} & set(self.strategies)
        if needs_graph and self.graph is None:
            raise ConfigError(f"strategies {sorted(needs_graph)} need a graph")
        PreferenceSpec.parse(self.prefs)

    @classmethod
    def from_dict(cls, obj: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(obj) - known)
        if unknown:
            raise ConfigError(f"unknown config keys {unknown}")
        try:
            return cls(**obj)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def load(cls, path, overrides: dict | None = None) -> "ExperimentConfig":
        try:
            obj = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"no such config file: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from None
        obj.update({k: v for k, v in (overrides or {}).items() if v is not None})
        return cls.from_dict(obj)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambdas"] = [list(p) for p in self.lambdas]
        return d


@dataclass
class Cell:
    algorithm: str
    strategy: str
    N: int
    m: int | None
    lam: tuple[float, float] | None
    seed: int
    repetition: int


def _cells(cfg: ExperimentConfig, sizes: Sequence[int]) -> list[Cell]:
    out = []
    for N, algo, strat, rep in product(sizes, cfg.algorithms, cfg.strategies, range(cfg.repetitions)):
        seed = cfg.seed + rep
        ms = [None] if strat == "vanilla" else cfg.clusters
        lams = cfg.lambdas if strat == "lnsky" else [None]
        for m, lam in product(ms, lams):
            out.append(Cell(algo, strat, N, m, lam, seed, rep))
    return out


class _DataSource:
    def __init__(self, cfg: ExperimentConfig, graph: CausalGraph | None):
        self.cfg = cfg
        self.graph = graph
        self.base = load_csv(cfg.data) if cfg.data else None
        self._cache: dict = {}

    def sizes(self) -> list[int]:
        if self.cfg.n:
            return list(self.cfg.n)
        return [self.base.row_count]

    def get(self, N: int, seed: int) -> Dataset:
        key = (N, seed if self.base is None else None)
        if key in self._cache:
            return self._cache[key]
        if self.base is None:
            ds = generate_sem(self.graph, N, seed)
        elif N > self.base.row_count:
            ds = augment_gaussian(self.base, N, self.cfg.augment_sigma, self.cfg.seed)
        elif N < self.base.row_count:
            ds = self.base.take(np.arange(N))
        else:
            ds = self.base
        self._cache = {key: ds}  # keep one dataset resident
        return ds


def _run_cell(cell: Cell, ds: Dataset, g: CausalGraph | None, pref: PreferenceSpec, cfg: ExperimentConfig):
    t0 = time.perf_counter()
    report: GainReport | None = None
    if cell.strategy == "vanilla":
        step0 = 0.0
    elif cell.strategy == "pref_decorr":
        report = GainReport("pref_decorr", tuple(sorted(pref.attributes)), float("nan"))
        step0 = 0.0
    else:
        params: dict[str, Any] = {"m": cell.m, "seed": cell.seed, "mode": cfg.partition_mode}
        if cell.lam is not None:
            params["lambda_o"], params["lambda_b"] = cell.lam
        report = select_conditioning_set(ds, g, pref, cell.strategy, params, cfg.max_subset_size,
                                         cfg.exclude_preferences)
        step0 = time.perf_counter() - t0
    t1 = time.perf_counter()
    use_css = report is not None and (cell.strategy == "pref_decorr" or cfg.force_css or report.beats_zero)
    if use_css:
        res = css_run(ds, pref, report, cell.algorithm, cell.m, cell.seed, cfg.partition_mode)
        decision, m_eff = "css", res.metadata["m_effective"]
    else:
        res = skyline(ds, pref, cell.algorithm)
        decision, m_eff = "vanilla", 1
    pipeline = time.perf_counter() - t1
    return res, report, decision, m_eff, step0, pipeline


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def run_experiment(cfg: ExperimentConfig) -> tuple[list[dict], list[dict]]:
    """Execute every configured cell; returns (result rows, timing rows)."""
    g = load_graph(cfg.graph) if cfg.graph else None
    pref = PreferenceSpec.parse(cfg.prefs)
    source = _DataSource(cfg, g)
    rows, timings = [], []
    warmed = set()
    for cell in _cells(cfg, source.sizes()):
        key = {
            "algorithm": cell.algorithm, "strategy": cell.strategy, "N": cell.N,
            "m": cell.m, "lambda_o": cell.lam[0] if cell.lam else None,
            "lambda_b": cell.lam[1] if cell.lam else None, "seed": cell.seed, "repetition": cell.repetition,
        }
        row = {**key, "P": len(pref.attributes), "skyline_size": None, "dominance_checks": None,
               "decision": None, "Z": None, "gain": None, "m_effective": None, "status": "ok", "error": ""}
        timing = {**key, "step0_time": None, "pipeline_time": None, "total_time": None}
        try:
            ds = source.get(cell.N, cell.seed)
            group = (cell.algorithm, cell.strategy, cell.N, cell.m, cell.lam)
            if cfg.warmup and group not in warmed:
                _run_cell(cell, ds, g, pref, cfg)
                warmed.add(group)
            res, report, decision, m_eff, step0, pipe = _run_cell(cell, ds, g, pref, cfg)
            row.update(
                skyline_size=len(res), dominance_checks=res.dominance_checks, decision=decision,
                Z=" ".join(report.conditioning_set) if report else "",
                gain=report.gain if report is not None and report.gain == report.gain else None,
                m_effective=m_eff,
            )
            timing.update(step0_time=step0, pipeline_time=pipe, total_time=step0 + pipe)
        except Exception as exc:  # recorded per cell; the run continues
            log.warning("cell %s failed: %s", key, exc)
            row.update(status="error", error=f"{type(exc).__name__}: {exc}")
        rows.append(row)
        timings.append(timing)
    return rows, timings


def summarize(rows: list[dict], timings: list[dict] | None = None) -> list[dict]:
    """Median checks per configuration and reduction factor against the matching vanilla cells."""
    ok = [r for r in rows if r["status"] == "ok"]
    times = {}
    for t in timings or []:
        k = (t["algorithm"], t["strategy"], t["N"], t["m"], t["lambda_o"], t["lambda_b"])
        if t["total_time"] is not None:
            times.setdefault(k, []).append(t["total_time"])
    vanilla = {}
    for r in ok:
        if r["strategy"] == "vanilla":
            vanilla.setdefault((r["algorithm"], r["N"]), []).append(r["dominance_checks"])
    groups: dict = {}
    for r in ok:
        k = (r["algorithm"], r["strategy"], r["N"], r["m"], r["lambda_o"], r["lambda_b"])
        groups.setdefault(k, []).append(r["dominance_checks"])
    out = []
    for k in sorted(groups, key=_sort_key):
        med = statistics.median(groups[k])
        van = vanilla.get((k[0], k[2]))
        van_med = statistics.median(van) if van else None
        factor = van_med / med if van_med is not None and med > 0 else None
        tt = times.get(k)
        out.append({
            "algorithm": k[0], "strategy": k[1], "N": k[2], "m": k[3], "lambda_o": k[4], "lambda_b": k[5],
            "cells": len(groups[k]), "median_checks": med, "vanilla_median_checks": van_med,
            "reduction_factor": factor, "median_total_time": statistics.median(tt) if tt else None,
        })
    return out


def _sort_key(key: tuple) -> tuple:
    return tuple((0, v, "") if isinstance(v, (int, float)) else (1, 0, _fmt(v)) for v in key)


def _write_csv(path: Path, columns: Sequence[str], rows: list[dict]) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r.get(c)) for c in columns])


def emit_report(rows: list[dict], out_dir, fmt: str = "csv", timings: list[dict] | None = None) -> list[Path]:
    """Write results, timings and summary files.

    ``results`` and ``summary`` hold only deterministic columns, so they
    are byte-identical across runs with the same config; wall-clock data
    goes to ``timings``.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create report directory {out}: {exc}") from None
    summary = summarize(rows)
    written = []
    if fmt == "csv":
        pairs = [("results.csv", RESULT_COLUMNS, rows), ("summary.csv", SUMMARY_COLUMNS[:-1], summary)]
        if timings is not None:
            pairs.append(("timings.csv", TIMING_COLUMNS, timings))
            pairs.append(("timing_summary.csv", SUMMARY_COLUMNS, summarize(rows, timings)))
        for name, cols, data in pairs:
            _write_csv(out / name, cols, data)
            written.append(out / name)
    elif fmt == "json":
        payload = {"results": rows, "summary": summary}
        (out / "results.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        written.append(out / "results.json")
        if timings is not None:
            (out / "timings.json").write_text(json.dumps(timings, indent=2, sort_keys=True) + "\n", encoding="utf-8")
            written.append(out / "timings.json")
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    return written


def load_report(path) -> list[dict]:
    """Result rows from a ``results.csv`` (values as strings) or ``results.json``."""
    path = Path(path)
    if path.suffix == ".json":
        return json.loads(path.read_text(encoding="utf-8"))["results"]
    with path.open(newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


WEIGHTS = (1.0, -1.0, 0.5, -0.5)


def random_dag(n_nodes: int, edge_density: float, rng: np.random.Generator) -> CausalGraph:
    """Random DAG over ``n_nodes``; one triangle seeds a chain, a fork and a collider when at least 3 edges fit."""
    if n_nodes < 3:
        raise ValueError("graphs need at least 3 nodes")
    if not 0.0 < edge_density <= 1.0:
        raise ValueError(f"edge density must lie in (0, 1], got {edge_density}")
    pairs = [(i, j) for i in range(n_nodes) for j in range(i + 1, n_nodes)]
    n_edges = int(round(edge_density * len(pairs)))
    if n_edges < 1:
        raise ValueError(f"density {edge_density} yields no edges on {n_nodes} nodes")
    perm = rng.permutation(n_nodes)  # topological position -> node id
    chosen = []
    if n_edges >= 3:
        i, j, k = sorted(rng.choice(n_nodes, size=3, replace=False).tolist())
        chosen = [(i, j), (j, k), (i, k)]
    rest = [p for p in pairs if p not in chosen]
    extra = rng.choice(len(rest), size=n_edges - len(chosen), replace=False) if n_edges > len(chosen) else []
    chosen += [rest[t] for t in sorted(extra)]
    names = [f"V{t:02d}" for t in range(n_nodes)]
    edges = [Edge(names[perm[a]], names[perm[b]], float(rng.choice(WEIGHTS))) for a, b in chosen]
    return CausalGraph(names, edges)


def generate_graph_suite(node_counts: Sequence[int], edge_density: float, seed: int,
                         out_dir=None) -> list[CausalGraph]:
    rng = np.random.default_rng(seed)
    graphs = [random_dag(n, edge_density, rng) for n in node_counts]
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for n, g in zip(node_counts, graphs):
            save_graph(g, out / f"graph_{n:02d}_d{edge_density:g}_s{seed}.json")
    return graphs
