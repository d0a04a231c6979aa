"""Conditioning-set scoring: data-driven (ddsky), path-count/flow (gnsky) and leaky (lnsky) gains."""

from __future__ import annotations

import json
import math
import weakref
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import numpy as np

from .causal_graph import CausalGraph, CausalPath, check_lambdas, causal_weight, enumerate_paths, leaky_weight, path_status
from .partition import Partitioning, partition
from .preferences import PreferenceSpec
from .tabular import DataError, Dataset, correlation_matrix, pearson

STRATEGIES = ("ddsky", "gnsky", "lnsky", "analytic")
GAIN_TOL = 1e-12
MIN_GROUP_ROWS = 3


@dataclass
class GainReport:
    strategy: str
    conditioning_set: tuple[str, ...]
    gain: float
    per_pair: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    beats_zero: bool | None = None
    beats_preference_set: bool | None = None
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "Z": list(self.conditioning_set),
            "gain": self.gain,
            "per_pair": {f"{a},{b}": v for (a, b), v in self.per_pair.items()},
            "params": self.params,
            "beats_zero": self.beats_zero,
            "beats_preference_set": self.beats_preference_set,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


# Paths depend only on the graph, so they are enumerated once per (graph, pair).
_PATHS: "weakref.WeakKeyDictionary[CausalGraph, dict]" = weakref.WeakKeyDictionary()


def pair_paths(g: CausalGraph, a: str, b: str, max_length: int | None = None) -> list[CausalPath]:
    cache = _PATHS.setdefault(g, {})
    key = (a, b, max_length)
    if key not in cache:
        cache[key] = enumerate_paths(g, a, b, max_length)
    return cache[key]


def _scored_pairs(pref: PreferenceSpec, Z: frozenset[str]):
    for a, b in pref.pairs():
        yield a, b, (a in Z or b in Z)


def _weight(pair_weights, a, b) -> float:
    if pair_weights is None:
        return 1.0
    return float(pair_weights.get((a, b), pair_weights.get((b, a), 1.0)))


def gn_gain(g: CausalGraph, pref: PreferenceSpec, Z: Iterable[str], weighted: bool = False,
            pair_weights: Mapping | None = None, max_length: int | None = None) -> GainReport:
    """Change in positive minus negative transmitting paths (or |cw| flows) once ``Z`` is conditioned.

    A pair with an endpoint inside ``Z`` contributes nothing and is listed as skipped.
    ``pair_weights`` optionally scales each pair (e.g. by |corr| of the pair).
    """
    Z = frozenset(Z)
    pref.validate(g.nodes)
    total = 0.0
    per_pair = {}
    for a, b, skip in _scored_pairs(pref, Z):
        if skip:
            per_pair[(a, b)] = {"skipped": True}
            continue
        before = {1: 0.0, -1: 0.0}
        after = {1: 0.0, -1: 0.0}
        for p in pair_paths(g, a, b, max_length):
            amount = abs(causal_weight(p)) if weighted else 1.0
            s0 = path_status(p, (), g)
            if s0.transmits:
                before[s0.sign] += amount
            s1 = path_status(p, Z, g)
            if s1.transmits:
                after[s1.sign] += amount
        imp_plus = after[1] - before[1]
        imp_minus = after[-1] - before[-1]
        w = _weight(pair_weights, a, b)
        per_pair[(a, b)] = {"imp_plus": imp_plus, "imp_minus": imp_minus, "weight": w}
        total += w * (imp_plus - imp_minus)
    return GainReport("gnsky", tuple(sorted(Z)), total, per_pair, {"weighted": weighted})


def ln_gain(g: CausalGraph, pref: PreferenceSpec, Z: Iterable[str], lambda_o: float = 0.6,
            lambda_b: float = 0.4, pair_weights: Mapping | None = None,
            max_length: int | None = None) -> GainReport:
    """Leaky-flow gain: conditioned flows over open-or-blocked paths against the Z = {} baseline."""
    check_lambdas(lambda_o, lambda_b)
    Z = frozenset(Z)
    pref.validate(g.nodes)
    total = 0.0
    per_pair = {}
    for a, b, skip in _scored_pairs(pref, Z):
        if skip:
            per_pair[(a, b)] = {"skipped": True}
            continue
        base = {1: 0.0, -1: 0.0}
        cond = {1: 0.0, -1: 0.0}
        for p in pair_paths(g, a, b, max_length):
            s0 = path_status(p, (), g)
            if s0.transmits:
                base[s0.sign] += abs(leaky_weight(p, s0, lambda_o, lambda_b))
            s1 = path_status(p, Z, g)
            if s1.colliders_active:
                cond[s1.sign] += abs(leaky_weight(p, s1, lambda_o, lambda_b))
        l_plus = cond[1] - base[1]
        l_minus = cond[-1] - base[-1]
        w = _weight(pair_weights, a, b)
        per_pair[(a, b)] = {"l_imp_plus": l_plus, "l_imp_minus": l_minus, "weight": w}
        total += w * (l_plus - l_minus)
    return GainReport("lnsky", tuple(sorted(Z)), total, per_pair, {"lambda_o": lambda_o, "lambda_b": lambda_b})


def oriented_correlations(ds: Dataset, pref: PreferenceSpec, rows: np.ndarray | None = None) -> dict:
    """Pearson correlation per unordered preference pair, sign-flipped for mixed min/max pairs."""
    out = {}
    for a, b in pref.pairs():
        x = ds.column(a)
        y = ds.column(b)
        if rows is not None:
            x, y = x[rows], y[rows]
        out[(a, b)] = pref.orientation(a, b) * pearson(x, y)
    return out


def dd_gain(ds: Dataset, pref: PreferenceSpec, Z: Iterable[str], grouping: Partitioning,
            use_corr_magnitude: bool = False) -> GainReport:
    """Average within-group preference correlation minus the unconditioned one."""
    Z = tuple(sorted(Z))
    pref.validate(ds.attribute_names)
    pairs = pref.pairs()
    if not pairs:
        raise DataError("ddsky needs at least two preference attributes")
    base = oriented_correlations(ds, pref)
    sums = {p: 0.0 for p in pairs}
    counts = {p: 0 for p in pairs}
    small = 0
    undefined = 0
    for rows in grouping.groups:
        if len(rows) < MIN_GROUP_ROWS:
            small += 1
            continue
        corr = oriented_correlations(ds, pref, rows)
        for p in pairs:
            if math.isnan(corr[p]):
                undefined += 1
            else:
                sums[p] += corr[p]
                counts[p] += 1
    if all(c == 0 for c in counts.values()):
        raise DataError("every group is degenerate; no within-group correlation is defined")
    total = 0.0
    per_pair = {}
    for p in pairs:
        c_avg = sums[p] / counts[p] if counts[p] else float("nan")
        c_p = base[p]
        w = abs(c_p) if use_corr_magnitude else 1.0
        contrib = w * (c_avg - c_p) if counts[p] and not math.isnan(c_p) else 0.0
        per_pair[p] = {"c_avg": c_avg, "c_p": c_p, "groups": counts[p], "contribution": contrib}
        total += contrib
    rep = GainReport("ddsky", Z, total, per_pair, {"m": grouping.m, "mode": grouping.mode})
    rep.metadata = {"skipped_small_groups": small, "undefined_correlations": undefined}
    return rep


def _pair_weights(ds: Dataset | None, pref: PreferenceSpec):
    if ds is None:
        raise ValueError("correlation-magnitude weighting needs a dataset")
    cm = correlation_matrix(ds, pref.attributes)
    return {(a, b): abs(cm[a, b]) for a, b in pref.pairs()}


def score(Z: Sequence[str], strategy: str, pref: PreferenceSpec, ds: Dataset | None = None,
          g: CausalGraph | None = None, params: Mapping | None = None,
          _pair_w=None) -> GainReport:
    """Score one conditioning set with the named strategy."""
    params = dict(params or {})
    if strategy == "gnsky":
        return gn_gain(g, pref, Z, weighted=params.get("weighted", False), pair_weights=_pair_w,
                       max_length=params.get("max_path_length"))
    if strategy == "lnsky":
        return ln_gain(g, pref, Z, params.get("lambda_o", 0.6), params.get("lambda_b", 0.4),
                       pair_weights=_pair_w, max_length=params.get("max_path_length"))
    if strategy == "ddsky":
        grouping = partition(ds, Z, params.get("mode", "kmeans"), params.get("m", 10),
                             params.get("seed", 0), params.get("max_iters", 100))
        return dd_gain(ds, pref, Z, grouping, params.get("corr_magnitude", False))
    if strategy == "analytic":
        from .analytic import analytic_gain

        return analytic_gain(g, pref, Z, params.get("m", 10), ds=ds)
    raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")


def candidate_sets(attrs: Sequence[str], max_size: int) -> list[tuple[str, ...]]:
    """Non-empty subsets ordered by size, then lexicographically."""
    attrs = sorted(attrs)
    out = []
    for k in range(1, min(max_size, len(attrs)) + 1):
        out.extend(combinations(attrs, k))
    return out


def select_conditioning_set(ds: Dataset | None, g: CausalGraph | None, pref: PreferenceSpec,
                            strategy: str, params: Mapping | None = None,
                            max_subset_size: int | None = None,
                            exclude_preferences: bool = False) -> GainReport:
    """Exhaustively score candidate sets and return the best one.

    Ties keep the earlier candidate (smaller, then lexicographically first).
    Candidates whose score is undefined (ddSky with every group degenerate)
    are skipped.
    The report also says whether the winner beats zero and beats Z = P.
    """
    params = dict(params or {})
    if strategy in ("gnsky", "lnsky", "analytic") and g is None:
        raise ValueError(f"{strategy} needs a causal graph")
    if strategy == "ddsky" and ds is None:
        raise ValueError("ddsky needs a dataset")
    attrs = list(g.nodes) if g is not None else list(ds.attribute_names)
    if ds is not None and g is not None:
        missing = [n for n in g.nodes if n not in ds.attribute_names]
        if missing:
            raise DataError(f"graph nodes missing from the dataset: {missing}")
    if exclude_preferences:
        attrs = [a for a in attrs if a not in pref.attributes]
    cap = len(attrs) if max_subset_size is None else max_subset_size
    if cap < 1:
        raise ValueError("max_subset_size must be >= 1")
    cands = candidate_sets(attrs, cap)
    if not cands:
        raise ValueError("no candidate conditioning set")
    pw = _pair_weights(ds, pref) if params.get("corr_magnitude") and strategy != "ddsky" else None

    best = None
    unscorable = 0
    for Z in cands:
        try:
            rep = score(Z, strategy, pref, ds, g, params, pw)
        except DataError:  # no defined within-group correlation: the candidate cannot be ranked
            unscorable += 1
            continue
        if best is None or rep.gain > best.gain + GAIN_TOL:
            best = rep
    if best is None:
        raise DataError("no candidate conditioning set could be scored")
    try:
        pref_gain = score(pref.attributes, strategy, pref, ds, g, params, pw).gain
    except DataError:
        pref_gain = -math.inf
    best.beats_zero = best.gain > GAIN_TOL
    best.beats_preference_set = best.gain > pref_gain + GAIN_TOL
    best.params = {**best.params, **{k: v for k, v in params.items() if k not in best.params}}
    best.metadata["candidates"] = len(cands)
    best.metadata["unscorable"] = unscorable
    best.metadata["preference_set_gain"] = pref_gain
    return best
