"""Instrumented skyline algorithms over a canonical (all-minimize) view.

Each ``*_core`` function works on an ``(n, d)`` canonical matrix and
returns ``(positions, checks, extra)``; the public wrappers take a
:class:`~css_skyline.tabular.Dataset` plus a preference spec and return a
:class:`SkylineResult` with original row indices.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..preferences import PreferenceSpec
from ..tabular import Dataset
from ._backend import kernels as _default_kernels
from .rtree import RTree

DC_LEAF_SIZE = 256
RTREE_CAPACITY = 64
RTREE_MAX_DIMS = 8


class DominanceCounter:
    def __init__(self):
        self.count = 0


def dominates(u, t, counter: DominanceCounter | None = None) -> bool:
    """True iff ``u`` is <= ``t`` everywhere and < somewhere (canonical min view)."""
    if counter is not None:
        counter.count += 1
    return _default_kernels.dominates(u, t)


@dataclass
class SkylineResult:
    row_indices: np.ndarray
    dominance_checks: int
    wall_time: float = 0.0
    phase_timings: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.row_indices)

    @property
    def row_set(self) -> frozenset[int]:
        return frozenset(int(i) for i in self.row_indices)


def canonical_matrix(ds: Dataset, pref: PreferenceSpec) -> np.ndarray:
    """Preference columns with max-directed ones negated so every criterion is min."""
    pref.validate(ds.attribute_names)
    cols = []
    for a, d in zip(pref.attributes, pref.directions):
        c = ds.column(a)
        cols.append(-c if d == "max" else c)
    if not cols:
        return np.empty((ds.row_count, 0))
    return np.ascontiguousarray(np.column_stack(cols))


def _sum_order(pts: np.ndarray) -> np.ndarray:
    # Full lexicographic tie-break keeps dominance-respecting order under float ties.
    n, d = pts.shape
    keys = [np.arange(n)] + [pts[:, k] for k in range(d - 1, -1, -1)] + [pts.sum(axis=1)]
    return np.lexsort(keys)


def bruteforce_core(pts, kern=_default_kernels):
    keep, checks = kern.bruteforce(pts)
    return keep, checks, {}


def bnl_core(pts, kern=_default_kernels):
    keep, checks = kern.bnl(pts)
    return keep, checks, {}


def sfs_core(pts, kern=_default_kernels):
    if len(pts) == 0:
        return np.empty(0, dtype=np.int64), 0, {}
    order = _sum_order(pts)
    keep, checks = kern.sfs(pts[order])
    return np.sort(order[keep]), checks, {}


def salsa_core(pts, kern=_default_kernels):
    n = len(pts)
    if n == 0:
        return np.empty(0, dtype=np.int64), 0, {"rows_read": 0}
    minc = pts.min(axis=1)
    maxc = pts.max(axis=1)
    d = pts.shape[1]
    keys = [np.arange(n)] + [pts[:, k] for k in range(d - 1, -1, -1)] + [pts.sum(axis=1), minc]
    order = np.lexsort(keys)
    keep, checks, read = kern.salsa(pts[order], minc[order], maxc[order])
    return np.sort(order[keep]), checks, {"rows_read": int(read)}


def bbs_core(pts, kern=_default_kernels, capacity=RTREE_CAPACITY, max_dims=RTREE_MAX_DIMS):
    n, d = pts.shape
    if d > max_dims:
        raise ValueError(f"BBS supports at most {max_dims} dimensions, got {d}")
    if n == 0:
        return np.empty(0, dtype=np.int64), 0, {"mbr_checks": 0}
    tree = RTree(pts, capacity)
    sky = np.empty((16, d))
    sky_pos: list[int] = []
    checks = 0
    mbr_checks = 0
    heap: list = []
    tick = 0

    def push(lo, kind, ident):
        nonlocal tick
        heapq.heappush(heap, (float(lo.sum()), tuple(lo.tolist()), kind, tick, ident))
        tick += 1

    def dominated(corner):
        nonlocal checks
        k, c = kern.find_dominator(corner, sky, len(sky_pos))
        checks += c
        return k >= 0, c

    root = tree.nodes[tree.root]
    push(root.lo, 0, tree.root)
    while heap:
        _, lo, kind, _, ident = heapq.heappop(heap)
        corner = np.array(lo)
        hit, c = dominated(corner)
        if kind == 0:
            mbr_checks += c
        if hit:
            continue
        if kind == 1:
            if len(sky_pos) == len(sky):
                sky = np.vstack([sky, np.empty_like(sky)])
            sky[len(sky_pos)] = corner
            sky_pos.append(int(ident))
            continue
        node = tree.nodes[ident]
        if node.leaf:
            for p in node.children:
                pt = pts[p]
                hit, _ = dominated(pt)
                if not hit:
                    push(pt, 1, int(p))
        else:
            for k in node.children:
                child = tree.nodes[k]
                hit, c = dominated(child.lo)
                mbr_checks += c
                if not hit:
                    push(child.lo, 0, int(k))
    return np.sort(np.array(sky_pos, dtype=np.int64)), checks, {"mbr_checks": mbr_checks}


def dc_core(pts, kern=_default_kernels, leaf_size=DC_LEAF_SIZE):
    n, d = pts.shape
    stats = {"checks": 0, "max_depth": 0}

    def solve(ids, depth):
        stats["max_depth"] = max(stats["max_depth"], depth)
        if len(ids) <= leaf_size:
            keep, c = kern.bruteforce(pts[ids])
            stats["checks"] += c
            return ids[keep]
        dim = depth % d
        order = ids[np.lexsort((ids, pts[ids, dim]))]
        half = len(order) // 2
        left, right = order[:half], order[half:]
        sl = solve(np.sort(left), depth + 1)
        sr = solve(np.sort(right), depth + 1)
        keep_r, c = kern.filter_dominated(pts[sr], pts[sl])
        stats["checks"] += c
        if pts[left, dim].max() < pts[right, dim].min():
            merged_l = sl
        else:
            keep_l, c = kern.filter_dominated(pts[sl], pts[sr])
            stats["checks"] += c
            merged_l = sl[keep_l]
        return np.concatenate([merged_l, sr[keep_r]])

    if n == 0:
        return np.empty(0, dtype=np.int64), 0, {"max_depth": 0}
    out = solve(np.arange(n), 0)
    return np.sort(out), stats["checks"], {"max_depth": stats["max_depth"]}


CORES: dict[str, Callable] = {
    "bruteforce": bruteforce_core,
    "bnl": bnl_core,
    "sfs": sfs_core,
    "salsa": salsa_core,
    "bbs": bbs_core,
    "dc": dc_core,
}

BASE_ALGORITHMS = ("bnl", "sfs", "salsa", "bbs", "dc")


def run_core(name: str, pts: np.ndarray, kern=None):
    try:
        core = CORES[name]
    except KeyError:
        raise ValueError(f"unknown skyline algorithm {name!r}") from None
    return core(np.ascontiguousarray(pts, dtype=np.float64), kern or _default_kernels)


def skyline(ds: Dataset, pref: PreferenceSpec, algorithm: str = "sfs", kern=None) -> SkylineResult:
    pts = canonical_matrix(ds, pref)
    t0 = time.perf_counter()
    keep, checks, extra = run_core(algorithm, pts, kern)
    dt = time.perf_counter() - t0
    return SkylineResult(keep.astype(np.int64), int(checks), dt, {"skyline": dt}, {"algorithm": algorithm, **extra})


def skyline_bruteforce(ds, pref, kern=None):
    return skyline(ds, pref, "bruteforce", kern)


def skyline_bnl(ds, pref, kern=None):
    return skyline(ds, pref, "bnl", kern)


def skyline_sfs(ds, pref, kern=None):
    return skyline(ds, pref, "sfs", kern)


def skyline_salsa(ds, pref, kern=None):
    return skyline(ds, pref, "salsa", kern)


def skyline_bbs(ds, pref, kern=None):
    return skyline(ds, pref, "bbs", kern)


def skyline_dc(ds, pref, kern=None):
    return skyline(ds, pref, "dc", kern)


def dc_depth_bound(n: int, d: int, leaf_size: int = DC_LEAF_SIZE) -> int:
    if n <= leaf_size:
        return 0
    return math.ceil(math.log2(n / leaf_size)) * d
