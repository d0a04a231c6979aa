"""Pure-Python skyline kernels.

Reference semantics for the compiled ``_kernels`` module: both must return
identical survivor positions *and* identical dominance-check counts.
Every function takes a canonical (all-minimize) float64 matrix whose rows
are already in scan order and returns positions into that matrix.
"""

import numpy as np

BACKEND = "python"


def _rows(pts):
    return [tuple(r) for r in np.asarray(pts, dtype=np.float64).tolist()]


def _dom(u, t):
    strict = False
    for a, b in zip(u, t):
        if a > b:
            return False
        if a < b:
            strict = True
    return strict


def dominates(u, t):
    return _dom(tuple(u), tuple(t))


def bruteforce(pts):
    rows = _rows(pts)
    n = len(rows)
    checks = 0
    keep = []
    for i in range(n):
        t = rows[i]
        dominated = False
        for j in range(n):
            if j == i:
                continue
            checks += 1
            if _dom(rows[j], t):
                dominated = True
                break
        if not dominated:
            keep.append(i)
    return np.array(keep, dtype=np.int64), checks


def bnl(pts):
    rows = _rows(pts)
    checks = 0
    window = []
    for i, t in enumerate(rows):
        dominated = False
        survivors = []
        for k, w in enumerate(window):
            checks += 1
            if _dom(rows[w], t):
                dominated = True
                survivors.extend(window[k:])
                break
            checks += 1
            if not _dom(t, rows[w]):
                survivors.append(w)
        window = survivors
        if not dominated:
            window.append(i)
    return np.array(sorted(window), dtype=np.int64), checks


def sfs(pts):
    rows = _rows(pts)
    checks = 0
    window = []
    for i, t in enumerate(rows):
        for w in window:
            checks += 1
            if _dom(rows[w], t):
                break
        else:
            window.append(i)
    return np.array(window, dtype=np.int64), checks


def salsa(pts, minc, maxc):
    """SFS scan with the SaLSa stop point; returns (keep, checks, rows_read)."""
    rows = _rows(pts)
    minc = np.asarray(minc, dtype=np.float64).tolist()
    maxc = np.asarray(maxc, dtype=np.float64).tolist()
    checks = 0
    window = []
    stop = float("inf")
    n = len(rows)
    for i in range(n):
        if stop < minc[i]:
            return np.array(window, dtype=np.int64), checks, i
        t = rows[i]
        for w in window:
            checks += 1
            if _dom(rows[w], t):
                break
        else:
            window.append(i)
            if maxc[i] < stop:
                stop = maxc[i]
    return np.array(window, dtype=np.int64), checks, n


def filter_dominated(cands, window):
    """Mask of candidate rows not dominated by any window row."""
    crow = _rows(cands)
    wrow = _rows(window)
    checks = 0
    keep = np.ones(len(crow), dtype=bool)
    for i, t in enumerate(crow):
        for w in wrow:
            checks += 1
            if _dom(w, t):
                keep[i] = False
                break
    return keep, checks


def find_dominator(point, window, count):
    """Index of the first of ``window[:count]`` dominating ``point`` (or -1), and checks used."""
    t = tuple(np.asarray(point, dtype=np.float64).tolist())
    checks = 0
    for k in range(count):
        checks += 1
        if _dom(tuple(window[k].tolist()), t):
            return k, checks
    return -1, checks
