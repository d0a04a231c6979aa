# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled skyline kernels; same contract as ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free

cnp.import_array()

BACKEND = "cython"


cdef inline bint _dom(const double[:, ::1] a, Py_ssize_t u,
                      const double[:, ::1] b, Py_ssize_t t, Py_ssize_t d) nogil:
    cdef Py_ssize_t k
    cdef bint strict = False
    cdef double x, y
    for k in range(d):
        x = a[u, k]
        y = b[t, k]
        if x > y:
            return False
        if x < y:
            strict = True
    return strict


def dominates(u, t):
    cdef const double[:, ::1] a = np.ascontiguousarray(np.asarray(u, dtype=np.float64).reshape(1, -1))
    cdef const double[:, ::1] b = np.ascontiguousarray(np.asarray(t, dtype=np.float64).reshape(1, -1))
    return bool(_dom(a, 0, b, 0, a.shape[1]))


def bruteforce(pts):
    cdef const double[:, ::1] p = np.ascontiguousarray(pts, dtype=np.float64)
    cdef Py_ssize_t n = p.shape[0], d = p.shape[1], i, j
    cdef long long checks = 0
    cdef bint dominated
    out = np.empty(n, dtype=np.int64)
    cdef long long[::1] keep = out
    cdef Py_ssize_t nk = 0
    with nogil:
        for i in range(n):
            dominated = False
            for j in range(n):
                if j == i:
                    continue
                checks += 1
                if _dom(p, j, p, i, d):
                    dominated = True
                    break
            if not dominated:
                keep[nk] = i
                nk += 1
    return out[:nk].copy(), checks


def bnl(pts):
    cdef const double[:, ::1] p = np.ascontiguousarray(pts, dtype=np.float64)
    cdef Py_ssize_t n = p.shape[0], d = p.shape[1], i, k, w, size = 0, nsize
    cdef long long checks = 0
    cdef bint dominated
    cdef Py_ssize_t *win = <Py_ssize_t *> malloc((n + 1) * sizeof(Py_ssize_t))
    if win == NULL:
        raise MemoryError()
    try:
        with nogil:
            for i in range(n):
                dominated = False
                nsize = 0
                k = 0
                while k < size:
                    w = win[k]
                    checks += 1
                    if _dom(p, w, p, i, d):
                        dominated = True
                        # keep the untested tail in order
                        while k < size:
                            win[nsize] = win[k]
                            nsize += 1
                            k += 1
                        break
                    checks += 1
                    if not _dom(p, i, p, w, d):
                        win[nsize] = w
                        nsize += 1
                    k += 1
                size = nsize
                if not dominated:
                    win[size] = i
                    size += 1
        out = np.array([win[k] for k in range(size)], dtype=np.int64)
    finally:
        free(win)
    out.sort()
    return out, checks


def sfs(pts):
    cdef const double[:, ::1] p = np.ascontiguousarray(pts, dtype=np.float64)
    cdef Py_ssize_t n = p.shape[0], d = p.shape[1], i, k, size = 0
    cdef long long checks = 0
    cdef bint dominated
    out = np.empty(n, dtype=np.int64)
    cdef long long[::1] win = out
    with nogil:
        for i in range(n):
            dominated = False
            for k in range(size):
                checks += 1
                if _dom(p, win[k], p, i, d):
                    dominated = True
                    break
            if not dominated:
                win[size] = i
                size += 1
    return out[:size].copy(), checks


def salsa(pts, minc, maxc):
    cdef const double[:, ::1] p = np.ascontiguousarray(pts, dtype=np.float64)
    cdef const double[::1] mn = np.ascontiguousarray(minc, dtype=np.float64)
    cdef const double[::1] mx = np.ascontiguousarray(maxc, dtype=np.float64)
    cdef Py_ssize_t n = p.shape[0], d = p.shape[1], i, k, size = 0, read = n
    cdef long long checks = 0
    cdef bint dominated
    cdef double stop = float("inf")
    out = np.empty(n, dtype=np.int64)
    cdef long long[::1] win = out
    with nogil:
        for i in range(n):
            if stop < mn[i]:
                read = i
                break
            dominated = False
            for k in range(size):
                checks += 1
                if _dom(p, win[k], p, i, d):
                    dominated = True
                    break
            if not dominated:
                win[size] = i
                size += 1
                if mx[i] < stop:
                    stop = mx[i]
    return out[:size].copy(), checks, read


def filter_dominated(cands, window):
    cdef const double[:, ::1] c = np.ascontiguousarray(cands, dtype=np.float64)
    cdef const double[:, ::1] w = np.ascontiguousarray(window, dtype=np.float64)
    cdef Py_ssize_t n = c.shape[0], m = w.shape[0], d = c.shape[1], i, k
    cdef long long checks = 0
    keep_arr = np.ones(n, dtype=np.uint8)
    cdef unsigned char[::1] keep = keep_arr
    if m == 0 or n == 0:
        return keep_arr.astype(bool), 0
    with nogil:
        for i in range(n):
            for k in range(m):
                checks += 1
                if _dom(w, k, c, i, d):
                    keep[i] = 0
                    break
    return keep_arr.astype(bool), checks


def find_dominator(point, window, Py_ssize_t count):
    cdef const double[:, ::1] t = np.ascontiguousarray(np.asarray(point, dtype=np.float64).reshape(1, -1))
    cdef const double[:, ::1] w = window
    cdef Py_ssize_t k, d = t.shape[1]
    cdef long long checks = 0
    for k in range(count):
        checks += 1
        if _dom(w, k, t, 0, d):
            return k, checks
    return -1, checks
