"""Row partitionings used for conditioning: exact GROUP BY and k-means."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .tabular import DataError, Dataset

DEFAULT_MAX_ITERS = 100


@dataclass
class Partitioning:
    mode: str
    groups: list[np.ndarray]
    conditioning_set: tuple[str, ...]
    metadata: dict = field(default_factory=dict)

    @property
    def m(self) -> int:
        return len(self.groups)

    def labels(self, n: int) -> np.ndarray:
        out = np.full(n, -1, dtype=np.int64)
        for k, g in enumerate(self.groups):
            out[g] = k
        return out


def single_group(ds: Dataset, Z: Sequence[str] = ()) -> Partitioning:
    return Partitioning("single", [np.arange(ds.row_count, dtype=np.int64)], tuple(Z))


def group_by_values(ds: Dataset, Z: Sequence[str]) -> Partitioning:
    """One group per distinct combination of the ``Z`` column values."""
    Z = tuple(ds._check_attrs(Z))
    if not Z:
        raise DataError("conditioning set must be non-empty")
    n = ds.row_count
    if n == 0:
        return Partitioning("group_by", [], Z)
    _, inverse = np.unique(ds.matrix(Z), axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    order = np.argsort(inverse, kind="stable")
    bounds = np.flatnonzero(np.diff(inverse[order])) + 1
    groups = [g.astype(np.int64) for g in np.split(order, bounds)]
    meta = {}
    if len(groups) == n and n > 1:
        warnings.warn("group_by produced one group per row; consider k-means conditioning", stacklevel=2)
        meta["degenerate"] = True
    return Partitioning("group_by", groups, Z, meta)


def _zscore(x: np.ndarray) -> np.ndarray:
    mu = x.mean(axis=0)
    sd = x.std(axis=0, ddof=1) if len(x) > 1 else np.zeros(x.shape[1])
    sd = np.where(sd > 0, sd, 1.0)
    return (x - mu) / sd


def _sq_dists(x: np.ndarray, x2: np.ndarray, centers: np.ndarray) -> np.ndarray:
    d = x2[:, None] - 2.0 * (x @ centers.T) + (centers * centers).sum(axis=1)[None, :]
    return np.maximum(d, 0.0)


def _kmeanspp(x: np.ndarray, x2: np.ndarray, m: int, rng: np.random.Generator) -> np.ndarray:
    n = len(x)
    centers = np.empty((m, x.shape[1]))
    centers[0] = x[rng.integers(n)]
    closest = _sq_dists(x, x2, centers[:1])[:, 0]
    for k in range(1, m):
        total = closest.sum()
        if total <= 0.0:  # fewer distinct points than clusters
            idx = rng.integers(n)
        else:
            idx = int(np.searchsorted(np.cumsum(closest), rng.random() * total, side="right"))
            idx = min(idx, n - 1)
        centers[k] = x[idx]
        closest = np.minimum(closest, _sq_dists(x, x2, centers[k:k + 1])[:, 0])
    return centers


def kmeans_labels(x: np.ndarray, m: int, seed: int, max_iters: int = DEFAULT_MAX_ITERS):
    """Lloyd iterations from k-means++ seeds; returns (labels, iterations, converged)."""
    rng = np.random.default_rng(seed)
    x = np.ascontiguousarray(x, dtype=np.float64)
    x2 = (x * x).sum(axis=1)
    centers = _kmeanspp(x, x2, m, rng)
    labels = np.argmin(_sq_dists(x, x2, centers), axis=1)
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        counts = np.bincount(labels, minlength=m)
        sums = np.zeros_like(centers)
        _add_rows(sums, labels, x)
        live = counts > 0
        centers[live] = sums[live] / counts[live, None]
        new = np.argmin(_sq_dists(x, x2, centers), axis=1)
        if np.array_equal(new, labels):
            converged = True
            break
        labels = new
    return labels, it, converged


def _add_rows(sums, labels, x):
    for j in range(x.shape[1]):
        sums[:, j] = np.bincount(labels, weights=x[:, j], minlength=len(sums))


def kmeans_partition(ds: Dataset, Z: Sequence[str], m: int, seed: int = 0,
                     max_iters: int = DEFAULT_MAX_ITERS) -> Partitioning:
    """Euclidean k-means on the z-scored ``Z`` columns; empty clusters are dropped."""
    Z = tuple(ds._check_attrs(Z))
    if not Z:
        raise DataError("conditioning set must be non-empty")
    if m < 2:
        raise DataError("k-means conditioning needs m >= 2")
    if m > ds.row_count:
        raise DataError(f"m={m} exceeds the row count {ds.row_count}")
    labels, iters, converged = kmeans_labels(_zscore(ds.matrix(Z)), m, seed, max_iters)
    order = np.argsort(labels, kind="stable")
    bounds = np.flatnonzero(np.diff(labels[order])) + 1
    groups = [g.astype(np.int64) for g in np.split(order, bounds)]
    meta = {"requested_m": m, "dropped_empty": m - len(groups), "iterations": iters, "converged": converged}
    return Partitioning("kmeans", groups, Z, meta)


def partition(ds: Dataset, Z: Sequence[str], mode: str = "kmeans", m: int = 10, seed: int = 0,
              max_iters: int = DEFAULT_MAX_ITERS) -> Partitioning:
    if mode == "kmeans":
        if m == 1:
            return single_group(ds, Z)
        return kmeans_partition(ds, Z, m, seed, max_iters)
    if mode == "group_by":
        return group_by_values(ds, Z)
    raise ValueError(f"unknown partition mode {mode!r}")
