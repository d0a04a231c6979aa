"""Column-oriented numeric tables: ingestion, normalization, synthetic data.

All statistics use the sample (n - 1) denominator.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence

import numpy as np

if TYPE_CHECKING:
    from .causal_graph import CausalGraph


class DataError(ValueError):
    """Raised for malformed tabular input."""


@dataclass(frozen=True)
class Dataset:
    """Immutable table of float64 columns keyed by attribute name."""

    attribute_names: tuple[str, ...]
    columns: Mapping[str, np.ndarray]
    metadata: Mapping[str, object] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        names = tuple(self.attribute_names)
        if any(not n for n in names):
            raise DataError("attribute names must be non-empty")
        if len(set(names)) != len(names):
            raise DataError(f"duplicate attribute names in {names}")
        if set(names) != set(self.columns):
            raise DataError("column keys do not match attribute names")
        cols = {}
        lengths = set()
        for n in names:
            col = np.array(self.columns[n], dtype=np.float64, copy=True)
            if col.ndim != 1:
                raise DataError(f"column {n!r} is not one-dimensional")
            if not np.all(np.isfinite(col)):
                raise DataError(f"column {n!r} contains NaN or infinite values")
            col.setflags(write=False)
            cols[n] = col
            lengths.add(col.shape[0])
        if len(lengths) > 1:
            raise DataError(f"ragged columns: lengths {sorted(lengths)}")
        object.__setattr__(self, "attribute_names", names)
        object.__setattr__(self, "columns", cols)
        object.__setattr__(self, "metadata", dict(self.metadata))

    @classmethod
    def from_array(cls, names: Sequence[str], values: np.ndarray, metadata=None) -> "Dataset":
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 2 or values.shape[1] != len(names):
            raise DataError("array shape does not match attribute names")
        return cls(tuple(names), {n: values[:, i] for i, n in enumerate(names)}, metadata or {})

    @property
    def row_count(self) -> int:
        if not self.attribute_names:
            return 0
        return int(self.columns[self.attribute_names[0]].shape[0])

    def __len__(self) -> int:
        return self.row_count

    def column(self, name: str) -> np.ndarray:
        try:
            return self.columns[name]
        except KeyError:
            raise DataError(f"unknown attribute {name!r}") from None

    def matrix(self, attrs: Iterable[str] | None = None) -> np.ndarray:
        """Return an (n, k) float64 copy of the selected columns."""
        attrs = self.attribute_names if attrs is None else list(attrs)
        if not attrs:
            return np.empty((self.row_count, 0))
        return np.column_stack([self.column(a) for a in attrs])

    def take(self, rows: np.ndarray) -> "Dataset":
        rows = np.asarray(rows, dtype=np.intp)
        return Dataset(self.attribute_names, {n: self.columns[n][rows] for n in self.attribute_names})

    def _check_attrs(self, attrs: Iterable[str]) -> list[str]:
        attrs = list(attrs)
        for a in attrs:
            if a not in self.columns:
                raise DataError(f"unknown attribute {a!r}")
        return attrs


def load_csv(path, header: bool = True) -> Dataset:
    """Read a comma-separated numeric file whose first line names the columns."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    if not header:
        raise DataError("a header row of attribute names is required")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            names = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise DataError(f"{path}: duplicate header names {dupes}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(names):
                raise DataError(f"{path}:{lineno}: expected {len(names)} fields, got {len(row)}")
            parsed = []
            for name, cell in zip(names, row):
                try:
                    v = float(cell)
                except ValueError:
                    raise DataError(f"{path}:{lineno}: column {name!r}: non-numeric cell {cell!r}") from None
                if not math.isfinite(v):
                    raise DataError(f"{path}:{lineno}: column {name!r}: non-finite cell {cell!r}")
                parsed.append(v)
            rows.append(parsed)
    values = np.array(rows, dtype=np.float64).reshape(len(rows), len(names))
    return Dataset.from_array(names, values, {"source": str(path)})


def write_csv(ds: Dataset, path) -> None:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ds.attribute_names)
        for row in ds.matrix():
            w.writerow([repr(float(v)) for v in row])


def normalize_zscore(ds: Dataset, attrs: Iterable[str]) -> Dataset:
    """Standardize the chosen columns to mean 0, sample variance 1.

    Constant columns become all zeros and are listed under the
    ``zero_variance`` metadata key.
    """
    attrs = ds._check_attrs(attrs)
    cols = dict(ds.columns)
    flagged = []
    for a in attrs:
        col = cols[a]
        mu = col.mean() if col.size else 0.0
        sd = col.std(ddof=1) if col.size > 1 else 0.0
        if sd == 0.0 or not np.isfinite(sd):
            cols[a] = np.zeros_like(col)
            flagged.append(a)
        else:
            cols[a] = (col - mu) / sd
    meta = dict(ds.metadata)
    meta["zero_variance"] = tuple(flagged)
    return Dataset(ds.attribute_names, cols, meta)


def generate_sem(g: "CausalGraph", n: int, seed: int) -> Dataset:
    """Sample a linear-Gaussian structural equation model over ``g``.

    Roots are N(0, 1). A non-root is the weighted sum of its parents plus
    one Gaussian noise term per incoming edge, each with that edge's
    ``noise_var`` (independent terms, so the variances add).
    """
    if n < 1:
        raise DataError("row count must be >= 1")
    order = g.topological_order()
    rng = np.random.default_rng(seed)
    cols: dict[str, np.ndarray] = {}
    for node in order:
        parents = g.in_edges(node)
        if not parents:
            cols[node] = rng.standard_normal(n)
            continue
        total_noise = sum(e.noise_var for e in parents)
        v = rng.standard_normal(n) * math.sqrt(total_noise)
        for e in parents:
            v += e.weight * cols[e.src]
        cols[node] = v
    return Dataset(tuple(g.nodes), cols, {"generator": "sem", "seed": seed})


def augment_gaussian(ds: Dataset, target_n: int, sigma: float, seed: int) -> Dataset:
    """Oversample rows with Gaussian perturbation up to ``target_n`` rows."""
    if ds.row_count == 0:
        raise DataError("cannot augment an empty dataset")
    if target_n < ds.row_count:
        raise DataError("target_n must be >= the current row count")
    if sigma < 0:
        raise DataError("sigma must be non-negative")
    extra = target_n - ds.row_count
    if extra == 0:
        return ds
    rng = np.random.default_rng(seed)
    picks = rng.integers(0, ds.row_count, size=extra)
    base = ds.matrix()
    sd = base.std(axis=0, ddof=1) if ds.row_count > 1 else np.zeros(base.shape[1])
    synth = base[picks] + rng.standard_normal((extra, base.shape[1])) * (sigma * sd)
    meta = dict(ds.metadata)
    meta["augmented_from"] = ds.row_count
    return Dataset.from_array(ds.attribute_names, np.vstack([base, synth]), meta)


@dataclass(frozen=True)
class CorrelationMatrix:
    attributes: tuple[str, ...]
    values: np.ndarray
    undefined: frozenset[str] = frozenset()

    def __getitem__(self, pair: tuple[str, str]) -> float:
        a, b = pair
        return float(self.values[self.attributes.index(a), self.attributes.index(b)])


def pearson(x: np.ndarray, y: np.ndarray) -> float:
    """Sample Pearson correlation; NaN when either side has zero variance."""
    if x.size < 2:
        return float("nan")
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = float(xc @ xc)
    syy = float(yc @ yc)
    if sxx == 0.0 or syy == 0.0:
        return float("nan")
    r = float(xc @ yc) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def correlation_matrix(ds: Dataset, attrs: Iterable[str]) -> CorrelationMatrix:
    attrs = ds._check_attrs(attrs)
    if not attrs:
        raise DataError("at least one attribute is required")
    if ds.row_count < 2:
        raise DataError("correlation needs at least two rows")
    k = len(attrs)
    vals = np.full((k, k), np.nan)
    undefined = set()
    cols = [ds.column(a) for a in attrs]
    for i in range(k):
        if np.ptp(cols[i]) == 0.0:
            undefined.add(attrs[i])
            continue
        vals[i, i] = 1.0
        for j in range(i + 1, k):
            r = pearson(cols[i], cols[j])
            vals[i, j] = vals[j, i] = r
    return CorrelationMatrix(tuple(attrs), vals, frozenset(undefined))


@dataclass(frozen=True)
class GaussianStats:
    """Means, variances and the full covariance of a set of attributes."""

    attributes: tuple[str, ...]
    means: np.ndarray
    covariance: np.ndarray

    @property
    def variances(self) -> np.ndarray:
        return np.diag(self.covariance).copy()

    def cov(self, a: str, b: str) -> float:
        return float(self.covariance[self.attributes.index(a), self.attributes.index(b)])

    @classmethod
    def from_dataset(cls, ds: Dataset, attrs: Iterable[str]) -> "GaussianStats":
        attrs = ds._check_attrs(attrs)
        m = ds.matrix(attrs)
        cov = np.atleast_2d(np.cov(m, rowvar=False, ddof=1))
        return cls(tuple(attrs), m.mean(axis=0), cov)
