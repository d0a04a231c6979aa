"""Closed-form path correlations under a linear-Gaussian model.

Covers unconditioned path covariance and variance propagation, the
truncated-Gaussian variance factor for equi-width segments over +-3 sigma,
the eigen-space prediction of per-attribute variance after k-means
clustering, and regression-based conditional moments given clustered
conditioning variables.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .causal_graph import CausalGraph, CausalPath, Role
from .preferences import PreferenceSpec
from .tabular import GaussianStats

SUPPORT_SIGMAS = 3.0
MASS_FLOOR = 1e-12
_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


class AnalyticError(ValueError):
    pass


# ---------------------------------------------------------------- normal helpers

def normal_pdf(x: float) -> float:
    return _INV_SQRT_2PI * math.exp(-0.5 * x * x)


def normal_mass(lo: float, hi: float) -> float:
    """P(lo <= X <= hi) for a standard normal, accurate in both tails."""
    if lo >= 0.0:
        return 0.5 * (math.erfc(lo / _SQRT2) - math.erfc(hi / _SQRT2))
    if hi <= 0.0:
        return 0.5 * (math.erfc(-hi / _SQRT2) - math.erfc(-lo / _SQRT2))
    return 0.5 * (math.erf(hi / _SQRT2) - math.erf(lo / _SQRT2))


@dataclass(frozen=True)
class TruncationSegment:
    L: float
    U: float
    rho: float
    mu_cond: float
    mass: float


def truncated_segment(L: float, U: float) -> TruncationSegment:
    """Variance factor and mean of a standard normal restricted to [L, U]."""
    if not L < U:
        raise AnalyticError(f"need L < U, got [{L}, {U}]")
    mass = normal_mass(L, U)
    if mass < MASS_FLOOR:
        raise AnalyticError(f"segment [{L}, {U}] has negligible mass {mass:.3g}")
    fl, fu = normal_pdf(L), normal_pdf(U)
    mu = (fl - fu) / mass
    rho = 1.0 + (L * fl - U * fu) / mass - mu * mu
    return TruncationSegment(L, U, rho, mu, mass)


def segment_indices(c: int) -> range:
    """Valid segment indices: -c/2 .. c/2-1 for even c, -(c-1)/2 .. (c-1)/2 for odd c."""
    lo = -(c // 2)
    return range(lo, lo + c)


def segment_bounds(c: int, i: int) -> tuple[float, float]:
    if c < 1:
        raise AnalyticError("segment count must be >= 1")
    idx = segment_indices(c)
    if i not in idx:
        raise AnalyticError(f"segment index {i} outside [{idx.start}, {idx.stop - 1}] for c={c}")
    width = 2.0 * SUPPORT_SIGMAS / c
    j = i - idx.start
    return -SUPPORT_SIGMAS + j * width, -SUPPORT_SIGMAS + (j + 1) * width


def trunc_gauss_segment_var(c: int, i: int, V: float = 1.0) -> float:
    """Variance of segment ``i`` when N(0, V) is cut into ``c`` equal bins over +-3 sigma."""
    if V < 0:
        raise AnalyticError("variance must be non-negative")
    L, U = segment_bounds(c, i)
    return V * truncated_segment(L, U).rho


def mean_segment_factor(c: int) -> float:
    """Unweighted average variance factor over the ``c`` segments."""
    return sum(truncated_segment(*segment_bounds(c, i)).rho for i in segment_indices(c)) / c


# ---------------------------------------------------------------- cluster variance

def allocate_partitions(eigvals: np.ndarray, c: int) -> np.ndarray:
    """Integer partition counts per eigen-dimension with product <= c.

    Counts are proportional to the eigen-variances. When ``c`` cannot split
    every dimension in two, only the round(log2 c) largest dimensions are
    partitioned.
    """
    k = len(eigvals)
    order = np.argsort(-eigvals, kind="stable")
    lam = np.clip(eigvals[order], 0.0, None)
    nonzero = int(np.sum(lam > 1e-12 * max(lam.max(), 1e-300)))
    active = max(1, nonzero)
    if c ** (1.0 / active) < 2.0:
        active = max(1, min(active, int(round(math.log2(c)))))
    # drop trailing dimensions whose continuous share falls below two partitions
    while active > 1:
        ll = lam[:active]
        t = (c / np.prod(ll)) ** (1.0 / active)
        if t * ll[-1] >= 2.0 - 1e-9:
            break
        active -= 1
    ll = lam[:active]
    t = (c / np.prod(ll)) ** (1.0 / active)
    counts = np.maximum(1, np.rint(t * ll)).astype(np.int64)
    while np.prod(counts) > c:
        over = np.where(counts > 1, ll / counts, np.inf)
        counts[int(np.argmin(over))] -= 1
    while True:
        gain = ll / counts
        j = int(np.argmax(gain))
        if np.prod(counts) // counts[j] * (counts[j] + 1) > c:
            break
        counts[j] += 1
    out = np.ones(k, dtype=np.int64)
    out[order[:active]] = counts
    return out


def cluster_variance_scaling(stats: GaussianStats, c: int) -> dict[str, float]:
    """Predicted within-cluster variance / total variance per attribute after k-means into ``c`` clusters."""
    if c < 1:
        raise AnalyticError("cluster count must be >= 1")
    cov = np.atleast_2d(np.asarray(stats.covariance, dtype=np.float64))
    if not np.allclose(cov, cov.T, atol=1e-10):
        raise AnalyticError("covariance matrix is not symmetric")
    sd = np.sqrt(np.diag(cov))
    if np.any(sd <= 0):
        raise AnalyticError("zero-variance attribute in the conditioning set")
    corr = cov / np.outer(sd, sd)
    lam, vecs = np.linalg.eigh(corr)
    if lam.min() < -1e-8:
        raise AnalyticError("covariance matrix is not positive semi-definite")
    lam = np.clip(lam, 0.0, None)
    counts = allocate_partitions(lam, c) if c > 1 else np.ones(len(lam), dtype=np.int64)
    factors = np.array([mean_segment_factor(int(ci)) if ci > 1 else 1.0 for ci in counts])
    within = (vecs * (lam * factors)) @ vecs.T
    rho = np.diag(within)  # correlation scale: diagonal of the original is 1
    return {a: float(r) for a, r in zip(stats.attributes, rho)}


# ---------------------------------------------------------------- path models

@dataclass(frozen=True)
class PathModel:
    """Variables along a path with oriented coefficients and per-edge noise.

    ``forward[k]`` is True when the k-th edge points from ``nodes[k]`` to
    ``nodes[k+1]``. ``source_var`` gives variances of nodes with no incoming
    path edge.
    """

    nodes: tuple[str, ...]
    coefficients: tuple[float, ...]
    forward: tuple[bool, ...]
    noise: tuple[float, ...]
    source_var: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        m = len(self.nodes) - 1
        if m < 1 or not (len(self.coefficients) == len(self.forward) == len(self.noise) == m):
            raise AnalyticError("path model needs one coefficient, orientation and noise per edge")
        if any(e < 0 for e in self.noise):
            raise AnalyticError("noise variances must be non-negative")

    @classmethod
    def from_path(cls, p: CausalPath, source_var: Mapping[str, float] | None = None) -> "PathModel":
        return cls(
            p.nodes,
            tuple(s.edge.weight for s in p.steps),
            tuple(s.forward for s in p.steps),
            tuple(s.edge.noise_var for s in p.steps),
            dict(source_var or {}),
        )

    def roles(self) -> list[Role]:
        out = []
        for k in range(1, len(self.nodes) - 1):
            left_in, right_in = self.forward[k - 1], not self.forward[k]
            out.append(Role.COLLIDER if left_in and right_in else Role.FORK if not (left_in or right_in) else Role.MEDIATOR)
        return out

    def parents(self, k: int) -> list[int]:
        out = []
        if k > 0 and self.forward[k - 1]:
            out.append(k - 1)
        if k < len(self.nodes) - 1 and not self.forward[k]:
            out.append(k + 1)
        return out

    def weight_matrix(self) -> np.ndarray:
        n = len(self.nodes)
        W = np.zeros((n, n))
        for k, (a, fwd) in enumerate(zip(self.coefficients, self.forward)):
            if fwd:
                W[k, k + 1] = a
            else:
                W[k + 1, k] = a
        return W

    def exogenous(self) -> np.ndarray:
        d = np.zeros(len(self.nodes))
        for k, name in enumerate(self.nodes):
            pars = self.parents(k)
            if not pars:
                if name not in self.source_var:
                    raise AnalyticError(f"no source variance supplied for {name!r}")
                d[k] = self.source_var[name]
            else:
                for q in pars:
                    d[k] += self.noise[min(k, q)]
        return d


def path_variance_propagation(pm: PathModel) -> np.ndarray:
    """var(U_0..U_m): sources take their given variance; others sum alpha^2 var(parent) + noise."""
    return np.diag(path_covariance_matrix(pm)).copy()


def path_covariance_matrix(pm: PathModel) -> np.ndarray:
    """Covariance implied by the path's own linear SEM."""
    W = pm.weight_matrix()
    A = np.linalg.inv(np.eye(len(pm.nodes)) - W)
    return A.T @ np.diag(pm.exogenous()) @ A


def path_unconditioned_cov(pm: PathModel) -> float:
    roles = pm.roles()
    if Role.COLLIDER in roles:
        return 0.0
    if roles.count(Role.FORK) > 1:
        raise AnalyticError("a collider-free path cannot contain two forks")
    var = path_variance_propagation(pm)
    alphas = list(pm.coefficients)
    if Role.FORK in roles:
        f = roles.index(Role.FORK) + 1
        return float(np.prod(alphas[:f]) * var[f] * np.prod(alphas[f:]))
    src = 0 if pm.forward[0] else len(pm.nodes) - 1
    return float(np.prod(alphas) * var[src])


# ---------------------------------------------------------------- conditional moments

@dataclass(frozen=True)
class GaussianContext:
    """Joint covariance of named variables plus the skeleton used to find nearest conditioned nodes."""

    names: tuple[str, ...]
    cov: np.ndarray
    adjacency: Mapping[str, tuple[str, ...]]

    def index(self, a: str) -> int:
        try:
            return self.names.index(a)
        except ValueError:
            raise AnalyticError(f"unknown variable {a!r}") from None

    @classmethod
    def from_path_model(cls, pm: PathModel) -> "GaussianContext":
        adj = {n: [] for n in pm.nodes}
        for k in range(len(pm.nodes) - 1):
            adj[pm.nodes[k]].append(pm.nodes[k + 1])
            adj[pm.nodes[k + 1]].append(pm.nodes[k])
        return cls(pm.nodes, path_covariance_matrix(pm), {k: tuple(v) for k, v in adj.items()})

    @classmethod
    def from_graph(cls, g: CausalGraph) -> "GaussianContext":
        return cls(tuple(g.nodes), implied_covariance(g), {n: tuple(g.neighbors(n)) for n in g.nodes})


def implied_covariance(g: CausalGraph) -> np.ndarray:
    """Covariance of the graph's SEM: unit-variance roots, per-edge noise variances summed at each node."""
    names = list(g.nodes)
    pos = {n: i for i, n in enumerate(names)}
    n = len(names)
    W = np.zeros((n, n))
    d = np.zeros(n)
    for node in names:
        ins = g.in_edges(node)
        d[pos[node]] = sum(e.noise_var for e in ins) if ins else 1.0
        for e in ins:
            W[pos[e.src], pos[node]] = e.weight
    A = np.linalg.inv(np.eye(n) - W)
    return A.T @ np.diag(d) @ A


def nearest_conditioned(ctx: GaussianContext, x: str, Z: Iterable[str]) -> list[str]:
    """Conditioned variables reachable from ``x`` without crossing another conditioned variable."""
    Z = set(Z)
    if x in Z:
        return [x]
    seen = {x}
    found = []
    queue = deque([x])
    while queue:
        u = queue.popleft()
        for v in ctx.adjacency.get(u, ()):
            if v in seen:
                continue
            seen.add(v)
            if v in Z:
                found.append(v)
            else:
                queue.append(v)
    return sorted(found, key=ctx.index)


def _regression(ctx: GaussianContext, targets: Sequence[str], cond: Sequence[str]):
    ui = [ctx.index(u) for u in cond]
    C = ctx.cov[np.ix_(ui, ui)]
    if np.linalg.cond(C) > 1e12:
        raise AnalyticError(f"singular covariance among conditioned variables {list(cond)}")
    cs = [ctx.cov[ctx.index(t), ui] for t in targets]
    betas = [np.linalg.solve(C, c) for c in cs]
    return C, cs, betas, np.diag(C)


def conditional_variance(target: str, ctx: GaussianContext, Z: Iterable[str], rho: Mapping[str, float]) -> float:
    """var(target | clusters on Z): regression on the nearest conditioned variables, whose variance shrinks by rho."""
    cond = nearest_conditioned(ctx, target, Z)
    v = float(ctx.cov[ctx.index(target), ctx.index(target)])
    if not cond:
        return v
    _, (c,), (b,), var_u = _regression(ctx, [target], cond)
    r = np.array([rho[u] for u in cond])
    return float(v - c @ b + np.sum(b * b * r * var_u))


def conditional_covariance(x: str, u_h: str, ctx: GaussianContext, Z: Iterable[str], rho: Mapping[str, float]) -> float:
    """cov(x, u_h | clusters on Z); cross-covariances among conditioned variables vanish within clusters."""
    Z = list(Z)
    cond = sorted(set(nearest_conditioned(ctx, x, Z)) | set(nearest_conditioned(ctx, u_h, Z)), key=ctx.index)
    base = float(ctx.cov[ctx.index(x), ctx.index(u_h)])
    if not cond:
        return base
    _, (cx, ch), (bx, bh), var_u = _regression(ctx, [x, u_h], cond)
    r = np.array([rho[u] for u in cond])
    return float(base - cx @ bh + np.sum(bx * bh * r * var_u))


def conditional_correlation(x: str, y: str, ctx: GaussianContext, Z: Iterable[str], rho: Mapping[str, float]) -> float:
    Z = list(Z)
    vx = conditional_variance(x, ctx, Z, rho)
    vy = conditional_variance(y, ctx, Z, rho)
    if vx <= 0 or vy <= 0:
        raise AnalyticError("zero conditional variance")
    return conditional_covariance(x, y, ctx, Z, rho) / math.sqrt(vx * vy)


def analytic_c_gain(p: CausalPath, pm: PathModel, Z: Iterable[str], c: int,
                    rho: Mapping[str, float] | None = None) -> float:
    """Correlation change between the path endpoints once ``Z`` is clustered into ``c`` groups."""
    on_path = [z for z in Z if z in pm.nodes]
    ctx = GaussianContext.from_path_model(pm)
    x, y = pm.nodes[0], pm.nodes[-1]
    var = np.diag(ctx.cov)
    if np.any(var <= 0):
        raise AnalyticError("zero variance on the path")
    before = float(ctx.cov[0, -1] / math.sqrt(var[0] * var[-1]))
    if not on_path:
        return 0.0
    if rho is None:
        idx = [ctx.index(z) for z in on_path]
        stats = GaussianStats(tuple(on_path), np.zeros(len(idx)), ctx.cov[np.ix_(idx, idx)])
        rho = cluster_variance_scaling(stats, c)
    return conditional_correlation(x, y, ctx, on_path, rho) - before


def analytic_gain(g: CausalGraph, pref: PreferenceSpec, Z: Iterable[str], c: int = 10, ds=None,
                  max_length: int | None = None):
    """Sum of per-path correlation changes over preference pairs (mixed-direction pairs sign-flipped)."""
    from .gain import GainReport, pair_paths

    Z = tuple(sorted(set(Z)))
    pref.validate(g.nodes)
    full = GaussianContext.from_graph(g)
    if ds is not None:
        stats = GaussianStats.from_dataset(ds, Z)
    else:
        idx = [full.index(z) for z in Z]
        stats = GaussianStats(Z, np.zeros(len(Z)), full.cov[np.ix_(idx, idx)])
    rho = cluster_variance_scaling(stats, c) if Z else {}
    variances = {n: float(full.cov[i, i]) for i, n in enumerate(full.names)}
    total = 0.0
    per_pair = {}
    for a, b in pref.pairs():
        if a in Z or b in Z:
            per_pair[(a, b)] = {"skipped": True}
            continue
        s = 0.0
        for p in pair_paths(g, a, b, max_length):
            pm = PathModel.from_path(p, variances)
            s += analytic_c_gain(p, pm, Z, c, rho)
        s *= pref.orientation(a, b)
        per_pair[(a, b)] = {"c_gain": s}
        total += s
    return GainReport("analytic", Z, total, per_pair, {"m": c})
