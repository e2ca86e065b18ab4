"""Monte Carlo and deterministic checks of the optimality and error-law claims.

Monte Carlo runs are split into fixed blocks of ``BLOCK_SIZE`` samples.  Block
``b`` draws its matrices from ``rng.substream(b, 0)`` and its input vectors
from ``rng.substream(b, 1)``, so the output depends only on the seed and the
sample count.  Shards are a scheduling detail: they pick which blocks a
worker thread computes, never what a block contains.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import analytics
from .analytics import QMatrix
from .projector import (Dims, ProjectionMatrix, SamplerKind, SamplerSpec, build_sampler,
                        sample_matrices)
from .randsrc import RngState, _as_generator, uniform_sphere_batch

BLOCK_SIZE = 1024
KS_COEF_1PCT = 1.628
MIN_KS_SAMPLES = 1000
# float64 elements per chunk of stacked matrices (~32 MB)
_CHUNK_ELEMENTS = 4_000_000


# --------------------------------------------------------------------------
# Monte Carlo
# --------------------------------------------------------------------------

def _block_distortions(spec: SamplerSpec, count: int, rng: RngState, fixed_x) -> np.ndarray:
    m, n = spec.dims.m, spec.dims.n
    mat_gen = rng.substream(0).generator()
    if fixed_x is None:
        xs = uniform_sphere_batch(count, m, rng.substream(1).generator())
    else:
        xs = np.broadcast_to(fixed_x, (count, m))
    out = np.empty(count)
    chunk = max(1, min(count, _CHUNK_ELEMENTS // (m * n)))
    for start in range(0, count, chunk):
        stop = min(count, start + chunk)
        a = sample_matrices(spec, stop - start, mat_gen)
        x = xs[start:stop]
        y = np.einsum("knm,km->kn", a, x)
        out[start:stop] = np.einsum("kn,kn->k", y, y) / np.einsum("km,km->k", x, x) - 1.0
    return out


def monte_carlo_distortions(spec: SamplerSpec, n_samples: int, rng: RngState,
                            shards: int = 1, fixed_x=None) -> np.ndarray:
    """Distortions of ``n_samples`` independent (matrix, input) draws.

    Each sample uses a fresh matrix; the input is a fresh uniform unit vector
    unless ``fixed_x`` is given.
    """
    if n_samples < 1 or shards < 1:
        raise ValueError("n_samples and shards must be positive")
    if fixed_x is not None:
        fixed_x = np.asarray(fixed_x, dtype=float)
        if fixed_x.shape != (spec.dims.m,) or not np.any(fixed_x):
            raise ValueError("fixed_x must be a nonzero vector of length m")
    n_blocks = -(-n_samples // BLOCK_SIZE)
    sizes = [min(BLOCK_SIZE, n_samples - b * BLOCK_SIZE) for b in range(n_blocks)]

    def run_shard(shard: int) -> dict[int, np.ndarray]:
        return {b: _block_distortions(spec, sizes[b], rng.substream(b), fixed_x)
                for b in range(shard, n_blocks, shards)}

    blocks: dict[int, np.ndarray] = {}
    if shards == 1:
        blocks.update(run_shard(0))
    else:
        with ThreadPoolExecutor(max_workers=shards) as pool:
            for part in pool.map(run_shard, range(shards)):
                blocks.update(part)
    return np.concatenate([blocks[b] for b in range(n_blocks)])


@dataclass(frozen=True)
class MonteCarloResult:
    n_samples: int
    mean: float
    variance: float
    mse: float
    mean_se: float
    var_se: float
    mse_se: float

    @classmethod
    def from_samples(cls, samples) -> MonteCarloResult:
        x = np.asarray(samples, dtype=float)
        n = x.size
        if n < 2:
            raise ValueError("need at least two samples")
        mean = float(x.mean())
        var = float(x.var(ddof=1))
        c = x - mean
        mu4 = float(np.mean(c ** 4))
        # standard error of the sample variance from the fourth central moment
        var_se = math.sqrt(max(mu4 - var * var * (n - 3) / (n - 1), 0.0) / n)
        sq = x * x
        return cls(n, mean, var, float(sq.mean()), math.sqrt(var / n), var_se,
                   float(sq.std(ddof=1)) / math.sqrt(n))


# --------------------------------------------------------------------------
# Kolmogorov-Smirnov
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class KsReport:
    statistic: float
    n: int
    critical_1pct: float

    @property
    def passed(self) -> bool:
        return self.statistic <= self.critical_1pct


def ks_test(samples, cdf: Callable[[float], float]) -> KsReport:
    """One-sample KS statistic against a continuous ``cdf``; 1% asymptotic level."""
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    if x.size == 0:
        raise ValueError("no samples")
    if np.isnan(x).any():
        raise ValueError("samples contain NaN")
    n = x.size
    f = np.array([cdf(float(v)) for v in x])
    i = np.arange(1, n + 1)
    d = max(float(np.max(i / n - f)), float(np.max(f - (i - 1) / n)))
    return KsReport(d, n, KS_COEF_1PCT / math.sqrt(n))


def ks_two_sample(a, b) -> KsReport:
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    d = float(np.max(np.abs(fa - fb)))
    n_eff = a.size * b.size / (a.size + b.size)
    return KsReport(d, int(round(n_eff)), KS_COEF_1PCT / math.sqrt(n_eff))


# --------------------------------------------------------------------------
# Optimality checks
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class DominanceReport:
    dims: Dims
    bound: float
    gaussian: MonteCarloResult | None
    best_variance: MonteCarloResult | None
    ratio_required: float = 1.1

    @property
    def dominated(self) -> bool:
        if self.gaussian is None:
            return True
        return self.gaussian.variance >= self.ratio_required * self.bound

    @property
    def attained(self) -> bool:
        if self.best_variance is None:
            return True
        return abs(self.best_variance.variance - self.bound) <= 0.02 * self.bound

    @property
    def passed(self) -> bool:
        return self.dominated and self.attained


def lower_bound_dominance(dims: Dims, n_samples: int, rng: RngState,
                          shards: int = 1) -> DominanceReport:
    """Gaussian baseline variance against the unbiased lower bound, plus the
    best-variance sampler attaining it."""
    bound = analytics.min_variance(dims)
    if dims.n == dims.m:
        return DominanceReport(dims, bound, None, None)
    gauss = monte_carlo_distortions(build_sampler(SamplerKind.GAUSSIAN_IID, dims),
                                    n_samples, rng.substream(0), shards)
    best = monte_carlo_distortions(build_sampler(SamplerKind.BEST_VARIANCE, dims),
                                   n_samples, rng.substream(1), shards)
    return DominanceReport(dims, bound, MonteCarloResult.from_samples(gauss),
                           MonteCarloResult.from_samples(best))


def golden_section_min(f: Callable, lo: float, hi: float, tol: float = 1e-12,
                       max_iter: int = 500) -> float:
    """Minimizer of a unimodal ``f`` on ``[lo, hi]``.

    ``f`` may return exact values (e.g. ``Fraction``); comparisons are then
    free of rounding, which float evaluation of a flat quadratic is not.
    """
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = float(lo), float(hi)
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def numeric_mse_argmin(dims: Dims, hi: float | None = None) -> float:
    """Golden-section argmin of the MSE objective, evaluated in exact rationals."""
    if hi is None:
        hi = max(10.0, 2.0 * dims.m / dims.n)
    return golden_section_min(lambda u: analytics.mse_objective(Fraction(u), dims), 0.0, hi)


# --------------------------------------------------------------------------
# Majorization / Schur-convexity
# --------------------------------------------------------------------------

def majorizes(high, low, tol: float = 1e-12) -> bool:
    """True when ``low`` is majorized by ``high``."""
    hs = np.cumsum(np.sort(np.asarray(high, dtype=float))[::-1])
    ls = np.cumsum(np.sort(np.asarray(low, dtype=float))[::-1])
    scale = max(1.0, float(hs[-1]))
    return bool(abs(hs[-1] - ls[-1]) <= tol * scale and np.all(ls <= hs + tol * scale))


@dataclass(frozen=True, eq=False)
class MajorizationPair:
    w_low: np.ndarray
    w_high: np.ndarray

    def __post_init__(self):
        if self.w_low.shape != self.w_high.shape:
            raise ValueError("pair vectors must have equal length")
        if np.any(self.w_low < 0) or np.any(self.w_high < 0):
            raise ValueError("pair vectors must be non-negative")
        if not majorizes(self.w_high, self.w_low):
            raise RuntimeError("generated pair violates the majorization order")


def averaging_pair(w) -> MajorizationPair:
    """``(mean(w) * 1, w)``: the most extreme pair below ``w``."""
    w = np.asarray(w, dtype=float)
    return MajorizationPair(np.full_like(w, w.mean()), w.copy())


def schur_pairs(length: int, count: int, rng: RngState, max_steps: int = 8) -> list[MajorizationPair]:
    """Random comparable pairs built by progressive (Robin Hood) transfers."""
    gen = _as_generator(rng)
    pairs = []
    for _ in range(count):
        high = gen.exponential(size=length) * gen.uniform(0.1, 10.0)
        low = high.copy()
        for _ in range(int(gen.integers(1, max_steps + 1))):
            i, j = gen.choice(length, size=2, replace=length < 2)
            if low[i] < low[j]:
                i, j = j, i
            gap = low[i] - low[j]
            if gap <= 0:
                continue
            t = gen.uniform(0.0, 0.5) * gap
            low[i] -= t
            low[j] += t
        pairs.append(MajorizationPair(low, high))
    return pairs


@dataclass(frozen=True)
class SchurReport:
    pairs: int
    violations: int
    max_excess: float

    @property
    def passed(self) -> bool:
        return self.violations == 0


def schur_check(pairs: Sequence[MajorizationPair], q: QMatrix, tol: float = 1e-12) -> SchurReport:
    """Count pairs where the variance functional decreases along majorization."""
    violations = 0
    worst = -math.inf
    for p in pairs:
        if p.w_low.shape != (q.n,):
            raise ValueError(f"pair length {p.w_low.size} does not match Q of size {q.n}")
        excess = (analytics.variance_functional(q, p.w_low)
                  - analytics.variance_functional(q, p.w_high))
        worst = max(worst, excess)
        if excess > tol:
            violations += 1
    return SchurReport(len(pairs), violations, worst)


def psd_check(max_m: int = 200, lambda_param: float = 0.5) -> tuple[float, tuple[int, int]]:
    """Smallest Q-matrix eigenvalue over ``1 <= n <= m <= max_m`` and where it occurs."""
    worst, where = math.inf, (0, 0)
    for m in range(1, max_m + 1):
        for n in range(1, m + 1):
            ev = analytics.q_matrix(m, n, lambda_param).min_eigenvalue()
            if ev < worst:
                worst, where = ev, (m, n)
    return worst, where


# --------------------------------------------------------------------------
# Singular-value reduction and the sphere/Dirichlet correspondence
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SvdReport:
    trials: int
    max_residual: float
    singular_values: np.ndarray = field(repr=False)
    ks: KsReport | None = None
    tol: float = 1e-10

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tol and (self.ks is None or self.ks.passed)


def svd_reduction_check(a, trials: int, rng: RngState, ks_samples: int = 0) -> SvdReport:
    """Compare ``|Ax|^2`` with ``sum_k s_k^2 (V^T x)_k^2`` for random unit ``x``.

    With ``ks_samples > 0`` also compares the distortion law of ``A`` with that
    of the bare rectangular diagonal of its singular values.
    """
    mat = a.entries if isinstance(a, ProjectionMatrix) else np.asarray(a, dtype=float)
    n, m = mat.shape
    try:
        _, s, vt = np.linalg.svd(mat, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise ArithmeticError(f"SVD did not converge: {exc}") from exc
    xs = uniform_sphere_batch(trials, m, rng.substream(0).generator())
    direct = np.einsum("nm,km->kn", mat, xs)
    direct = np.einsum("kn,kn->k", direct, direct)
    w = xs @ vt.T
    reduced = (w * w) @ (s * s)
    resid = float(np.max(np.abs(direct - reduced)))
    ks = None
    if ks_samples:
        lam = np.zeros((n, m))
        lam[np.arange(s.size), np.arange(s.size)] = s
        xa = uniform_sphere_batch(ks_samples, m, rng.substream(1).generator())
        xb = uniform_sphere_batch(ks_samples, m, rng.substream(2).generator())
        da = np.sum((xa @ mat.T) ** 2, axis=1) - 1.0
        db = np.sum((xb @ lam.T) ** 2, axis=1) - 1.0
        ks = ks_two_sample(da, db)
    return SvdReport(trials, resid, s, ks)


@dataclass(frozen=True)
class SphereDirichletReport:
    m: int
    n: int
    marginal: KsReport
    partial_sum: KsReport
    max_sum_error: float

    @property
    def passed(self) -> bool:
        return self.marginal.passed and self.partial_sum.passed and self.max_sum_error <= 1e-12


def sphere_dirichlet_check(m: int, n_samples: int, rng: RngState) -> SphereDirichletReport:
    """Squared sphere coordinates against Dirichlet(1/2) marginals and partial sums."""
    if m < 2:
        raise ValueError("need m >= 2")
    if n_samples < MIN_KS_SAMPLES:
        raise ValueError(f"distributional checks need at least {MIN_KS_SAMPLES} samples")
    x = uniform_sphere_batch(n_samples, m, _as_generator(rng))
    z = x * x
    n = m // 2
    marginal = ks_test(z[:, 0], lambda t: _unit_beta_cdf(0.5, (m - 1) / 2, t))
    partial = ks_test(z[:, :n].sum(axis=1), lambda t: _unit_beta_cdf(n / 2, (m - n) / 2, t))
    return SphereDirichletReport(m, n, marginal, partial,
                                 float(np.max(np.abs(z.sum(axis=1) - 1.0))))


def _unit_beta_cdf(a: float, b: float, t: float) -> float:
    return analytics.beta_cdf(a, b, min(max(t, 0.0), 1.0))


def error_law_ks(spec: SamplerSpec, n_samples: int, rng: RngState, shards: int = 1,
                 law: analytics.ScaledBeta | None = None) -> KsReport:
    """KS of simulated distortions against the exact law for ``spec.kind``."""
    if n_samples < MIN_KS_SAMPLES:
        raise ValueError(f"distributional checks need at least {MIN_KS_SAMPLES} samples")
    if law is None:
        law = analytics.error_distribution(spec.kind, spec.dims)
    samples = monte_carlo_distortions(spec, n_samples, rng, shards)
    return ks_test(samples, law.cdf)
