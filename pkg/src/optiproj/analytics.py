"""Closed-form statistics of the optimal samplers.

Exact distortion laws (scaled Beta), the variance/MSE optima, tail bounds
(exact, Bernstein-form and two prior-work comparators), the MSE objective in
the squared scale, and the Dirichlet covariance machinery behind the
Schur-convexity argument.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ._betainc import betainc_pair
from .projector import Dims, SamplerKind, best_mse_scale_squared

__all__ = [
    "ScaledBeta",
    "SubGammaParams",
    "TailCurve",
    "TailProbabilities",
    "QMatrix",
    "DEFAULT_KAPPA",
    "min_variance",
    "min_mse",
    "error_distribution",
    "beta_cdf",
    "beta_sf",
    "exact_tail",
    "subgamma_params",
    "subgamma_tail",
    "dg_bound",
    "achlioptas_bound",
    "tail_curve",
    "mse_objective",
    "mse_argmin",
    "q_matrix",
    "variance_functional",
    "dirichlet_covariance",
    "dirichlet_covariance_matrix",
]

# Bernstein constant c = kappa * v2 / sqrt(n); see subgamma_params.
# 4.0 keeps the bound above the exact tail for eps in [0.01, 1] at
# (m, n) = (100, 20), (50, 10) and (10000, 100); 1.0 fails at (10000, 100).
# The c ~ v2/sqrt(n) scaling is not valid when n is close to m.
DEFAULT_KAPPA = 4.0


def min_variance(dims: Dims) -> float:
    """Smallest distortion variance attainable by an unbiased sampler."""
    m, n = dims.m, dims.n
    return 2.0 * (m - n) / (n * (m + 2))


def min_mse(dims: Dims) -> float:
    """Smallest distortion MSE attainable by any sampler."""
    m, n = dims.m, dims.n
    return 2.0 * (m - n) / (m * (n + 2))


def beta_cdf(alpha: float, beta_param: float, x: float) -> float:
    """Regularized incomplete beta ``I_x(alpha, beta_param)``."""
    return betainc_pair(alpha, beta_param, x)[0]


def beta_sf(alpha: float, beta_param: float, x: float) -> float:
    return betainc_pair(alpha, beta_param, x)[1]


@dataclass(frozen=True)
class ScaledBeta:
    """The law of ``scale * Beta(alpha, beta_param) + shift``.

    With ``degenerate=True`` the law is a point mass at ``scale + shift``
    (the Beta factor has collapsed to 1); ``beta_param`` is then 0.
    """

    alpha: float
    beta_param: float
    scale: float
    shift: float
    degenerate: bool = False

    def __post_init__(self):
        if not (self.alpha > 0 and self.scale > 0):
            raise ValueError("alpha and scale must be positive")
        if self.degenerate:
            if self.beta_param != 0:
                raise ValueError("a degenerate law carries beta_param = 0")
        elif not self.beta_param > 0:
            raise ValueError("beta_param must be positive for a non-degenerate law")

    @property
    def support(self) -> tuple[float, float]:
        if self.degenerate:
            return (self.shift + self.scale,) * 2
        return self.shift, self.shift + self.scale

    def mean(self) -> float:
        if self.degenerate:
            return self.shift + self.scale
        return self.scale * self.alpha / (self.alpha + self.beta_param) + self.shift

    def variance(self) -> float:
        if self.degenerate:
            return 0.0
        a, b = self.alpha, self.beta_param
        return self.scale ** 2 * a * b / ((a + b) ** 2 * (a + b + 1))

    def second_moment(self) -> float:
        """``E[X^2]``; for a distortion law this is the MSE."""
        return self.variance() + self.mean() ** 2

    def _to_unit(self, t: float) -> float:
        return (t - self.shift) / self.scale

    def cdf(self, t: float) -> float:
        if self.degenerate:
            return 1.0 if t >= self.shift + self.scale else 0.0
        u = self._to_unit(t)
        if u <= 0.0:
            return 0.0
        if u >= 1.0:
            return 1.0
        return beta_cdf(self.alpha, self.beta_param, u)

    def sf(self, t: float) -> float:
        """``P[X > t]``."""
        if self.degenerate:
            return 0.0 if t >= self.shift + self.scale else 1.0
        u = self._to_unit(t)
        if u <= 0.0:
            return 1.0
        if u >= 1.0:
            return 0.0
        return beta_sf(self.alpha, self.beta_param, u)

    def cdf_array(self, t) -> np.ndarray:
        return np.array([self.cdf(float(v)) for v in np.ravel(t)]).reshape(np.shape(t))


def error_distribution(kind, dims: Dims) -> ScaledBeta:
    """Exact law of the distortion for a uniformly random input direction."""
    kind = SamplerKind.parse(kind)
    if kind is SamplerKind.BEST_VARIANCE:
        scale = dims.m / dims.n
    elif kind is SamplerKind.BEST_MSE:
        scale = best_mse_scale_squared(dims)
    else:
        raise ValueError(f"no closed-form error law for sampler kind {kind.value!r}")
    if dims.n == dims.m:
        return ScaledBeta(dims.n / 2, 0.0, scale, -1.0, degenerate=True)
    return ScaledBeta(dims.n / 2, (dims.m - dims.n) / 2, scale, -1.0)


class TailProbabilities(NamedTuple):
    upper: float
    lower: float
    two_sided: float


def exact_tail(dist: ScaledBeta, eps: float) -> TailProbabilities:
    """``P[E > eps]``, ``P[E < -eps]`` and their sum."""
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if dist.degenerate:
        return TailProbabilities(0.0, 0.0, 0.0)
    upper = dist.sf(eps)
    lower = dist.cdf(-eps)
    # cdf(-eps) is P[E <= -eps]; the law is continuous so the atom is empty
    return TailProbabilities(upper, lower, upper + lower)


@dataclass(frozen=True)
class SubGammaParams:
    v2: float
    c: float

    def __post_init__(self):
        if self.v2 < 0 or self.c < 0:
            raise ValueError("sub-gamma parameters must be non-negative")


def subgamma_params(dims: Dims, kappa: float = DEFAULT_KAPPA) -> SubGammaParams:
    """Variance proxy of the best-variance distortion and the Bernstein
    constant ``c = kappa * v2 / sqrt(n)``."""
    m, n = dims.m, dims.n
    v2 = 2.0 * m / (m + 2) * (1.0 / n - 1.0 / m)
    return SubGammaParams(v2, kappa * v2 / math.sqrt(n))


def subgamma_tail(params: SubGammaParams, eps: float) -> float:
    """Two-sided Bernstein bound ``2 exp(-eps^2 / (2 (v2 + c eps)))``, capped at 2."""
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if params.v2 == 0:
        return 0.0
    return min(2.0, 2.0 * math.exp(-eps * eps / (2.0 * (params.v2 + params.c * eps))))


def dg_bound(eps: float, n: int) -> float:
    """Dasgupta-Gupta two-sided tail for a Gaussian projection to ``n`` dims."""
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    half = n / 2.0
    upper = math.exp(half * (math.log1p(eps) - eps))
    low = 1.0 - eps
    lower = math.exp(half * (math.log(low) + eps)) if low > 0 else 0.0
    return min(2.0, upper + lower)


def achlioptas_bound(eps: float, n: int) -> float:
    """Achlioptas two-sided tail ``2 exp(-(n/2)(eps^2/2 - eps^3/3))``, capped at 2."""
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    return min(2.0, 2.0 * math.exp(-(n / 2.0) * (eps * eps / 2.0 - eps ** 3 / 3.0)))


@dataclass
class TailCurve:
    """Failure probability against distortion for one ``(m, n)``.

    ``rojo`` is reserved for a further comparator and stays ``None`` here.
    """

    dims: Dims
    eps_grid: np.ndarray
    exact_two_sided: np.ndarray
    subgamma: np.ndarray
    dasgupta_gupta: np.ndarray
    achlioptas: np.ndarray
    rojo: np.ndarray | None = field(default=None)

    COLUMNS = ("epsilon", "delta_exact", "delta_subgamma", "delta_dg", "delta_achlioptas")

    def rows(self):
        return zip(self.eps_grid, self.exact_two_sided, self.subgamma,
                   self.dasgupta_gupta, self.achlioptas)


def tail_curve(dims: Dims, eps_grid, kappa: float = DEFAULT_KAPPA) -> TailCurve:
    eps_grid = np.asarray(eps_grid, dtype=float)
    if eps_grid.ndim != 1 or eps_grid.size == 0:
        raise ValueError("eps grid must be a non-empty 1-d array")
    if np.any(eps_grid <= 0) or np.any(np.diff(eps_grid) <= 0):
        raise ValueError("eps grid must be strictly positive and ascending")
    dist = error_distribution(SamplerKind.BEST_VARIANCE, dims)
    sg = subgamma_params(dims, kappa)
    return TailCurve(
        dims=dims,
        eps_grid=eps_grid,
        exact_two_sided=np.array([exact_tail(dist, e).two_sided for e in eps_grid]),
        subgamma=np.array([subgamma_tail(sg, e) for e in eps_grid]),
        dasgupta_gupta=np.array([dg_bound(e, dims.n) for e in eps_grid]),
        achlioptas=np.array([achlioptas_bound(e, dims.n) for e in eps_grid]),
    )


def mse_objective(u, dims: Dims):
    """MSE of a sampler whose squared singular values all equal ``u``.

    Pure arithmetic, so exact types (``Fraction``) pass through exactly.
    """
    m, n = dims.m, dims.n
    return u * u * (2 * n * (m - n)) / (m * m * (m + 2)) + (n * u / m - 1) ** 2


def mse_argmin(dims: Dims) -> tuple[float, float]:
    """Stationary point ``u* = (m+2)/(n+2)`` and ``g(u*) = min_mse``."""
    return best_mse_scale_squared(dims), min_mse(dims)


@dataclass(frozen=True, eq=False)
class QMatrix:
    m: int
    n: int
    lambda_param: float
    entries: np.ndarray

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.entries)[0])


def q_matrix(m: int, n: int, lambda_param: float) -> QMatrix:
    """Covariance of the first ``n`` coordinates of Dirichlet(lambda_param * 1_m)."""
    if not 1 <= n <= m:
        raise ValueError(f"need 1 <= n <= m, got m={m}, n={n}")
    if not lambda_param > 0:
        raise ValueError("Dirichlet concentration must be positive")
    k = 1.0 / (m * (1.0 + m * lambda_param))
    entries = k * np.eye(n) - (k / m) * np.ones((n, n))
    return QMatrix(m, n, lambda_param, entries)


def variance_functional(q: QMatrix, w) -> float:
    """``Var[sum_k w_k Z_k] = w^T Q w``."""
    w = np.asarray(w, dtype=float)
    if w.shape != (q.n,):
        raise ValueError(f"weights must have length {q.n}")
    if np.any(w < 0):
        raise ValueError("weights must be non-negative")
    return float(w @ q.entries @ w)


def dirichlet_covariance(m: int, i: int, j: int) -> float:
    """``Cov[Z_i, Z_j]`` for Dirichlet(1/2 * 1_m), 1-based indices."""
    if not (1 <= i <= m and 1 <= j <= m):
        raise IndexError(f"indices must lie in 1..{m}, got ({i}, {j})")
    diag = 2.0 / (m * (m + 2)) if i == j else 0.0
    return diag - 2.0 / (m * m * (m + 2))


def dirichlet_covariance_matrix(m: int) -> np.ndarray:
    return q_matrix(m, m, 0.5).entries
