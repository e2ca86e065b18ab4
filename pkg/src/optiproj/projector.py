"""DJL samplers: construction, realization, projection and distortion.

Distortion is measured on squared norms, ``|Ax|^2 / |x|^2 - 1``; the exact
error law and the variance/MSE optima are all stated in that form.
:func:`norm_distortion` gives the un-squared ratio for callers who want it.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .randsrc import RngState, _as_generator, haar_rows_batch

__all__ = [
    "Dims",
    "SamplerKind",
    "SamplerSpec",
    "ProjectionMatrix",
    "build_sampler",
    "sample_matrix",
    "sample_matrices",
    "project",
    "distortion",
    "norm_distortion",
]


@dataclass(frozen=True)
class Dims:
    """Data dimension ``m`` and embedding dimension ``n``, ``1 <= n <= m``."""

    m: int
    n: int

    def __post_init__(self):
        if int(self.m) != self.m or int(self.n) != self.n:
            raise ValueError(f"dimensions must be integers, got m={self.m!r}, n={self.n!r}")
        if not 1 <= self.n <= self.m:
            raise ValueError(f"need 1 <= n <= m, got m={self.m}, n={self.n}")

    def __str__(self):
        return f"{self.m}x{self.n}"


class SamplerKind(enum.Enum):
    BEST_VARIANCE = "best-variance"
    BEST_MSE = "best-mse"
    GAUSSIAN_IID = "gaussian"

    @property
    def orthogonal(self) -> bool:
        return self is not SamplerKind.GAUSSIAN_IID

    @classmethod
    def parse(cls, name: str | SamplerKind) -> SamplerKind:
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("_", "-")
        for kind in cls:
            if key in (kind.value, kind.name.lower().replace("_", "-")):
                return kind
        raise ValueError(f"unknown sampler kind {name!r}; expected one of "
                         + ", ".join(k.value for k in cls))


@dataclass(frozen=True)
class SamplerSpec:
    """Sampler law.

    ``scale_squared`` is the common squared singular value ``lambda^2`` for the
    orthogonal kinds and the entry variance for the Gaussian kind.  It is the
    stored field so that exact ratios such as ``m/n`` survive unrounded.
    """

    kind: SamplerKind
    dims: Dims
    scale_squared: float

    def __post_init__(self):
        if not (self.scale_squared > 0 and math.isfinite(self.scale_squared)):
            raise ValueError(f"scale must be positive and finite, got {self.scale_squared!r}")

    @property
    def scale(self) -> float:
        return math.sqrt(self.scale_squared)

    @classmethod
    def with_scale(cls, kind, dims: Dims, scale: float) -> SamplerSpec:
        return cls(SamplerKind.parse(kind), dims, scale * scale)


def best_mse_scale_squared(dims: Dims) -> float:
    """Minimizer ``(m+2)/(n+2)`` of the MSE objective over the squared scale."""
    return (dims.m + 2) / (dims.n + 2)


def printed_mse_scale_squared(dims: Dims) -> float:
    """``(m+2)n/(2m+n^2)``: the constant that was published for the best-MSE
    sampler. It does not minimize the MSE and is kept for comparison only."""
    m, n = dims.m, dims.n
    return (m + 2) * n / (2 * m + n * n)


def build_sampler(kind, dims: Dims) -> SamplerSpec:
    kind = SamplerKind.parse(kind)
    if kind is SamplerKind.BEST_VARIANCE:
        scale2 = dims.m / dims.n
    elif kind is SamplerKind.BEST_MSE:
        scale2 = best_mse_scale_squared(dims)
    else:
        scale2 = 1.0 / dims.n
    return SamplerSpec(kind, dims, scale2)


@dataclass(frozen=True, eq=False)
class ProjectionMatrix:
    spec: SamplerSpec
    entries: np.ndarray

    def __post_init__(self):
        shape = (self.spec.dims.n, self.spec.dims.m)
        if self.entries.shape != shape:
            raise ValueError(f"entries have shape {self.entries.shape}, expected {shape}")
        self.entries.setflags(write=False)

    @property
    def shape(self):
        return self.entries.shape


def sample_matrices(spec: SamplerSpec, count: int, gen: np.random.Generator) -> np.ndarray:
    """``count`` independent realizations as a ``(count, n, m)`` array."""
    m, n = spec.dims.m, spec.dims.n
    if spec.kind.orthogonal:
        # U = identity: the distortion law does not depend on the left factor
        return spec.scale * haar_rows_batch(count, n, m, gen)
    return spec.scale * gen.standard_normal((count, n, m))


def sample_matrix(spec: SamplerSpec, rng: RngState) -> ProjectionMatrix:
    a = sample_matrices(spec, 1, _as_generator(rng))[0]
    return ProjectionMatrix(spec, np.ascontiguousarray(a))


def _entries(a) -> np.ndarray:
    return a.entries if isinstance(a, ProjectionMatrix) else np.asarray(a, dtype=float)


def project(a, x) -> np.ndarray:
    mat = _entries(a)
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != mat.shape[1]:
        raise ValueError(f"vector of length {x.shape} does not match matrix with "
                         f"{mat.shape[1]} columns")
    return mat @ x


def distortion(a, x) -> float:
    """Squared-norm relative error ``|Ax|^2/|x|^2 - 1``."""
    x = np.asarray(x, dtype=float)
    nx = float(x @ x)
    if not nx > 0:
        raise ValueError("distortion is undefined for the zero vector")
    y = project(a, x)
    return float(y @ y) / nx - 1.0


def norm_distortion(a, x) -> float:
    """Un-squared ratio ``|Ax|/|x| - 1``."""
    return math.sqrt(1.0 + distortion(a, x)) - 1.0
