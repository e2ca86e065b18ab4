"""Deterministic random sources and geometric sampling primitives.

Every sampler here is a pure function of its arguments and an :class:`RngState`.
The state is turned into a fresh Philox (counter-based) generator on each call,
so two calls with equal state return equal draws.

Stream derivation: ``(seed, stream_id, *path)`` is fed to
:class:`numpy.random.SeedSequence` as ``entropy=seed`` and
``spawn_key=(stream_id, *path)``.  SeedSequence hashes the spawn key into the
pool, which gives statistically independent Philox keys per stream.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "RngState",
    "OrthonormalRows",
    "gaussian_matrix",
    "haar_rows",
    "haar_rows_batch",
    "uniform_sphere",
    "uniform_sphere_batch",
    "dirichlet_half",
]

_U64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngState:
    """Seed plus stream index; ``path`` addresses nested sub-streams."""

    seed: int = 0
    stream_id: int = 0
    path: tuple[int, ...] = ()

    def __post_init__(self):
        for v in (self.seed, self.stream_id, *self.path):
            if not isinstance(v, (int, np.integer)) or not 0 <= v <= _U64:
                raise ValueError(f"rng fields must be 64-bit unsigned integers, got {v!r}")

    def substream(self, *keys: int) -> RngState:
        return RngState(self.seed, self.stream_id, self.path + tuple(int(k) for k in keys))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=int(self.seed),
                                    spawn_key=(int(self.stream_id), *self.path))
        return np.random.Generator(np.random.Philox(ss))


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngState):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngState or numpy Generator, got {type(rng).__name__}")


def _check_count(name: str, value: int) -> int:
    if int(value) != value or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


@dataclass(frozen=True)
class OrthonormalRows:
    """An ``n x m`` matrix with orthonormal rows."""

    entries: np.ndarray

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def m(self) -> int:
        return self.entries.shape[1]

    def orthonormality_error(self) -> float:
        gram = self.entries @ self.entries.T
        return float(np.max(np.abs(gram - np.eye(self.n))))


def gaussian_matrix(rows: int, cols: int, rng) -> np.ndarray:
    """I.i.d. standard normal ``rows x cols`` matrix."""
    rows = _check_count("rows", rows)
    cols = _check_count("cols", cols)
    return _as_generator(rng).standard_normal((rows, cols))


def _orthonormalize(g: np.ndarray) -> np.ndarray:
    # g: (..., m, n).  Positive-diagonal R makes Q Haar on the Stiefel manifold.
    q, r = np.linalg.qr(g)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    signs = np.where(d < 0, -1.0, 1.0)
    return q * signs[..., None, :]


def haar_rows(n: int, m: int, rng) -> OrthonormalRows:
    """First ``n`` rows of a Haar-distributed ``m x m`` orthogonal matrix.

    Orthonormalizes an ``m x n`` Gaussian matrix by QR and transposes, which
    costs O(m n^2) rather than the O(m^3) of a full orthogonal draw.
    """
    n = _check_count("n", n)
    m = _check_count("m", m)
    if n > m:
        raise ValueError(f"need n <= m, got n={n}, m={m}")
    g = _as_generator(rng).standard_normal((m, n))
    return OrthonormalRows(np.ascontiguousarray(_orthonormalize(g).T))


def haar_rows_batch(count: int, n: int, m: int, gen: np.random.Generator) -> np.ndarray:
    """``count`` independent Haar row frames as a ``(count, n, m)`` array.

    Consumes the generator exactly as ``count`` consecutive single draws would.
    """
    g = gen.standard_normal((count, m, n))
    return np.swapaxes(_orthonormalize(g), -1, -2)


def uniform_sphere(m: int, rng) -> np.ndarray:
    """Uniform point on the unit sphere in R^m."""
    m = _check_count("m", m)
    return uniform_sphere_batch(1, m, _as_generator(rng))[0]


def uniform_sphere_batch(count: int, m: int, gen: np.random.Generator) -> np.ndarray:
    x = gen.standard_normal((count, m))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def dirichlet_half(m: int, rng) -> np.ndarray:
    """Dirichlet(1/2, ..., 1/2) vector, built as squared sphere coordinates."""
    m = _check_count("m", m)
    x = uniform_sphere(m, rng)
    z = x * x
    # renormalize away the last-ulp drift of the squared norm
    return z / z.sum()
