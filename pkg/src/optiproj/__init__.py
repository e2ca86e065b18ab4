"""Optimal-accuracy Johnson-Lindenstrauss projections.

Best-variance and best-MSE samplers built on Haar orthogonal rows, the exact
scaled-Beta law of their distortion, and Monte Carlo checks of both.
"""
from .analytics import (
    ScaledBeta,
    error_distribution,
    exact_tail,
    min_mse,
    min_variance,
)
from .projector import (
    Dims,
    ProjectionMatrix,
    SamplerKind,
    SamplerSpec,
    build_sampler,
    distortion,
    norm_distortion,
    project,
    sample_matrix,
)
from .randsrc import RngState

__version__ = "0.1.0"

__all__ = [
    "Dims",
    "ProjectionMatrix",
    "RngState",
    "SamplerKind",
    "SamplerSpec",
    "ScaledBeta",
    "build_sampler",
    "distortion",
    "error_distribution",
    "exact_tail",
    "min_mse",
    "min_variance",
    "norm_distortion",
    "project",
    "sample_matrix",
]
