import math

import numpy as np
import pytest

from optiproj import analytics
from optiproj.projector import (Dims, ProjectionMatrix, SamplerKind, SamplerSpec,
                                build_sampler, distortion, norm_distortion,
                                printed_mse_scale_squared, project, sample_matrix)
from optiproj.randsrc import RngState, uniform_sphere_batch
from optiproj.verify import MonteCarloResult, ks_two_sample, monte_carlo_distortions


@pytest.mark.parametrize("m,n", [(1, 2), (3, 0), (2.5, 1)])
def test_dims_validation(m, n):
    with pytest.raises(ValueError):
        Dims(m, n)


def test_kind_parsing():
    assert SamplerKind.parse("best-mse") is SamplerKind.BEST_MSE
    assert SamplerKind.parse("BEST_VARIANCE") is SamplerKind.BEST_VARIANCE
    assert SamplerKind.parse("gaussian") is SamplerKind.GAUSSIAN_IID
    with pytest.raises(ValueError):
        SamplerKind.parse("sparse")


def test_build_sampler_scales():
    spec = build_sampler("best-variance", Dims(100, 20))
    assert spec.scale_squared == 5.0
    assert spec.scale == math.sqrt(5)
    assert build_sampler("best-variance", Dims(9, 9)).scale == 1.0
    assert build_sampler("best-mse", Dims(2, 1)).scale_squared == 4 / 3
    assert build_sampler("gaussian", Dims(100, 20)).scale_squared == 1 / 20


def test_printed_constant_is_not_the_minimizer():
    d = Dims(2, 1)
    assert printed_mse_scale_squared(d) == pytest.approx(0.8)
    assert analytics.mse_objective(0.8, d) > analytics.min_mse(d) + 0.1


def test_spec_rejects_bad_scale():
    with pytest.raises(ValueError):
        SamplerSpec(SamplerKind.BEST_VARIANCE, Dims(3, 2), 0.0)


def test_square_best_variance_is_orthogonal():
    a = sample_matrix(build_sampler("best-variance", Dims(3, 3)), RngState(1)).entries
    assert np.max(np.abs(a @ a.T - np.eye(3))) <= 1e-10


def test_rows_scaled_orthonormal():
    a = sample_matrix(build_sampler("best-variance", Dims(100, 20)), RngState(2)).entries
    assert a.shape == (20, 100)
    assert np.max(np.abs(a @ a.T - 5 * np.eye(20))) <= 1e-10


def test_sample_matrix_deterministic():
    spec = build_sampler("best-mse", Dims(30, 7))
    a = sample_matrix(spec, RngState(3, 4))
    b = sample_matrix(spec, RngState(3, 4))
    assert np.array_equal(a.entries, b.entries)


def test_matrix_is_read_only():
    a = sample_matrix(build_sampler("best-variance", Dims(4, 2)), RngState())
    with pytest.raises(ValueError):
        a.entries[0, 0] = 1.0


def test_projection_matrix_shape_check():
    spec = build_sampler("best-variance", Dims(4, 2))
    with pytest.raises(ValueError):
        ProjectionMatrix(spec, np.zeros((4, 2)))


def test_project_basics():
    eye = ProjectionMatrix(build_sampler("best-variance", Dims(4, 4)), np.eye(4))
    x = np.array([1.0, -2.0, 3.5, 0.25])
    assert np.array_equal(project(eye, x), x)
    a = sample_matrix(build_sampler("gaussian", Dims(6, 3)), RngState(5))
    assert np.array_equal(project(a, np.zeros(6)), np.zeros(3))
    e1 = np.eye(6)[0]
    assert np.array_equal(project(a, e1), a.entries[:, 0])
    with pytest.raises(ValueError):
        project(a, np.ones(5))


def test_distortion_basics():
    a = sample_matrix(build_sampler("best-variance", Dims(8, 8)), RngState(6))
    for x in uniform_sphere_batch(20, 8, RngState(7).generator()) * 3.0:
        assert abs(distortion(a, x)) <= 1e-12
    b = sample_matrix(build_sampler("best-variance", Dims(10, 4)), RngState(8))
    x = np.arange(1.0, 11.0)
    assert abs(distortion(b, x) - distortion(b, 7 * x)) <= 1e-12
    with pytest.raises(ValueError):
        distortion(b, np.zeros(10))


def test_norm_distortion_consistent():
    b = sample_matrix(build_sampler("best-variance", Dims(10, 4)), RngState(9))
    x = np.linspace(-1, 1, 10)
    ratio = np.linalg.norm(project(b, x)) / np.linalg.norm(x)
    assert norm_distortion(b, x) == pytest.approx(ratio - 1.0, abs=1e-14)


def test_best_variance_unbiased_and_in_support():
    d = Dims(100, 20)
    s = monte_carlo_distortions(build_sampler("best-variance", d), 200_000, RngState(10))
    r = MonteCarloResult.from_samples(s)
    assert abs(r.mean) <= 3 * r.mean_se
    assert s.min() >= -1.0 and s.max() <= d.m / d.n - 1.0


def test_distortion_law_is_rotation_invariant():
    d = Dims(12, 4)
    a = sample_matrix(build_sampler("best-variance", d), RngState(11))
    xs = uniform_sphere_batch(4000, d.m, RngState(12).generator())
    perm = np.roll(np.arange(d.m), 5)
    plain = np.array([distortion(a, x) for x in xs[:2000]])
    permuted = np.array([distortion(a, x[perm]) for x in xs[2000:]])
    assert ks_two_sample(plain, permuted).passed
