"""The certification suite run by ``optiproj verify``.

Every check draws from its own fixed sub-stream of the root seed, so the
report body depends only on the options, never on which other checks ran or
on the shard count.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import analytics, verify
from .csvio import fmt
from .projector import Dims, SamplerKind, SamplerSpec, build_sampler
from .randsrc import RngState

DEFAULT_DIMS = (Dims(100, 20), Dims(50, 10))
FULL_EXTRA_DIMS = (Dims(10000, 100),)
COMPARE_DIMS = (Dims(10000, 100), Dims(100, 20))

# stable sub-stream ids per check family
_S_VAR, _S_MSE, _S_LAW, _S_DOM, _S_SPHERE, _S_SVD, _S_SCHUR = range(1, 8)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)

    def line(self) -> str:
        parts = []
        for k, v in self.detail.items():
            if isinstance(v, float):
                v = fmt(v)
            parts.append(f"{k}={v}")
        return f"{'PASS' if self.passed else 'FAIL'} {self.name} " + " ".join(parts)


@dataclass
class SuiteReport:
    checks: list[Check]
    header: dict

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def body(self) -> str:
        lines = [f"# {k}={v}" for k, v in self.header.items()]
        lines += [c.line() for c in self.checks]
        lines.append(f"# result={'PASS' if self.passed else 'FAIL'} "
                     f"failed={len(self.failures())}/{len(self.checks)}")
        return "\n".join(lines) + "\n"


def _spec(kind: SamplerKind, dims: Dims, scale_override: float | None) -> SamplerSpec:
    spec = build_sampler(kind, dims)
    if scale_override is not None:
        spec = SamplerSpec.with_scale(kind, dims, scale_override)
    return spec


def check_variance_optimum(dims, n_samples, rng, shards=1, scale_override=None):
    spec = _spec(SamplerKind.BEST_VARIANCE, dims, scale_override)
    r = verify.MonteCarloResult.from_samples(
        verify.monte_carlo_distortions(spec, n_samples, rng, shards))
    target = analytics.min_variance(dims)
    rel = abs(r.variance / target - 1.0) if target else abs(r.variance)
    ok = rel <= 0.02 and abs(r.mean) <= 3.0 * r.mean_se + 1e-12
    return Check(f"optimum.variance[{dims}]", ok,
                 {"samples": n_samples, "variance": r.variance, "target": target,
                  "rel_err": rel, "mean": r.mean, "mean_se": r.mean_se}), r


def check_mse_optimum(dims, n_samples, rng, shards=1, scale_override=None, var_mse=None):
    spec = _spec(SamplerKind.BEST_MSE, dims, scale_override)
    r = verify.MonteCarloResult.from_samples(
        verify.monte_carlo_distortions(spec, n_samples, rng, shards))
    target = analytics.min_mse(dims)
    bias = analytics.error_distribution(SamplerKind.BEST_MSE, dims).mean()
    rel = abs(r.mse / target - 1.0) if target else abs(r.mse)
    ok = rel <= 0.02 and abs(r.mean - bias) <= 3.0 * r.mean_se + 1e-12
    detail = {"samples": n_samples, "mse": r.mse, "target": target, "rel_err": rel,
              "mean": r.mean, "analytic_mean": bias}
    if var_mse is not None:
        ok = ok and r.mse < var_mse
        detail["best_variance_mse"] = var_mse
    return Check(f"optimum.mse[{dims}]", ok, detail), r


def check_error_law(kind, dims, n_samples, rng, shards=1, scale_override=None):
    spec = _spec(kind, dims, scale_override)
    law = analytics.error_distribution(kind, dims)
    ks = verify.error_law_ks(spec, n_samples, rng, shards, law=law)
    return Check(f"error_law.ks[{kind.value},{dims}]", ks.passed,
                 {"samples": n_samples, "D": ks.statistic, "critical": ks.critical_1pct,
                  "law": f"{fmt(law.scale)}*Beta({fmt(law.alpha)},{fmt(law.beta_param)})-1"})


def check_dominance(dims, n_samples, rng, shards=1):
    rep = verify.lower_bound_dominance(dims, n_samples, rng, shards)
    detail = {"samples": n_samples, "bound": rep.bound}
    if rep.gaussian is not None:
        detail["gaussian_variance"] = rep.gaussian.variance
        detail["best_variance_variance"] = rep.best_variance.variance
    return Check(f"optimum.dominance[{dims}]", rep.passed, detail)


def check_mse_argmin(max_m=30):
    worst_u = worst_g = 0.0
    for m in range(2, max_m + 1):
        for n in range(1, m):
            d = Dims(m, n)
            u_star, g_star = analytics.mse_argmin(d)
            u_num = verify.numeric_mse_argmin(d)
            worst_u = max(worst_u, abs(u_num - u_star))
            worst_g = max(worst_g, abs(float(analytics.mse_objective(u_star, d)) - g_star))
    ok = worst_u <= 1e-8 and worst_g <= 1e-10
    return Check(f"mse_argmin.grid[m<={max_m}]", ok,
                 {"max_u_err": worst_u, "max_g_err": worst_g})


def check_sphere_dirichlet(m, n_samples, rng):
    rep = verify.sphere_dirichlet_check(m, n_samples, rng)
    return Check(f"sphere_dirichlet[m={m}]", rep.passed,
                 {"samples": n_samples, "D_marginal": rep.marginal.statistic,
                  "D_partial": rep.partial_sum.statistic,
                  "critical": rep.marginal.critical_1pct, "sum_err": rep.max_sum_error})


def check_svd_reduction(n_matrices, rng, max_rows=32, max_cols=64, trials=100, ks_samples=2000):
    gen = rng.substream(0).generator()
    worst = 0.0
    for k in range(n_matrices):
        n = int(gen.integers(1, max_rows + 1))
        m = int(gen.integers(n, max_cols + 1))
        a = gen.standard_normal((n, m))
        rep = verify.svd_reduction_check(a, trials, rng.substream(1, k))
        worst = max(worst, rep.max_residual)
    probe = rng.substream(2).generator().standard_normal((3, 8))
    ks = verify.svd_reduction_check(probe, trials, rng.substream(3), ks_samples=ks_samples).ks
    ok = worst <= 1e-10 and ks.passed
    return Check("svd_reduction", ok,
                 {"matrices": n_matrices, "max_residual": worst, "D_law": ks.statistic,
                  "critical": ks.critical_1pct})


def check_schur_psd(rng, m=30, n=10, n_pairs=1000, psd_max_m=200):
    q = analytics.q_matrix(m, n, 0.5)
    pairs = verify.schur_pairs(n, n_pairs, rng)
    gen = rng.substream(0).generator()
    pairs += [verify.averaging_pair(gen.exponential(size=n)) for _ in range(100)]
    schur = verify.schur_check(pairs, q)
    min_ev, where = verify.psd_check(psd_max_m)
    ok = schur.passed and min_ev >= -1e-10
    return Check(f"schur_psd[{m}x{n}]", ok,
                 {"pairs": schur.pairs, "violations": schur.violations,
                  "max_excess": schur.max_excess, "min_eigenvalue": min_ev,
                  "argmin_dims": f"{where[0]}x{where[1]}"})


def check_tail_comparison(dims, eps_grid=None):
    if eps_grid is None:
        eps_grid = np.linspace(0.05, 0.5, 50)
    curve = analytics.tail_curve(dims, eps_grid)
    ok_dg = bool(np.all(curve.exact_two_sided <= curve.dasgupta_gupta))
    ok_ach = bool(np.all(curve.exact_two_sided <= curve.achlioptas))
    return Check(f"tail_comparison[{dims}]", ok_dg and ok_ach,
                 {"below_dg": ok_dg, "below_achlioptas": ok_ach,
                  "max_exact": float(curve.exact_two_sided.max())})


def check_subgamma(dims, kappa=analytics.DEFAULT_KAPPA):
    sg = analytics.subgamma_params(dims, kappa)
    v2_err = abs(sg.v2 - analytics.min_variance(dims))
    law = analytics.error_distribution(SamplerKind.BEST_VARIANCE, dims)
    margin = min(analytics.subgamma_tail(sg, e) - analytics.exact_tail(law, e).two_sided
                 for e in np.arange(1, 11) / 10)
    ok = v2_err <= 1e-15 and margin >= 0
    return Check(f"subgamma[{dims}]", ok,
                 {"v2": sg.v2, "v2_err": v2_err, "kappa": kappa, "min_margin": margin})


def run_suite(seed: int = 0, shards: int = 1, samples: int = 200_000,
              ks_samples: int = 10_000, dims=DEFAULT_DIMS, full: bool = False,
              scale_override: float | None = None) -> SuiteReport:
    root = RngState(seed)
    dims = tuple(dims)
    ks_dims = dims + (FULL_EXTRA_DIMS if full else ())
    header = {"seed": seed, "samples": samples, "ks_samples": ks_samples,
              "dims": ",".join(str(d) for d in dims), "full": full}
    if scale_override is not None:
        header["scale_override"] = fmt(scale_override)
    checks: list[Check] = []

    primary = dims[0]
    c, rv = check_variance_optimum(primary, samples, root.substream(_S_VAR), shards,
                                    scale_override)
    checks.append(c)
    c, _ = check_mse_optimum(primary, samples, root.substream(_S_MSE), shards,
                              scale_override, var_mse=rv.mse)
    checks.append(c)
    for i, d in enumerate(ks_dims):
        for j, kind in enumerate((SamplerKind.BEST_VARIANCE, SamplerKind.BEST_MSE)):
            checks.append(check_error_law(kind, d, ks_samples,
                                         root.substream(_S_LAW, d.m, d.n, j), shards,
                                         scale_override))
    checks.append(check_dominance(primary, max(10_000, samples // 4),
                                  root.substream(_S_DOM), shards))
    checks.append(check_mse_argmin())
    for m in (2, 5, 100):
        checks.append(check_sphere_dirichlet(m, ks_samples, root.substream(_S_SPHERE, m)))
    checks.append(check_svd_reduction(100, root.substream(_S_SVD)))
    checks.append(check_schur_psd(root.substream(_S_SCHUR)))
    for d in COMPARE_DIMS:
        checks.append(check_tail_comparison(d))
    for d in dict.fromkeys(dims + COMPARE_DIMS):
        checks.append(check_subgamma(d))
    return SuiteReport(checks, header)


def parse_dims(text: str) -> Dims:
    m, sep, n = text.lower().partition("x")
    if not sep:
        raise ValueError(f"dims must look like MxN, got {text!r}")
    return Dims(int(m), int(n))
