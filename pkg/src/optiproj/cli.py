"""``optiproj`` command line.

Exit codes: 0 success, 1 verification failure, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import contextlib
import math
import os
import sys
import time

import numpy as np

from . import analytics, csvio, suite
from .projector import (Dims, SamplerKind, build_sampler, printed_mse_scale_squared,
                        sample_matrix)
from .randsrc import RngState

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _default_seed() -> int:
    raw = os.environ.get("OPTIPROJ_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"OPTIPROJ_SEED must be an integer, got {raw!r}") from None


@contextlib.contextmanager
def _open_out(path: str):
    if path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _dims(args) -> Dims:
    try:
        return Dims(args.m, args.n)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _check_writable(path: str) -> None:
    if path == "-":
        return
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(parent) or not os.access(parent, os.W_OK):
        raise UsageError(f"cannot write to {path}")


def _check_readable(path: str) -> None:
    if not os.path.isfile(path) or not os.access(path, os.R_OK):
        raise UsageError(f"cannot read {path}")


def cmd_sample(args) -> int:
    dims = _dims(args)
    _check_writable(args.output)
    spec = build_sampler(args.kind, dims)
    a = sample_matrix(spec, RngState(args.seed))
    with _open_out(args.output) as fh:
        csvio.write_matrix(a, fh, seed=args.seed)
    info = sys.stderr if args.output == "-" else sys.stdout
    print(f"kind={spec.kind.value} m={dims.m} n={dims.n} lambda={csvio.fmt(spec.scale)} "
          f"lambda2={csvio.fmt(spec.scale_squared)}", file=info)
    return EXIT_OK


def cmd_project(args) -> int:
    _check_readable(args.input)
    _check_writable(args.output)
    with open(args.input) as fh:
        try:
            rows = csvio.read_rows(fh)
        except ValueError as exc:
            raise UsageError(f"{args.input}: {exc}") from None
    if not rows:
        raise UsageError(f"{args.input} holds no data rows")
    if args.matrix:
        _check_readable(args.matrix)
        with open(args.matrix) as fh:
            try:
                a = csvio.read_matrix(fh)
            except ValueError as exc:
                raise UsageError(f"{args.matrix}: {exc}") from None
    else:
        if args.n is None:
            raise UsageError("give --matrix or --n (with --kind/--seed) to sample one")
        m = args.m if args.m is not None else len(rows[0])
        try:
            dims = Dims(m, args.n)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        a = sample_matrix(build_sampler(args.kind, dims), RngState(args.seed))
    m = a.spec.dims.m
    for i, row in enumerate(rows, 1):
        if len(row) != m:
            raise UsageError(f"row {i} has {len(row)} values, expected {m}")
    x = np.array(rows)
    y = x @ a.entries.T
    dist = None
    if args.report_distortion:
        nx = np.einsum("ij,ij->i", x, x)
        ny = np.einsum("ij,ij->i", y, y)
        dist = [float(ny[i] / nx[i] - 1.0) if nx[i] > 0 else math.nan for i in range(len(rows))]
        for i, v in enumerate(dist, 1):
            if math.isnan(v):
                print(f"warning: row {i} is zero; distortion left empty", file=sys.stderr)
    with _open_out(args.output) as fh:
        csvio.write_projection(fh, y, dist)
    return EXIT_OK


def analyze_lines(dims: Dims) -> list[str]:
    f = csvio.fmt
    lines = [f"m={dims.m}", f"n={dims.n}",
             f"min_variance={f(analytics.min_variance(dims))}",
             f"min_mse={f(analytics.min_mse(dims))}"]
    for kind in (SamplerKind.BEST_VARIANCE, SamplerKind.BEST_MSE):
        spec = build_sampler(kind, dims)
        law = analytics.error_distribution(kind, dims)
        key = kind.value
        lines.append(f"{key}.lambda2={f(spec.scale_squared)}")
        if law.degenerate:
            lines.append(f"{key}.law=point_mass({f(law.mean())})")
        else:
            lines.append(f"{key}.law=alpha={f(law.alpha)} beta={f(law.beta_param)} "
                         f"scale={f(law.scale)} shift={f(law.shift)}")
        lines.append(f"{key}.mean={f(law.mean())}")
        lines.append(f"{key}.variance={f(law.variance())}")
        lines.append(f"{key}.mse={f(law.second_moment())}")
    printed = printed_mse_scale_squared(dims)
    derived = build_sampler(SamplerKind.BEST_MSE, dims).scale_squared
    lines.append(f"best-mse.lambda2_printed={f(printed)}")
    if not math.isclose(printed, derived, rel_tol=1e-15):
        lines.append(f"note: the published best-mse constant (m+2)n/(2m+n^2) = {f(printed)} "
                     f"differs from the MSE minimizer (m+2)/(n+2) = {f(derived)}; "
                     f"its MSE is {f(analytics.mse_objective(printed, dims))}")
    sg = analytics.subgamma_params(dims)
    lines.append(f"subgamma.v2={f(sg.v2)}")
    lines.append(f"subgamma.c={f(sg.c)} kappa={f(analytics.DEFAULT_KAPPA)}")
    return lines


def cmd_analyze(args) -> int:
    print("\n".join(analyze_lines(_dims(args))))
    return EXIT_OK


def cmd_compare(args) -> int:
    dims = _dims(args)
    _check_writable(args.output)
    if not (args.eps_min > 0 and args.eps_min < args.eps_max and args.eps_steps >= 2):
        raise UsageError("need 0 < eps-min < eps-max and eps-steps >= 2")
    if args.linear:
        grid = np.linspace(args.eps_min, args.eps_max, args.eps_steps)
    else:
        grid = np.geomspace(args.eps_min, args.eps_max, args.eps_steps)
    curve = analytics.tail_curve(dims, grid, kappa=args.kappa)
    with _open_out(args.output) as fh:
        csvio.write_tail_curve(curve, fh)
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.shards < 1 or args.samples < 2 or args.ks_samples < 1000:
        raise UsageError("need --shards >= 1, --samples >= 2, --ks-samples >= 1000")
    try:
        dims = [suite.parse_dims(d) for d in args.dims] if args.dims else list(suite.DEFAULT_DIMS)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.output:
        _check_writable(args.output)
    t0 = time.perf_counter()
    report = suite.run_suite(seed=args.seed, shards=args.shards, samples=args.samples,
                             ks_samples=args.ks_samples, dims=dims, full=args.full,
                             scale_override=args.scale_override)
    body = report.body()
    sys.stdout.write(body)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(body)
    print(f"elapsed {time.perf_counter() - t0:.1f}s", file=sys.stderr)
    if not report.passed:
        for c in report.failures():
            print(f"failed: {c.name}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="optiproj",
                                description="Optimal-accuracy Johnson-Lindenstrauss projections")
    sub = p.add_subparsers(dest="command", required=True)
    kinds = [k.value for k in SamplerKind]

    def dims_args(sp, required=True):
        sp.add_argument("--m", type=int, required=required, help="data dimension")
        sp.add_argument("--n", type=int, required=required, help="embedding dimension")

    def seed_arg(sp):
        sp.add_argument("--seed", type=int, default=None,
                        help="RNG seed (default: $OPTIPROJ_SEED or 0)")

    sp = sub.add_parser("sample", help="sample a projection matrix and write it as CSV")
    sp.add_argument("--kind", choices=kinds, default="best-variance")
    dims_args(sp)
    seed_arg(sp)
    sp.add_argument("-o", "--output", default="-")
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("project", help="project the rows of a CSV file")
    sp.add_argument("-i", "--input", required=True)
    sp.add_argument("-o", "--output", default="-")
    sp.add_argument("--matrix", help="matrix CSV written by `sample`")
    sp.add_argument("--kind", choices=kinds, default="best-variance")
    dims_args(sp, required=False)
    seed_arg(sp)
    sp.add_argument("--report-distortion", action="store_true",
                    help="append the squared-norm distortion of each row")
    sp.set_defaults(func=cmd_project)

    sp = sub.add_parser("analyze", help="print closed-form error statistics")
    dims_args(sp)
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("compare", help="tail-bound comparison curve as CSV")
    dims_args(sp)
    sp.add_argument("--eps-min", type=float, default=0.01)
    sp.add_argument("--eps-max", type=float, default=1.0)
    sp.add_argument("--eps-steps", type=int, default=100)
    sp.add_argument("--linear", action="store_true", help="linear instead of log-spaced grid")
    sp.add_argument("--kappa", type=float, default=analytics.DEFAULT_KAPPA)
    sp.add_argument("-o", "--output", default="-")
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("verify", help="run the certification suite")
    seed_arg(sp)
    sp.add_argument("--shards", type=int, default=1)
    sp.add_argument("--samples", type=int, default=200_000,
                    help="Monte Carlo samples for the moment checks")
    sp.add_argument("--ks-samples", type=int, default=10_000)
    sp.add_argument("--dims", action="append", metavar="MxN",
                    help="dimension pair (repeatable); the first drives the moment checks")
    sp.add_argument("--full", action="store_true", help="also certify the 10000x100 law (slow)")
    sp.add_argument("--scale-override", type=float, default=None,
                    help="force the sampler scale (negative control)")
    sp.add_argument("-o", "--output", help="also write the report body here")
    sp.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if hasattr(args, "seed") and args.seed is None:
            args.seed = _default_seed()
        if hasattr(args, "seed") and not 0 <= args.seed < 2 ** 64:
            raise UsageError("--seed must be a 64-bit unsigned integer")
        return args.func(args)
    except UsageError as exc:
        print(f"optiproj: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
