"""CSV readers and writers.

Numbers are written with 17 significant digits, which round-trips every
float64 exactly.
"""
from __future__ import annotations

import csv
import io
import math
from typing import TextIO

import numpy as np

from .analytics import TailCurve
from .projector import Dims, ProjectionMatrix, SamplerKind, SamplerSpec


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_matrix(a: ProjectionMatrix, fh: TextIO, seed: int | None = None) -> None:
    spec = a.spec
    fh.write("# optiproj projection matrix\n")
    fh.write(f"# kind={spec.kind.value}\n")
    fh.write(f"# m={spec.dims.m}\n# n={spec.dims.n}\n")
    fh.write(f"# lambda={fmt(spec.scale)}\n")
    fh.write(f"# lambda2={fmt(spec.scale_squared)}\n")
    if seed is not None:
        fh.write(f"# seed={seed}\n")
    for row in a.entries:
        fh.write(",".join(fmt(v) for v in row))
        fh.write("\n")


def read_matrix(fh: TextIO) -> ProjectionMatrix:
    meta: dict[str, str] = {}
    rows = []
    for lineno, line in enumerate(fh, 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, sep, value = line[1:].strip().partition("=")
            if sep:
                meta[key.strip()] = value.strip()
            continue
        try:
            rows.append([float(v) for v in line.split(",")])
        except ValueError as exc:
            raise ValueError(f"matrix line {lineno}: {exc}") from None
    if not rows or len({len(r) for r in rows}) != 1:
        raise ValueError("matrix file must hold a non-empty rectangular table")
    entries = np.array(rows)
    n, m = entries.shape
    kind = SamplerKind.parse(meta.get("kind", "best-variance"))
    if "lambda2" in meta:
        spec = SamplerSpec(kind, Dims(m, n), float(meta["lambda2"]))
    else:
        scale = float(meta["lambda"]) if "lambda" in meta else float(np.linalg.norm(entries[0]))
        spec = SamplerSpec.with_scale(kind, Dims(m, n), scale)
    return ProjectionMatrix(spec, entries)


def read_rows(fh: TextIO) -> list[list[float]]:
    """Data rows; blank lines and ``#`` comments are skipped."""
    out = []
    for lineno, line in enumerate(fh, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            out.append([float(v) for v in line.split(",")])
        except ValueError as exc:
            raise ValueError(f"row {lineno}: {exc}") from None
    return out


def write_projection(fh: TextIO, projected: np.ndarray, distortions=None) -> None:
    w = csv.writer(fh, lineterminator="\n")
    for i, row in enumerate(projected):
        cells = [fmt(v) for v in row]
        if distortions is not None:
            d = distortions[i]
            cells.append("" if d is None or math.isnan(d) else fmt(d))
        w.writerow(cells)


def write_tail_curve(curve: TailCurve, fh: TextIO) -> None:
    w = csv.writer(fh, lineterminator="\n")
    header = list(TailCurve.COLUMNS)
    if curve.rojo is not None:
        header.append("delta_rojo")
    w.writerow(header)
    for i, row in enumerate(curve.rows()):
        cells = [fmt(v) for v in row]
        if curve.rojo is not None:
            cells.append(fmt(curve.rojo[i]))
        w.writerow(cells)


def read_tail_curve(fh: TextIO) -> dict[str, np.ndarray]:
    reader = csv.reader(fh)
    header = next(reader)
    if tuple(header[:5]) != TailCurve.COLUMNS:
        raise ValueError(f"unexpected tail-curve header {header}")
    cols = list(zip(*[[float(v) for v in row] for row in reader]))
    return {name: np.array(col) for name, col in zip(header, cols)}


def tail_curve_csv(curve: TailCurve) -> str:
    buf = io.StringIO()
    write_tail_curve(curve, buf)
    return buf.getvalue()
