import io
import math

import numpy as np
import pytest

from optiproj import analytics, csvio
from optiproj.cli import main
from optiproj.projector import Dims, ProjectionMatrix, build_sampler, sample_matrix
from optiproj.randsrc import RngState, uniform_sphere_batch


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_sample_writes_matrix(tmp_path, capsys):
    path = tmp_path / "a.csv"
    code, out, _ = run(["sample", "--kind", "best-variance", "--m", 100, "--n", 20,
                        "--seed", 7, "-o", path], capsys)
    assert code == 0
    assert "lambda=2.2360679774997898" in out
    text = path.read_text()
    assert "# lambda=2.2360679774997898" in text
    with open(path) as fh:
        a = csvio.read_matrix(fh)
    assert a.entries.shape == (20, 100)
    assert np.max(np.abs(a.entries @ a.entries.T - 5 * np.eye(20))) <= 1e-10


def test_sample_square_is_orthogonal(tmp_path, capsys):
    path = tmp_path / "q.csv"
    code, out, _ = run(["sample", "--m", 5, "--n", 5, "-o", path], capsys)
    assert code == 0 and "lambda=1 " in out
    with open(path) as fh:
        a = csvio.read_matrix(fh).entries
    assert np.max(np.abs(a @ a.T - np.eye(5))) <= 1e-10


def test_sample_is_byte_identical(tmp_path, capsys):
    p1, p2 = tmp_path / "1.csv", tmp_path / "2.csv"
    for p in (p1, p2):
        run(["sample", "--kind", "best-mse", "--m", 40, "--n", 9, "--seed", 3, "-o", p], capsys)
    assert p1.read_bytes() == p2.read_bytes()


def test_sample_bad_dims_exit_2(capsys):
    code, _, err = run(["sample", "--m", 3, "--n", 5], capsys)
    assert code == 2 and "n <= m" in err


def test_seed_from_environment(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("OPTIPROJ_SEED", "11")
    run(["sample", "--m", 6, "--n", 2, "-o", tmp_path / "env.csv"], capsys)
    run(["sample", "--m", 6, "--n", 2, "--seed", 11, "-o", tmp_path / "flag.csv"], capsys)
    run(["sample", "--m", 6, "--n", 2, "--seed", 12, "-o", tmp_path / "other.csv"], capsys)
    assert (tmp_path / "env.csv").read_bytes() == (tmp_path / "flag.csv").read_bytes()
    assert (tmp_path / "env.csv").read_bytes() != (tmp_path / "other.csv").read_bytes()


def test_matrix_csv_round_trip():
    a = sample_matrix(build_sampler("best-mse", Dims(13, 4)), RngState(5))
    buf = io.StringIO()
    csvio.write_matrix(a, buf, seed=5)
    buf.seek(0)
    b = csvio.read_matrix(buf)
    assert np.array_equal(a.entries, b.entries)
    assert b.spec == a.spec


def _analyze(capsys, m, n):
    code, out, _ = run(["analyze", "--m", m, "--n", n], capsys)
    assert code == 0
    return dict(line.split("=", 1) for line in out.splitlines() if not line.startswith("note"))


def test_analyze_reference_dims(capsys):
    vals = _analyze(capsys, 10000, 100)
    assert vals["min_variance"].startswith("0.019796")


def test_analyze_small_case(capsys):
    vals = _analyze(capsys, 2, 1)
    assert float(vals["min_mse"]) == pytest.approx(1 / 3)
    assert float(vals["best-mse.lambda2"]) == pytest.approx(4 / 3)
    code, out, _ = run(["analyze", "--m", 2, "--n", 1], capsys)
    assert "note:" in out


def test_analyze_square(capsys):
    vals = _analyze(capsys, 7, 7)
    for key in ("min_variance", "min_mse", "best-variance.variance", "best-mse.mse",
                "best-variance.mse"):
        assert float(vals[key]) == 0.0


def _compare(tmp_path, capsys, *extra):
    path = tmp_path / "curve.csv"
    code, _, _ = run(["compare", *extra, "-o", path], capsys)
    assert code == 0
    with open(path) as fh:
        return path, csvio.read_tail_curve(fh)


def test_compare_reference_panel(tmp_path, capsys):
    path, cols = _compare(tmp_path, capsys, "--m", 10000, "--n", 100, "--eps-min", 0.05,
                          "--eps-max", 0.5, "--eps-steps", 50, "--linear")
    assert path.read_text().splitlines()[0] == \
        "epsilon,delta_exact,delta_subgamma,delta_dg,delta_achlioptas"
    assert len(cols["epsilon"]) == 50
    assert np.all(cols["delta_exact"] <= cols["delta_dg"])
    assert np.all(cols["delta_exact"] <= cols["delta_achlioptas"])


def test_compare_default_grid_limits(tmp_path, capsys):
    _, cols = _compare(tmp_path, capsys, "--m", 100, "--n", 20, "--eps-min", 1e-6)
    assert len(cols["epsilon"]) == 100
    assert cols["delta_dg"][0] == pytest.approx(2.0, abs=1e-6)
    assert cols["delta_achlioptas"][0] == pytest.approx(2.0, abs=1e-6)
    assert cols["delta_exact"][0] == pytest.approx(1.0, abs=1e-4)
    assert np.all(np.diff(cols["delta_exact"]) <= 0)


def test_compare_values_round_trip(tmp_path, capsys):
    _, cols = _compare(tmp_path, capsys, "--m", 100, "--n", 20)
    curve = analytics.tail_curve(Dims(100, 20), np.geomspace(0.01, 1.0, 100))
    assert np.array_equal(cols["delta_exact"], curve.exact_two_sided)
    assert np.array_equal(cols["epsilon"], curve.eps_grid)


@pytest.mark.parametrize("grid", [["--eps-min", 0.5, "--eps-max", 0.1],
                                  ["--eps-min", 0, "--eps-max", 0.1],
                                  ["--eps-steps", 1]])
def test_compare_bad_grid(grid, capsys):
    code, _, _ = run(["compare", "--m", 100, "--n", 20, *grid], capsys)
    assert code == 2


def _write_rows(path, rows):
    path.write_text("\n".join(",".join(csvio.fmt(v) for v in r) for r in rows) + "\n")


def test_project_identity_matrix(tmp_path, capsys):
    eye = ProjectionMatrix(build_sampler("best-variance", Dims(4, 4)), np.eye(4))
    mpath = tmp_path / "eye.csv"
    with open(mpath, "w") as fh:
        csvio.write_matrix(eye, fh)
    rows = [[1.5, -2.0, 0.0, 3.25], [0.1, 0.2, 0.3, 0.4]]
    ipath, opath = tmp_path / "in.csv", tmp_path / "out.csv"
    _write_rows(ipath, rows)
    code, _, _ = run(["project", "-i", ipath, "--matrix", mpath, "-o", opath], capsys)
    assert code == 0
    with open(opath) as fh:
        assert csvio.read_rows(fh) == rows


def test_project_square_distortion_zero(tmp_path, capsys):
    x = uniform_sphere_batch(20, 6, RngState(1).generator())
    ipath, opath = tmp_path / "in.csv", tmp_path / "out.csv"
    _write_rows(ipath, x)
    code, _, _ = run(["project", "-i", ipath, "--n", 6, "--seed", 4, "--report-distortion",
                      "-o", opath], capsys)
    assert code == 0
    with open(opath) as fh:
        out = np.array(csvio.read_rows(fh))
    assert out.shape == (20, 7)
    assert np.max(np.abs(out[:, -1])) <= 1e-12


def test_project_single_matrix_variance(tmp_path, capsys):
    d = Dims(100, 20)
    x = uniform_sphere_batch(1000, d.m, RngState(2).generator())
    ipath, opath = tmp_path / "in.csv", tmp_path / "out.csv"
    _write_rows(ipath, x)
    code, _, _ = run(["project", "-i", ipath, "--n", 20, "--seed", 9, "--report-distortion",
                      "-o", opath], capsys)
    assert code == 0
    with open(opath) as fh:
        dist = np.array(csvio.read_rows(fh))[:, -1]
    assert abs(dist.var(ddof=1) / analytics.min_variance(d) - 1) <= 0.25


def test_project_row_mismatch(tmp_path, capsys):
    ipath = tmp_path / "in.csv"
    ipath.write_text("1,2,3\n4,5,6\n7,8\n")
    code, _, err = run(["project", "-i", ipath, "--n", 2], capsys)
    assert code == 2 and "row 3" in err


def test_project_zero_row_warns(tmp_path, capsys):
    ipath, opath = tmp_path / "in.csv", tmp_path / "out.csv"
    ipath.write_text("1,0,0\n0,0,0\n")
    code, _, err = run(["project", "-i", ipath, "--n", 2, "--report-distortion", "-o", opath],
                       capsys)
    assert code == 0 and "row 2" in err
    last = opath.read_text().splitlines()[1]
    assert last.endswith(",")


def test_project_needs_matrix_or_n(tmp_path, capsys):
    ipath = tmp_path / "in.csv"
    ipath.write_text("1,2\n")
    assert run(["project", "-i", ipath], capsys)[0] == 2
    assert run(["project", "-i", tmp_path / "missing.csv", "--n", 1], capsys)[0] == 2


def test_verify_negative_control(capsys):
    code, out, err = run(["verify", "--samples", 20000, "--dims", "100x20",
                          "--scale-override", 2.5], capsys)
    assert code == 1
    assert "FAIL error_law.ks[best-variance,100x20]" in out
    assert "failed: error_law.ks" in err


def test_verify_bad_args(capsys):
    assert run(["verify", "--shards", 0], capsys)[0] == 2
    assert run(["verify", "--dims", "100by20"], capsys)[0] == 2
