import csv
import json

import numpy as np
import pytest

from polefree.cli import main, parse_range, parse_smoothing


@pytest.fixture
def exact_csv(tmp_path):
    x = np.linspace(0, 1, 201)
    path = tmp_path / "d.csv"
    np.savetxt(path, np.column_stack([x, 1 / (1 + x)]), delimiter=",", header="x,y", comments="")
    return path


def test_fit_exact_data(exact_csv, tmp_path):
    out = tmp_path / "m.json"
    code = main(
        ["fit", "--input", str(exact_csv), "--num-degree", "10", "--den-degree", "10", "--loss", "nonlinear",
         "--smoothing", "0", "--seed", "1", "--output", str(out)]
    )
    assert code in (0, 2)
    report = json.loads((tmp_path / "m.report.json").read_text())
    assert set(report) >= {"rmse", "loss", "iterations", "pole_audit"}
    assert report["rmse"] < 1e-8
    model = json.loads(out.read_text())
    assert len(model["numerator"]) == 11 and len(model["denominator_weights"]) == 11


def test_fit_closed_form_exit_zero(exact_csv, tmp_path):
    out = tmp_path / "m.json"
    assert main(["fit", "--input", str(exact_csv), "--num-degree", "0", "--den-degree", "1", "--output", str(out)]) == 0


def test_fit_not_converged_exit_two(tmp_path):
    x = np.linspace(0, 1, 101)
    path = tmp_path / "d.csv"
    np.savetxt(path, np.column_stack([x, np.abs(x - 0.3)]), delimiter=",", header="x,y", comments="")
    out = tmp_path / "m.json"
    code = main(["fit", "--input", str(path), "--num-degree", "6", "--den-degree", "6", "--no-hot-start",
                 "--max-iters", "2", "--output", str(out)])
    assert code == 2
    assert out.exists()


def test_fit_bivariate(tmp_path):
    g = np.linspace(0, 1, 11)
    X, Z = np.meshgrid(g, g, indexing="ij")
    path = tmp_path / "d2.csv"
    data = np.column_stack([X.ravel(), Z.ravel(), 1 / ((1 + X.ravel()) * (1 + Z.ravel()))])
    np.savetxt(path, data, delimiter=",", header="x,z,y", comments="")
    out = tmp_path / "m2.json"
    assert main(["fit", "--input", str(path), "--num-degree", "0", "--den-degree", "1", "--output", str(out)]) == 0
    assert json.loads(out.read_text())["shape_denominator"] == [2, 2]


def test_fit_missing_input(tmp_path, capsys):
    assert main(["fit", "--input", str(tmp_path / "none.csv"), "--output", str(tmp_path / "m.json")]) == 1
    assert "error" in capsys.readouterr().err
    assert not (tmp_path / "m.json").exists()


def test_fit_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n0.1,0.2\n")
    assert main(["fit", "--input", str(path), "--output", str(tmp_path / "m.json")]) == 1


def test_smoothing_cv_flag(exact_csv, tmp_path, monkeypatch):
    seen = {}
    import polefree.cli as cli

    real = cli.cross_validate

    def spy(data, configs, **kw):
        seen["grid"] = [c.smoothing for c in configs]
        return real(data, configs, **kw)

    monkeypatch.setattr(cli, "cross_validate", spy)
    out = tmp_path / "m.json"
    main(["fit", "--input", str(exact_csv), "--num-degree", "2", "--den-degree", "2", "--max-iters", "20",
          "--smoothing", "cv:0,1e-6,1e-3", "--output", str(out)])
    assert seen["grid"] == [0.0, 1e-6, 1e-3]


def test_parsers():
    assert parse_range("2..4") == [2, 3, 4]
    assert parse_range("7") == [7]
    assert parse_smoothing("cv:0,1e-6") == [0.0, 1e-6]
    assert parse_smoothing("0.5") == 0.5


def test_benchmark_rows_and_determinism(tmp_path):
    out1, out2 = tmp_path / "r1.csv", tmp_path / "r2.csv"
    args = ["benchmark", "--suite", "aaa_comparison", "--n", "2..3", "--seeds", "1..2", "--noise", "gaussian",
            "--functions", "F2"]
    assert main(args + ["--output", str(out1)]) == 0
    assert main(args + ["--output", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    rows = list(csv.DictReader(out1.open()))
    assert len(rows) == 3 * 2 * 2
    assert {r["method"] for r in rows} == {"polynomial", "aaa", "bernstein"}


def test_benchmark_unknown_suite(tmp_path):
    assert main(["benchmark", "--suite", "nope", "--n", "2..3", "--output", str(tmp_path / "r.csv")]) == 1


def test_spectral_csv(tmp_path):
    out = tmp_path / "t1.csv"
    assert main(["spectral", "--case", "single", "--coefs", "6..6", "--output", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert [r["mode"] for r in rows] == ["polynomial", "rational"]
    assert float(rows[1]["eig_error"]) <= 2.9e-5


def test_spectral_multiple_cardinality(tmp_path):
    out = tmp_path / "t2.csv"
    assert main(["spectral", "--case", "multiple", "--coefs", "4..10", "--points", "128", "--output", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 14
    assert sorted({int(r["num_coefs"]) for r in rows}) == list(range(4, 11))


def test_spectral_bad_range(tmp_path):
    assert main(["spectral", "--case", "single", "--coefs", "6..3", "--output", str(tmp_path / "t.csv")]) == 1
    assert main(["spectral", "--case", "single", "--coefs", "0..3", "--output", str(tmp_path / "t.csv")]) == 1
    assert not (tmp_path / "t.csv").exists()
