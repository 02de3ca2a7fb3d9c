import json

import numpy as np
import pytest

from soslab.cli import EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, main, parse_measure
from soslab.lowerbound import LowerBoundError
from soslab.measures import BallMeasure, BoxJacobi, SphereMeasure


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_upper_chebyshev_root(capsys):
    code, out, _ = run_cli(
        capsys, "upper", "--set", "box1-chebyshev", "--f", "x1", "--r", "10"
    )
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["value"] == pytest.approx(-np.cos(np.pi / 22), abs=1e-11)
    assert report["config"]["measure"] == "box(1;lam=-0.5)"


def test_certify_motzkin(capsys):
    code, out, _ = run_cli(
        capsys,
        "certify",
        "--f",
        "x1^4*x2^2 + x1^2*x2^4 - 3*x1^2*x2^2 + 1",
        "--n",
        "2",
    )
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["is_sos"] is False


def test_lower_box_linear(capsys):
    code, out, _ = run_cli(
        capsys,
        "lower", "--set", "box", "--n", "1", "--f", "x1", "--r", "1",
        "--kind", "putinar",
    )
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["value"] == pytest.approx(-1.0, abs=1e-6)
    assert report["verified"] is True


def test_push_identity(capsys):
    code, out, _ = run_cli(
        capsys, "push", "--set", "box1-chebyshev", "--f", "x1", "--r", "4"
    )
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["value"] == pytest.approx(-np.cos(np.pi / 10), abs=1e-9)


def test_rates_slope_window(capsys):
    code, out, _ = run_cli(
        capsys,
        "rates", "--set", "box1-chebyshev", "--f", "x1", "--r", "4..20",
        "--reference", "-1.0",
    )
    assert code == EXIT_OK
    report = json.loads(out)
    assert -2.5 <= report["fitted_slope"] <= -1.5
    assert report["series"]["reference_kind"] == "closed-form"


def test_rates_outputs_files(tmp_path, capsys):
    csv_path = tmp_path / "series.csv"
    svg_path = tmp_path / "series.svg"
    code, out, _ = run_cli(
        capsys,
        "rates", "--set", "box1-chebyshev", "--f", "x1", "--r", "3..10",
        "--reference", "-1.0", "--format", "csv",
        "--out", str(csv_path), "--plot", str(svg_path),
    )
    assert code == EXIT_OK
    assert csv_path.read_text().startswith("r,bound,error")
    assert svg_path.read_text().startswith("<svg")


def test_stability_k2(capsys):
    code, out, _ = run_cli(
        capsys, "stability", "--cycle", "3", "--r-lower", "2", "--r-upper", "3"
    )
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["alpha"] == 1
    assert report["bracket_holds"] is True


def test_density_small(tmp_path, capsys):
    out_path = tmp_path / "density.csv"
    code, out, _ = run_cli(
        capsys, "density", "--r", "8", "--grid", "40", "--out", str(out_path)
    )
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["density_riemann_integral"] == pytest.approx(1.0, abs=1e-2)
    assert out_path.read_text().splitlines()[0] == "x,y,sigma"


def test_pkm_report(capsys):
    code, out, _ = run_cli(
        capsys, "pkm", "--nsphere", "3", "--d", "2", "--r", "4..10"
    )
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["g_at_one"] == pytest.approx(0.0, abs=1e-9)
    assert report["kernel_lambdas"][0] == pytest.approx(1.0, abs=1e-8)
    vals = [e["bound"] for e in report["series"]["entries"]]
    assert all(b <= a + 1e-9 for a, b in zip(vals, vals[1:]))


def test_usage_error_missing_flag(capsys):
    code, _, err = run_cli(capsys, "upper", "--set", "box1-chebyshev", "--f", "x1")
    assert code == EXIT_USAGE
    assert "usage error" in err


def test_usage_error_bad_polynomial(capsys):
    code, _, err = run_cli(
        capsys, "upper", "--set", "box1-chebyshev", "--f", "x1 ++ 2", "--r", "3"
    )
    assert code == EXIT_USAGE


def test_numerical_error_exit_code(capsys, monkeypatch):
    import soslab.cli as cli

    def boom(f, m, r):
        raise LowerBoundError("solver stalled")

    monkeypatch.setattr(cli, "ub_pushforward", boom)
    code, _, err = run_cli(
        capsys, "push", "--set", "box1-chebyshev", "--f", "x1", "--r", "3"
    )
    assert code == EXIT_NUMERICAL
    assert "numerical failure" in err


def test_parse_measure_forms():
    m = parse_measure("box:n=2,lambda=-0.5", None, None)
    assert isinstance(m, BoxJacobi) and m.nvars == 2
    m = parse_measure("ball:n=3,lambda=1.5", None, None)
    assert isinstance(m, BallMeasure) and m.lam == 1.5
    m = parse_measure(None, "sphere3", None)
    assert isinstance(m, SphereMeasure) and m.nvars == 3
    m = parse_measure(None, "box2-legendre", None)
    assert isinstance(m, BoxJacobi) and m.weights[0].lam == 0.0
    with pytest.raises(Exception):
        parse_measure(None, "torus2", None)
    with pytest.raises(Exception):
        parse_measure(None, None, None)


def test_config_echo_and_12_digits(capsys):
    code, out, _ = run_cli(
        capsys, "upper", "--set", "box1-chebyshev", "--f", "x1", "--r", "7"
    )
    report = json.loads(out)
    assert report["config"]["f"] == "x1"
    # 12 significant digits: value rounds to the printed precision
    v = report["value"]
    assert v == float(f"{v:.12g}")
