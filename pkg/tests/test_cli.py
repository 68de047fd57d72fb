import json
import math
import subprocess
import sys

import numpy as np
import pytest
from scipy.stats import spearmanr

from symcamel import formats
from symcamel.cli import COMMAND_DEFAULTS, GLOBAL_DEFAULTS, main
from symcamel.propagator import GaussianWavepacket

from conftest import FIXTURES
from test_formats import validate


def run(tmp_path, *args):
    out = tmp_path / "out"
    code = main(list(args) + ["--out", str(out)])
    return code, out


def load(path):
    return json.loads(path.read_text())


def series(path):
    return np.loadtxt(path, delimiter=",", skiprows=1)


# propagate


def test_propagate_free_kernel_with_oracle(tmp_path):
    code, out = run(tmp_path, "propagate", "--h", "free", "--method", "kernel", "--oracle",
                    "--t", "1")
    assert code == 0
    summary = load(out / "summary.json")
    assert summary["oracle"]["l2_phase_aligned"] <= 1e-4
    assert summary["norm2_final"] == pytest.approx(1.0, abs=1e-10)
    validate(load(out / "state.json"), "wavefunction")
    validate(load(out / "oracle.json"), "wavefunction")


def test_propagate_zero_time_is_identity(tmp_path):
    code, out = run(tmp_path, "propagate", "--t", "0", "--method", "kernel")
    assert code == 0
    psi = formats.wavefunction_from_json(out / "state.json")
    start = GaussianWavepacket.from_sigma(0.0, 0.0, 1.0, 1.0).on_grid(psi.x0, psi.dx, psi.N)
    assert np.allclose(psi.values, start.values, rtol=0, atol=1e-12)
    assert load(out / "summary.json")["l2_to_initial"] == 0.0


def test_propagate_oscillator_period(tmp_path):
    code, out = run(tmp_path, "propagate", "--h", "oscillator", "--method", "gaussian",
                    "--t", "6.283185307", "--x0", "1.5", "--p0", "-0.5")
    assert code == 0
    assert load(out / "summary.json")["center_shift"] <= 1e-6
    validate(load(out / "gaussian.json"), "gaussian")


def test_propagate_csv_roundtrip_as_input(tmp_path):
    code, out = run(tmp_path, "propagate", "--t", "0.5", "--format", "csv")
    assert code == 0
    psi = formats.wavefunction_from_csv(out / "state.csv")
    code, out2 = run(tmp_path / "b", "propagate", "--t", "0.5", "--input",
                     str(out / "state.csv"))
    assert code == 0
    twice = formats.wavefunction_from_json(out2 / "state.json")
    code, out3 = run(tmp_path / "c", "propagate", "--t", "1")
    direct = formats.wavefunction_from_json(out3 / "state.json")
    assert psi.N == direct.N
    assert np.max(np.abs(twice.values - direct.values)) <= 1e-9


def test_propagate_nearby_quartic(tmp_path):
    code, out = run(tmp_path, "propagate", "--h", "quartic", "--method", "nearby", "--t", "0.5",
                    "--x0", "1")
    assert code == 0
    summary = load(out / "summary.json")
    assert summary["norm2_final"] == pytest.approx(1.0, abs=1e-9)
    assert set(p.name for p in out.iterdir()) == {"gaussian.json", "state.json", "summary.json"}


@pytest.mark.parametrize("args", [
    ["--N", "1000"],
    ["--domain", "1", "-1"],
    ["--method", "kernel", "--h", "quartic"],
    ["--method", "gaussian", "--h", "pendulum"],
    ["--oracle", "--t", "-1"],
    ["--hbar", "0"],
    ["--param", "mass"],
    ["--h", "nonsense"],
])
def test_propagate_config_errors(tmp_path, args, capsys):
    code, _ = run(tmp_path, "propagate", *args)
    assert code == 2
    assert capsys.readouterr().err


def test_propagate_underresolved_grid_is_numerical(tmp_path, capsys):
    code, _ = run(tmp_path, "propagate", "--N", "16", "--t", "0.1")
    assert code == 3
    assert "UnderResolvedGrid" in capsys.readouterr().err


# ehrenfest


def test_ehrenfest_oscillator(tmp_path):
    code, out = run(tmp_path, "ehrenfest", "--h", "oscillator")
    assert code == 0
    data = series(out / "ehrenfest.csv")
    assert data.shape == (65, 6)
    assert data[-1, 0] == pytest.approx(2 * math.pi)
    assert np.max(data[:, 5]) <= 5e-4
    header = (out / "ehrenfest.csv").read_text().splitlines()[0]
    assert header == "t,x_quantum,p_quantum,x_classical,p_classical,deviation"


def test_ehrenfest_free_particle(tmp_path):
    # wide enough that the spreading packet never wraps around the periodic grid
    code, out = run(tmp_path, "ehrenfest", "--h", "free", "--domain", "-60", "60",
                    "--N", "4096", "--p0", "1")
    assert code == 0
    assert load(out / "summary.json")["max_deviation"] <= 1e-6


def test_ehrenfest_quartic_deviation_trends_upward(tmp_path):
    code, out = run(tmp_path, "ehrenfest", "--h", "quartic", "--param", "g=0.1")
    assert code == 0
    dev = series(out / "ehrenfest.csv")[:, 5]
    first = dev[dev > 1e-12][0]
    assert dev[-1] >= 10 * first
    assert spearmanr(np.arange(dev.size), dev).statistic > 0.9


# squeeze


def test_squeeze_demo_csv(tmp_path):
    code, out = run(tmp_path, "squeeze", "--demo", "--format", "csv")
    assert code == 0
    rows = (out / "report.csv").read_text().splitlines()
    assert rows[0] == "plane,area,conjugate"
    table = {r.split(",")[0]: (float(r.split(",")[1]), r.split(",")[2]) for r in rows[1:]}
    assert table["x1-p1"] == (pytest.approx(math.pi, rel=1e-11), "1")
    assert table["x2-p2"] == (pytest.approx(math.pi, rel=1e-11), "1")
    assert table["x1-x2"][0] == pytest.approx(0.25 * math.pi, rel=1e-11)


def test_squeeze_identity_all_equal(tmp_path):
    path = tmp_path / "eye.json"
    path.write_text(formats.dumps(formats.matrix_to_json(np.eye(4))))
    code, out = run(tmp_path, "squeeze", "--matrix", str(path))
    assert code == 0
    doc = load(out / "report.json")
    validate(doc, "shadow-report")
    areas = [p["area"] for p in doc["planes"]]
    assert max(areas) - min(areas) <= 1e-12


def test_squeeze_random_run(tmp_path):
    code, out = run(tmp_path, "squeeze", "--random", "--seed", "11", "--trials", "1000")
    assert code == 0
    summary = load(out / "summary.json")
    assert summary["violations"] == 0
    assert summary["min_conjugate_ratio"] >= 1 - 1e-9


def test_squeeze_rejects_non_symplectic(tmp_path, capsys):
    code, _ = run(tmp_path, "squeeze", "--matrix", str(FIXTURES / "not_symplectic.json"))
    assert code == 2
    assert "defect" in capsys.readouterr().err


def test_squeeze_violation_exit_code(tmp_path, monkeypatch):
    """A broken shadow computation must surface as exit 4, not as a clean report."""
    from dataclasses import replace

    from symcamel import cli

    real = cli.nonsqueezing_report
    monkeypatch.setattr(cli, "nonsqueezing_report",
                        lambda S, r: replace(real(S, 0.01 * r), radius=r))
    assert run(tmp_path, "squeeze", "--demo")[0] == 4
    assert run(tmp_path / "r", "squeeze", "--random", "--trials", "3")[0] == 4


# certify


def test_certify_square_cloud(tmp_path):
    code, out = run(tmp_path, "certify", "--cloud", str(FIXTURES / "square_cloud.csv"),
                    "--format", "csv")
    assert code == 0
    doc = load(out / "report.json")
    validate(doc, "certificate")
    assert doc["blob"]["is_blob"] is True
    assert doc["rsup"]["all_pass"] is True
    assert doc["rsup"]["axes"][0]["margin"] == pytest.approx(0.75, abs=1e-6)
    assert (out / "margins.csv").read_text().startswith("j,dx2,dp2,cov,margin\n")


def test_certify_quarter_covariance_reports_failure(tmp_path):
    code, out = run(tmp_path, "certify", "--covariance", str(FIXTURES / "covariance_quarter.json"))
    assert code == 0
    doc = load(out / "report.json")
    validate(doc, "certificate")
    assert doc["rsup"]["all_pass"] is False
    assert doc["quantum_condition"]["pass"] is False
    assert doc["blob"]["is_blob"] is False


def test_certify_malformed_csv(tmp_path):
    assert run(tmp_path, "certify", "--cloud", str(FIXTURES / "malformed.csv"))[0] == 2


def test_certify_collinear_cloud(tmp_path):
    path = tmp_path / "line.csv"
    path.write_text("x,p\n0,0\n1,1\n2,2\n")
    assert run(tmp_path, "certify", "--cloud", str(path))[0] == 3


def test_certify_needs_exactly_one_input(tmp_path):
    assert run(tmp_path, "certify")[0] == 2


def test_certify_tol_override_changes_boundary_verdict(tmp_path):
    path = tmp_path / "edge.json"
    eps = 1e-8
    path.write_text(json.dumps({"sigma": [[0.5 - eps, 0], [0, 0.5 - eps]]}))
    _, loose = run(tmp_path / "a", "certify", "--covariance", str(path), "--tol-psd", "1e-6")
    _, strict = run(tmp_path / "b", "certify", "--covariance", str(path))
    assert load(loose / "report.json")["quantum_condition"]["pass"] is True
    assert load(strict / "report.json")["quantum_condition"]["pass"] is False


# capacity and john


def test_capacity_semiaxes(tmp_path):
    code, out = run(tmp_path, "capacity", "--semiaxes", "1", "4", "1", "4")
    assert code == 0
    doc = load(out / "capacity.json")
    assert doc["capacity"] == pytest.approx(math.pi, rel=1e-12)
    assert doc["volume"] == pytest.approx(math.pi ** 2 / 2 * 16, rel=1e-12)


def test_capacity_from_file(tmp_path):
    code, out = run(tmp_path, "capacity", "--ellipsoid", str(FIXTURES / "ellipsoid_14.json"))
    assert code == 0
    doc = load(out / "capacity.json")
    # conjugate pairs (x1, p1) and (x2, p2) have semiaxes (1, 1) and (4, 4)
    assert doc["capacity"] == pytest.approx(math.pi, rel=1e-12)
    assert doc["symplectic_eigenvalues"] == pytest.approx([1 / 16, 1.0], rel=1e-12)


def test_capacity_odd_semiaxes(tmp_path):
    assert run(tmp_path, "capacity", "--semiaxes", "1", "2", "3")[0] == 2


def test_john_triangle(tmp_path):
    code, out = run(tmp_path, "john", "--polytope", str(FIXTURES / "triangle.json"))
    assert code == 0
    doc = load(out / "john.json")
    validate(doc["ellipsoid"], "ellipsoid")
    assert doc["duality_gap"] <= 1e-8
    assert doc["ellipsoid"]["center"] == pytest.approx([1 / 3, 1 / 3], abs=1e-6)


def test_john_unbounded(tmp_path):
    path = tmp_path / "half.json"
    path.write_text(json.dumps({"A": [[1, 0]], "b": [1]}))
    assert run(tmp_path, "john", "--polytope", str(path))[0] == 3


# configuration


def test_dump_config_defaults(capsys):
    assert main(["squeeze", "--dump-config"]) == 0
    cfg = json.loads(capsys.readouterr().out)
    assert cfg["command"] == "squeeze"
    for key, value in {**GLOBAL_DEFAULTS, **COMMAND_DEFAULTS["squeeze"]}.items():
        assert cfg[key] == value


def test_config_precedence(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"hbar": 0.5, "lam": 0.25, "digits": 8}))
    assert main(["squeeze", "--config", str(path), "--lam", "0.75", "--dump-config"]) == 0
    cfg = json.loads(capsys.readouterr().out)
    assert (cfg["hbar"], cfg["lam"], cfg["digits"], cfg["radius"]) == (0.5, 0.75, 8, 1.0)


def test_config_accepts_dashed_keys(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"tol-psd": 1e-6}))
    assert main(["certify", "--config", str(path), "--dump-config"]) == 0
    assert json.loads(capsys.readouterr().out)["tol_psd"] == 1e-6


@pytest.mark.parametrize("content", ['{"bogus": 1}', "[1, 2]", "{broken"])
def test_bad_config_file(tmp_path, content):
    path = tmp_path / "cfg.json"
    path.write_text(content)
    assert main(["squeeze", "--config", str(path), "--dump-config"]) == 2


def test_config_key_from_other_command_is_unknown(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"trials": 5}))
    assert main(["certify", "--config", str(path), "--dump-config"]) == 2


def test_output_must_differ_from_input(tmp_path):
    src = FIXTURES / "square_cloud.csv"
    assert main(["certify", "--cloud", str(src), "--out", str(src)]) == 2


@pytest.mark.parametrize("args", [["--threads", "0"], ["--digits", "2"], ["--tol-psd", "-1"]])
def test_global_validation(args):
    assert main(["squeeze", "--demo", "--dump-config"] + args) == 2


def test_threads_cap_is_applied(tmp_path, monkeypatch):
    from symcamel import cli

    seen = []
    real = cli.threadpool_limits

    def spy(limits=None):
        seen.append(limits)
        return real(limits=limits)

    monkeypatch.setattr(cli, "threadpool_limits", spy)
    assert run(tmp_path, "squeeze", "--demo", "--threads", "1")[0] == 0
    assert seen == [1]


def test_unknown_command_and_help():
    assert main(["frobnicate"]) == 2
    assert main(["--help"]) == 0


def test_repeat_runs_are_byte_identical(tmp_path):
    args = ["squeeze", "--random", "--n", "3", "--trials", "50", "--seed", "5", "--format", "csv"]
    main(args + ["--out", str(tmp_path / "a")])
    main(args + ["--out", str(tmp_path / "b")])
    for name in ("summary.json", "trials.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "symcamel", "capacity", "--semiaxes", "1", "1",
                           "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.strip().endswith("capacity.json")
