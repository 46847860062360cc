import json
import math
import subprocess
import sys

import pytest
import yaml

from stable_llt import cli


def run(tmp_path, command, cfg=None, *flags):
    args = [command, "--out", str(tmp_path / "out")]
    if cfg is not None:
        path = tmp_path / "cfg.yaml"
        path.write_text(yaml.safe_dump(cfg))
        args += ["--config", str(path)]
    return cli.main(args + list(flags))


def summary(tmp_path):
    return json.loads((tmp_path / "out" / "summary.json").read_text())


def manifest(tmp_path):
    return json.loads((tmp_path / "out" / "manifest.json").read_text())


def test_density_normal_column(tmp_path):
    assert run(tmp_path, "density") == 0
    s = summary(tmp_path)
    assert s["checks"]["normal_column"] and s["checks"]["symmetric"]
    assert s["values"]["max_normal_gap"] <= 1e-6
    files = manifest(tmp_path)["files"]
    assert {"density.csv", "char_fn.csv", "summary.json", "manifest.json"} <= set(files)
    for f in files:
        assert (tmp_path / "out" / f).exists()


def test_density_stable_g0(tmp_path):
    # tails c1 = c2 = 0.5 at alpha = 1.5 give c = Gamma(-1/2) cos(3 pi / 4) = sqrt(2 pi)
    cfg = {"law": {"name": "zipf_symmetric", "params": {"alpha": 1.5}},
           "stable": {"alpha": 1.5, "beta": 0.0, "c": math.sqrt(2 * math.pi)},
           "density": {"x_min": -3, "x_max": 3, "points": 61}}
    assert run(tmp_path, "density", cfg) == 0
    s = summary(tmp_path)
    assert s["checks"]["g0_closed_form"]
    g0 = math.gamma(1 / 1.5) / (math.pi * 1.5 * math.sqrt(2 * math.pi) ** (1 / 1.5))
    assert s["values"]["g0_quadrature"] == pytest.approx(g0, abs=1e-8)


def test_exact_llt_ratio(tmp_path):
    assert run(tmp_path, "exact-llt") == 0
    s = summary(tmp_path)
    assert abs(s["values"]["ratio"] - 1) <= 0.01
    files = manifest(tmp_path)["files"]
    assert "sn_pmf.csv" in files and "sn_pmf.csv.json" in files


def test_exact_llt_uniform_scan(tmp_path):
    cfg = {"exact_llt": {"n": 256, "n_list": [1, 2, 4, 8, 16]}}
    assert run(tmp_path, "exact-llt", cfg) == 0
    assert "c_hat" in summary(tmp_path)["values"]
    assert "uniform_bound.csv" in manifest(tmp_path)["files"]


def test_corr_check_summary(tmp_path):
    assert run(tmp_path, "corr-check") == 0
    v = summary(tmp_path)["values"]
    assert "slope" in v and "empirical_C" in v
    assert v["slope"] >= v["rho"] - 0.1


def test_aslt_single_seed(tmp_path):
    cfg = {"aslt": {"N_grid": [1000]}}
    assert run(tmp_path, "aslt", cfg, "--seeds", "0") == 0
    rows = (tmp_path / "out" / "runs.csv").read_text().splitlines()
    assert rows[0] == "seed,index,N,A_N,hits"
    assert len(rows) == 2
    assert {"runs.csv", "study.csv", "aslt_manifest.json"} <= set(manifest(tmp_path)["files"])


def test_aslt_rejects_alpha_below_one(tmp_path):
    cfg = {"law": {"name": "zipf_skewed", "params": {"alpha": 0.5, "c1": 1, "c2": 1}}}
    assert run(tmp_path, "aslt", cfg) == cli.EXIT_CONFIG


def test_norming(tmp_path):
    cfg = {"law": {"name": "log_sigma_family", "params": {"alpha": 1.5, "sigma": 0.4}},
           "norming_check": {"b": 1 << 16}}
    assert run(tmp_path, "norming", cfg) == 0
    s = summary(tmp_path)
    assert s["checks"]["bn_residual"]
    assert s["values"]["gamma"] < 2


def test_byte_identical_outputs(tmp_path):
    cfg = {"aslt": {"N_grid": [500, 2000]}}
    a, b = tmp_path / "a", tmp_path / "b"
    a.mkdir()
    b.mkdir()
    assert run(a, "aslt", cfg, "--seeds", "0:4", "--threads", "1") == 0
    assert run(b, "aslt", cfg, "--seeds", "0:4", "--threads", "3") == 0
    for f in ("runs.csv", "study.csv"):
        assert (a / "out" / f).read_bytes() == (b / "out" / f).read_bytes()


def test_flags_override_and_echo(tmp_path, monkeypatch):
    monkeypatch.setenv("STABLE_LLT_THREADS", "3")
    cfg = {"tol": 1e-4, "exact_llt": {"n": 64}}
    assert run(tmp_path, "exact-llt", cfg, "--tol", "1e-5") == 0
    m = manifest(tmp_path)
    assert m["config"]["tol"] == 1e-5
    assert m["config"]["threads"] == 3
    assert m["config"]["exact_llt"]["n"] == 64


def test_config_errors(tmp_path, capsys):
    assert run(tmp_path, "density", {"law": {"name": "nope"}}) == cli.EXIT_CONFIG
    assert "law.name" in capsys.readouterr().err
    assert run(tmp_path, "density", {"densty": {}}) == cli.EXIT_CONFIG
    assert "densty" in capsys.readouterr().err
    assert run(tmp_path, "density", {"law": {"name": "zipf_symmetric", "params": {"bogus": 1}}}) == cli.EXIT_CONFIG
    bad = tmp_path / "bad.yaml"
    bad.write_text("law: [\n")
    assert cli.main(["density", "--config", str(bad), "--out", str(tmp_path / "o")]) == cli.EXIT_CONFIG
    assert "line" in capsys.readouterr().err
    assert run(tmp_path, "density", None, "--tol", "0.5") == cli.EXIT_CONFIG


def test_json_config(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"density": {"points": 11}}))
    assert cli.main(["density", "--config", str(path), "--out", str(tmp_path / "out")]) == 0
    assert len((tmp_path / "out" / "density.csv").read_text().splitlines()) == 12


def test_numerical_failure_exit(tmp_path):
    cfg = {"law": {"name": "zipf_skewed", "params": {"alpha": 0.5, "c1": 0.3, "c2": 0.7}}, "tol": 1e-3}
    assert run(tmp_path, "exact-llt", cfg) == cli.EXIT_NUMERIC


def test_check_failure_exit(tmp_path):
    cfg = {"exact_llt": {"n": 4096, "ratio_tol": 1e-9}}
    assert run(tmp_path, "exact-llt", cfg) == cli.EXIT_CHECK
    assert summary(tmp_path)["passed"] is False


def test_parse_seeds():
    assert cli.parse_seeds("0,2,5:8") == [0, 2, 5, 6, 7]
    with pytest.raises(ValueError):
        cli.parse_seeds(",")


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "stable_llt", "density", "--out", str(tmp_path / "o")],
                         capture_output=True, text=True)
    assert out.returncode == 0
    assert "all checks passed" in out.stdout
