"""Command-line interface: exit codes, outputs, determinism."""

import csv
import json
import subprocess
import sys

import pytest

CLI = [sys.executable, "-m", "quasimass.cli"]


def run(args, cwd, env=None):
    import os

    full_env = dict(os.environ)
    if env:
        full_env.update(env)
    return subprocess.run(
        CLI + args, cwd=cwd, env=full_env, capture_output=True, text=True
    )


def write_cfg(tmp_path, name, cfg):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def schw_cfg(tmp_path, outdir, **extra):
    cfg = {
        "metric": {"name": "schwarzschild_isotropic", "n": 3, "params": {"m": 1.0}},
        "rho": [10.0, 20.0, 40.0, 80.0],
        "grid": {"resolution": 16},
        "output": {"dir": str(outdir), "formats": ["csv", "json", "svg"]},
    }
    cfg.update(extra)
    return write_cfg(tmp_path, "cfg.json", cfg)


def test_list_prints_catalog(tmp_path):
    r = run(["list"], tmp_path)
    assert r.returncode == 0
    for name in ("schwarzschild_isotropic", "ads_schwarzschild", "hawking_af"):
        assert name in r.stdout


def test_compute_writes_report(tmp_path):
    out = tmp_path / "out"
    cfg = write_cfg(
        tmp_path,
        "c.json",
        {
            "metric": {"name": "schwarzschild_isotropic", "n": 3, "params": {"m": 1.0}},
            "rho": 20.0,
            "grid": {"resolution": 16},
            "output": {"dir": str(out)},
        },
    )
    r = run(["compute", "-c", cfg], tmp_path)
    assert r.returncode == 0, r.stderr
    report = json.loads((out / "report.json").read_text())
    assert abs(report["values"]["hawking_af"] - 1.0) <= 1e-10
    rows = list(csv.DictReader((out / "report.csv").open()))
    assert len(rows) == 1
    assert set(rows[0]) >= {"rho", "adm_flux", "hawking_af"}
    # 17 significant digits round-trip exactly
    for est, val in report["values"].items():
        assert float(rows[0][est]) == val


def test_sweep_outputs_and_rates(tmp_path):
    out = tmp_path / "out"
    cfg = schw_cfg(tmp_path, out, decay_model="PowerLaw")
    r = run(["sweep", "-c", cfg], tmp_path)
    assert r.returncode == 0, r.stderr
    rates = json.loads((out / "rates.json").read_text())
    assert isinstance(rates, list)
    entry = next(e for e in rates if e["estimator"] == "adm_flux")
    assert set(entry) == {"estimator", "limit", "exponent", "residual", "window"}
    assert abs(entry["limit"] - 1.0) <= 5e-3
    assert (out / "sweep.csv").exists()
    assert (out / "sweep.svg").exists()


def test_sweep_thread_determinism(tmp_path):
    outs = []
    for threads, sub in (("1", "a"), ("4", "b")):
        out = tmp_path / sub
        cfg = schw_cfg(tmp_path, out, decay_model="PowerLaw")
        r = run(["--threads", threads, "sweep", "-c", cfg], tmp_path)
        assert r.returncode == 0, r.stderr
        outs.append(out)
    for name in ("sweep.csv", "rates.json", "sweep.svg"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


def test_threads_env_variable(tmp_path):
    out = tmp_path / "out"
    cfg = schw_cfg(tmp_path, out, decay_model="PowerLaw")
    r = run(["sweep", "-c", cfg], tmp_path, env={"QUASIMASS_THREADS": "2"})
    assert r.returncode == 0, r.stderr


def test_expect_satisfied_and_violated(tmp_path):
    out = tmp_path / "out"
    cfg = schw_cfg(
        tmp_path,
        out,
        decay_model="PowerLaw",
        expect={"estimator": "adm_flux", "limit": 1.0, "tol": 5e-3},
    )
    assert run(["sweep", "-c", cfg], tmp_path).returncode == 0
    cfg = schw_cfg(
        tmp_path,
        out,
        decay_model="PowerLaw",
        expect={"estimator": "adm_flux", "limit": 2.0, "tol": 1e-3},
    )
    r = run(["sweep", "-c", cfg], tmp_path)
    assert r.returncode == 4
    assert "expectation violated" in r.stdout + r.stderr


def test_expect_with_richardson_exponent(tmp_path):
    out = tmp_path / "out"
    cfg = schw_cfg(
        tmp_path,
        out,
        decay_model="PowerLaw",
        expect={"estimator": "adm_flux", "limit": 1.0, "tol": 1e-8, "p": 1.0},
    )
    assert run(["sweep", "-c", cfg], tmp_path).returncode == 0


def test_config_errors_exit_2(tmp_path):
    bad = write_cfg(tmp_path, "bad.json", {"metric": {"name": "euclidean", "n": 3}})
    assert run(["sweep", "-c", bad], tmp_path).returncode == 2  # missing rho
    bad = write_cfg(
        tmp_path,
        "bad2.json",
        {"metric": {"name": "nope", "n": 3}, "rho": [5.0]},
    )
    assert run(["compute", "-c", bad], tmp_path).returncode == 2
    assert run(["compute", "-c", str(tmp_path / "missing.json")], tmp_path).returncode == 2


def test_domain_errors_exit_3(tmp_path):
    out = tmp_path / "out"
    cfg = write_cfg(
        tmp_path,
        "c.json",
        {
            "metric": {"name": "hyperbolic_ball", "n": 3},
            "family": {"kind": "CoordinateSphere"},
            "rho": 5.0,  # outside the unit ball chart
            "grid": {"resolution": 16},
            "output": {"dir": str(out)},
        },
    )
    assert run(["compute", "-c", cfg], tmp_path).returncode == 3


def test_not_round_error_exit_3(tmp_path):
    out = tmp_path / "out"
    cfg = write_cfg(
        tmp_path,
        "c.json",
        {
            "metric": {"name": "euclidean", "n": 3},
            "family": {"kind": "PerturbedSphere", "perturbation": 0.5},
            "rho": 10.0,
            "grid": {"resolution": 16},
            "output": {"dir": str(out)},
        },
    )
    assert run(["compute", "-c", cfg], tmp_path).returncode == 3


def test_check_passes_on_clean_metric(tmp_path):
    out = tmp_path / "out"
    cfg = write_cfg(
        tmp_path,
        "c.json",
        {
            "metric": {"name": "schwarzschild_isotropic", "n": 3, "params": {"m": 1.0}},
            "rho": [20.0],
            "grid": {"resolution": 16},
            "output": {"dir": str(out)},
        },
    )
    r = run(["check", "-c", cfg], tmp_path)
    assert r.returncode == 0, r.stdout + r.stderr
    report = json.loads((out / "check.json").read_text())
    assert report["gauss_residual"]["value"] <= 1e-8
    assert report["grid_doubling"]["max_diff"] <= 1e-9


def test_check_detects_injected_jet_fault(tmp_path):
    out = tmp_path / "out"
    cfg = write_cfg(
        tmp_path,
        "c.json",
        {
            "metric": {"name": "schwarzschild_isotropic", "n": 3, "params": {"m": 1.0}},
            "rho": [20.0],
            "grid": {"resolution": 16},
            "output": {"dir": str(out)},
            "check": {"debug_jet_offset": 1e-3},
        },
    )
    r = run(["check", "-c", cfg], tmp_path)
    assert r.returncode == 4
