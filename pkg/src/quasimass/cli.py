"""Configuration-driven command line front end.

Commands: ``list`` (catalog), ``compute -c config.json`` (one radius),
``sweep -c config.json`` (radius sweep + rate fits + optional SVG),
``check -c config.json`` (self-diagnostics).  Exit codes: 0 ok, 2 config
error, 3 numerical failure, 4 tolerance violation.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from . import analysis, mass, metric, surface
from .embed import round_embed
from .errors import ConfigError, NotRound, QuasimassError
from .metric import BALL_AH, CARTESIAN_AF

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_TOLERANCE = 4

_FAMILY_CHARTS = {
    "CoordinateSphere": (CARTESIAN_AF, BALL_AH),
    "PerturbedSphere": (CARTESIAN_AF,),
    "GeodesicSphere": (BALL_AH,),
}
_FORMATS = ("csv", "json", "svg")

_CHECK_TOL = {
    "jet_fd_dg": 1e-5,
    "jet_fd_ddg": 1e-5,
    "gauss_residual": 1e-8,
    "grid_doubling": 1e-9,
}


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


def _load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    return cfg


def _build_spec(cfg: dict) -> metric.MetricSpec:
    m = cfg.get("metric")
    if not isinstance(m, dict) or "name" not in m or "n" not in m:
        raise ConfigError('config needs "metric": {"name", "n", "params"?}')
    try:
        return metric.make_spec(m["name"], int(m["n"]), m.get("params") or {})
    except QuasimassError as exc:
        raise ConfigError(f"invalid metric: {exc}") from exc
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"invalid metric: {exc}") from exc


def _build_family(cfg: dict, spec: metric.MetricSpec) -> surface.SurfaceFamily:
    f = cfg.get("family") or {"kind": _default_family_kind(spec)}
    if not isinstance(f, dict) or "kind" not in f:
        raise ConfigError('config "family" must be an object with "kind"')
    kind = f["kind"]
    if kind not in _FAMILY_CHARTS:
        raise ConfigError(
            f"unknown family kind {kind!r}; choose from {sorted(_FAMILY_CHARTS)}"
        )
    if spec.chart not in _FAMILY_CHARTS[kind]:
        raise ConfigError(
            f"family {kind} is not compatible with the {spec.chart} chart "
            f"of {spec.name}"
        )
    amplitude = float(f.get("perturbation", 0.0))
    if kind != "PerturbedSphere" and amplitude:
        raise ConfigError("perturbation amplitude requires the PerturbedSphere family")
    try:
        return surface.SurfaceFamily(kind=kind, amplitude=amplitude)
    except QuasimassError as exc:
        raise ConfigError(str(exc)) from exc


def _default_family_kind(spec: metric.MetricSpec) -> str:
    return "GeodesicSphere" if spec.chart == BALL_AH else "CoordinateSphere"


def _rho_list(cfg: dict) -> List[float]:
    rho = cfg.get("rho")
    if isinstance(rho, (int, float)):
        rho = [rho]
    if not isinstance(rho, list) or not rho:
        raise ConfigError('config needs "rho": number or non-empty list')
    try:
        vals = [float(r) for r in rho]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f'invalid "rho" entry: {exc}') from exc
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise ConfigError('"rho" values must be strictly increasing')
    if any(not (r > 0) for r in vals):
        raise ConfigError('"rho" values must be positive')
    return vals


def _resolution(cfg: dict, spec: metric.MetricSpec) -> int:
    grid = cfg.get("grid") or {}
    if not isinstance(grid, dict):
        raise ConfigError('config "grid" must be an object')
    res = grid.get("resolution", 64 if spec.n == 3 else 24)
    if not isinstance(res, int) or res < 8:
        raise ConfigError(f"grid resolution must be an integer >= 8, got {res!r}")
    return res


def _estimators(cfg: dict, spec: metric.MetricSpec) -> List[str]:
    ests = cfg.get("estimators")
    if ests is None:
        return mass.estimator_ids(spec)
    if not isinstance(ests, list) or not all(isinstance(e, str) for e in ests):
        raise ConfigError('config "estimators" must be a list of names')
    applicable = set(mass.estimator_ids(spec))
    bases = {e.partition("[")[0] for e in applicable}
    for e in ests:
        base = e.partition("[")[0]
        if base not in bases:
            raise ConfigError(
                f"estimator {e!r} is not applicable to {spec.name} "
                f"({spec.chart} chart); applicable: {sorted(bases)}"
            )
        if "[" in e and e not in applicable:
            raise ConfigError(f"estimator component out of range: {e!r}")
    return ests


def _decay_model(cfg: dict, spec: metric.MetricSpec) -> str:
    model = cfg.get("decay_model")
    if model is None:
        return analysis.POWER_LAW if spec.chart == CARTESIAN_AF else analysis.EXPONENTIAL
    if model not in (analysis.POWER_LAW, analysis.EXPONENTIAL):
        raise ConfigError(f"unknown decay_model {model!r}")
    return model


def _output(cfg: dict):
    out = cfg.get("output") or {}
    if not isinstance(out, dict):
        raise ConfigError('config "output" must be an object')
    formats = out.get("formats", ["csv", "json"])
    if not isinstance(formats, list) or not set(formats) <= set(_FORMATS):
        raise ConfigError(f'output formats must be a subset of {_FORMATS}')
    return Path(out.get("dir", ".")), list(formats)


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("QUASIMASS_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError(f"QUASIMASS_THREADS must be an integer: {env!r}") from exc
    return 1


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def _write_csv(path: Path, header: List[str], rows: List[List[float]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _write_json(path: Path, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _report_payload(rep: mass.MassReport) -> dict:
    return {
        "rho": rep.rho,
        "resolution": rep.resolution,
        "values": rep.values,
        "skipped": rep.skipped,
        "embedding_used": rep.embedding_used,
    }


def _write_svg(
    path: Path, reports, fits: Dict[str, analysis.RateFit], model: str
) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "quasimass"
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    for est, fit in sorted(fits.items()):
        pts = analysis.column(reports, est)
        rho = np.array([p[0] for p in pts])
        err = np.abs(np.array([p[1] for p in pts]) - fit.limit)
        err = np.maximum(err, 1e-18)
        ax.plot(rho, err, marker="o", label=est)
    ax.set_yscale("log")
    if model == analysis.POWER_LAW:
        ax.set_xscale("log")
    ax.set_xlabel("rho")
    ax.set_ylabel("|value - extrapolated limit|")
    ax.legend(fontsize=7)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_list() -> int:
    print("metrics (name: chart):")
    for name in metric.CATALOG_NAMES:
        probe = metric.make_spec(
            name,
            3,
            {
                "euclidean": {},
                "schwarzschild_isotropic": {"m": 1.0},
                "af_perturbed": {"m": 1.0, "a": 0.1, "tau": 1.5},
                "hyperbolic_ball": {},
                "ads_schwarzschild": {"m": 1.0},
                "ah_perturbed": {"tau": 3.0, "a": 0.1},
            }[name],
        )
        print(f"  {name}: {probe.chart}")
    print("families (kind: charts):")
    for kind, charts in _FAMILY_CHARTS.items():
        print(f"  {kind}: {', '.join(charts)}")
    print("estimators (name: chart):")
    af = metric.make_spec("euclidean", 3)
    ah = metric.make_spec("hyperbolic_ball", 3)
    for est in mass.estimator_ids(af):
        print(f"  {est}: {CARTESIAN_AF}")
    for est in mass.estimator_ids(ah):
        print(f"  {est}: {BALL_AH}")
    return EXIT_OK


def cmd_compute(cfg: dict) -> int:
    spec = _build_spec(cfg)
    family = _build_family(cfg, spec)
    rhos = _rho_list(cfg)
    if len(rhos) != 1:
        raise ConfigError("compute requires a single rho value; use sweep for lists")
    resolution = _resolution(cfg, spec)
    estimators = _estimators(cfg, spec)
    out_dir, formats = _output(cfg)
    on_not_round = cfg.get("on_not_round", "raise")
    if on_not_round not in ("raise", "skip"):
        raise ConfigError('"on_not_round" must be "raise" or "skip"')

    rep = mass.compute_report(
        spec, family, rhos[0], resolution=resolution,
        estimators=estimators, on_not_round=on_not_round,
    )
    out_dir.mkdir(parents=True, exist_ok=True)
    if "json" in formats:
        _write_json(out_dir / "report.json", _report_payload(rep))
    if "csv" in formats:
        names = [e for e in estimators if e in rep.values]
        _write_csv(
            out_dir / "report.csv",
            ["rho"] + names,
            [[rep.rho] + [rep.values[e] for e in names]],
        )
    for est in estimators:
        if est in rep.values:
            print(f"{est} @ rho={rep.rho:g}: {_fmt(rep.values[est])}")
        else:
            print(f"{est} @ rho={rep.rho:g}: skipped ({rep.skipped[est]})")
    return EXIT_OK


def cmd_sweep(cfg: dict, threads: int) -> int:
    spec = _build_spec(cfg)
    family = _build_family(cfg, spec)
    rhos = _rho_list(cfg)
    resolution = _resolution(cfg, spec)
    estimators = _estimators(cfg, spec)
    model = _decay_model(cfg, spec)
    out_dir, formats = _output(cfg)
    on_not_round = cfg.get("on_not_round", "raise")

    sweep_cfg = analysis.SweepConfig(
        rho_values=tuple(rhos),
        resolution=resolution,
        estimators=tuple(estimators),
        decay_model=model,
        on_not_round=on_not_round,
    )
    reports = analysis.run_sweep(spec, family, sweep_cfg, threads=threads)
    fits = (
        analysis.fit_all(reports, model, estimators) if len(rhos) >= 4 else {}
    )

    out_dir.mkdir(parents=True, exist_ok=True)
    names = [e for e in estimators if e in reports[0].values]
    if "csv" in formats:
        _write_csv(
            out_dir / "sweep.csv",
            ["rho"] + names,
            [[r.rho] + [r.values[e] for e in names] for r in reports],
        )
    if "json" in formats:
        _write_json(
            out_dir / "rates.json",
            [
                {
                    "estimator": f.estimator,
                    "limit": f.limit,
                    "exponent": f.exponent,
                    "residual": f.residual,
                    "window": list(f.window),
                }
                for _, f in sorted(fits.items())
            ],
        )
    if "svg" in formats and fits:
        _write_svg(out_dir / "sweep.svg", reports, fits, model)
    for est, fit in sorted(fits.items()):
        print(
            f"{est}: limit={_fmt(fit.limit)} exponent={fit.exponent:.4g} "
            f"residual={fit.residual:.3g}"
        )

    expect = cfg.get("expect")
    if expect:
        if not isinstance(expect, dict) or "limit" not in expect or "tol" not in expect:
            raise ConfigError('"expect" must be an object with "limit" and "tol"')
        est = expect.get("estimator", names[0] if names else None)
        if est not in names:
            raise ConfigError(f'"expect" names unknown estimator {est!r}')
        target, tol = float(expect["limit"]), float(expect["tol"])
        if "p" in expect:
            value = analysis.richardson(analysis.column(reports, est), float(expect["p"]))
        elif est in fits:
            value = fits[est].limit
        else:
            value = reports[-1].values[est]
        if not abs(value - target) <= tol:
            print(
                f"expectation violated: {est} extrapolates to {_fmt(value)}, "
                f"expected {_fmt(target)} +/- {tol:g}",
                file=sys.stderr,
            )
            return EXIT_TOLERANCE
        print(f"expectation met: {est} = {_fmt(value)} within {tol:g} of {_fmt(target)}")
    return EXIT_OK


def cmd_check(cfg: dict) -> int:
    spec = _build_spec(cfg)
    family = _build_family(cfg, spec)
    rhos = _rho_list(cfg)
    resolution = _resolution(cfg, spec)
    out_dir, _ = _output(cfg)
    check_cfg = cfg.get("check") or {}
    jet_offset = float(check_cfg.get("debug_jet_offset", 0.0))
    rho = rhos[0]

    results: Dict[str, dict] = {}
    violations: List[str] = []

    # 1. analytic jet vs finite differences of g, at off-axis points
    rng = np.random.default_rng(20240817)
    u = rng.normal(size=(8, spec.n))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    if spec.chart == BALL_AH:
        pts = np.tanh(rho / 2) * u
        h = 1e-3 * float(1 - np.tanh(rho / 2) ** 2)
    else:
        pts = rho * u
        h = 1e-3 * rho if spec.name == "euclidean" else 1e-4 * rho
    err_dg = err_ddg = 0.0
    for p in pts.astype(spec.dtype):
        e1, e2 = metric.fd_check_jet(spec, p, h)
        err_dg, err_ddg = max(err_dg, e1), max(err_ddg, e2)
    err_dg, err_ddg = err_dg + jet_offset, err_ddg + jet_offset
    results["jet_fd"] = {"dg": float(err_dg), "ddg": float(err_ddg), "h": h}
    if err_dg > _CHECK_TOL["jet_fd_dg"]:
        violations.append(f"jet_fd dg residual {err_dg:.3e} at rho={rho}")
    if err_ddg > _CHECK_TOL["jet_fd_ddg"]:
        violations.append(f"jet_fd ddg residual {err_ddg:.3e} at rho={rho}")

    # 2. Gauss identity: stored Srho vs generic curvature recomputation
    grid = surface.build_grid(spec.n, resolution)
    data = surface.discretize(spec, family, rho, grid)
    from . import curvature as _curv

    cp = _curv.curvature_point(data.jet, data.lam)
    Gnn = np.einsum("Nij,Ni,Nj->N", cp.G_lambda, data.nu, data.nu)
    from ._linalg import spd_inverse as _spd_inverse

    shape_op = np.einsum(
        "Nac,Ncb->Nab", _spd_inverse(data.sigma), data.A
    )
    H_indep = np.einsum("Naa->N", shape_op)
    A2_indep = np.einsum("Nab,Nba->N", shape_op, shape_op)
    indep = (
        H_indep**2
        - A2_indep
        - 2 * Gnn
        + data.lam * (spec.n - 1) * (spec.n - 2)
    )
    scale = max(float(np.max(np.abs(data.Srho))), float(np.max(data.H**2)), 1.0)
    gauss = float(np.max(np.abs(indep - data.Srho)) / scale)
    results["gauss_residual"] = {"value": gauss, "scale": scale}
    if gauss > _CHECK_TOL["gauss_residual"]:
        violations.append(f"Gauss identity residual {gauss:.3e} at rho={rho}")

    # 3. grid-doubling stability of the estimator values
    ests = _estimators(cfg, spec)
    rep1 = mass.compute_report(
        spec, family, rho, resolution=resolution, estimators=ests,
        on_not_round="skip", grid=grid, data=data,
    )
    rep2 = mass.compute_report(
        spec, family, rho, resolution=2 * resolution, estimators=ests,
        on_not_round="skip",
    )
    diffs = {
        e: abs(rep1.values[e] - rep2.values[e])
        for e in rep1.values
        if e in rep2.values
    }
    worst = max(diffs.values()) if diffs else 0.0
    results["grid_doubling"] = {"max_diff": worst, "diffs": diffs}
    if worst > _CHECK_TOL["grid_doubling"]:
        est = max(diffs, key=diffs.get)
        violations.append(
            f"grid doubling moved {est} by {worst:.3e} at rho={rho}"
        )

    # 4. nearly-round diagnostics (informational, plus defect bookkeeping)
    tau = spec.decay_rate if math.isfinite(spec.decay_rate) else float(spec.n)
    diag = surface.nearly_round_diagnostics(data, tau)
    try:
        emb = round_embed(data, "Euclidean" if data.lam == 0 else "Hyperbolic")
        diag["roundness_defect"] = emb.roundness_defect
        diag["round"] = True
    except NotRound as exc:
        diag["round"] = False
        diag["not_round_reason"] = str(exc)
    results["nearly_round"] = diag

    results["violations"] = violations
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_json(out_dir / "check.json", results)
    for key in ("jet_fd", "gauss_residual", "grid_doubling"):
        print(f"{key}: {results[key]}")
    if violations:
        for v in violations:
            print(f"tolerance violation: {v}", file=sys.stderr)
        return EXIT_TOLERANCE
    print("all checks passed")
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="quasimass",
        description="Mass integrals on asymptotically flat/hyperbolic models",
    )
    parser.add_argument("--threads", type=int, default=None, help="worker threads")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("list", help="print the metric/family/estimator catalog")
    for name, help_ in (
        ("compute", "evaluate estimators at one rho"),
        ("sweep", "rho sweep with rate fits"),
        ("check", "run self-diagnostics"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("-c", "--config", required=True, help="JSON config file")
    args = parser.parse_args(argv)

    try:
        if args.command == "list":
            return cmd_list()
        cfg = _load_config(args.config)
        if args.command == "compute":
            return cmd_compute(cfg)
        if args.command == "sweep":
            return cmd_sweep(cfg, _threads(args))
        return cmd_check(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except QuasimassError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
