"""Sweeps over the radius, decay-rate fits, and limit extrapolation."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import BadExponent, DegenerateFit
from .mass import MassReport, compute_report
from .metric import MetricSpec
from .surface import SurfaceFamily, build_grid

POWER_LAW = "PowerLaw"
EXPONENTIAL = "Exponential"

#: Error level below which a sequence counts as already converged.
DEGENERATE_LEVEL = 1e-13


@dataclass(frozen=True)
class SweepConfig:
    """One convergence sweep: radii, grid, estimators, decay model."""

    rho_values: Tuple[float, ...]
    resolution: int = 64
    estimators: Optional[Tuple[str, ...]] = None
    decay_model: str = EXPONENTIAL
    resolution_schedule: Optional[Tuple[int, ...]] = None
    on_not_round: str = "raise"

    def __post_init__(self):
        rhos = tuple(self.rho_values)
        if not rhos:
            raise ValueError("rho values must be non-empty")
        if any(b <= a for a, b in zip(rhos, rhos[1:])):
            raise ValueError("rho values must be strictly increasing")
        if self.decay_model not in (POWER_LAW, EXPONENTIAL):
            raise ValueError(f"unknown decay model {self.decay_model!r}")
        if self.resolution_schedule is not None and len(
            self.resolution_schedule
        ) != len(rhos):
            raise ValueError("resolution schedule length must match rho values")

    def resolution_at(self, k: int) -> int:
        if self.resolution_schedule is not None:
            return self.resolution_schedule[k]
        return self.resolution


@dataclass
class RateFit:
    """Fitted decay of one estimator column toward its extrapolated limit."""

    estimator: str
    limit: float
    exponent: float
    residual: float
    window: Tuple[float, float]


def run_sweep(
    spec: MetricSpec,
    family: SurfaceFamily,
    cfg: SweepConfig,
    threads: int = 1,
) -> List[MassReport]:
    """One MassReport per rho, evaluated in parallel across rho values."""
    grids = {}
    for k in range(len(cfg.rho_values)):
        res = cfg.resolution_at(k)
        if res not in grids:
            grids[res] = build_grid(spec.n, res)

    def one(k: int) -> MassReport:
        rho = cfg.rho_values[k]
        res = cfg.resolution_at(k)
        try:
            return compute_report(
                spec,
                family,
                rho,
                resolution=res,
                estimators=cfg.estimators,
                on_not_round=cfg.on_not_round,
                grid=grids[res],
            )
        except Exception as exc:
            raise type(exc)(f"sweep failed at rho={rho}: {exc}") from exc

    if threads <= 1:
        return [one(k) for k in range(len(cfg.rho_values))]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, range(len(cfg.rho_values))))


def _design_column(rho: np.ndarray, model: str) -> np.ndarray:
    return np.log(rho) if model == POWER_LAW else rho


def _model_values(rho: np.ndarray, limit, logC, q, model: str) -> np.ndarray:
    return limit + np.exp(logC - q * _design_column(rho, model))


def fit_rate(values: Sequence[Tuple[float, float]], model: str) -> RateFit:
    """Joint (limit, amplitude, exponent) fit of v(rho) = limit + C d(rho)^-q.

    d is rho for the power-law model and e^rho for the exponential model.
    The limit is initialized by eliminating the leading term from the last
    three points, the remaining two parameters by a log-linear fit, and all
    three are refined together by Gauss-Newton least squares on the values.
    """
    if model not in (POWER_LAW, EXPONENTIAL):
        raise ValueError(f"unknown decay model {model!r}")
    pts = sorted((float(r), float(v)) for r, v in values)
    if len(pts) < 4:
        raise ValueError("rate fit requires at least 4 points")
    rho = np.array([p[0] for p in pts])
    v = np.array([p[1] for p in pts])
    window = (rho[0], rho[-1])
    name = ""  # filled by callers that fit named columns

    scale = max(np.max(np.abs(v)), 1.0)
    diffs = np.abs(np.diff(v))
    if np.all(diffs < DEGENERATE_LEVEL * scale):
        raise DegenerateFit(
            float(v[-1]), "values already converged below the fit noise floor"
        )

    # limit initializer: eliminate the leading decay term from 3 points.
    # With t = design column, assume equal spacing of the last three in t;
    # Aitken's delta-squared works for both models.
    d1, d2 = v[-2] - v[-3], v[-1] - v[-2]
    denom = d2 - d1
    if abs(denom) > 1e-300:
        limit0 = v[-1] - d2 * d2 / denom
    else:
        limit0 = v[-1]
    err0 = np.abs(v - limit0)
    good = err0 > 0
    if np.count_nonzero(good) < 2:
        raise DegenerateFit(
            float(v[-1]), "values already converged below the fit noise floor"
        )
    t = _design_column(rho, model)
    A = np.stack([np.ones(np.count_nonzero(good)), -t[good]], axis=1)
    coef, *_ = np.linalg.lstsq(A, np.log(err0[good]), rcond=None)
    logC, q = float(coef[0]), float(coef[1])
    sgn = np.sign(v[-1] - limit0) or 1.0

    # Gauss-Newton refinement of (limit, logC, q) on the raw values
    theta = np.array([limit0, logC, q])
    for _ in range(50):
        term = sgn * np.exp(theta[1] - theta[2] * t)
        r = theta[0] + term - v
        J = np.stack([np.ones_like(t), term, -t * term], axis=1)
        try:
            step, *_ = np.linalg.lstsq(J, -r, rcond=None)
        except np.linalg.LinAlgError:
            break
        theta = theta + step
        if np.max(np.abs(step)) < 1e-12 * max(1.0, np.max(np.abs(theta))):
            break
    limit, logC, q = float(theta[0]), float(theta[1]), float(theta[2])

    err = np.abs(v - limit)
    # post-refinement degeneracy: the sequence sits at the noise floor and the
    # "decay" found by the fit is not meaningful
    if q <= 1e-6 and np.max(err) <= 1e-5 * scale:
        raise DegenerateFit(
            float(v[-1]), "values already converged below the fit noise floor"
        )
    with np.errstate(divide="ignore"):
        log_err = np.log(np.maximum(err, 1e-300))
    residual = float(np.max(np.abs(log_err - (logC - q * t))))
    return RateFit(
        estimator=name, limit=limit, exponent=q, residual=residual, window=window
    )


def richardson(values: Sequence[Tuple[float, float]], p: float) -> float:
    """Cascaded elimination of the rho^-p, rho^-(p+1), ... error terms."""
    if not p > 0:
        raise BadExponent(f"richardson exponent must be positive, got {p}")
    pts = sorted((float(r), float(v)) for r, v in values)
    if len(pts) < 2:
        raise ValueError("richardson extrapolation requires at least 2 points")
    rho = [r for r, _ in pts]
    if any(b <= a for a, b in zip(rho, rho[1:])):
        raise BadExponent("richardson requires strictly increasing rho values")
    v = [x for _, x in pts]
    level = p
    while len(v) > 1:
        nxt = []
        for (r1, v1), (r2, v2) in zip(zip(rho, v), zip(rho[1:], v[1:])):
            w1, w2 = r1**level, r2**level
            nxt.append((w2 * v2 - w1 * v1) / (w2 - w1))
        v = nxt
        rho = rho[1:]
        level += 1
    return float(v[0])


def column(reports: Sequence[MassReport], estimator: str) -> List[Tuple[float, float]]:
    """(rho, value) pairs of one estimator across a sweep."""
    return [(r.rho, r.values[estimator]) for r in reports if estimator in r.values]


def fit_all(
    reports: Sequence[MassReport], model: str, estimators: Optional[Sequence[str]] = None
) -> Dict[str, RateFit]:
    """Rate fits for every estimator column; degenerate columns get the
    +inf exponent sentinel with the last value as limit."""
    if estimators is None:
        estimators = list(reports[0].values)
    fits: Dict[str, RateFit] = {}
    for est in estimators:
        pts = column(reports, est)
        if len(pts) < 4:
            continue
        try:
            fit = fit_rate(pts, model)
        except DegenerateFit as exc:
            fit = RateFit(
                estimator=est,
                limit=exc.limit,
                exponent=math.inf,
                residual=0.0,
                window=(pts[0][0], pts[-1][0]),
            )
        fit.estimator = est
        fits[est] = fit
    return fits
