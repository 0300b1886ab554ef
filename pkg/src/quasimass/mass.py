"""Total-mass and quasi-local-mass estimators.

Asymptotically flat estimators (Cartesian chart): ``adm_flux``,
``ricci_mass_af``, ``hawking_af``, ``by_af``, ``sigma2_af``.  Asymptotically
hyperbolic estimators (ball chart), indexed by a component i in 0..n:
``ch_mass``, ``ricci_mass_ah``, ``hawking_ah``, ``by_ah`` and the combined
``by_vector_ah``.  ``compute_report`` evaluates a requested set of estimator
ids (for example ``"by_ah[0]"``) on one surface and collects the values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from ._linalg import compensated_sum, spd_inverse
from .curvature import constants
from .embed import EUCLIDEAN, HYPERBOLIC, RoundEmbedding, round_embed
from .errors import DecayTooWeak, NotRound, WrongChart
from .metric import (
    BALL_AH,
    CARTESIAN_AF,
    MetricSpec,
    eval_background_jet,
    eval_jet,
)
from .surface import (
    QuadratureGrid,
    SurfaceData,
    SurfaceFamily,
    _direction_jet,
    build_grid,
    discretize,
    integrate,
)

__all__ = [
    "MassReport",
    "adm_flux",
    "ricci_mass_af",
    "hawking_af",
    "by_af",
    "sigma2_af",
    "ch_mass",
    "ricci_mass_ah",
    "hawking_ah",
    "by_ah",
    "by_vector_ah",
    "v_function",
    "estimator_ids",
    "compute_report",
]


# ---------------------------------------------------------------------------
# static potentials and helpers
# ---------------------------------------------------------------------------


def v_function(i: int, x):
    """Static potential V^(i) of hyperbolic space in ball coordinates.

    V^(0) = (1+r^2)/(1-r^2) and V^(i) = 2 x^i / (1-r^2); under r = tanh(rho/2)
    these are cosh rho and theta^i sinh rho.
    """
    x = np.asarray(x)
    r2 = np.sum(x * x, axis=-1)
    if i == 0:
        return (1 + r2) / (1 - r2)
    return 2 * x[..., i - 1] / (1 - r2)


def _v_gradient(i: int, x):
    """Coordinate gradient d V^(i) in ball coordinates."""
    x = np.asarray(x)
    n = x.shape[-1]
    r2 = np.sum(x * x, axis=-1)
    if i == 0:
        return (4 / (1 - r2) ** 2)[..., None] * x
    dv = np.zeros_like(x)
    dv[..., i - 1] = 2 / (1 - r2)
    dv += (4 * x[..., i - 1] / (1 - r2) ** 2)[..., None] * x
    return dv


def _require_chart(spec: MetricSpec, chart: str, what: str) -> None:
    if spec.chart != chart:
        raise WrongChart(
            f"{what} requires a {chart} metric, got {spec.chart} ({spec.name})"
        )


def _hawking_bracket(data: SurfaceData):
    """Srho - (n-2)/(n-1) H^2 (+ (n-1)(n-2) in the AH case), cancellation-free.

    By the Gauss identity this equals -(|Aring|^2 + 2 G_lam(nu, nu)), which is
    assembled here from the traceless second fundamental form and the modified
    Einstein tensor directly, so exact-zero model cases evaluate to zero
    instead of to a difference of large near-equal terms.
    """
    Gnn = np.einsum("Nij,Ni,Nj->N", data.G_lambda, data.nu, data.nu)
    return -(data.Aring**2 + 2 * Gnn)


def _mean_curvature_excess(data: SurfaceData, H0):
    """H0 - H per node, formed through A - (H0/(n-1)) sigma before tracing.

    Subtracting the matrices first lets the large common parts of A and sigma
    cancel entrywise, which keeps the result below the quantization level of
    H itself on nearly umbilic surfaces.
    """
    n = data.n
    sig_inv = spd_inverse(data.sigma)
    B = (H0 / (n - 1)) * data.sigma - data.A
    return np.einsum("Nab,Nba->N", sig_inv, B)


# ---------------------------------------------------------------------------
# asymptotically flat estimators
# ---------------------------------------------------------------------------


def adm_flux(spec: MetricSpec, rho: float, grid: QuadratureGrid) -> float:
    """Total-mass flux integral with Euclidean normal and area element."""
    _require_chart(spec, CARTESIAN_AF, "adm_flux")
    b_n, _, _ = constants(spec.n)
    u, _, _ = _direction_jet(grid, spec.dtype)
    x = rho * u
    jet = eval_jet(spec, x)
    f = np.einsum("Niij->Nj", jet.dg) - np.einsum("Njii->Nj", jet.dg)
    integrand = np.einsum("Nj,Nj->N", f, u)
    w = grid.weights.astype(spec.dtype) * spec.dtype(rho) ** (spec.n - 1)
    return float(b_n * compensated_sum(integrand * w))


def ricci_mass_af(spec: MetricSpec, data: SurfaceData) -> float:
    """Mass from the modified Einstein tensor paired with the radial field."""
    _require_chart(spec, CARTESIAN_AF, "ricci_mass_af")
    _, c_n, _ = constants(spec.n)
    Gx = np.einsum("Nij,Ni,Nj->N", data.G_lambda, data.x, data.nu)
    return float(-c_n * integrate(data, Gx))


def hawking_af(data: SurfaceData) -> float:
    """Hawking-type quasi-local mass of an AF surface."""
    n = data.n
    _, c_n, _ = constants(n)
    return float(0.5 * c_n * data.area_radius * integrate(data, _hawking_bracket(data)))


def by_af(data: SurfaceData, emb: RoundEmbedding) -> float:
    """Brown-York-type mass against the Euclidean round embedding."""
    if emb.target != EUCLIDEAN:
        raise NotRound("by_af requires a Euclidean round embedding")
    n = data.n
    b_n, _, _ = constants(n)
    H0 = np.dtype(data.sigma.dtype).type(n - 1) / data.sigma.dtype.type(emb.radius)
    D = _mean_curvature_excess(data, H0)
    return float(2 * b_n * integrate(data, D))


def sigma2_af(data: SurfaceData, emb: RoundEmbedding) -> float:
    """Second-symmetric-function mass against the Euclidean round embedding.

    The elementary symmetric polynomial of the principal curvatures is taken
    from the invariants of the shape operator (trace and trace of the square)
    rather than from ordered eigenvalue products.
    """
    if emb.target != EUCLIDEAN:
        raise NotRound("sigma2_af requires a Euclidean round embedding")
    n = data.n
    _, c_n, _ = constants(n)
    sig_inv = spd_inverse(data.sigma)
    shape_op = np.einsum("Nac,Ncb->Nab", sig_inv, data.A)
    tr = np.einsum("Naa->N", shape_op)
    tr2 = np.einsum("Nab,Nba->N", shape_op, shape_op)
    e2 = 0.5 * (tr * tr - tr2)
    e2_round = math.comb(n - 1, 2) / np.dtype(data.sigma.dtype).type(emb.radius) ** 2
    return float(c_n * data.area_radius * integrate(data, e2_round - e2))


# ---------------------------------------------------------------------------
# asymptotically hyperbolic estimators
# ---------------------------------------------------------------------------


def ch_mass(spec: MetricSpec, i: int, rho: float, grid: QuadratureGrid) -> float:
    """Mass functional of the deviation h = g - g0 paired with V^(i).

    Evaluates b_n times the flux one-form
    V (div0 h - d tr0 h) - h(grad0 V, .) + (tr0 h) dV
    on the outward g0-unit normal of the background geodesic sphere, with the
    background area element.
    """
    _require_chart(spec, BALL_AH, "ch_mass")
    n = spec.n
    if not 0 <= i <= n:
        raise ValueError(f"component index must lie in 0..{n}, got {i}")
    b_n, _, _ = constants(n)
    dtype = spec.dtype
    u, _, _ = _direction_jet(grid, dtype)
    c = np.tanh(dtype(rho) / 2)
    x = c * u

    jet = eval_jet(spec, x)
    bg = eval_background_jet(spec, x)
    h = jet.g - bg.g
    dh = jet.dg - bg.dg

    ginv0 = spd_inverse(bg.g)
    dginv0 = -np.einsum("Nia,Nkab,Nbj->Nkij", ginv0, bg.dg, ginv0)
    # background Christoffels
    bracket = (
        np.einsum("Nilj->Nlij", bg.dg)
        + np.einsum("Njli->Nlij", bg.dg)
        - np.einsum("Nlij->Nlij", bg.dg)
    )
    Gamma0 = 0.5 * np.einsum("Nkl,Nlij->Nkij", ginv0, bracket)

    # (div0 h)_j = g0^{ab} (d_a h_bj - Gamma0^c_ab h_cj - Gamma0^c_aj h_bc)
    nabla_h = (
        dh
        - np.einsum("Ncab,Ncj->Nabj", Gamma0, h)
        - np.einsum("Ncaj,Nbc->Nabj", Gamma0, h)
    )
    div_h = np.einsum("Nab,Nabj->Nj", ginv0, nabla_h)
    tr_h = np.einsum("Nab,Nab->N", ginv0, h)
    d_tr_h = np.einsum("Njab,Nab->Nj", dginv0, h) + np.einsum(
        "Nab,Njab->Nj", ginv0, dh
    )

    V = v_function(i, x)
    dV = _v_gradient(i, x)
    gradV = np.einsum("Nkj,Nj->Nk", ginv0, dV)
    one_form = (
        V[:, None] * (div_h - d_tr_h)
        - np.einsum("Njk,Nk->Nj", h, gradV)
        + tr_h[:, None] * dV
    )

    # outward g0-unit normal of the centered sphere: radial, length 1 in g0
    r2 = np.sum(x * x, axis=-1)
    nu0 = (x / c) * ((1 - r2) / 2)[:, None]
    flux = np.einsum("Nj,Nj->N", one_form, nu0)

    w = grid.weights.astype(dtype) * np.sinh(dtype(rho)) ** (n - 1)
    return float(b_n * compensated_sum(flux * w))


def ricci_mass_ah(spec: MetricSpec, i: int, data: SurfaceData) -> float:
    """Mass from the modified Einstein tensor paired with X^(i).

    X^(0) is the radial field x^k d_k; X^(j) is the coordinate field d_j.
    """
    _require_chart(spec, BALL_AH, "ricci_mass_ah")
    n = spec.n
    if not 0 <= i <= n:
        raise ValueError(f"component index must lie in 0..{n}, got {i}")
    _, c_n, _ = constants(n)
    if i == 0:
        GX = np.einsum("Nij,Ni,Nj->N", data.G_lambda, data.x, data.nu)
    else:
        GX = np.einsum("Nj,Nj->N", data.G_lambda[:, i - 1, :], data.nu)
    return float(-c_n * integrate(data, GX))


def hawking_ah(data: SurfaceData, i: int) -> float:
    """Hawking-type quasi-local mass of an AH surface, weighted component."""
    n = data.n
    if not 0 <= i <= n:
        raise ValueError(f"component index must lie in 0..{n}, got {i}")
    if i >= 1 and not data.spec.decay_rate > n - 1:
        raise DecayTooWeak(
            f"hawking_ah component {i} requires decay rate > {n - 1}, "
            f"metric {data.spec.name} decays at {data.spec.decay_rate}"
        )
    _, c_n, _ = constants(n)
    bracket = _hawking_bracket(data)
    if i >= 1:
        bracket = bracket * data.u[:, i - 1]
    return float(0.5 * c_n * data.area_radius * integrate(data, bracket))


def _round_potentials(data: SurfaceData, emb: RoundEmbedding):
    """rho*, H0 and the hyperboloid position at each node (working dtype)."""
    n = data.n
    dtype = np.dtype(data.sigma.dtype)
    rho_star = np.arcsinh(dtype.type(data.area_radius))
    # (n-1) coth rho* with the deviation from (n-1) kept as a small correction
    H0 = (n - 1) * (1 + 2 / np.expm1(2 * rho_star))
    u = data.u.astype(dtype)
    position = np.concatenate(
        [
            np.full((u.shape[0], 1), np.cosh(rho_star), dtype=dtype),
            np.sinh(rho_star) * u,
        ],
        axis=1,
    )
    return rho_star, H0, position


def by_ah(data: SurfaceData, emb: RoundEmbedding, i: int) -> float:
    """Brown-York-type mass component against the hyperbolic round embedding.

    The static potential is evaluated on the embedded round sphere (radius
    rho* from the area radius), which makes the scalar components agree with
    the corresponding entries of ``by_vector_ah`` identically.
    """
    if emb.target != HYPERBOLIC:
        raise NotRound("by_ah requires a hyperbolic round embedding")
    n = data.n
    if not 0 <= i <= n:
        raise ValueError(f"component index must lie in 0..{n}, got {i}")
    b_n, _, _ = constants(n)
    _, H0, position = _round_potentials(data, emb)
    D = _mean_curvature_excess(data, H0)
    return float(2 * b_n * integrate(data, D * position[:, i]))


def by_vector_ah(data: SurfaceData, emb: RoundEmbedding) -> np.ndarray:
    """All n+1 Brown-York-type components at once via the hyperboloid chart."""
    if emb.target != HYPERBOLIC:
        raise NotRound("by_vector_ah requires a hyperbolic round embedding")
    n = data.n
    b_n, _, _ = constants(n)
    _, H0, position = _round_potentials(data, emb)
    D = _mean_curvature_excess(data, H0)
    return np.array(
        [float(2 * b_n * integrate(data, D * position[:, k])) for k in range(n + 1)]
    )


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


@dataclass
class MassReport:
    """All requested estimator values on one surface."""

    rho: float
    resolution: int
    values: Dict[str, float] = field(default_factory=dict)
    skipped: Dict[str, str] = field(default_factory=dict)
    embedding_used: bool = False

    def __post_init__(self):
        for name, value in self.values.items():
            if not math.isfinite(value):
                raise ValueError(f"non-finite estimator value for {name}: {value}")


def estimator_ids(spec: MetricSpec) -> List[str]:
    """Stable identifiers of every estimator applicable to the metric."""
    n = spec.n
    if spec.chart == CARTESIAN_AF:
        return ["adm_flux", "ricci_af", "hawking_af", "by_af", "sigma2_af"]
    ids: List[str] = []
    for name in ("ch_mass", "ricci_ah", "hawking_ah", "by_ah", "by_vector_ah"):
        ids.extend(f"{name}[{i}]" for i in range(n + 1))
    return ids


def _parse_id(est: str):
    if "[" in est:
        base, _, rest = est.partition("[")
        if not rest.endswith("]"):
            raise ValueError(f"malformed estimator id {est!r}")
        return base, int(rest[:-1])
    return est, None


_NEEDS_EMBEDDING = {"by_af", "sigma2_af", "by_ah", "by_vector_ah"}


def compute_report(
    spec: MetricSpec,
    family: SurfaceFamily,
    rho: float,
    resolution: int = 64,
    estimators: Optional[Sequence[str]] = None,
    on_not_round: str = "raise",
    grid: Optional[QuadratureGrid] = None,
    data: Optional[SurfaceData] = None,
) -> MassReport:
    """Evaluate the requested estimators on Sigma_rho and collect a report.

    ``on_not_round`` selects what happens when an embedding-based estimator
    is requested on a surface that is not round: ``"raise"`` propagates
    ``NotRound``, ``"skip"`` records the reason in ``report.skipped``.
    """
    if estimators is None:
        estimators = estimator_ids(spec)
    for est in estimators:
        base, idx = _parse_id(est)
        known = {e.partition("[")[0] for e in estimator_ids(spec)}
        if base not in known:
            raise WrongChart(
                f"estimator {est!r} is not applicable to {spec.name} "
                f"({spec.chart} chart)"
            )
        if idx is not None and not 0 <= idx <= spec.n:
            raise ValueError(f"component index out of range in {est!r}")
    if grid is None:
        grid = build_grid(spec.n, resolution)
    if data is None:
        data = discretize(spec, family, rho, grid)

    target = EUCLIDEAN if spec.chart == CARTESIAN_AF else HYPERBOLIC
    emb: Optional[RoundEmbedding] = None
    emb_error: Optional[NotRound] = None
    if any(_parse_id(e)[0] in _NEEDS_EMBEDDING for e in estimators):
        try:
            emb = round_embed(data, target)
        except NotRound as exc:
            if on_not_round == "raise":
                raise
            emb_error = exc

    report = MassReport(rho=rho, resolution=resolution)
    by_vec: Optional[np.ndarray] = None
    for est in estimators:
        base, idx = _parse_id(est)
        if base in _NEEDS_EMBEDDING and emb is None:
            report.skipped[est] = str(emb_error)
            continue
        if base == "adm_flux":
            value = adm_flux(spec, rho, grid)
        elif base == "ricci_af":
            value = ricci_mass_af(spec, data)
        elif base == "hawking_af":
            value = hawking_af(data)
        elif base == "by_af":
            value = by_af(data, emb)
        elif base == "sigma2_af":
            value = sigma2_af(data, emb)
        elif base == "ch_mass":
            value = ch_mass(spec, idx, rho, grid)
        elif base == "ricci_ah":
            value = ricci_mass_ah(spec, idx, data)
        elif base == "hawking_ah":
            value = hawking_ah(data, idx)
        elif base == "by_ah":
            value = by_ah(data, emb, idx)
        elif base == "by_vector_ah":
            if by_vec is None:
                by_vec = by_vector_ah(data, emb)
            value = float(by_vec[idx])
        else:  # pragma: no cover - guarded above
            raise WrongChart(f"unknown estimator {est!r}")
        if not math.isfinite(value):
            raise ValueError(f"non-finite estimator value for {est}: {value}")
        report.values[est] = value
    report.embedding_used = emb is not None
    return report
