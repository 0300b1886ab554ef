"""Hypersurface discretization, shape data, integration, roundness diagnostics.

A surface family Sigma_rho is parametrized over the unit sphere S^{n-1} by
x(theta) = c(theta) u(theta), where u is the hyperspherical direction vector
and c the chart radius (rho for coordinate spheres, tanh(rho/2) for geodesic
spheres in the ball chart, rho + a Y(theta) for perturbed spheres).  All node
quantities are stored as batched arrays with the node axis first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import roots_jacobi

from . import curvature as _curv
from ._linalg import (
    cholesky,
    compensated_sum,
    gen_eig_sym2,
    null_covector,
    solve_lower,
    spd_det,
    spd_inverse,
)
from .errors import (
    BadDimension,
    BadResolution,
    EigFailure,
    NonFiniteIntegrand,
    OutOfDomain,
    SingularMetric,
)
from .metric import BALL_AH, MetricJet, MetricSpec, eval_jet, exact_einstein

COORDINATE_SPHERE = "CoordinateSphere"
PERTURBED_SPHERE = "PerturbedSphere"
GEODESIC_SPHERE = "GeodesicSphere"

FAMILY_KINDS = (COORDINATE_SPHERE, PERTURBED_SPHERE, GEODESIC_SPHERE)


@dataclass(frozen=True)
class SurfaceFamily:
    """kind + perturbation amplitude; the shape function Y is u_0 * u_1.

    Y is a fixed real spherical harmonic of degree 2 (x0 x1 / r^2 restricted
    to the sphere): smooth, non-round, with closed-form derivatives in every
    dimension.
    """

    kind: str = COORDINATE_SPHERE
    amplitude: float = 0.0

    def __post_init__(self):
        if self.kind not in FAMILY_KINDS:
            raise ValueError(f"unknown family kind {self.kind!r}")


@dataclass
class QuadratureGrid:
    """Product quadrature on S^{n-1}; weights include the sphere measure.

    Polar angles use Gauss-Jacobi nodes in cos(theta_k) with weight
    (1 - t^2)^{(n-3-k)/2} (plain Gauss-Legendre for n = 3); the azimuth is a
    uniform trapezoid rule on [0, 2 pi).  Weights sum to omega_{n-1}.
    """

    n: int
    resolution: int
    cos_t: np.ndarray  # (N, n-1)
    sin_t: np.ndarray  # (N, n-1)
    weights: np.ndarray  # (N,)
    theta: np.ndarray  # (N, n-1) angles, for reporting

    @property
    def num_nodes(self) -> int:
        return self.weights.shape[0]


@dataclass
class SurfaceNode:
    """Shape data at one quadrature node (view into SurfaceData arrays)."""

    theta: np.ndarray
    x: np.ndarray
    tangents: np.ndarray
    nu: np.ndarray
    sigma: np.ndarray
    A: np.ndarray
    H: float
    kappa: np.ndarray
    Anorm2: float
    Aring: float
    Srho: float
    dsigma: float


@dataclass
class SurfaceData:
    """A discretized Sigma_rho with all node shape data (node axis first)."""

    spec: MetricSpec
    family: SurfaceFamily
    rho: float
    grid: QuadratureGrid
    x: np.ndarray
    u: np.ndarray
    tangents: np.ndarray
    nu: np.ndarray
    sigma: np.ndarray
    A: np.ndarray
    H: np.ndarray
    kappa: np.ndarray
    Anorm2: np.ndarray
    Aring: np.ndarray
    Srho: np.ndarray
    dsigma: np.ndarray
    G_lambda: np.ndarray
    lam: int
    area: float = 0.0
    area_radius: float = 0.0
    jet: Optional[MetricJet] = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.spec.n

    def nodes(self):
        for j in range(self.grid.num_nodes):
            yield SurfaceNode(
                theta=self.grid.theta[j],
                x=self.x[j],
                tangents=self.tangents[j],
                nu=self.nu[j],
                sigma=self.sigma[j],
                A=self.A[j],
                H=float(self.H[j]),
                kappa=self.kappa[j],
                Anorm2=float(self.Anorm2[j]),
                Aring=float(self.Aring[j]),
                Srho=float(self.Srho[j]),
                dsigma=float(self.dsigma[j]),
            )


def build_grid(n: int, resolution: int) -> QuadratureGrid:
    if not (3 <= n <= 6):
        raise BadDimension(f"grid dimension must lie in [3, 6], got {n}")
    if resolution < 8:
        raise BadResolution(f"resolution must be >= 8, got {resolution}")
    axes_c, axes_s, axes_w, axes_t = [], [], [], []
    for k in range(n - 2):  # polar angles
        a = (n - 3 - k) / 2.0
        t, w = roots_jacobi(resolution, a, a)
        axes_c.append(t)
        axes_s.append(np.sqrt(1 - t * t))
        axes_w.append(w)
        axes_t.append(np.arccos(t))
    m = 2 * resolution  # azimuth
    phi = 2 * np.pi * np.arange(m) / m
    axes_c.append(np.cos(phi))
    axes_s.append(np.sin(phi))
    axes_w.append(np.full(m, 2 * np.pi / m))
    axes_t.append(phi)

    grids_c = np.meshgrid(*axes_c, indexing="ij")
    grids_s = np.meshgrid(*axes_s, indexing="ij")
    grids_t = np.meshgrid(*axes_t, indexing="ij")
    cos_t = np.stack([g.ravel() for g in grids_c], axis=-1)
    sin_t = np.stack([g.ravel() for g in grids_s], axis=-1)
    theta = np.stack([g.ravel() for g in grids_t], axis=-1)
    w = axes_w[0]
    for wk in axes_w[1:]:
        w = np.multiply.outer(w, wk)
    return QuadratureGrid(n, resolution, cos_t, sin_t, w.ravel(), theta)


def _direction_jet(grid: QuadratureGrid, dtype):
    """u(theta), du[a, i] = d_a u_i, ddu[a, b, i] on the unit sphere.

    Component i is a product of per-angle factors (sin for k < i, cos for
    k = i, absent for k > i); angle trigs are recomputed in the working dtype
    with sin = sqrt(1 - cos^2) for polar angles so that |u| = 1 holds to
    machine precision of that dtype.
    """
    n = grid.n
    N = grid.num_nodes
    c = grid.cos_t.astype(dtype)
    s = grid.sin_t.astype(dtype)
    for k in range(n - 2):  # polar: sin >= 0, recompute for dtype consistency
        s[:, k] = np.sqrt(1 - c[:, k] * c[:, k])
    if dtype == np.longdouble:
        # azimuth in full longdouble precision
        phi = grid.theta[:, n - 2].astype(np.longdouble)
        c[:, n - 2] = np.cos(phi)
        s[:, n - 2] = np.sin(phi)

    # factor tables: F[j, i, k], dF, ddF with k the angle index
    F = np.ones((N, n, n - 1), dtype=dtype)
    dF = np.zeros((N, n, n - 1), dtype=dtype)
    active = np.zeros((n, n - 1), dtype=bool)
    for i in range(n):
        for k in range(n - 1):
            if k < i:
                F[:, i, k] = s[:, k]
                dF[:, i, k] = c[:, k]
                active[i, k] = True
            elif k == i and i <= n - 2:
                F[:, i, k] = c[:, k]
                dF[:, i, k] = -s[:, k]
                active[i, k] = True

    u = np.prod(F, axis=-1)
    du = np.zeros((N, n - 1, n), dtype=dtype)
    ddu = np.zeros((N, n - 1, n - 1, n), dtype=dtype)
    for a in range(n - 1):
        rest = np.prod(np.delete(F, a, axis=-1), axis=-1)
        du[:, a, :] = dF[:, :, a] * rest
        ddu[:, a, a, :] = -u * active[:, a]
        for b in range(a):
            rest2 = np.prod(np.delete(F, (b, a), axis=-1), axis=-1)
            mixed = dF[:, :, a] * dF[:, :, b] * rest2
            ddu[:, a, b, :] = mixed
            ddu[:, b, a, :] = mixed
    return u, du, ddu


def _radius_jet(spec, family, rho, u, du, ddu, dtype):
    """Chart radius c(theta) with first/second parameter derivatives."""
    N = u.shape[0]
    nm1 = du.shape[1]
    tp = np.dtype(dtype).type
    if family.kind == PERTURBED_SPHERE:
        a = tp(family.amplitude)
        Y = u[:, 0] * u[:, 1]
        dY = du[:, :, 0] * u[:, None, 1] + u[:, None, 0] * du[:, :, 1]
        ddY = (
            ddu[:, :, :, 0] * u[:, None, None, 1]
            + du[:, :, None, 0] * du[:, None, :, 1]
            + du[:, None, :, 0] * du[:, :, None, 1]
            + u[:, None, None, 0] * ddu[:, :, :, 1]
        )
        c = tp(rho) + a * Y
        return c, a * dY, a * ddY
    if family.kind == GEODESIC_SPHERE:
        if spec.chart != BALL_AH:
            raise OutOfDomain("GeodesicSphere families require a BallAH chart")
        c0 = np.tanh(tp(rho) / 2)
    else:
        c0 = tp(rho)
    c = np.full(N, c0, dtype=dtype)
    return c, np.zeros((N, nm1), dtype=dtype), np.zeros((N, nm1, nm1), dtype=dtype)


def discretize(
    spec: MetricSpec, family: SurfaceFamily, rho: float, grid: QuadratureGrid
) -> SurfaceData:
    """Populate all shape data of Sigma_rho on the given grid."""
    n = spec.n
    if grid.n != n:
        raise BadDimension("grid dimension does not match the metric")
    dtype = spec.dtype
    lam = -1 if spec.chart == BALL_AH else 0
    u, du, ddu = _direction_jet(grid, dtype)
    c, dc, ddc = _radius_jet(spec, family, rho, u, du, ddu, dtype)

    x = c[:, None] * u
    T = dc[:, :, None] * u[:, None, :] + c[:, None, None] * du  # (N, n-1, n)
    ddx = (
        ddc[:, :, :, None] * u[:, None, None, :]
        + dc[:, :, None, None] * du[:, None, :, :]
        + dc[:, None, :, None] * du[:, :, None, :]
        + c[:, None, None, None] * ddu
    )

    jet = eval_jet(spec, x)
    G_lam = exact_einstein(spec, x, lam)
    if G_lam is None:
        cp = _curv.curvature_point(jet, lam)
        Gamma = cp.Gamma
        G_lam = cp.G_lambda
    else:
        Gamma = _curv.christoffel(jet)

    # covector annihilating the tangents; oriented away from the origin
    lam_co = null_covector(T)
    flip = np.einsum("Ni,Ni->N", lam_co, x) < 0
    lam_co[flip] *= -1
    ginv = spd_inverse(jet.g)
    norm2 = np.einsum("Ni,Nij,Nj->N", lam_co, ginv, lam_co)
    nu_co = lam_co / np.sqrt(norm2)[:, None]  # g_ij nu^j
    nu = np.einsum("Nij,Nj->Ni", ginv, nu_co)

    sigma = np.einsum("Nai,Nij,Nbj->Nab", T, jet.g, T)
    # A_ab = -nu_i (ddx^i + Gamma^i_jk T_a^j T_b^k)
    hess = ddx + np.einsum("Nijk,Naj,Nbk->Nabi", Gamma, T, T)
    A = -np.einsum("Nabi,Ni->Nab", hess, nu_co)
    if spec.name == "hyperbolic_ball" and family.kind == GEODESIC_SPHERE:
        # geodesic spheres of the exact space form are umbilic with principal
        # curvature coth(rho); the identity removes the e^{2 rho} amplification
        # of jet roundoff from all shape data of the zero-mass model
        coth = 1 + 2 / np.expm1(2 * np.dtype(dtype).type(rho))
        A = coth * sigma

    try:
        sig_inv = spd_inverse(sigma)
        det_sigma = spd_det(sigma)
    except SingularMetric as exc:
        raise EigFailure(f"induced metric not SPD at a node: {exc}") from exc

    shape_op = np.einsum("Nac,Ncb->Nab", sig_inv, A)
    H = np.einsum("Naa->N", shape_op)
    # |Aring|^2 from the traceless part directly: subtracting (H/(n-1)) sigma
    # from A before squaring avoids the catastrophic H^2 - |A|^2 cancellation
    # on nearly umbilic surfaces.  |A|^2 is then reconstructed exactly.
    Aring_ab = A - (H / (n - 1))[:, None, None] * sigma
    ring_op = np.einsum("Nac,Ncb->Nab", sig_inv, Aring_ab)
    Aring2 = np.einsum("Nab,Nba->N", ring_op, ring_op)
    Anorm2 = Aring2 + H * H / (n - 1)
    Aring = np.sqrt(np.maximum(Aring2, 0.0))

    if n == 3:
        kappa = gen_eig_sym2(A, sigma)
    else:
        L = cholesky(sigma.astype(np.float64))
        Mred = solve_lower(L, A.astype(np.float64))
        Mred = np.transpose(solve_lower(L, np.transpose(Mred, (0, 2, 1))), (0, 2, 1))
        kappa = np.linalg.eigvalsh(Mred).astype(dtype)

    Gnn = np.einsum("Nij,Ni,Nj->N", G_lam, nu, nu)
    # Gauss identity, rearranged through the traceless split (exactly
    # equivalent, numerically stable on nearly umbilic surfaces):
    # Srho = H^2 - |A|^2 - 2 G_lam(nu,nu) + lam (n-1)(n-2)
    Srho = ((n - 2) / (n - 1)) * H * H - Aring2 - 2 * Gnn + lam * (n - 1) * (n - 2)

    jac = np.ones(grid.num_nodes, dtype=dtype)
    cpol = grid.cos_t.astype(dtype)
    for k in range(n - 2):
        sk = np.sqrt(1 - cpol[:, k] * cpol[:, k])
        jac = jac * sk ** (n - 2 - k)
    dsig = grid.weights.astype(dtype) * np.sqrt(det_sigma) / jac

    data = SurfaceData(
        spec=spec,
        family=family,
        rho=float(rho),
        grid=grid,
        x=x,
        u=u,
        tangents=T,
        nu=nu,
        sigma=sigma,
        A=A,
        H=H,
        kappa=kappa,
        Anorm2=Anorm2,
        Aring=Aring,
        Srho=Srho,
        dsigma=dsig,
        G_lambda=G_lam,
        lam=lam,
        jet=jet,
    )
    _, _, omega = _curv.constants(n)
    data.area = float(compensated_sum(dsig))
    data.area_radius = float(
        np.power(np.dtype(dtype).type(data.area) / omega, 1.0 / (n - 1))
    )
    return data


def integrate(data: SurfaceData, f):
    """Integral of f over the surface: sum of f * dsigma, Kahan-compensated.

    f may be a node-value array (num_nodes,) or (num_nodes, m), or a callable
    receiving the SurfaceData and returning such an array.
    """
    vals = f(data) if callable(f) else np.asarray(f)
    if not np.all(np.isfinite(vals.astype(np.float64))):
        raise NonFiniteIntegrand("integrand is not finite at some node")
    w = data.dsigma
    if vals.ndim > 1:
        w = w[:, None]
    out = compensated_sum(vals * w)
    return out


def nearly_round_diagnostics(data: SurfaceData, tau: float) -> dict:
    """Scaled nearly-round family diagnostics.

    Covers the traceless-second-fundamental-form bound, the area growth bound
    and the coordinate-radius pinching; the gradient term and the intrinsic
    diameter are reported as not checked (they would need node-coupled
    differentiation, out of scope).
    """
    rho = data.rho
    n = data.n
    rad = np.sqrt(np.sum(data.x.astype(np.float64) ** 2, axis=-1))
    return {
        "sup_Aring_scaled": float(np.max(data.Aring) * rho ** (1 + tau)),
        "area_over_rho_power": float(data.area / rho ** (n - 1)),
        "max_radius_ratio": float(np.max(rad) / rho),
        "min_radius_ratio": float(np.min(rad) / rho),
        "grad_Aring_checked": False,
        "diameter_checked": False,
    }
