"""Surface discretization: quadrature, shape operators, closed-form spheres."""

import math

import numpy as np
import pytest

from quasimass import (
    BadDimension,
    BadResolution,
    NonFiniteIntegrand,
    SurfaceFamily,
    build_grid,
    discretize,
    integrate,
    make_spec,
    nearly_round_diagnostics,
)

EUC = make_spec("euclidean", 3)
HYP = make_spec("hyperbolic_ball", 3)
ROUND_AF = SurfaceFamily("CoordinateSphere")
ROUND_AH = SurfaceFamily("GeodesicSphere")


# ---------------------------------------------------------------------------
# quadrature grids
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("n,total", [(3, 4 * math.pi), (4, 2 * math.pi**2)])
def test_grid_weights_sum_to_sphere_area(n, total):
    grid = build_grid(n, 16)
    assert math.isclose(float(np.sum(grid.weights)), total, rel_tol=1e-13)


def test_grid_integrates_low_moments_exactly():
    from quasimass.surface import _direction_jet

    grid = build_grid(3, 16)
    u, _, _ = _direction_jet(grid, np.float64)
    u = np.asarray(u, float)
    w = np.asarray(grid.weights, float)
    # odd moments vanish, quadratic moments are |S^2|/3
    assert np.max(np.abs(u.T @ w)) <= 1e-13
    quad = np.einsum("Ni,Nj,N->ij", u, u, w)
    assert np.allclose(quad, (4 * math.pi / 3) * np.eye(3), atol=1e-13)


def test_grid_validation():
    with pytest.raises(BadResolution):
        build_grid(3, 4)
    with pytest.raises(BadDimension):
        build_grid(2, 16)
    with pytest.raises(BadDimension):
        build_grid(7, 16)


# ---------------------------------------------------------------------------
# closed-form round spheres
# ---------------------------------------------------------------------------


def test_euclidean_sphere_shape_data():
    rho = 5.0
    data = discretize(EUC, ROUND_AF, rho, build_grid(3, 24))
    assert np.allclose(data.H, 2 / rho, rtol=1e-13)
    assert np.allclose(data.kappa, 1 / rho, rtol=1e-13)
    assert np.allclose(data.Srho, 2 / rho**2, rtol=1e-12)
    assert np.max(np.abs(data.Aring)) <= 1e-14
    assert math.isclose(data.area, 4 * math.pi * rho**2, rel_tol=1e-13)
    assert math.isclose(data.area_radius, rho, rel_tol=1e-13)


def test_hyperbolic_geodesic_sphere_shape_data():
    # geodesic sphere of radius rho: H = 2 coth(rho), area = 4 pi sinh^2(rho),
    # induced scalar curvature 2 / sinh^2(rho)
    rho = 2.5
    data = discretize(HYP, ROUND_AH, rho, build_grid(3, 24))
    assert np.allclose(np.asarray(data.H, float), 2 / np.tanh(rho), rtol=1e-12)
    assert np.allclose(np.asarray(data.kappa, float), 1 / np.tanh(rho), rtol=1e-12)
    assert np.allclose(np.asarray(data.Srho, float), 2 / np.sinh(rho) ** 2, rtol=1e-9)
    assert math.isclose(data.area, 4 * math.pi * np.sinh(rho) ** 2, rel_tol=1e-12)
    assert math.isclose(data.area_radius, np.sinh(rho), rel_tol=1e-12)


def test_gauss_bonnet_total_curvature():
    # int_Sigma Srho dsigma = 2 int K = 4 pi chi = 8 pi for any topological sphere
    grid = build_grid(3, 24)
    for spec, family, rho in [
        (EUC, SurfaceFamily("PerturbedSphere", 0.5), 10.0),
        (make_spec("schwarzschild_isotropic", 3, {"m": 1.0}), ROUND_AF, 8.0),
        (HYP, ROUND_AH, 3.0),
        (make_spec("ads_schwarzschild", 3, {"m": 1.0}), ROUND_AH, 4.0),
    ]:
        data = discretize(spec, family, rho, grid)
        total = integrate(data, np.asarray(data.Srho))
        assert math.isclose(float(total), 8 * math.pi, rel_tol=1e-8)


def test_first_variation_of_area():
    # d(area)/drho = int H dsigma for the coordinate-sphere family
    spec = make_spec("schwarzschild_isotropic", 3, {"m": 1.0})
    grid = build_grid(3, 24)
    rho, h = 7.0, 1e-5
    data = discretize(spec, ROUND_AF, rho, grid)
    # coordinate speed: flow vector is d x / d rho = theta, normal speed nu.x
    jet = data.jet
    speed = np.einsum(
        "Nij,Ni,Nj->N",
        np.asarray(jet.g, float),
        np.asarray(data.nu, float),
        np.asarray(data.u, float),
    )
    predicted = float(integrate(data, np.asarray(data.H, float) * speed))
    a_plus = discretize(spec, ROUND_AF, rho + h, grid).area
    a_minus = discretize(spec, ROUND_AF, rho - h, grid).area
    assert math.isclose((a_plus - a_minus) / (2 * h), predicted, rel_tol=1e-8)


def test_gauss_identity_residual_at_every_node():
    # Srho - H^2 + |A|^2 = -2 G_0(nu, nu) on AF surfaces (lam = 0 form)
    spec = make_spec("af_perturbed", 3, {"m": 1.0, "a": 0.3, "tau": 1.5})
    data = discretize(spec, SurfaceFamily("PerturbedSphere", 0.4), 12.0, build_grid(3, 16))
    srho = np.asarray(data.Srho, float)
    H = np.asarray(data.H, float)
    An2 = np.asarray(data.Anorm2, float)
    gnn = np.einsum(
        "Nij,Ni,Nj->N",
        np.asarray(data.G_lambda, float),
        np.asarray(data.nu, float),
        np.asarray(data.nu, float),
    )
    resid = srho - H * H + An2 + 2 * gnn
    assert np.max(np.abs(resid)) <= 1e-12


def test_traceless_second_fundamental_form():
    # Anorm2 = Aring^2 + H^2/(n-1) by definition of the traceless part
    data = discretize(HYP, ROUND_AH, 2.0, build_grid(3, 16))
    an2 = np.asarray(data.Anorm2, float)
    ar2 = np.asarray(data.Aring, float) ** 2
    H2 = np.asarray(data.H, float) ** 2
    assert np.allclose(an2, ar2 + H2 / 2, rtol=1e-13)


def test_perturbed_sphere_is_not_round():
    data = discretize(EUC, SurfaceFamily("PerturbedSphere", 0.5), 10.0, build_grid(3, 16))
    assert float(np.max(np.abs(data.Aring))) > 1e-4
    assert data.area_radius != pytest.approx(10.0, rel=1e-12)


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------


def test_integrate_accepts_arrays_and_callables():
    data = discretize(EUC, ROUND_AF, 3.0, build_grid(3, 16))
    ones = np.ones(data.grid.num_nodes)
    v1 = float(integrate(data, ones))
    v2 = float(integrate(data, lambda d: np.ones(d.grid.num_nodes)))
    assert math.isclose(v1, data.area, rel_tol=1e-15)
    assert math.isclose(v2, data.area, rel_tol=1e-12)


def test_integrate_rejects_nonfinite():
    data = discretize(EUC, ROUND_AF, 3.0, build_grid(3, 16))
    bad = np.ones(data.grid.num_nodes)
    bad[3] = np.nan
    with pytest.raises(NonFiniteIntegrand):
        integrate(data, bad)


def test_spectral_convergence_in_resolution():
    spec = make_spec("schwarzschild_isotropic", 3, {"m": 1.0})
    fam = SurfaceFamily("PerturbedSphere", 0.4)
    areas = [discretize(spec, fam, 9.0, build_grid(3, res)).area for res in (12, 24, 48)]
    assert abs(areas[1] - areas[2]) <= 1e-9 * areas[2]
    assert abs(areas[0] - areas[2]) < abs(areas[1] - areas[2]) + 1e-7 * areas[2]


def test_four_dimensional_surface_data():
    spec = make_spec("hyperbolic_ball", 4)
    data = discretize(spec, ROUND_AH, 2.0, build_grid(4, 12))
    # geodesic 3-sphere in H^4: H = 3 coth(rho), area = 2 pi^2 sinh^3 rho
    assert np.allclose(np.asarray(data.H, float), 3 / np.tanh(2.0), rtol=1e-11)
    assert math.isclose(data.area, 2 * math.pi**2 * np.sinh(2.0) ** 3, rel_tol=1e-11)


def test_nearly_round_diagnostics_fields():
    data = discretize(EUC, SurfaceFamily("PerturbedSphere", 0.2), 20.0, build_grid(3, 16))
    diag = nearly_round_diagnostics(data, tau=1.0)
    assert diag["max_radius_ratio"] >= 1 >= diag["min_radius_ratio"]
    assert diag["sup_Aring_scaled"] < 1.0
    assert diag["grad_Aring_checked"] is False
