"""Curvature tensors from a metric jet.

All operations are batched: a jet whose arrays carry leading batch axes
produces curvature arrays with the same leading axes.  Everything stays in
the dtype of the jet (float64 for AF charts, longdouble for ball charts).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._linalg import spd_inverse
from .errors import BadDimension
from .metric import MetricJet


@dataclass
class CurvaturePoint:
    """Curvature data at (a batch of) points.

    ``Riem[..., i, j, k, l]`` is fully covariant with the space-form
    normalization Riem_ijij / (g_ii g_jj - g_ij^2) = K, so hyperbolic space
    gives -1.  ``G_lambda`` is Ric - 1/2 [S - lambda (n-1)(n-2)] g.
    """

    point: np.ndarray
    Gamma: np.ndarray
    Riem: np.ndarray
    Ric: np.ndarray
    S: np.ndarray
    G_lambda: np.ndarray
    lam: int


def christoffel(jet: MetricJet) -> np.ndarray:
    """Gamma^k_ij = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij)."""
    ginv = spd_inverse(jet.g)
    dg = jet.dg
    bracket = (
        np.einsum("...ijl->...lij", dg)
        + np.einsum("...jil->...lij", dg)
        - np.einsum("...lij->...lij", dg)
    )
    return 0.5 * np.einsum("...kl,...lij->...kij", ginv, bracket)


def _gamma_and_partial(jet: MetricJet):
    """Christoffels and their coordinate partials d_m Gamma^k_ij."""
    ginv = spd_inverse(jet.g)
    dg = jet.dg
    ddg = jet.ddg
    bracket = (
        np.einsum("...ijl->...lij", dg)
        + np.einsum("...jil->...lij", dg)
        - dg
    )
    Gamma = 0.5 * np.einsum("...kl,...lij->...kij", ginv, bracket)
    # d_m g^{kl} = -g^{ka} (d_m g_ab) g^{bl}
    dginv = -np.einsum("...ka,...mab,...bl->...mkl", ginv, dg, ginv)
    # d_m (d_i g_jl + d_j g_il - d_l g_ij), laid out as [..., m, l, i, j]
    dbracket = (
        np.einsum("...mijl->...mlij", ddg)
        + np.einsum("...mjil->...mlij", ddg)
        - ddg
    )
    dGamma = 0.5 * (
        np.einsum("...mkl,...lij->...mkij", dginv, bracket)
        + np.einsum("...kl,...mlij->...mkij", ginv, dbracket)
    )
    return Gamma, dGamma, ginv


def riemann(jet: MetricJet) -> np.ndarray:
    """Fully covariant Riemann tensor Riem_ijkl (space-form normalization)."""
    Gamma, dGamma, _ = _gamma_and_partial(jet)
    # R^l_ijk = d_i Gamma^l_jk - d_j Gamma^l_ik + Gamma^l_ip Gamma^p_jk - Gamma^l_jp Gamma^p_ik
    Rup = (
        np.einsum("...iljk->...lijk", dGamma)
        - np.einsum("...jlik->...lijk", dGamma)
        + np.einsum("...lip,...pjk->...lijk", Gamma, Gamma)
        - np.einsum("...ljp,...pik->...lijk", Gamma, Gamma)
    )
    # Lower so that Riem_ijkl = g(R(d_k, d_l) d_j, d_i): constant curvature K
    # gives Riem_ijkl = K (g_ik g_jl - g_il g_jk).
    return np.einsum("...im,...mklj->...ijkl", jet.g, Rup)


def ricci(jet: MetricJet) -> np.ndarray:
    """Ricci tensor; hyperbolic space gives -(n-1) g."""
    Gamma, dGamma, _ = _gamma_and_partial(jet)
    Rup = (
        np.einsum("...iljk->...lijk", dGamma)
        - np.einsum("...jlik->...lijk", dGamma)
        + np.einsum("...lip,...pjk->...lijk", Gamma, Gamma)
        - np.einsum("...ljp,...pik->...lijk", Gamma, Gamma)
    )
    return np.einsum("...aajk->...jk", Rup)


def scalar(jet: MetricJet) -> np.ndarray:
    ginv = spd_inverse(jet.g)
    return np.einsum("...jk,...jk->...", ginv, ricci(jet))


def g_lambda(jet: MetricJet, lam: int) -> np.ndarray:
    """Modified Einstein tensor Ric - 1/2 [S - lam (n-1)(n-2)] g."""
    n = jet.g.shape[-1]
    Ric = ricci(jet)
    ginv = spd_inverse(jet.g)
    S = np.einsum("...jk,...jk->...", ginv, Ric)
    return Ric - 0.5 * (S - lam * (n - 1) * (n - 2))[..., None, None] * jet.g


def curvature_point(jet: MetricJet, lam: int) -> CurvaturePoint:
    """All curvature data in one pass (shares the Christoffel work)."""
    n = jet.g.shape[-1]
    Gamma, dGamma, ginv = _gamma_and_partial(jet)
    Rup = (
        np.einsum("...iljk->...lijk", dGamma)
        - np.einsum("...jlik->...lijk", dGamma)
        + np.einsum("...lip,...pjk->...lijk", Gamma, Gamma)
        - np.einsum("...ljp,...pik->...lijk", Gamma, Gamma)
    )
    Riem = np.einsum("...im,...mklj->...ijkl", jet.g, Rup)
    Ric = np.einsum("...aajk->...jk", Rup)
    S = np.einsum("...jk,...jk->...", ginv, Ric)
    Gl = Ric - 0.5 * (S - lam * (n - 1) * (n - 2))[..., None, None] * jet.g
    return CurvaturePoint(jet.point, Gamma, Riem, Ric, S, Gl, lam)


def constants(n: int):
    """(b_n, c_n, omega_{n-1}): normalizing constants of the mass integrals.

    omega_{n-1} = 2 pi^{n/2} / Gamma(n/2); b_n = 1/(2(n-1) omega);
    c_n = 1/((n-1)(n-2) omega).
    """
    if n < 3:
        raise BadDimension("constants require n >= 3")
    omega = 2 * math.pi ** (n / 2) / math.gamma(n / 2)
    b_n = 1 / (2 * (n - 1) * omega)
    c_n = 1 / ((n - 1) * (n - 2) * omega)
    return b_n, c_n, omega
