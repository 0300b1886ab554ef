"""Reference isometric embeddings of round surfaces.

A surface whose induced metric is (numerically) a round sphere metric can be
embedded isometrically as a centered sphere in Euclidean space or as a
geodesic sphere about the origin of hyperbolic space.  Both reference
embeddings have closed-form mean and principal curvatures; general Weyl
embeddings of non-round metrics are out of scope and raise ``NotRound``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotRound
from .surface import SurfaceData, _direction_jet

EUCLIDEAN = "Euclidean"
HYPERBOLIC = "Hyperbolic"

#: Default relative tolerance on the roundness defect of the induced metric.
DEFAULT_ROUND_TOL = 1e-8


@dataclass(frozen=True)
class RoundEmbedding:
    """Closed-form data of a round sphere embedded in a space form.

    ``radius`` is the Euclidean radius R for Euclidean targets and the
    hyperbolic radius rho* (with sinh rho* equal to the area radius) for
    hyperbolic targets.
    """

    target: str
    radius: float
    H0: float
    kappa0: float
    roundness_defect: float


def roundness_defect(data: SurfaceData) -> float:
    """Sup-norm deviation of sigma from the round metric of the area radius.

    The grid parametrizes the surface through the unit sphere, so the round
    comparison metric in these coordinates is area_radius^2 times the Gram
    matrix of the unit-direction tangents.
    """
    dtype = data.sigma.dtype
    _, du, _ = _direction_jet(data.grid, dtype)
    gram = np.einsum("Nai,Nbi->Nab", du, du)
    R2 = np.dtype(dtype).type(data.area_radius) ** 2
    return float(np.max(np.abs(data.sigma - R2 * gram)))


def round_embed(
    data: SurfaceData, target: str, tol_round: float = DEFAULT_ROUND_TOL
) -> RoundEmbedding:
    """Embed a round surface as a centered sphere of the same area radius."""
    if target not in (EUCLIDEAN, HYPERBOLIC):
        raise ValueError(f"unknown embedding target {target!r}")
    n = data.n
    defect = roundness_defect(data)
    R_a = data.area_radius
    if not defect <= tol_round * R_a**2:
        raise NotRound(
            f"induced metric deviates from round by {defect / R_a**2:.3e} "
            f"(relative; tolerance {tol_round:.1e}); general Weyl embeddings "
            "are not supported"
        )
    if target == EUCLIDEAN:
        return RoundEmbedding(
            target=EUCLIDEAN,
            radius=R_a,
            H0=(n - 1) / R_a,
            kappa0=1.0 / R_a,
            roundness_defect=defect,
        )
    rho_star = float(np.arcsinh(np.longdouble(R_a)))
    kappa0 = float(np.cosh(np.longdouble(rho_star)) / np.longdouble(R_a))
    return RoundEmbedding(
        target=HYPERBOLIC,
        radius=rho_star,
        H0=(n - 1) * kappa0,
        kappa0=kappa0,
        roundness_defect=defect,
    )


def hyperboloid_position(theta, rho_star):
    """Position vector (cosh rho*, sinh rho* theta) on the unit hyperboloid.

    ``theta`` is a unit vector (or batch of unit vectors, last axis n); the
    result has one extra leading component and satisfies
    (x^0)^2 - sum (x^i)^2 = 1.
    """
    theta = np.asarray(theta)
    rs = np.asarray(rho_star, dtype=theta.dtype)
    x0 = np.broadcast_to(np.cosh(rs), theta.shape[:-1] + (1,))
    return np.concatenate([x0, np.sinh(rs) * theta], axis=-1)
