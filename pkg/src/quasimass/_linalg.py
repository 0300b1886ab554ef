"""Small batched linear-algebra helpers.

Everything here works in the dtype of its inputs.  The point of hand-rolled
routines is ``np.longdouble`` support: ``numpy.linalg`` and ``math.fsum`` are
double-precision only, while the asymptotically hyperbolic charts need the
extra mantissa bits.  Matrices are tiny (n <= 6), so plain loops over the
matrix indices vectorized over the batch are both clear and fast.
"""

import numpy as np

from .errors import SingularMetric

CHOLESKY_PIVOT_MIN = 1e-13


def cholesky(a):
    """Batched Cholesky factor L (lower) of SPD matrices shaped (..., n, n).

    Raises SingularMetric if any pivot drops below the SPD cutoff.
    """
    a = np.asarray(a)
    n = a.shape[-1]
    L = np.zeros_like(a)
    for j in range(n):
        d = a[..., j, j] - np.sum(L[..., j, :j] ** 2, axis=-1)
        if np.any(d < CHOLESKY_PIVOT_MIN):
            raise SingularMetric("Cholesky pivot below 1e-13: matrix not SPD")
        d = np.sqrt(d)
        L[..., j, j] = d
        for i in range(j + 1, n):
            L[..., i, j] = (
                a[..., i, j] - np.sum(L[..., i, :j] * L[..., j, :j], axis=-1)
            ) / d
    return L


def solve_lower(L, b):
    """Solve L y = b for batched lower-triangular L; b shaped (..., n) or (..., n, m)."""
    vec = b.ndim == L.ndim - 1
    if vec:
        b = b[..., None]
    n = L.shape[-1]
    y = np.zeros_like(b)
    for i in range(n):
        acc = b[..., i, :] - np.einsum("...k,...km->...m", L[..., i, :i], y[..., :i, :])
        y[..., i, :] = acc / L[..., i, i][..., None]
    return y[..., 0] if vec else y


def solve_upper_t(L, y):
    """Solve L^T x = y (L lower triangular), batched."""
    vec = y.ndim == L.ndim - 1
    if vec:
        y = y[..., None]
    n = L.shape[-1]
    x = np.zeros_like(y)
    for i in range(n - 1, -1, -1):
        acc = y[..., i, :] - np.einsum(
            "...k,...km->...m", L[..., i + 1 :, i], x[..., i + 1 :, :]
        )
        x[..., i, :] = acc / L[..., i, i][..., None]
    return x[..., 0] if vec else x


def spd_solve(a, b):
    """Solve a x = b for batched SPD a."""
    L = cholesky(a)
    return solve_upper_t(L, solve_lower(L, b))


def spd_inverse(a):
    a = np.asarray(a)
    n = a.shape[-1]
    eye = np.zeros_like(a)
    for i in range(n):
        eye[..., i, i] = 1
    return spd_solve(a, eye)


def spd_det(a):
    L = cholesky(a)
    n = a.shape[-1]
    d = L[..., 0, 0]
    for i in range(1, n):
        d = d * L[..., i, i]
    return d * d


def gen_eig_sym2(A, S):
    """Generalized eigenvalues of the symmetric 2x2 pencil (A, S), S SPD.

    Closed form from det(A - k S) = 0; works in any float dtype.  Returns
    eigenvalues shaped (..., 2) in no particular order.
    """
    a = S[..., 0, 0] * S[..., 1, 1] - S[..., 0, 1] ** 2
    b = -(
        A[..., 0, 0] * S[..., 1, 1]
        + A[..., 1, 1] * S[..., 0, 0]
        - 2 * A[..., 0, 1] * S[..., 0, 1]
    )
    c = A[..., 0, 0] * A[..., 1, 1] - A[..., 0, 1] ** 2
    disc = np.sqrt(np.maximum(b * b - 4 * a * c, 0))
    # stable quadratic roots: avoid cancellation in -b +/- disc
    q = -(b + np.copysign(disc, b)) / 2
    k1 = q / a
    with np.errstate(divide="ignore", invalid="ignore"):
        k2 = np.where(q != 0, c / q, -b / a - k1)
    return np.stack([k1, k2], axis=-1)


def null_covector(T):
    """Covector annihilating n-1 batched tangent vectors T shaped (..., n-1, n).

    The generalized cross product: lambda_j = (-1)^j det(T with column j
    removed).  Explicit cofactor formulas for n = 3, 4 keep the computation in
    the input dtype; larger n (used only in double-precision charts) falls
    back to numpy determinants.
    """
    n = T.shape[-1]
    if n == 3:
        u, v = T[..., 0, :], T[..., 1, :]
        return np.stack(
            [
                u[..., 1] * v[..., 2] - u[..., 2] * v[..., 1],
                u[..., 2] * v[..., 0] - u[..., 0] * v[..., 2],
                u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0],
            ],
            axis=-1,
        )
    cols = np.arange(n)
    out = np.zeros(T.shape[:-2] + (n,), dtype=T.dtype)
    for j in range(n):
        keep = cols[cols != j]
        minor = T[..., :, keep]
        if n == 4:
            d = _det3(minor)
        else:
            d = np.linalg.det(minor.astype(np.float64)).astype(T.dtype)
        out[..., j] = d if j % 2 == 0 else -d
    return out


def _det3(m):
    return (
        m[..., 0, 0] * (m[..., 1, 1] * m[..., 2, 2] - m[..., 1, 2] * m[..., 2, 1])
        - m[..., 0, 1] * (m[..., 1, 0] * m[..., 2, 2] - m[..., 1, 2] * m[..., 2, 0])
        + m[..., 0, 2] * (m[..., 1, 0] * m[..., 2, 1] - m[..., 1, 1] * m[..., 2, 0])
    )


def compensated_sum(values):
    """Kahan-compensated sum over the leading axis, in a fixed order.

    The array is split into lanes summed in lockstep (vectorized Kahan down
    the rows), then the lane totals are combined with a final scalar Kahan
    pass.  The order never depends on thread count, so results are
    bit-reproducible.
    """
    v = np.asarray(values)
    if v.ndim == 1:
        v = v[:, None]
        squeeze = True
    else:
        squeeze = False
    lanes = min(64, v.shape[0])
    pad = (-v.shape[0]) % lanes
    if pad:
        v = np.concatenate([v, np.zeros((pad,) + v.shape[1:], dtype=v.dtype)])
    v = v.reshape(lanes, -1, *v.shape[1:])
    s = np.zeros(v.shape[0:1] + v.shape[2:], dtype=v.dtype)
    c = np.zeros_like(s)
    for i in range(v.shape[1]):
        y = v[:, i] - c
        t = s + y
        c = (t - s) - y
        s = t
    # final scalar Kahan pass over the lane totals
    total = np.zeros(s.shape[1:], dtype=s.dtype)
    comp = np.zeros_like(total)
    for i in range(s.shape[0]):
        y = s[i] - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total[0] if squeeze else total
