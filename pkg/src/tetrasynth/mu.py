"""Structured singular value of 2x2 matrices for diagonal perturbations.

``mu_diag(A)`` is the reciprocal of the smallest ``||X||`` over diagonal
``X`` making ``I - A X`` singular.  It is computed from the scaling family
``(a11/c, a22/c, det A / c^2)``, which lies in the closed tetrablock exactly
when ``c >= mu_diag(A)``.
"""

import numpy as np

from .exceptions import InvalidInputError
from .numeric_core import as_complex_matrix, operator_norm
from .tetrablock import in_closed_tetrablock

__all__ = ["mu_diag", "mu_diag_oracle", "mu_lower_bound"]

_ZERO_TOL = 1e-14
_MAX_BISECT = 200


def _as_2x2(A):
    A = as_complex_matrix(A, "A")
    if A.shape != (2, 2):
        raise InvalidInputError(f"expected a 2x2 matrix, got {A.shape}")
    return A


def _balanced_norm(A):
    # Diagonal similarity leaves mu unchanged; equalizing |a12| and |a21|
    # keeps the upper bound sane for badly scaled inputs.
    b, c = abs(A[0, 1]), abs(A[1, 0])
    if b > 0.0 and c > 0.0:
        r = np.exp(0.5 * (np.log(c) - np.log(b)))
        A = np.array([[A[0, 0], A[0, 1] * r], [A[1, 0] / r, A[1, 1]]])
    return operator_norm(A)


def mu_diag(A, rel_tol=1e-9):
    """Exact ``mu_Diag`` of a 2x2 matrix by bisection on tetrablock membership.

    Parameters
    ----------
    A : array_like, shape (2, 2)
    rel_tol : float
        Relative width of the final bracket, in ``(0, 1e-2]``.

    Returns
    -------
    float
        The upper end of the final bracket, so ``A / result`` always maps
        into the closed tetrablock.  Exactly ``0.0`` when
        ``a11 = a22 = det A = 0``.
    """
    if not (0.0 < rel_tol <= 1e-2):
        raise InvalidInputError("rel_tol must lie in (0, 1e-2]")
    A = _as_2x2(A)
    a, d = A[0, 0], A[1, 1]
    det = a * d - A[0, 1] * A[1, 0]
    if abs(a) <= _ZERO_TOL and abs(d) <= _ZERO_TOL and abs(det) <= _ZERO_TOL:
        return 0.0

    def inside(c):
        return in_closed_tetrablock((a / c, d / c, det / c**2))

    lo, hi = 1e-12, max(_balanced_norm(A), 1e-12)
    if inside(lo):
        return lo
    # mu <= ||D A D^-1||; rounding can put the bound itself a hair outside.
    while not inside(hi):
        hi *= 1.0 + 1e-12 + rel_tol
    for _ in range(_MAX_BISECT):
        if hi - lo <= rel_tol * hi:
            break
        # Geometric steps while the bracket spans orders of magnitude.
        mid = np.sqrt(lo * hi) if hi > 4.0 * lo else 0.5 * (lo + hi)
        if inside(mid):
            hi = mid
        else:
            lo = mid
    return float(hi)


def mu_lower_bound(A):
    """``max(|a11|, |a22|, spectral radius)``; each is attained by some diagonal ``X``."""
    A = _as_2x2(A)
    rho = float(np.max(np.abs(np.linalg.eigvals(A))))
    return max(abs(A[0, 0]), abs(A[1, 1]), rho)


def _one_sided_min(p, q, s, z):
    # Solves 1 - p z - q w + s z w = 0 for w on the given z grid:
    # w = (1 - p z) / (q - s z).
    num = 1.0 - p * z
    den = q - s * z
    with np.errstate(divide="ignore", invalid="ignore"):
        w = num / den
        resid = np.abs(1.0 - p * z - q * w + s * z * w)
    cost = np.maximum(np.abs(z), np.abs(w))
    ok = np.isfinite(cost) & (np.abs(den) > 0) & (resid < 1e-6)
    return float(cost[ok].min()) if np.any(ok) else np.inf


def mu_diag_oracle(A, grid_n=512):
    """Brute-force ``mu_Diag`` over ``X = diag(z, w)`` on polar grids.

    ``z`` runs over a ``grid_n x grid_n`` polar grid of radius
    ``2 / mu_lower_bound(A)``; for each ``z`` the singular ``w`` is solved
    from ``det(I - A X) = 0`` and kept when the determinant residual is
    below ``1e-6``.  The same is done with the roles of ``z`` and ``w``
    swapped.  Returns the reciprocal of the smallest ``max(|z|, |w|)`` found,
    or ``0.0`` when no singular ``X`` exists.
    """
    if grid_n < 64:
        raise ValueError("grid_n must be at least 64")
    A = _as_2x2(A)
    a, d = A[0, 0], A[1, 1]
    det = a * d - A[0, 1] * A[1, 0]
    low = mu_lower_bound(A)
    if low <= _ZERO_TOL:
        return 0.0
    radius = 2.0 / low
    r = radius * np.arange(1, grid_n + 1) / grid_n
    theta = 2.0 * np.pi * np.arange(grid_n) / grid_n
    z = (r[:, None] * np.exp(1j * theta)[None, :]).ravel()
    z = np.concatenate([[0.0], z])
    best = min(_one_sided_min(a, d, det, z), _one_sided_min(d, a, det, z))
    if not np.isfinite(best) or best == 0.0:
        return 0.0
    return 1.0 / best
