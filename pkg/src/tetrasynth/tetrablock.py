"""Geometry of the tetrablock.

The open tetrablock is the set of ``x = (x1, x2, x3)`` in ``C^3`` with
``1 - x1 z - x2 w + x3 z w != 0`` for all ``z, w`` in the closed bidisc; the
closed tetrablock uses the open bidisc instead.  This module provides the
closed-form membership tests, the distinguished boundary, the linear
fractional map ``psi`` and a brute-force grid oracle built directly on the
defining polynomial.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import ContractViolationError, InvalidInputError, PoleError
from .numeric_core import as_complex_matrix, operator_norm

__all__ = [
    "TetraPoint",
    "psi",
    "closed_margin",
    "in_closed_tetrablock",
    "in_open_tetrablock",
    "membership_oracle_grid",
    "grid_oracle_min",
    "in_distinguished_boundary",
    "distinguished_boundary_defect",
    "from_contraction",
]

INCLUSION_SLACK = 1e-12
DEGENERATE_TOL = 1e-14
POLE_TOL = 1e-14
ORACLE_THRESHOLD = 1e-9


@dataclass(frozen=True)
class TetraPoint:
    """A point ``(x1, x2, x3)`` of ``C^3``; membership is not implied."""

    x1: complex
    x2: complex
    x3: complex

    def __post_init__(self):
        for name in ("x1", "x2", "x3"):
            v = complex(getattr(self, name))
            if not (np.isfinite(v.real) and np.isfinite(v.imag)):
                raise InvalidInputError(f"{name} is not finite")
            object.__setattr__(self, name, v)

    @classmethod
    def coerce(cls, x):
        if isinstance(x, cls):
            return x
        x1, x2, x3 = x
        return cls(x1, x2, x3)

    def as_tuple(self):
        return (self.x1, self.x2, self.x3)

    def __iter__(self):
        return iter(self.as_tuple())

    @property
    def product_gap(self):
        """``x1 x2 - x3``; zero on the degenerate branch."""
        return self.x1 * self.x2 - self.x3


def psi(z, x):
    """``(x3 z - x1) / (x2 z - 1)``.

    Raises
    ------
    PoleError
        If ``|x2 z - 1| < 1e-14``.
    """
    x = TetraPoint.coerce(x)
    z = complex(z)
    den = x.x2 * z - 1.0
    if abs(den) < POLE_TOL:
        raise PoleError(f"x2*z = 1 at z = {z}")
    return (x.x3 * z - x.x1) / den


def closed_margin(x, criterion=3):
    """Signed slack of the closed-form inequality for the closed tetrablock.

    ``criterion=3`` gives ``1 - |x1|^2 - |x2 - conj(x1) x3| - |x1 x2 - x3|``;
    ``criterion=4`` swaps the roles of ``x1`` and ``x2``.  Non-negative
    margins mean the inequality holds.  Arrays of shape ``(3, ...)`` are
    accepted and evaluated elementwise.
    """
    x1, x2, x3 = (np.asarray(c, dtype=np.complex128) for c in _components(x))
    if criterion == 4:
        x1, x2 = x2, x1
    elif criterion != 3:
        raise ValueError("criterion must be 3 or 4")
    return 1.0 - np.abs(x1) ** 2 - np.abs(x2 - np.conj(x1) * x3) - np.abs(x1 * x2 - x3)


def _components(x):
    if isinstance(x, TetraPoint):
        return x.as_tuple()
    arr = np.asarray(x, dtype=np.complex128)
    return arr[0], arr[1], arr[2]


def in_closed_tetrablock(x, criterion=3):
    """Closed-form membership in the closed tetrablock.

    The inequality is tested with slack ``1e-12`` toward inclusion.  On the
    degenerate branch ``x1 x2 = x3`` the supplementary condition
    ``|x2| <= 1`` (``|x1| <= 1`` for ``criterion=4``) is also required.
    Works elementwise on arrays of shape ``(3, ...)``.
    """
    x1, x2, x3 = (np.asarray(c, dtype=np.complex128) for c in _components(x))
    ok = closed_margin((x1, x2, x3), criterion) >= -INCLUSION_SLACK
    degenerate = np.abs(x1 * x2 - x3) <= DEGENERATE_TOL
    other = x2 if criterion == 3 else x1
    ok = ok & (~degenerate | (np.abs(other) <= 1.0 + INCLUSION_SLACK))
    return bool(ok) if ok.ndim == 0 else ok


def in_open_tetrablock(x):
    """Membership in the open tetrablock via the strict closed-form test."""
    x1, x2, x3 = (np.asarray(c, dtype=np.complex128) for c in _components(x))
    strict = closed_margin((x1, x2, x3)) > INCLUSION_SLACK
    degenerate = (np.abs(x1 * x2 - x3) <= DEGENERATE_TOL) & (np.abs(x1) < 1.0) & (np.abs(x2) < 1.0)
    ok = strict | degenerate
    return bool(ok) if ok.ndim == 0 else ok


def _polar_grid(grid_n):
    radii = np.arange(grid_n, 0, -1) / grid_n
    theta = 2.0 * np.pi * np.arange(grid_n) / grid_n
    return radii, np.exp(1j * theta)


def grid_oracle_min(points, grid_n=256, stop_below=None):
    """Minimum over a polar grid of the closed disc of ``|1 - x1 z| - |x2 - x3 z|``.

    For fixed ``z`` this is the exact minimum over ``|w| <= 1`` of
    ``|1 - x1 z - x2 w + x3 z w|`` before clipping at zero.  The grid has
    radii ``k / grid_n`` (``k = 1..grid_n``), ``grid_n`` angles, plus the
    centre.  Interior ``z`` at which both ``|1 - x1 z|`` and ``|x2 - x3 z|``
    fall below ``1e-9`` score ``-inf``, since then every ``w`` is a zero.
    Rings are scanned from the unit circle inwards; a point whose
    running minimum drops below ``stop_below`` is not scanned further.

    Parameters
    ----------
    points : array_like, shape (3,) or (3, N)

    Returns
    -------
    ndarray, shape (N,) or float
    """
    pts = np.asarray(points, dtype=np.complex128)
    scalar = pts.ndim == 1
    pts = pts.reshape(3, -1)
    x1, x2, x3 = pts
    best = 1.0 - np.abs(x2)  # z = 0
    radii, unit = _polar_grid(grid_n)
    active = np.arange(x1.size)
    for r in radii:
        if stop_below is not None:
            active = active[best[active] >= stop_below]
        if active.size == 0:
            break
        z = r * unit
        a1, a2, a3 = x1[active, None], x2[active, None], x3[active, None]
        left, right = np.abs(1.0 - a1 * z), np.abs(a2 - a3 * z)
        vals = left - right
        if r < 1.0:
            # Both factors vanish: every w gives a zero at this interior z.
            vals[(left <= ORACLE_THRESHOLD) & (right <= ORACLE_THRESHOLD)] = -np.inf
        best[active] = np.minimum(best[active], vals.min(axis=1))
    return float(best[0]) if scalar else best


def membership_oracle_grid(x, grid_n=256, closed=True):
    """Definition-level membership test on a ``grid_n x grid_n`` polar grid.

    Open set: the clipped minimum ``max(0, |1 - x1 z| - |x2 - x3 z|)`` must
    exceed ``1e-9`` at every grid ``z``.  Closed set: with ``w`` restricted to
    the open disc a zero exists only when ``|1 - x1 z| < |x2 - x3 z|``, so the
    unclipped minimum must be ``>= -1e-9``.
    """
    if grid_n < 64:
        raise ValueError("grid_n must be at least 64")
    pts = np.asarray(_components(x), dtype=np.complex128)
    scalar = pts.ndim == 1
    if closed:
        m = grid_oracle_min(pts, grid_n, stop_below=-ORACLE_THRESHOLD)
        res = m >= -ORACLE_THRESHOLD
    else:
        m = grid_oracle_min(pts, grid_n, stop_below=ORACLE_THRESHOLD)
        res = np.maximum(m, 0.0) > ORACLE_THRESHOLD
    return bool(res) if scalar else res


def distinguished_boundary_defect(x):
    """``max(||x3| - 1|, |x1 - conj(x2) x3|, max(|x2| - 1, 0))``; elementwise."""
    x1, x2, x3 = (np.asarray(c, dtype=np.complex128) for c in _components(x))
    d = np.maximum(np.abs(np.abs(x3) - 1.0), np.abs(x1 - np.conj(x2) * x3))
    return np.maximum(d, np.maximum(np.abs(x2) - 1.0, 0.0))


def in_distinguished_boundary(x, tol=1e-9):
    """``x1 = conj(x2) x3``, ``|x3| = 1`` and ``|x2| <= 1``, each within ``tol``."""
    d = distinguished_boundary_defect(x)
    ok = d <= tol
    return bool(ok) if np.ndim(ok) == 0 else ok


def from_contraction(A):
    """``(a11, a22, det A)`` for a 2x2 contraction ``A``.

    Raises
    ------
    ContractViolationError
        If ``||A|| > 1 + 1e-12``.
    """
    A = as_complex_matrix(A, "A")
    if A.shape != (2, 2):
        raise InvalidInputError(f"A must be 2x2, got {A.shape}")
    nrm = operator_norm(A)
    if nrm > 1.0 + 1e-12:
        raise ContractViolationError(f"||A|| = {nrm:.6g} exceeds 1")
    return TetraPoint(A[0, 0], A[1, 1], A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0])
