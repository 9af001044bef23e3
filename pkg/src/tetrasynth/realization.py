"""Analytic maps from the disc into the closed tetrablock and their 2x2 lifts.

A map ``x = (x1, x2, x3)`` into the closed tetrablock is the diagonal and
determinant of a 2x2 Schur-class function ``F``.  Going forward we read
``x`` off a unitary colligation; going back, ``canonical_lift`` builds the
normalized ``F`` whose lower-left entry is the outer square root of
``x1 x2 - x3``.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidInputError
from .numeric_core import LOG_FLOOR, OuterFunction, circle_points, disc_points
from .pick_np import Colligation, transfer
from .tetrablock import TetraPoint, distinguished_boundary_defect

__all__ = [
    "TetraFunction",
    "IdentityWitness",
    "LiftedFunction",
    "tetra_from_colligation",
    "canonical_lift",
    "identity_witness",
    "verify_identity",
    "boundary_einner_check",
    "EINNER_RADIUS",
]

EINNER_RADIUS = 1.0 - 1e-8
_ZERO_GAP = 1e-13
_MAX_QUAD = 1 << 18


class TetraFunction:
    """Analytic ``x: D -> C^3`` backed by a 2x2 colligation or three evaluators.

    Parameters
    ----------
    x1, x2, x3 : callable, optional
        Vectorized scalar evaluators (complex array in, complex array out).
    colligation : Colligation, optional
        When given, ``x = (F11, F22, det F)`` with ``F`` its transfer function.
    """

    def __init__(self, x1=None, x2=None, x3=None, colligation=None):
        if colligation is not None:
            if colligation.m != 2:
                raise InvalidInputError("tetra functions need a colligation with m = 2")
        elif x1 is None or x2 is None or x3 is None:
            raise InvalidInputError("give either a colligation or all three evaluators")
        self.colligation = colligation
        self._fns = (x1, x2, x3)

    @property
    def rational(self):
        return self.colligation is not None

    def evaluate(self, lams):
        """Array of shape ``(3,) + lams.shape``."""
        lams = np.asarray(lams, dtype=np.complex128)
        if self.colligation is not None:
            F = transfer(self.colligation, lams)
            det = F[..., 0, 0] * F[..., 1, 1] - F[..., 0, 1] * F[..., 1, 0]
            return np.stack([F[..., 0, 0], F[..., 1, 1], det])
        return np.stack([np.broadcast_to(np.asarray(f(lams), dtype=np.complex128), lams.shape)
                         for f in self._fns])

    def __call__(self, lam):
        x1, x2, x3 = self.evaluate(complex(lam))
        return TetraPoint(complex(x1), complex(x2), complex(x3))

    def gap(self, lams):
        """``x1 x2 - x3`` at ``lams``."""
        x1, x2, x3 = self.evaluate(lams)
        return x1 * x2 - x3


def tetra_from_colligation(col):
    """``lam -> (F11, F22, det F)`` for ``F`` the transfer function of ``col``."""
    if not isinstance(col, Colligation):
        raise InvalidInputError("expected a Colligation")
    return TetraFunction(colligation=col)


@dataclass(frozen=True)
class IdentityWitness:
    gamma: complex
    eta: np.ndarray


class LiftedFunction:
    """The normalized 2x2 lift ``F`` of a tetra function.

    Off the degenerate branch ``F = [[x1, g / h], [h, x2]]`` with
    ``g = x1 x2 - x3`` and ``h`` the outer function with ``|h|^2 = |g|`` on
    the circle and ``h(0) > 0``.  On the degenerate branch
    ``F = diag(x1, x2)``.
    """

    def __init__(self, x, outer=None):
        self.x = x
        self.outer = outer

    @property
    def diagonal(self):
        return self.outer is None

    @property
    def quad_m(self):
        return None if self.outer is None else self.outer.m

    def evaluate(self, lams):
        """Array of shape ``lams.shape + (2, 2)``."""
        lams = np.asarray(lams, dtype=np.complex128)
        x1, x2, x3 = self.x.evaluate(lams)
        F = np.zeros(lams.shape + (2, 2), dtype=np.complex128)
        F[..., 0, 0] = x1
        F[..., 1, 1] = x2
        if self.outer is not None:
            h = self.outer(lams)
            F[..., 1, 0] = h
            F[..., 0, 1] = (x1 * x2 - x3) / h
        return F

    def __call__(self, lam):
        return self.evaluate(complex(lam))


def _boundary_half_log(x, m):
    zeta = circle_points(m)
    g = x.gap(zeta)
    with np.errstate(divide="ignore"):
        u = 0.5 * np.log(np.abs(g))
    return np.maximum(u, 0.5 * LOG_FLOOR)


def canonical_lift(x, quad_m=4096, stab_tol=1e-10):
    """Normalized Schur-class lift of a tetra function.

    Parameters
    ----------
    x : TetraFunction
        Must be evaluable on the unit circle (true for colligation-backed ``x``
        whose ``A`` has no unimodular eigenvalue).
    quad_m : int
        Initial number of boundary samples, at least 1024.  It is doubled
        (up to ``2**18``) until the outer factor changes by less than
        ``stab_tol`` on probe points.

    Returns
    -------
    LiftedFunction
    """
    if quad_m < 1024:
        raise InvalidInputError("quad_m must be at least 1024")
    probes = disc_points(64, 0.95)
    if np.max(np.abs(x.gap(probes))) < _ZERO_GAP:
        return LiftedFunction(x)
    check = np.concatenate([probes, circle_points(16, 0.999, 0.5)])
    m = int(quad_m)
    outer = OuterFunction(_boundary_half_log(x, m))
    while m < _MAX_QUAD:
        finer = OuterFunction(_boundary_half_log(x, 2 * m))
        a, b = outer(check), finer(check)
        if np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)) <= stab_tol:
            break
        outer, m = finer, 2 * m
    return LiftedFunction(x, outer)


def identity_witness(F, lam, z):
    """``gamma = F21 / (1 - F22 z)`` and ``eta = [1, z gamma]`` at ``(lam, z)``."""
    Fl = np.asarray(F(lam)).reshape(2, 2)
    gamma = Fl[1, 0] / (1.0 - Fl[1, 1] * z)
    return IdentityWitness(gamma=complex(gamma), eta=np.array([1.0, z * gamma], dtype=np.complex128))


def verify_identity(F, probes, return_skipped=False):
    """Largest residual of the reproducing identity over ``probes``.

    For each probe ``(mu, w, lam, z)`` compares
    ``1 - conj(Psi(w, x(mu))) Psi(z, x(lam))`` with
    ``(1 - conj(w) z) conj(gamma(mu, w)) gamma(lam, z)
    + eta(mu, w)^* (I - F(mu)^* F(lam)) eta(lam, z)``, where
    ``x = (F11, F22, det F)``.  Probes with ``|1 - F22 z| < 1e-10`` at either
    end are skipped (counted, and reported through a warning).
    """
    worst = 0.0
    skipped = 0
    for mu, w, lam, z in probes:
        Fm = np.asarray(F(mu)).reshape(2, 2)
        Fl = np.asarray(F(lam)).reshape(2, 2)
        dm, dl = 1.0 - Fm[1, 1] * w, 1.0 - Fl[1, 1] * z
        if abs(dm) < 1e-10 or abs(dl) < 1e-10:
            skipped += 1
            continue
        xm = (Fm[0, 0], Fm[1, 1], np.linalg.det(Fm))
        xl = (Fl[0, 0], Fl[1, 1], np.linalg.det(Fl))
        psi_m = (xm[2] * w - xm[0]) / (xm[1] * w - 1.0)
        psi_l = (xl[2] * z - xl[0]) / (xl[1] * z - 1.0)
        gm, gl = Fm[1, 0] / dm, Fl[1, 0] / dl
        em = np.array([1.0, w * gm])
        el = np.array([1.0, z * gl])
        lhs = 1.0 - np.conj(psi_m) * psi_l
        rhs = (1.0 - np.conj(w) * z) * np.conj(gm) * gl + em.conj() @ (np.eye(2) - Fm.conj().T @ Fl) @ el
        worst = max(worst, float(abs(lhs - rhs)))
    if skipped:
        warnings.warn(f"{skipped} probe(s) skipped at 1 - F22 z = 0", RuntimeWarning, stacklevel=2)
    return (worst, skipped) if return_skipped else worst


def boundary_einner_check(x, n_samples=256, radius=EINNER_RADIUS, return_skipped=False):
    """Largest distance from the distinguished boundary near the unit circle.

    Samples ``x`` at ``radius * exp(2 pi i (j + 1/2) / n_samples)`` and takes
    the maximum of ``||x3| - 1|`` and ``|x1 - conj(x2) x3|``.  Samples where
    the resolvent is singular are skipped.
    """
    if not x.rational:
        raise InvalidInputError("boundary check needs a colligation-backed tetra function")
    pts = circle_points(n_samples, radius, 0.5)
    col = x.colligation
    vals, skipped = [], 0
    if col.dimH:
        smin = np.linalg.svd(np.eye(col.dimH)[None] - pts[:, None, None] * col.A[None], compute_uv=False)[:, -1]
        keep = smin > 1e-12
        skipped = int(np.sum(~keep))
        pts = pts[keep]
    if pts.size:
        vals = distinguished_boundary_defect(x.evaluate(pts))
    if skipped:
        warnings.warn(f"{skipped} boundary sample(s) skipped at resolvent poles", RuntimeWarning, stacklevel=2)
    worst = float(np.max(vals)) if len(vals) else 0.0
    return (worst, skipped) if return_skipped else worst
