"""The 2x2 ``mu_Diag``-synthesis problem.

Given nodes ``lambda_k`` and 2x2 targets ``W_k`` with ``w12^k w21^k != 0``,
look for an analytic ``F`` with ``F(lambda_k) = W_k`` and
``mu_Diag(F(lambda)) <= 1`` on the disc.  The problem reduces to tetrablock
interpolation of ``(w11^k, w22^k, det W_k)``.  A Schur-class ``chi`` solving
the associated 2x2 Nevanlinna-Pick problem has the right diagonal and
determinant but off-diagonal entries ``b_k, c_k`` instead of ``w12^k,
w21^k``; conjugating by ``diag(e, 1)`` with ``e = exp(q)`` and ``q`` the
Lagrange polynomial through ``log(w12^k / b_k)`` fixes them without changing
``mu_Diag`` anywhere.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    HypothesisViolationError,
    InvalidInputError,
    NumericalFailureError,
    RescalingDegenerateError,
)
from .mu import mu_diag
from .numeric_core import disc_points
from .pick_np import Colligation, MatNPData, transfer
from .tetra_interp import Certificate, SearchConfig, Status, TetraProblem, solve_tetra

__all__ = [
    "MuProblem",
    "ScaledSchurFunction",
    "MuCertificate",
    "reduce_to_tetra",
    "solve_mu",
    "verify_mu",
]

OFFDIAG_TOL = 1e-12
NODE_RESIDUAL_TOL = 1e-5
MU_EXCESS_TOL = 1e-6
CLOSE_NODES = 1e-4
_MU_REL_TOL = 1e-10


@dataclass(frozen=True)
class MuProblem:
    nodes: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=np.complex128).ravel()
        W = np.asarray(self.targets, dtype=np.complex128)
        if W.shape != (nodes.size, 2, 2):
            raise InvalidInputError(f"targets must have shape ({nodes.size}, 2, 2), got {W.shape}")
        MatNPData(nodes, W)  # node and finiteness checks
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "targets", W)

    @property
    def n(self):
        return self.nodes.size


class ScaledSchurFunction:
    """``F(lam) = diag(e, 1) chi(lam) diag(e, 1)^{-1}`` with ``e = exp(q(lam))``.

    ``scale_poly`` holds the coefficients of ``q`` in increasing degree.
    """

    def __init__(self, chi, scale_poly):
        if not isinstance(chi, Colligation) or chi.m != 2:
            raise InvalidInputError("chi must be a 2x2 colligation")
        self.chi = chi
        self.scale_poly = np.asarray(scale_poly, dtype=np.complex128).ravel()

    def scale(self, lams):
        return np.exp(np.polynomial.polynomial.polyval(np.asarray(lams, dtype=np.complex128), self.scale_poly))

    def evaluate(self, lams):
        lams = np.asarray(lams, dtype=np.complex128)
        F = transfer(self.chi, lams).copy()
        e = self.scale(lams)
        F[..., 0, 1] *= e
        F[..., 1, 0] /= e
        return F

    def __call__(self, lam):
        return self.evaluate(complex(lam))


@dataclass
class MuCertificate:
    status: Status
    tetra: Certificate
    function: ScaledSchurFunction = None
    report: dict = field(default_factory=dict)


def reduce_to_tetra(problem):
    """Tetrablock data ``(w11^k, w22^k, det W_k)`` at the same nodes.

    Raises
    ------
    HypothesisViolationError
        If some ``|w12^k w21^k| < 1e-12``.
    """
    W = problem.targets
    off = W[:, 0, 1] * W[:, 1, 0]
    bad = np.flatnonzero(np.abs(off) < OFFDIAG_TOL)
    if bad.size:
        raise HypothesisViolationError(f"w12*w21 vanishes at node(s) {bad.tolist()}")
    det = W[:, 0, 0] * W[:, 1, 1] - off
    return TetraProblem(problem.nodes, list(zip(W[:, 0, 0], W[:, 1, 1], det)))


def _lagrange_coefficients(nodes, values):
    V = np.vander(nodes, nodes.size, increasing=True)
    return np.linalg.solve(V, values)


def solve_mu(problem, cfg=None):
    """Solve the ``mu_Diag``-synthesis problem through the tetrablock.

    Returns
    -------
    MuCertificate
        On Solvable, ``function`` interpolates the targets and ``report`` is
        the output of :func:`verify_mu`.  Infeasible and Unknown outcomes of
        the underlying tetrablock search pass through unchanged.

    Raises
    ------
    RescalingDegenerateError
        If a certified ``b_k`` vanishes, so ``w12^k / b_k`` is undefined.
    NumericalFailureError
        If the lifted function misses the targets by more than ``1e-5`` or
        exceeds ``mu_Diag = 1`` by more than ``1e-6``.
    """
    cfg = cfg or SearchConfig()
    tcert = solve_tetra(reduce_to_tetra(problem), cfg)
    if tcert.status is not Status.SOLVABLE:
        return MuCertificate(tcert.status, tcert)
    b = tcert.params.b
    if np.any(np.abs(b) < OFFDIAG_TOL):
        raise RescalingDegenerateError("certified b_k vanishes; cannot rescale")
    # Principal branch per node; only e(lambda_k) matters.
    q = _lagrange_coefficients(problem.nodes, np.log(problem.targets[:, 0, 1] / b))
    f = ScaledSchurFunction(tcert.colligation, q)
    report = verify_mu(problem, f)
    if not report["ok"]:
        raise NumericalFailureError("lifted mu-synthesis solution failed verification", report=report)
    return MuCertificate(Status.SOLVABLE, tcert, f, report)


def verify_mu(problem, f, grid_n=200):
    """Node residuals and ``mu_Diag`` excess of a candidate solution.

    ``node_residual`` is ``max_k ||F(lambda_k) - W_k||`` (spectral norm);
    ``mu_excess`` is the largest ``mu_Diag(F(lam)) - 1`` over ``grid_n``
    sunflower points of the disc.
    """
    F = f.evaluate(problem.nodes)
    node_res = float(max(np.linalg.norm(F[k] - problem.targets[k], 2) for k in range(problem.n)))
    pts = disc_points(grid_n, 1.0 - 1e-9)
    vals = f.evaluate(pts)
    excess = max(mu_diag(v, _MU_REL_TOL) for v in vals) - 1.0 if grid_n else -np.inf
    warnings = []
    gaps = np.abs(problem.nodes[:, None] - problem.nodes[None, :]) + np.eye(problem.n)
    if problem.n > 1 and gaps.min() < CLOSE_NODES:
        warnings.append(f"nodes closer than {CLOSE_NODES:g}; scale polynomial may be ill-conditioned")
    failures = []
    if not node_res <= NODE_RESIDUAL_TOL:
        failures.append(f"node_residual = {node_res:.3e} exceeds {NODE_RESIDUAL_TOL:.0e}")
    if not excess <= MU_EXCESS_TOL:
        failures.append(f"mu_excess = {excess:.3e} exceeds {MU_EXCESS_TOL:.0e}")
    return {
        "node_residual": node_res,
        "mu_excess": float(excess),
        "warnings": warnings,
        "failures": failures,
        "ok": not failures,
    }
