"""Matricial Nevanlinna-Pick interpolation with unitary colligations.

Data ``lambda_k -> W_k`` (``k = 1..n``, square ``m x m`` targets) are
solvable by a Schur-class function exactly when the block Pick matrix
``[(I - W_k^* W_l) / (1 - conj(lambda_k) lambda_l)]`` is positive
semidefinite.  A solution is produced in transfer-function form
``F(lam) = D + C lam (I - A lam)^{-1} B`` from a unitary ``[[A, B], [C, D]]``
obtained by extending the "lurking isometry" hidden in the Pick identity.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    BoundaryPoleError,
    InfeasibleError,
    InvalidInputError,
    NotIsometricError,
    NumericalFailureError,
)
from .numeric_core import (
    as_complex_matrix,
    extend_isometry_to_unitary,
    haar_unitary,
    hermitian_min_eigenvalue,
    hermitian_part,
)

__all__ = [
    "MatNPData",
    "Colligation",
    "PickReport",
    "pick_matrix",
    "check_solvable",
    "solve_np",
    "eval_schur",
    "transfer",
    "random_colligation",
    "UNITARY_TOL",
    "PSD_TOL",
]

UNITARY_TOL = 1e-9
PSD_TOL = 1e-7
NODE_SEPARATION = 1e-10
INTERP_TOL = 1e-6


@dataclass(frozen=True)
class MatNPData:
    """Interpolation data ``nodes[k] -> targets[k]``.

    ``targets`` has shape ``(n, m, m)`` with ``m`` in ``{1, 2}``; scalars and
    lists of matrices are accepted and reshaped.
    """

    nodes: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=np.complex128).ravel()
        targets = np.asarray(self.targets, dtype=np.complex128)
        if targets.ndim == 1:
            targets = targets.reshape(-1, 1, 1)
        if nodes.size == 0:
            raise InvalidInputError("need at least one node")
        if targets.ndim != 3 or targets.shape[0] != nodes.size or targets.shape[1] != targets.shape[2]:
            raise InvalidInputError(f"targets shape {targets.shape} does not match {nodes.size} nodes")
        if targets.shape[1] not in (1, 2):
            raise InvalidInputError("target order must be 1 or 2")
        if not (np.all(np.isfinite(nodes)) and np.all(np.isfinite(targets))):
            raise InvalidInputError("nodes and targets must be finite")
        if np.any(np.abs(nodes) > 1.0 - NODE_SEPARATION):
            raise InvalidInputError("nodes must lie in the open unit disc")
        gaps = np.abs(nodes[:, None] - nodes[None, :]) + np.eye(nodes.size)
        if np.any(gaps < NODE_SEPARATION):
            raise InvalidInputError("nodes must be pairwise distinct")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "targets", targets)

    @property
    def n(self):
        return self.nodes.size

    @property
    def m(self):
        return self.targets.shape[1]


@dataclass(frozen=True)
class Colligation:
    """Unitary block matrix ``[[A, B], [C, D]]`` on ``C^dimH (+) C^m``."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    unitarity_residual: float = field(default=None, compare=False)

    def __post_init__(self):
        D = as_complex_matrix(self.D, "D")
        m = D.shape[0]
        if D.shape != (m, m):
            raise InvalidInputError("D must be square")
        h = np.asarray(self.A).shape[0] if np.size(self.A) else 0
        A = np.asarray(self.A, dtype=np.complex128).reshape(h, h)
        B = np.asarray(self.B, dtype=np.complex128).reshape(h, m)
        C = np.asarray(self.C, dtype=np.complex128).reshape(m, h)
        for name, blk in (("A", A), ("B", B), ("C", C)):
            if not np.all(np.isfinite(blk)):
                raise InvalidInputError(f"{name} has non-finite entries")
            blk.setflags(write=False)
        D.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "D", D)
        U = self.matrix
        res = float(np.linalg.norm(U.conj().T @ U - np.eye(U.shape[0]), 2))
        object.__setattr__(self, "unitarity_residual", res)

    @classmethod
    def from_unitary(cls, U, dimH):
        U = np.asarray(U, dtype=np.complex128)
        return cls(U[:dimH, :dimH], U[:dimH, dimH:], U[dimH:, :dimH], U[dimH:, dimH:])

    @classmethod
    def constant(cls, D):
        D = as_complex_matrix(D, "D")
        m = D.shape[0]
        return cls(np.zeros((0, 0)), np.zeros((0, m)), np.zeros((m, 0)), D)

    @property
    def dimH(self):
        return self.A.shape[0]

    @property
    def m(self):
        return self.D.shape[0]

    @property
    def matrix(self):
        return np.block([[self.A, self.B], [self.C, self.D]])

    def __call__(self, lam):
        return eval_schur(self, lam)


@dataclass(frozen=True)
class PickReport:
    matrix: np.ndarray
    min_eig: float
    solvable: bool
    tol: float


def pick_matrix(data):
    """Block Pick matrix of order ``n * m``; block ``(k, l)`` is
    ``(I - W_k^* W_l) / (1 - conj(lambda_k) lambda_l)``."""
    if not isinstance(data, MatNPData):
        data = MatNPData(*data)
    lam, W = data.nodes, data.targets
    n, m = data.n, data.m
    kern = 1.0 / (1.0 - np.conj(lam)[:, None] * lam[None, :])
    WW = np.einsum("kji,ljh->klih", W.conj(), W)  # W_k^* W_l
    blocks = (np.eye(m)[None, None] - WW) * kern[:, :, None, None]
    P = blocks.transpose(0, 2, 1, 3).reshape(n * m, n * m)
    return hermitian_part(P)


def check_solvable(data, tol=PSD_TOL):
    P = pick_matrix(data)
    lo = hermitian_min_eigenvalue(P)
    return PickReport(matrix=P, min_eig=lo, solvable=lo >= -tol, tol=tol)


def transfer(col, lams):
    """Vectorized ``D + C lam (I - A lam)^{-1} B`` for an array of points.

    Returns an array of shape ``lams.shape + (m, m)``.
    """
    lams = np.asarray(lams, dtype=np.complex128)
    flat = lams.ravel()
    h, m = col.dimH, col.m
    if h == 0:
        out = np.broadcast_to(col.D, (flat.size, m, m)).copy()
        return out.reshape(lams.shape + (m, m))
    eye = np.eye(h)
    M = eye[None] - flat[:, None, None] * col.A[None]
    rhs = np.broadcast_to(col.B, (flat.size, h, m))
    try:
        X = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError as exc:
        raise BoundaryPoleError("resolvent is singular at a requested point") from exc
    out = col.D[None] + flat[:, None, None] * (col.C[None] @ X)
    if not np.all(np.isfinite(out)):
        raise BoundaryPoleError("resolvent is singular at a requested point")
    return out.reshape(lams.shape + (m, m))


def eval_schur(col, lam):
    """``F(lam) = D + C lam (I - A lam)^{-1} B`` for a single ``|lam| <= 1``."""
    lam = complex(lam)
    if abs(lam) > 1.0 + 1e-12:
        raise InvalidInputError("lam must lie in the closed unit disc")
    if col.dimH and np.linalg.svd(np.eye(col.dimH) - lam * col.A, compute_uv=False)[-1] < 1e-13:
        raise BoundaryPoleError(f"resolvent is singular at lam = {lam}")
    return transfer(col, lam)


def _shrink_factor(data, min_eig, tol):
    # Pick(t W) = (1 - t^2) (K (x) I) + t^2 Pick(W), K the Szego kernel matrix,
    # so a shrink of size s = 1 - t^2 lifts the spectrum by about s * lambda_min(K).
    lam = data.nodes
    K = 1.0 / (1.0 - np.conj(lam)[:, None] * lam[None, :])
    kappa = hermitian_min_eigenvalue(hermitian_part(K))
    deficit = max(-min_eig, 0.0)
    s = 0.0 if min_eig >= tol else 2e-9
    if deficit > 0.0:
        s = max(s, 2.0 * deficit / (kappa + deficit))
    return np.sqrt(max(1.0 - s, 0.0))


def solve_np(data, tol=PSD_TOL):
    """Construct a unitary colligation whose transfer function interpolates the data.

    Parameters
    ----------
    data : MatNPData
    tol : float
        Pick matrices with ``min_eig >= -tol`` are treated as solvable.

    Returns
    -------
    Colligation
        ``dimH = n * m``.

    Raises
    ------
    InfeasibleError
        If the Pick matrix has an eigenvalue below ``-tol``.
    NumericalFailureError
        If the isometry step or the final interpolation check fails.

    Notes
    -----
    With ``P = G^* G`` and ``g_l`` the ``l``-th block column of ``G`` the Pick
    identity says ``[lam_l g_l; I]`` and ``[g_l; W_l]`` have the same Gram
    matrix.  A unitary ``U`` sending the first family to the second satisfies
    ``A lam g + B = g`` and ``C lam g + D = W``, hence
    ``W = D + C lam (I - A lam)^{-1} B``.  When ``P`` is singular or slightly
    indefinite the targets are shrunk toward zero just enough to restore
    positivity before factoring.
    """
    if not isinstance(data, MatNPData):
        data = MatNPData(*data)
    report = check_solvable(data, tol)
    if not report.solvable:
        raise InfeasibleError(f"Pick matrix has min eigenvalue {report.min_eig:.3e} < -{tol:.1e}")
    t = _shrink_factor(data, report.min_eig, tol)
    work = data if t == 1.0 else MatNPData(data.nodes, t * data.targets)
    P = pick_matrix(work)
    evals, V = np.linalg.eigh(P)
    G = np.sqrt(np.clip(evals, 0.0, None))[:, None] * V.conj().T
    n, m = data.n, data.m
    N = n * m
    lam_diag = np.repeat(work.nodes, m)
    E = np.tile(np.eye(m), (1, n))
    Wrow = work.targets.transpose(1, 0, 2).reshape(m, N)
    dom = np.vstack([G * lam_diag[None, :], E])
    rng_ = np.vstack([G, Wrow])
    scale = max(1.0, float(np.max(np.abs(P))))
    try:
        U = extend_isometry_to_unitary(dom, rng_, tol=100 * tol * scale)
    except NotIsometricError as exc:
        raise NumericalFailureError(f"lurking isometry failed: {exc}") from exc
    col = Colligation.from_unitary(U, N)
    resid = float(np.max(np.abs(transfer(col, data.nodes) - data.targets)))
    if resid > INTERP_TOL or col.unitarity_residual > 1e-8:
        raise NumericalFailureError(
            f"interpolation residual {resid:.2e}, unitarity residual {col.unitarity_residual:.2e}",
            report={"interpolation_residual": resid, "unitarity_residual": col.unitarity_residual},
        )
    return col


def random_colligation(dimH, m, rng):
    """Colligation from a Haar-random unitary of order ``dimH + m``."""
    return Colligation.from_unitary(haar_unitary(dimH + m, rng), dimH)
