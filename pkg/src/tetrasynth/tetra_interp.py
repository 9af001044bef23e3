"""Interpolation from the disc into the closed tetrablock.

Data ``lambda_k -> (x1^k, x2^k, x3^k)`` are solvable exactly when there are
``b_k, c_k`` with ``b_k c_k = x1^k x2^k - x3^k`` such that the 2x2
Nevanlinna-Pick problem ``lambda_k -> [[x1^k, b_k], [c_k, x2^k]]`` is
solvable.  The search over ``(b, c)`` is nonconvex; ``solve_tetra`` runs a
seeded multi-start Nelder-Mead search on the smallest Pick eigenvalue,
sharpens promising starts with a trust-region SDP step, and certifies any
hit by building and checking an explicit interpolant.  Failure to find
parameters is reported as ``Unknown``, never as infeasibility.
"""

import enum
import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import cvxopt
import numpy as np
from scipy.optimize import minimize

from .exceptions import InvalidInputError, NumericalFailureError, TetraSynthError
from .numeric_core import circle_points, disc_points, hermitian_min_eigenvalue
from .pick_np import MatNPData, NODE_SEPARATION, check_solvable, solve_np, transfer
from .realization import EINNER_RADIUS, tetra_from_colligation
from .tetrablock import (
    TetraPoint,
    closed_margin,
    distinguished_boundary_defect,
    in_closed_tetrablock,
)

__all__ = [
    "TetraProblem",
    "BCParams",
    "SearchConfig",
    "Status",
    "InfeasibilityReason",
    "Certificate",
    "necessary_checks",
    "objective",
    "solve_tetra",
    "verify_certificate",
    "THRESHOLDS",
]

log = logging.getLogger(__name__)

DEGENERATE_GAP = 1e-12
SCALAR_PICK_TOL = 1e-7

#: Acceptance thresholds for a Solvable certificate.
THRESHOLDS = {
    "node_residual": 1e-6,
    "membership_defect": 1e-9,
    "boundary_defect": 1e-5,
    "product_residual": 1e-12,
    "unitarity_residual": 1e-8,
}

# Polishing runs on starts whose Nelder-Mead value lies in this window and
# stops once the Pick matrix is comfortably positive.
_POLISH_FLOOR = -1e-2
_POLISH_TARGET = 1e-9
_POLISH_ITERS = 100
_SDP_OPTIONS = {"show_progress": False, "abstol": 1e-10, "reltol": 1e-10, "feastol": 1e-10, "maxiters": 60}


class Status(str, enum.Enum):
    SOLVABLE = "Solvable"
    INFEASIBLE = "Infeasible"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class TetraProblem:
    """Nodes ``lambda_k`` in the open disc and targets ``(x1^k, x2^k, x3^k)``."""

    nodes: np.ndarray
    targets: tuple

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=np.complex128).ravel()
        targets = tuple(TetraPoint.coerce(t) for t in self.targets)
        if nodes.size == 0 or nodes.size != len(targets):
            raise InvalidInputError("need one target per node and at least one node")
        # Reuse the node validation of the NP data type.
        MatNPData(nodes, np.zeros((nodes.size, 1, 1)))
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "targets", targets)

    @property
    def n(self):
        return self.nodes.size

    def target_array(self):
        """Shape ``(3, n)``."""
        return np.array([t.as_tuple() for t in self.targets], dtype=np.complex128).T

    @property
    def products(self):
        """``p_k = x1^k x2^k - x3^k``."""
        x1, x2, x3 = self.target_array()
        return x1 * x2 - x3


@dataclass(frozen=True)
class BCParams:
    """Off-diagonal parameters; ``branches[k]`` records how node ``k`` was parametrized."""

    b: np.ndarray
    c: np.ndarray
    branches: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "b", np.asarray(self.b, dtype=np.complex128).ravel())
        object.__setattr__(self, "c", np.asarray(self.c, dtype=np.complex128).ravel())
        if self.b.shape != self.c.shape:
            raise InvalidInputError("b and c must have equal length")

    def product_residual(self, problem):
        return float(np.max(np.abs(self.b * self.c - problem.products)))

    def matrices(self, problem):
        x1, x2, _ = problem.target_array()
        M = np.empty((problem.n, 2, 2), dtype=np.complex128)
        M[:, 0, 0], M[:, 0, 1], M[:, 1, 0], M[:, 1, 1] = x1, self.b, self.c, x2
        return M


@dataclass(frozen=True)
class SearchConfig:
    starts: int = 32
    max_iters: int = 400
    seed: int = 0
    tol: float = 1e-7
    threads: int = 1


@dataclass(frozen=True)
class InfeasibilityReason:
    code: str
    message: str
    node: int = None


@dataclass
class Certificate:
    """Outcome of ``solve_tetra``.

    ``params``, ``min_eig``, ``colligation`` and ``report`` are set when the
    status is Solvable; ``reason`` when Infeasible; ``best_objective`` and
    ``starts_used`` always describe the search effort.
    """

    status: Status
    params: BCParams = None
    min_eig: float = None
    colligation: object = None
    report: dict = field(default_factory=dict)
    reason: InfeasibilityReason = None
    best_objective: float = None
    starts_used: int = 0


def necessary_checks(problem):
    """Cheap proofs of infeasibility; ``None`` means nothing was proven.

    Every target must lie in the closed tetrablock, and each coordinate
    sequence ``lambda_k -> x_i^k`` is a scalar Schur-class interpolation
    problem whose Pick matrix must be positive semidefinite.
    """
    for k, t in enumerate(problem.targets):
        if not in_closed_tetrablock(t):
            return InfeasibilityReason(
                "target_not_in_closed_tetrablock",
                f"target not in closed tetrablock at node {k} (margin {float(closed_margin(t)):.3e})",
                k,
            )
    coords = problem.target_array()
    for i, name in enumerate(("x1", "x2", "x3")):
        rep = check_solvable(MatNPData(problem.nodes, coords[i]), SCALAR_PICK_TOL)
        if not rep.solvable:
            return InfeasibilityReason(
                f"scalar_pick_{name}",
                f"scalar Pick matrix of {name} has min eigenvalue {rep.min_eig:.3e}",
            )
    return None


def _szego(nodes):
    return 1.0 / (1.0 - np.conj(nodes)[:, None] * nodes[None, :])


def _pick_of(K, M):
    n = M.shape[0]
    WW = np.einsum("kji,ljh->klih", M.conj(), M)
    blocks = (np.eye(2)[None, None] - WW) * K[:, :, None, None]
    P = blocks.transpose(0, 2, 1, 3).reshape(2 * n, 2 * n)
    return 0.5 * (P + P.conj().T)


def objective(problem, params):
    """Smallest eigenvalue of the ``2n x 2n`` Pick matrix for ``M_k = [[x1^k, b_k], [c_k, x2^k]]``."""
    data = MatNPData(problem.nodes, params.matrices(problem))
    return check_solvable(data).min_eig


class _Parametrization:
    """Maps a real vector to ``(b, c)`` with ``b_k c_k = p_k`` built in.

    Nodes with ``p_k != 0`` use ``b = exp(a + i t)``, ``c = p / b``.  Nodes
    with ``p_k = 0`` follow their branch: ``zero`` (``b = c = 0``, no
    variables), ``b`` (``c = 0``, ``b`` free) or ``c`` (``b = 0``, ``c`` free).
    """

    def __init__(self, problem, branches):
        self.problem = problem
        self.K = _szego(problem.nodes)
        x1, x2, _ = problem.target_array()
        self.x1, self.x2 = x1, x2
        self.p = problem.products
        self.branches = tuple(branches)
        self.slots = []
        dim = 0
        for br in self.branches:
            width = 0 if br == "zero" else 2
            self.slots.append(slice(dim, dim + width))
            dim += width
        self.dim = dim

    def bc(self, v):
        n = self.problem.n
        b = np.zeros(n, dtype=np.complex128)
        c = np.zeros(n, dtype=np.complex128)
        for k, (br, sl) in enumerate(zip(self.branches, self.slots)):
            if br == "gauge":
                s = np.exp(v[sl.start] + 1j * v[sl.start + 1])
                b[k], c[k] = s, self.p[k] / s
            elif br == "b":
                b[k] = v[sl.start] + 1j * v[sl.start + 1]
            elif br == "c":
                c[k] = v[sl.start] + 1j * v[sl.start + 1]
        return b, c

    def matrices(self, v):
        b, c = self.bc(v)
        M = np.empty((self.problem.n, 2, 2), dtype=np.complex128)
        M[:, 0, 0], M[:, 0, 1], M[:, 1, 0], M[:, 1, 1] = self.x1, b, c, self.x2
        return M

    def pick(self, v):
        return _pick_of(self.K, self.matrices(v))

    def value(self, v):
        return float(np.linalg.eigvalsh(self.pick(v))[0])

    def pick_derivatives(self, v):
        """``dP / dv_i`` for every variable, as a list of Hermitian matrices."""
        b, c = self.bc(v)
        M = self.matrices(v)
        n = self.problem.n
        out = []
        for k, (br, sl) in enumerate(zip(self.branches, self.slots)):
            if br == "gauge":
                dirs = [(b[k], -c[k]), (1j * b[k], -1j * c[k])]
            elif br == "b":
                dirs = [(1.0, 0.0), (1j, 0.0)]
            elif br == "c":
                dirs = [(0.0, 1.0), (0.0, 1j)]
            else:
                dirs = []
            for db, dc in dirs:
                dM = np.array([[0.0, db], [dc, 0.0]], dtype=np.complex128)
                D = np.zeros((n, n, 2, 2), dtype=np.complex128)
                D[k, :] -= np.einsum("ji,ljh->lih", dM.conj(), M) * self.K[k, :, None, None]
                D[:, k] -= np.einsum("lji,jh->lih", M.conj(), dM) * self.K[:, k, None, None]
                out.append(D.transpose(0, 2, 1, 3).reshape(2 * n, 2 * n))
        return out

    def start(self, rng, balanced):
        v = np.zeros(self.dim)
        for k, (br, sl) in enumerate(zip(self.branches, self.slots)):
            if br == "gauge":
                a, t = 0.5 * np.log(abs(self.p[k])), 0.5 * np.angle(self.p[k])
                if not balanced:
                    a += rng.standard_normal()
                    t += rng.uniform(-np.pi, np.pi)
                v[sl] = (a, t)
            elif br in ("b", "c") and not balanced:
                v[sl] = 0.5 * rng.standard_normal(2)
        return v


def _real_embedding(H):
    return np.block([[H.real, -H.imag], [H.imag, H.real]])


def _polish(par, v, value):
    """Trust-region ascent on the smallest Pick eigenvalue.

    Each step maximizes ``t`` subject to ``P(v) + sum_i d_i dP_i >= t I`` and
    ``|d_i| <= rho`` (a small SDP), and accepts the step if the true
    eigenvalue improves by a fair share of the predicted gain.
    """
    if par.dim == 0:
        return v, value
    rho = 0.1
    d = par.dim
    N2 = 4 * par.problem.n
    cost = cvxopt.matrix(np.r_[np.zeros(d), -1.0])
    Gl = cvxopt.matrix(np.vstack([np.c_[np.eye(d), np.zeros(d)], np.c_[-np.eye(d), np.zeros(d)]]))
    ident = np.eye(N2).ravel(order="F")
    P = par.pick(v)
    for _ in range(_POLISH_ITERS):
        if value >= _POLISH_TARGET or rho < 1e-13:
            break
        G = np.empty((N2 * N2, d + 1))
        for i, dP in enumerate(par.pick_derivatives(v)):
            G[:, i] = -_real_embedding(dP).ravel(order="F")
        G[:, d] = ident
        try:
            sol = cvxopt.solvers.sdp(
                cost, Gl=Gl, hl=cvxopt.matrix(np.full(2 * d, rho)),
                Gs=[cvxopt.matrix(G)], hs=[cvxopt.matrix(_real_embedding(P))],
                options=_SDP_OPTIONS,
            )
        except (ArithmeticError, ValueError):
            rho /= 4.0
            continue
        if sol["x"] is None:
            rho /= 4.0
            continue
        step = np.array(sol["x"]).ravel()
        predicted = step[-1] - value
        if predicted < 1e-15:
            break
        trial = v + step[:d]
        new_value = par.value(trial)
        if new_value > value and new_value - value >= 0.1 * predicted:
            v, value, P = trial, new_value, par.pick(trial)
            rho = min(2.0 * rho, 1.0)
        else:
            rho /= 4.0
    return v, value


def _run_start(par, x0, max_iters):
    if par.dim == 0:
        return x0, par.value(x0)
    res = minimize(
        lambda v: -par.value(v), x0, method="Nelder-Mead",
        options={"maxiter": max_iters, "xatol": 1e-10, "fatol": 1e-13, "adaptive": True},
    )
    v, value = res.x, -float(res.fun)
    start_value = par.value(x0)
    if start_value > value:
        v, value = x0, start_value
    if _POLISH_FLOOR <= value < _POLISH_TARGET:
        v, value = _polish(par, v, value)
    return v, value


def _branch_combos(problem):
    degenerate = [k for k, p in enumerate(problem.products) if abs(p) <= DEGENERATE_GAP]
    choices = list(itertools.product(("zero", "b", "c"), repeat=len(degenerate)))
    choices.sort(key=lambda ch: sum(c != "zero" for c in ch))
    for ch in choices:
        branches = ["gauge"] * problem.n
        for k, br in zip(degenerate, ch):
            branches[k] = br
        yield tuple(branches)


def _certify(problem, par, v, value, tol):
    b, c = par.bc(v)
    params = BCParams(b, c, par.branches)
    cert = Certificate(Status.SOLVABLE, params=params, min_eig=value)
    try:
        cert.colligation = solve_np(MatNPData(problem.nodes, params.matrices(problem)), tol)
    except TetraSynthError as exc:
        return None, {"error": str(exc)}
    report = verify_certificate(problem, cert)
    cert.report = report
    return (cert if report["ok"] else None), report


def solve_tetra(problem, cfg=None):
    """Decide and certify solvability of a tetrablock interpolation problem.

    Parameters
    ----------
    problem : TetraProblem
    cfg : SearchConfig, optional

    Returns
    -------
    Certificate
        Solvable (with a verified colligation), Infeasible (with the violated
        necessary condition) or Unknown (search exhausted).

    Raises
    ------
    NumericalFailureError
        If parameters with a positive-semidefinite Pick matrix were found
        but no interpolant built from them passed verification.

    Notes
    -----
    Starts are numbered per branch; start 0 is the balanced point
    ``b_k = c_k = sqrt(p_k)`` and start ``i >= 1`` draws from
    ``default_rng([seed, branch, i])``.  Starts are processed in index order
    in batches of ``cfg.threads``; the first start (lowest index) whose
    certificate verifies is returned, so the result does not depend on the
    thread count.
    """
    cfg = cfg or SearchConfig()
    reason = necessary_checks(problem)
    if reason is not None:
        return Certificate(Status.INFEASIBLE, reason=reason)

    best = -np.inf
    used = 0
    last_report = None
    pool = ThreadPoolExecutor(cfg.threads) if cfg.threads > 1 else None
    try:
        for bi, branches in enumerate(_branch_combos(problem)):
            par = _Parametrization(problem, branches)
            total = 1 if par.dim == 0 else cfg.starts + 1
            x0s = [par.start(np.random.default_rng([cfg.seed, bi, i]), balanced=(i == 0)) for i in range(total)]
            batch = max(1, cfg.threads)
            for lo in range(0, total, batch):
                chunk = x0s[lo:lo + batch]
                if pool is None:
                    results = [_run_start(par, x0, cfg.max_iters) for x0 in chunk]
                else:
                    results = list(pool.map(lambda x0: _run_start(par, x0, cfg.max_iters), chunk))
                for v, value in results:
                    used += 1
                    best = max(best, value)
                    if value < -cfg.tol:
                        continue
                    cert, report = _certify(problem, par, v, value, cfg.tol)
                    if cert is not None:
                        cert.best_objective = value
                        cert.starts_used = used
                        return cert
                    last_report = report
                    log.warning("start passed the Pick test but failed verification: %s", report)
    finally:
        if pool is not None:
            pool.shutdown()
    if last_report is not None:
        raise NumericalFailureError("no verified interpolant despite a positive Pick matrix", report=last_report)
    return Certificate(Status.UNKNOWN, best_objective=float(best), starts_used=used)


def verify_certificate(problem, cert, n_disc=200, n_boundary=128):
    """Recompute every check of a Solvable certificate from scratch.

    Returns
    -------
    dict
        ``product_residual``, ``pick_min_eig``, ``unitarity_residual``,
        ``node_residual`` (max over nodes and coordinates),
        ``membership_defect`` (largest violation of the closed-form
        inequality at ``n_disc`` disc points), ``boundary_defect`` (largest
        distance from the distinguished boundary at ``n_boundary`` points of
        radius ``1 - 1e-8``), plus ``failures`` and ``ok``.
    """
    report = {}
    failures = []
    params, col = cert.params, cert.colligation
    if params is None or col is None:
        return {"ok": False, "failures": ["certificate carries no parameters or colligation"]}
    report["product_residual"] = params.product_residual(problem)
    report["pick_min_eig"] = hermitian_min_eigenvalue(_pick_of(_szego(problem.nodes), params.matrices(problem)))
    report["unitarity_residual"] = col.unitarity_residual
    x = tetra_from_colligation(col)
    report["node_residual"] = float(np.max(np.abs(x.evaluate(problem.nodes) - problem.target_array())))
    vals = x.evaluate(disc_points(n_disc, 1.0 - 1e-10))
    report["membership_defect"] = float(np.max(np.maximum(-closed_margin(vals), 0.0)))
    ring = circle_points(n_boundary, EINNER_RADIUS, 0.5)
    report["boundary_defect"] = float(np.max(distinguished_boundary_defect(x.evaluate(ring))))
    for key, limit in THRESHOLDS.items():
        if not report[key] <= limit:
            failures.append(f"{key} = {report[key]:.3e} exceeds {limit:.0e}")
    if report["pick_min_eig"] < -SCALAR_PICK_TOL:
        failures.append(f"pick_min_eig = {report['pick_min_eig']:.3e} is negative")
    if np.min(np.abs(problem.nodes[:, None] - problem.nodes[None, :]) + np.eye(problem.n)) < NODE_SEPARATION:
        failures.append("nodes are not distinct")
    report["failures"] = failures
    report["ok"] = not failures
    return report

