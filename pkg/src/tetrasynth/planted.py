"""Planted test instances: interpolation data read off a known solution."""

import numpy as np

from .pick_np import random_colligation, transfer
from .tetra_interp import TetraProblem

__all__ = ["random_nodes", "planted_tetra_problem", "planted_mu_problem"]


def random_nodes(n, rng, radius=0.9, min_gap=0.05):
    """``n`` random points of ``|z| < radius`` at least ``min_gap`` apart."""
    nodes = []
    while len(nodes) < n:
        z = radius * np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())
        if all(abs(z - w) >= min_gap for w in nodes):
            nodes.append(z)
    return np.array(nodes)


def planted_tetra_problem(rng, n, dimH):
    """Targets ``(F11, F22, det F)(lambda_k)`` of a random unitary colligation.

    Returns ``(problem, colligation)``.
    """
    col = random_colligation(dimH, 2, rng)
    nodes = random_nodes(n, rng)
    F = transfer(col, nodes)
    targets = [(f[0, 0], f[1, 1], f[0, 0] * f[1, 1] - f[0, 1] * f[1, 0]) for f in F]
    return TetraProblem(nodes, targets), col


def planted_mu_problem(rng, n, dimH, scale_range=(0.5, 2.0)):
    """Targets ``diag(d_k, 1) chi0(lambda_k) diag(d_k, 1)^{-1}`` for random ``d_k``.

    ``chi0`` is the transfer function of a random unitary colligation, so the
    data admit an interpolant with ``mu_Diag <= 1``.  Returns
    ``(MuProblem, chi0, d)``.
    """
    from .mu_synthesis import MuProblem

    col = random_colligation(dimH, 2, rng)
    nodes = random_nodes(n, rng)
    F = transfer(col, nodes)
    d = rng.uniform(*scale_range, n) * np.exp(2j * np.pi * rng.uniform(size=n))
    W = F.copy()
    W[:, 0, 1] *= d
    W[:, 1, 0] /= d
    return MuProblem(nodes, W), col, d
