import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tetrasynth.exceptions import HypothesisViolationError, InvalidInputError
from tetrasynth.mu import mu_diag
from tetrasynth.mu_synthesis import (
    MuProblem,
    ScaledSchurFunction,
    reduce_to_tetra,
    solve_mu,
    verify_mu,
)
from tetrasynth.numeric_core import disc_points
from tetrasynth.pick_np import Colligation, random_colligation, transfer
from tetrasynth.planted import planted_mu_problem
from tetrasynth.tetra_interp import Status, solve_tetra

from conftest import random_complex

SWAP = [[0.0, 1.0], [1.0, 0.0]]


def test_reduce_examples():
    t = reduce_to_tetra(MuProblem([0], [SWAP]))
    assert t.targets[0].as_tuple() == (0, 0, -1)
    assert t.products[0] == 1
    t = reduce_to_tetra(MuProblem([0.2], [[[0.5, 0.1], [0.2, 0.5]]]))
    np.testing.assert_allclose(t.targets[0].as_tuple(), (0.5, 0.5, 0.23), atol=1e-15)
    np.testing.assert_allclose(t.products, [0.02], atol=1e-15)
    with pytest.raises(HypothesisViolationError):
        reduce_to_tetra(MuProblem([0], [[[0.5, 0.0], [0.2, 0.5]]]))


def test_problem_validation():
    with pytest.raises(InvalidInputError):
        MuProblem([0, 0.1], [SWAP])
    with pytest.raises(InvalidInputError):
        MuProblem([0, 0], [SWAP, SWAP])


def test_constant_unitary_target():
    p = MuProblem([0], [SWAP])
    cert = solve_mu(p)
    assert cert.status is Status.SOLVABLE
    np.testing.assert_allclose(cert.function(0), SWAP, atol=1e-6)
    assert cert.report["mu_excess"] <= 1e-6


def test_too_large_target_is_infeasible():
    cert = solve_mu(MuProblem([0], [[[0, 2], [2, 0]]]))
    assert cert.status is Status.INFEASIBLE
    assert cert.tetra.reason.code == "target_not_in_closed_tetrablock"
    assert cert.function is None


def test_planted_problem(rng):
    p, _, _ = planted_mu_problem(rng, 3, 2)
    cert = solve_mu(p)
    assert cert.status is Status.SOLVABLE
    rep = verify_mu(p, cert.function, 200)
    assert rep["node_residual"] <= 1e-5 and rep["mu_excess"] <= 1e-6 and rep["ok"]
    # The tetra reduction is certified as well.
    assert solve_tetra(reduce_to_tetra(p)).status is Status.SOLVABLE


def test_verify_constant_at_own_node():
    f = ScaledSchurFunction(Colligation.constant(SWAP), [0.0])
    rep = verify_mu(MuProblem([0.3], [SWAP]), f, 50)
    assert rep["node_residual"] == 0.0 and rep["ok"]


def test_verify_flags_corrupted_scale(rng):
    p, _, _ = planted_mu_problem(rng, 2, 2)
    cert = solve_mu(p)
    bad = ScaledSchurFunction(cert.function.chi, cert.function.scale_poly + 0.5)
    rep = verify_mu(p, bad)
    assert rep["node_residual"] > 1e-3 and not rep["ok"]


def test_verify_warns_about_close_nodes():
    f = ScaledSchurFunction(Colligation.constant(SWAP), [0.0])
    rep = verify_mu(MuProblem([0.3, 0.30005], [SWAP, SWAP]), f, 10)
    assert rep["warnings"]


def test_similarity_leaves_tetra_data_unchanged(rng):
    chi = random_colligation(3, 2, rng)
    f = ScaledSchurFunction(chi, random_complex(rng, 3))
    pts = disc_points(100, 0.99)
    F, X = f.evaluate(pts), transfer(chi, pts)
    np.testing.assert_allclose(F[:, 0, 0], X[:, 0, 0], atol=1e-12)
    np.testing.assert_allclose(F[:, 1, 1], X[:, 1, 1], atol=1e-12)
    np.testing.assert_allclose(np.linalg.det(F), np.linalg.det(X), atol=1e-12)


def test_scaled_function_needs_2x2():
    with pytest.raises(InvalidInputError):
        ScaledSchurFunction(Colligation.constant([[1.0]]), [0])


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_mu_invariant_under_lift_similarity(seed):
    rng = np.random.default_rng(seed)
    chi = transfer(random_colligation(2, 2, rng), 0.9 * rng.uniform() * np.exp(2j * np.pi * rng.uniform()))
    e = np.exp(random_complex(rng, 1)[0])
    E = np.diag([e, 1.0])
    a, b = mu_diag(E @ chi @ np.linalg.inv(E), 1e-9), mu_diag(chi, 1e-9)
    assert abs(a - b) <= 1e-9 * b + 1e-9
