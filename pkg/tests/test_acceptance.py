"""Acceptance criteria, each checked at its stated tolerance.

Every test records one PASS/FAIL line (shown in the terminal summary) and
then asserts the same condition.
"""

import json
import time

import numpy as np
import pytest

from tetrasynth.cli import run
from tetrasynth.mu import mu_diag, mu_diag_oracle
from tetrasynth.mu_synthesis import MuProblem, solve_mu, verify_mu
from tetrasynth.numeric_core import circle_points, disc_points
from tetrasynth.pick_np import MatNPData, check_solvable, random_colligation, solve_np, transfer
from tetrasynth.planted import planted_mu_problem, planted_tetra_problem, random_nodes
from tetrasynth.realization import (
    EINNER_RADIUS,
    boundary_einner_check,
    canonical_lift,
    tetra_from_colligation,
    verify_identity,
)
from tetrasynth.serialization import problem_to_json
from tetrasynth.tetra_interp import SearchConfig, Status, TetraProblem, solve_tetra, verify_certificate
from tetrasynth.tetrablock import closed_margin, from_contraction, in_closed_tetrablock, membership_oracle_grid

from conftest import record_criterion


def uniform_disc(rng, n, radius):
    return radius * np.sqrt(rng.uniform(size=n)) * np.exp(2j * np.pi * rng.uniform(size=n))


def test_c01_membership_cross_validation():
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    pts = rng.uniform(-1.2, 1.2, (3, 100_000)) + 1j * rng.uniform(-1.2, 1.2, (3, 100_000))
    c3 = in_closed_tetrablock(pts, criterion=3)
    c4 = in_closed_tetrablock(pts, criterion=4)
    oracle = membership_oracle_grid(pts, grid_n=256)
    band = (np.abs(closed_margin(pts, 3)) <= 1e-6) | (np.abs(closed_margin(pts, 4)) <= 1e-6)
    bad = int(np.sum(((c3 != c4) | (c3 != oracle)) & ~band))
    elapsed = time.perf_counter() - t0
    ok = bad == 0 and elapsed < 60
    record_criterion("1 membership", ok,
                     f"{bad} disagreements over {int(np.sum(~band))} points off the band "
                     f"({int(np.sum(c3))} inside), {elapsed:.1f}s")
    assert ok


def test_c02_contractions_map_into_closure():
    rng = np.random.default_rng(2)
    fails = 0
    for _ in range(10_000):
        A = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        A *= rng.uniform(0, 1) / np.linalg.norm(A, 2)
        fails += not in_closed_tetrablock(from_contraction(A))
    ok = fails == 0
    record_criterion("2 contractions", ok, f"{fails} of 10000 outside the closed tetrablock")
    assert ok


def test_c03_mu_agreement():
    rng = np.random.default_rng(3)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        A = uniform_disc(rng, 4, 2.0).reshape(2, 2)
        worst = max(worst, abs(mu_diag(A) - mu_diag_oracle(A, 512)))
    closed_err = 0.0
    for _ in range(50):
        a, d, b, c = uniform_disc(rng, 4, 2.0)
        closed_err = max(
            closed_err,
            abs(mu_diag(np.diag([a, d]), 1e-6) / max(abs(a), abs(d)) - 1),
            abs(mu_diag([[0, b], [c, 0]], 1e-6) / np.sqrt(abs(b * c)) - 1),
        )
        if mu_diag([[0, b], [0, 0]], 1e-6) != 0.0 or mu_diag([[0, 0], [c, 0]], 1e-6) != 0.0:
            closed_err = np.inf
    elapsed = time.perf_counter() - t0
    ok = worst <= 5e-2 and closed_err <= 1e-6 and elapsed < 120
    record_criterion("3 mu agreement", ok,
                     f"oracle gap {worst:.2e} (<= 5e-2), closed forms rel err {closed_err:.1e} (<= 1e-6), "
                     f"{elapsed:.1f}s")
    assert ok


def test_c04_mu_similarity_invariance():
    rng = np.random.default_rng(4)
    rel_tol = 1e-9
    worst = 0.0
    for _ in range(1000):
        A = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        e = np.exp(rng.standard_normal() * 3 + 1j * rng.uniform(0, 2 * np.pi))
        B = A.copy()
        B[0, 1] *= e
        B[1, 0] /= e
        ref = mu_diag(A, rel_tol)
        worst = max(worst, abs(mu_diag(B, rel_tol) - ref) / ref)
    ok = worst <= 1e-6 + rel_tol
    record_criterion("4 mu similarity", ok, f"max relative deviation {worst:.2e}")
    assert ok


def test_c05_np_round_trip():
    rng = np.random.default_rng(5)
    worst_res = worst_unit = 0.0
    unsolvable = 0
    for _ in range(200):
        src = random_colligation(int(rng.integers(0, 7)), 2, rng)
        nodes = random_nodes(int(rng.integers(1, 6)), rng)
        data = MatNPData(nodes, transfer(src, nodes))
        unsolvable += not check_solvable(data).solvable
        col = solve_np(data)
        worst_res = max(worst_res, float(np.max(np.abs(transfer(col, nodes) - data.targets))))
        worst_unit = max(worst_unit, col.unitarity_residual)
    ok = unsolvable == 0 and worst_res <= 1e-6 and worst_unit <= 1e-8
    record_criterion("5 NP round trip", ok,
                     f"{unsolvable} rejected, residual {worst_res:.1e}, unitarity {worst_unit:.1e}")
    assert ok


def test_c06_realization_e_inner():
    rng = np.random.default_rng(6)
    worst_in = worst_b = 0.0
    skipped = 0
    for _ in range(100):
        x = tetra_from_colligation(random_colligation(int(rng.integers(1, 7)), 2, rng))
        vals = x.evaluate(disc_points(500, 1 - 1e-10))
        worst_in = max(worst_in, float(np.max(np.maximum(-closed_margin(vals), 0.0))))
        b, s = boundary_einner_check(x, 256, return_skipped=True)
        worst_b, skipped = max(worst_b, b), skipped + s
    ok = worst_in <= 1e-9 and worst_b <= 1e-5
    record_criterion("6 realization", ok,
                     f"membership defect {worst_in:.1e}, bE defect {worst_b:.1e}, {skipped} skipped")
    assert ok


def test_c07_canonical_lift_identity():
    rng = np.random.default_rng(7)
    t0 = time.perf_counter()
    worst = dict(diag=0.0, det=0.0, f21_0=0.0, modulus=0.0, norm=0.0, identity=0.0)
    for _ in range(20):
        x = tetra_from_colligation(random_colligation(int(rng.integers(1, 6)), 2, rng))
        F = canonical_lift(x, quad_m=4096)
        pts = uniform_disc(rng, 128, 0.95)
        vals = F.evaluate(pts)
        x1, x2, x3 = x.evaluate(pts)
        worst["diag"] = max(worst["diag"], np.max(np.abs(vals[:, 0, 0] - x1)), np.max(np.abs(vals[:, 1, 1] - x2)))
        worst["det"] = max(worst["det"], np.max(np.abs(np.linalg.det(vals) - x3)))
        f0 = F(0)[1, 0]
        worst["f21_0"] = max(worst["f21_0"], abs(f0.imag), max(-f0.real, 0.0))
        edge = F.evaluate(circle_points(256, EINNER_RADIUS, 0.5))
        worst["modulus"] = max(worst["modulus"], np.max(np.abs(np.abs(edge[:, 0, 1]) - np.abs(edge[:, 1, 0]))))
        inner = F.evaluate(uniform_disc(rng, 256, 0.999))
        worst["norm"] = max(worst["norm"], np.max(np.linalg.norm(inner, 2, axis=(1, 2))) - 1)
        probes = uniform_disc(rng, 400, 0.95).reshape(100, 4)
        worst["identity"] = max(worst["identity"], verify_identity(F, probes))
    elapsed = time.perf_counter() - t0
    ok = (worst["diag"] <= 1e-6 and worst["det"] <= 1e-6 and worst["f21_0"] <= 1e-12
          and worst["modulus"] <= 1e-5 and worst["norm"] <= 1e-6 and worst["identity"] <= 1e-5
          and elapsed < 300)
    record_criterion("7 canonical lift", ok,
                     ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + f", {elapsed:.1f}s")
    assert ok


def test_c08_tetra_solver_planted():
    rng = np.random.default_rng(8)
    t0 = time.perf_counter()
    solved = unverified = 0
    worst = 0.0
    for _ in range(200):
        p, _ = planted_tetra_problem(rng, int(rng.integers(1, 5)), int(rng.integers(1, 7)))
        cert = solve_tetra(p, SearchConfig(starts=32))
        if cert.status is Status.SOLVABLE:
            solved += 1
            rep = verify_certificate(p, cert)
            unverified += not rep["ok"]
            worst = max(worst, rep["node_residual"])
    elapsed = time.perf_counter() - t0
    ok = solved >= 190 and unverified == 0 and worst <= 1e-6 and elapsed < 900
    record_criterion("8 tetra planted", ok,
                     f"{solved}/200 Solvable, {unverified} failed verification, node residual {worst:.1e}, "
                     f"{elapsed:.1f}s")
    assert ok


def test_c09_tetra_solver_negatives():
    rng = np.random.default_rng(9)
    wrong = []
    for i in range(20):
        # Family 1: a planted problem with one target pushed out of the closure.
        p, _ = planted_tetra_problem(rng, 3, 2)
        targets = list(p.targets)
        k = int(rng.integers(0, 3))
        targets[k] = (1.0 + rng.uniform(0.01, 0.5), 0, 0) if i % 2 else (0, 0, 1.0 + rng.uniform(0.01, 0.5))
        cert = solve_tetra(TetraProblem(p.nodes, targets), SearchConfig(starts=4))
        if cert.status is not Status.INFEASIBLE or cert.reason.code != "target_not_in_closed_tetrablock":
            wrong.append(("outside", i))
        # Family 2: x1 data that violate the two-point Schwarz-Pick bound.
        l1, l2 = random_nodes(2, rng, radius=0.6)
        rho = abs(l1 - l2) / abs(1 - np.conj(l1) * l2)
        w = min(0.95, 1.5 * rho + 0.05) * np.exp(2j * np.pi * rng.uniform())
        cert = solve_tetra(TetraProblem([l1, l2], [(0, 0, 0), (w, 0, 0)]), SearchConfig(starts=4))
        if cert.status is not Status.INFEASIBLE or cert.reason.code != "scalar_pick_x1":
            wrong.append(("pick", i))
    ok = not wrong
    record_criterion("9 tetra negatives", ok, f"{40 - len(wrong)}/40 Infeasible with the right reason")
    assert ok


def test_c10_mu_synthesis_end_to_end():
    rng = np.random.default_rng(10)
    t0 = time.perf_counter()
    solved = 0
    res = excess = 0.0
    for _ in range(100):
        p, _, _ = planted_mu_problem(rng, int(rng.integers(1, 5)), int(rng.integers(1, 7)))
        cert = solve_mu(p, SearchConfig(starts=32))
        if cert.status is Status.SOLVABLE:
            rep = verify_mu(p, cert.function, 200)
            solved += rep["ok"]
            res, excess = max(res, rep["node_residual"]), max(excess, rep["mu_excess"])
    neg = solve_mu(MuProblem([0], [[[0, 2], [2, 0]]])).status
    elapsed = time.perf_counter() - t0
    ok = solved == 100 and res <= 1e-5 and excess <= 1e-6 and neg is Status.INFEASIBLE and elapsed < 900
    record_criterion("10 mu synthesis", ok,
                     f"{solved}/100 verified, node residual {res:.1e}, mu excess {excess:.1e}, "
                     f"[[0,2],[2,0]] -> {neg.value}, {elapsed:.1f}s")
    assert ok


def _strip_wall_time(text):
    doc = json.loads(text)
    doc["meta"].pop("wall_time")
    lines = [ln for ln in text.splitlines() if '"wall_time"' not in ln]
    return doc, lines


def test_c11_cli_determinism(tmp_path):
    rng = np.random.default_rng(11)
    problems = {
        "tetra": ("solve-tetra", problem_to_json(planted_tetra_problem(rng, 4, 2)[0])),
        "mu": ("solve-mu", problem_to_json(planted_mu_problem(rng, 3, 3)[0])),
    }
    mismatches = []
    for name, (cmd, doc) in problems.items():
        src = tmp_path / f"{name}.json"
        src.write_text(json.dumps(doc))
        outs = []
        for i, threads in enumerate(["1", "1", "3", "3"]):
            dst = tmp_path / f"{name}-{i}.json"
            code = run([cmd, "-i", str(src), "-o", str(dst), "--seed", "5", "--threads", threads])
            outs.append((code, _strip_wall_time(dst.read_text())))
        if any(o != outs[0] for o in outs[1:]) or outs[0][0] != 0:
            mismatches.append(name)
    ok = not mismatches
    record_criterion("11 CLI determinism", ok,
                     "identical certificates across repeats and --threads 1/3" if ok else f"differ: {mismatches}")
    assert ok
