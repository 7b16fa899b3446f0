import numpy as np
import pytest

from secbeam.errors import RankError
from secbeam.linalg import hermitize, trace_inner
from secbeam.sdp import (
    EQ,
    GE,
    LE,
    OPTIMAL,
    SdpProblem,
    extract_rank_one,
    rank_reduce,
    solve_sdp,
)
from tutil import rand_herm, rand_hpd, sdp_kkt_metrics, well_posed_sdp


def numerical_rank(x, rtol=1e-9):
    w = np.linalg.eigvalsh(hermitize(x))
    top = max(float(w[-1]), 0.0)
    return int(np.sum(w > rtol * top)) if top > 0 else 0


def test_minimum_eigenvalue_sdp():
    rng = np.random.default_rng(0)
    for _ in range(10):
        n = int(rng.integers(2, 7))
        c = rand_herm(rng, n)
        sol = solve_sdp(SdpProblem(c, [(np.eye(n), 1.0, EQ)]))
        assert sol.status == OPTIMAL
        w, u = np.linalg.eigh(c)
        assert abs(sol.objective - w[0]) <= 1e-8
        # optimizer concentrates on the bottom eigenspace
        vmin = u[:, 0]
        assert abs(trace_inner(np.outer(vmin, vmin.conj()), sol.x) - 1.0) <= 1e-5 \
            or w[1] - w[0] < 1e-6


def test_unit_trace_identity_objective():
    sol = solve_sdp(SdpProblem(np.eye(3), [(np.eye(3), 1.0, EQ)]))
    assert sol.status == OPTIMAL
    assert abs(sol.objective - 1.0) <= 1e-9


def test_small_instance_matches_grid_search():
    rng = np.random.default_rng(1)
    c = rand_herm(rng, 2)
    a_eq = rand_hpd(rng, 2)
    a_le = rand_herm(rng, 2)
    # keep the instance strictly feasible around X ~ I/tr(a_eq)
    x_ref = np.eye(2) / np.real(np.trace(a_eq))
    b_le = trace_inner(a_le, x_ref) + 0.4
    prob = SdpProblem(c, [(a_eq, 1.0, EQ), (a_le, b_le, LE)])
    sol = solve_sdp(prob)
    assert sol.status == OPTIMAL

    # dense grid over the Hermitian 2x2 cone slice tr(a_eq X) = 1
    ngrid = 48
    best = np.inf
    diag = np.linspace(0.0, 2.0 / np.real(np.trace(a_eq)), ngrid)
    for x00 in diag:
        for x11 in diag:
            cap = np.sqrt(x00 * x11)
            if cap == 0.0:
                offs = [0.0]
            else:
                offs = np.linspace(-cap, cap, ngrid)
            for re in offs:
                rem = x00 * x11 - re * re
                if rem < 0:
                    continue
                cap_im = np.sqrt(rem)
                for im in np.linspace(-cap_im, cap_im, 7):
                    x = np.array([[x00, re + 1j * im], [re - 1j * im, x11]])
                    val_eq = trace_inner(a_eq, x)
                    if val_eq <= 1e-12:
                        continue
                    x = x / val_eq
                    if trace_inner(a_le, x) > b_le:
                        continue
                    best = min(best, trace_inner(c, x))
    assert sol.objective <= best + 1e-4
    assert sol.objective >= best - 0.05  # grid only brackets from above


def test_random_sdps_kkt():
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(40):
        prob = well_posed_sdp(rng, int(rng.integers(2, 7)), int(rng.integers(1, 5)))
        sol = solve_sdp(prob)
        assert sol.status == OPTIMAL
        worst = max(worst, sdp_kkt_metrics(prob, sol))
    assert worst <= 1e-7


def test_weak_duality_on_feasible_iterates():
    rng = np.random.default_rng(3)
    prob = well_posed_sdp(rng, 4, 3)
    sol = solve_sdp(prob)
    assert sol.status == OPTIMAL
    for rec in sol.history:
        if rec["pinf"] <= 1e-9 and rec["dinf"] <= 1e-9:
            scale = 1.0 + max(abs(rec["pobj"]), abs(rec["dobj"]))
            assert rec["pobj"] >= rec["dobj"] - 1e-6 * scale


def test_infeasible_detection():
    sol = solve_sdp(SdpProblem(np.eye(2), [(np.eye(2), -1.0, EQ)]))
    assert sol.status == "infeasible"
    sol = solve_sdp(
        SdpProblem(np.eye(2), [(np.eye(2), 1.0, LE), (np.eye(2), 2.0, GE)])
    )
    assert sol.status == "infeasible"


def test_rank_reduce_fixed_point():
    rng = np.random.default_rng(4)
    v = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    x = np.outer(v, v.conj())
    prob = SdpProblem(np.eye(3), [(np.eye(3), float(np.trace(x).real), EQ)])
    sol = solve_sdp(prob)
    sol.x = x  # rank-one input must come back unchanged
    out = rank_reduce(sol, prob)
    assert np.linalg.norm(out.x - x) <= 1e-12


def test_rank_reduce_identity_two_constraints():
    # every feasible point of tr X = 2 with tr(diag(1,-1) X) = 0 has the
    # same objective tr(X); the identity is optimal and reducible to rank 1
    prob = SdpProblem(
        np.eye(2),
        [(np.eye(2), 2.0, EQ), (np.diag([1.0, -1.0]).astype(complex), 0.0, EQ)],
    )
    sol = solve_sdp(prob)
    assert sol.status == OPTIMAL
    sol.x = np.eye(2, dtype=complex)
    out = rank_reduce(sol, prob)
    assert numerical_rank(out.x) == 1
    assert abs(trace_inner(prob.c, out.x) - 2.0) <= 1e-7
    for a, b, _ in prob.constraints:
        assert abs(trace_inner(a, out.x) - b) <= 1e-7


def test_rank_reduce_two_constraint_random():
    rng = np.random.default_rng(5)
    for _ in range(10):
        prob = well_posed_sdp(rng, 4, 2)
        sol = solve_sdp(prob)
        assert sol.status == OPTIMAL
        out = rank_reduce(sol, prob)
        assert numerical_rank(out.x) == 1
        drift = abs(out.objective - sol.objective) / max(1.0, abs(sol.objective))
        assert drift <= 1e-7
        for a, b, sense in prob.constraints:
            before = trace_inner(a, sol.x)
            after = trace_inner(a, out.x)
            assert abs(after - before) <= 1e-7 * max(1.0, abs(b))


def test_extract_rank_one():
    rng = np.random.default_rng(6)
    v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    got = extract_rank_one(np.outer(v, v.conj()))
    phase = np.vdot(got, v) / abs(np.vdot(got, v))
    assert np.linalg.norm(got * phase - v) <= 1e-8 * np.linalg.norm(v)

    got = extract_rank_one(np.diag([4.0, 0.0]).astype(complex))
    assert abs(abs(got[0]) - 2.0) <= 1e-12 and abs(got[1]) <= 1e-12

    x = np.outer(v, v.conj()) + 1e-9 * np.eye(4)
    got = extract_rank_one(x)
    phase = np.vdot(got, v) / abs(np.vdot(got, v))
    assert np.linalg.norm(got * phase - v) <= 1e-4 * np.linalg.norm(v)


def test_extract_rank_one_rejects_spread_spectrum():
    with pytest.raises(RankError):
        extract_rank_one(np.diag([1.0, 0.5]).astype(complex))
