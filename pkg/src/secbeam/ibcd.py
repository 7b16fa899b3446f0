"""Inexact block-coordinate-descent solver for the general secrecy design.

The log-det objective is rewritten with auxiliary variables in the
weighted-MMSE style: a receive filter U, a positive-definite weight W_I for
the information receiver and a weight W_E for the energy receiver. Each
has a closed-form update at fixed beamformer V. The V block then minimizes
a convex quadratic subject to the power cap and the harvesting constraint
linearized at the incumbent, which keeps every iterate feasible for the
original problem and the objective nondecreasing, and makes the V update
solvable in closed form per dual multiplier: a bisection on the power
multiplier lambda with an inner closed-form harvesting multiplier mu.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import FeasibilityError, SolverError
from .linalg import hermitize, inv_hpd, logdet_hpd, solve_hpd, trace_inner
from .model import (
    LN2,
    ChannelPair,
    DesignBudget,
    feasibility,
    harvested_power,
    secrecy_rate_nats,
)
from .sdp import EQ, GE, LE, OPTIMAL, SdpProblem, extract_rank_one, rank_reduce, solve_sdp

POWER_FEAS_RTOL = 1e-8
EH_FEAS_RTOL = 1e-7


def _solve_pd(a, b):
    # hot-path solve for matrices that are positive definite by construction
    return np.linalg.solve(a, b)


def _logdet_pd(a):
    low = np.linalg.cholesky(a)
    return float(2.0 * np.sum(np.log(np.real(np.diag(low)))))


def _rate_nats(ch, v):
    hiv = ch.h_i @ v
    hev = ch.h_e @ v
    t_i = _logdet_pd(np.eye(ch.n_i) + hiv @ hiv.conj().T)
    t_e = _logdet_pd(np.eye(ch.n_e) + hev @ hev.conj().T)
    return t_i - t_e


@dataclass
class ConvergenceTrace:
    """Per-iteration record of one block-coordinate run (row 0 = start)."""

    rates_bits: np.ndarray
    power_w: np.ndarray
    eh_margin_w: np.ndarray
    lam: float
    mu: float
    an_power_w: np.ndarray | None = None

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            header = ["iter", "rate_bits", "power_w", "eh_margin_w"]
            if self.an_power_w is not None:
                header.append("an_power_w")
            writer.writerow(header)
            for k in range(len(self.rates_bits)):
                row = [k, repr(float(self.rates_bits[k])),
                       repr(float(self.power_w[k])),
                       repr(float(self.eh_margin_w[k]))]
                if self.an_power_w is not None:
                    row.append(repr(float(self.an_power_w[k])))
                writer.writerow(row)


@dataclass
class IbcdResult:
    v: np.ndarray
    rate_bits: float
    rate_nats: float
    lam: float
    mu: float
    iterations: int
    nonpositive_rate: bool


def update_aux(ch: ChannelPair, v):
    """Closed-form auxiliary updates at fixed beamformer V.

    U is the MMSE receive filter of the information receiver, W_I the
    inverse of its error covariance (equal to I + V^H H_I^H H_I V), and
    W_E the inverse of the energy receiver's receive covariance.
    """
    v = np.asarray(v, dtype=complex)
    hi, he = ch.h_i, ch.h_e
    hiv = hi @ v
    hev = he @ v
    u = _solve_pd(np.eye(ch.n_i) + hiv @ hiv.conj().T, hiv)
    w_i = hermitize(np.eye(v.shape[1]) + hiv.conj().T @ hiv)
    w_e = hermitize(_solve_pd(np.eye(ch.n_e) + hev @ hev.conj().T, np.eye(ch.n_e)))
    return u, w_i, w_e


def mse_matrix(ch: ChannelPair, u, v):
    """Error covariance E(U, V) = (I - U^H H_I V)(.)^H + U^H U."""
    d = v.shape[1]
    r = np.eye(d) - u.conj().T @ ch.h_i @ v
    return hermitize(r @ r.conj().T + u.conj().T @ u)


def objective_f(ch: ChannelPair, v, u, w_i, w_e) -> float:
    """Variational objective in nats; equals the secrecy rate at the
    closed-form auxiliary variables."""
    v = np.asarray(v, dtype=complex)
    d = v.shape[1]
    hev = ch.h_e @ v
    cov_e = np.eye(ch.n_e) + hev @ hev.conj().T
    val = logdet_hpd(w_i) - trace_inner(hermitize(w_i), mse_matrix(ch, u, v)) + d
    val += logdet_hpd(w_e) - trace_inner(hermitize(w_e), hermitize(cov_e)) + ch.n_e
    return float(val)


def _quad_obj(m, k, v) -> float:
    """Re tr(V^H M V) - 2 Re tr(K^H V), the V-block subproblem objective."""
    return trace_inner(v, m @ v) - 2.0 * trace_inner(k, v)


class _SubproblemDegenerate(RuntimeError):
    """Linearized harvesting constraint cannot be met (H_E Vtilde = 0)."""


def _bisection_solve(m, k, a_vt, b_lin, p_t, eps, lam_hint=None):
    """Minimize the quadratic subject to power <= p_t and the linearized
    harvesting bound 2 Re tr(V^H a_vt) >= b_lin.

    m is the Hermitian PSD curvature matrix, k the linear term,
    a_vt = H_E^H H_E Vtilde. Returns (v, lam, mu). ``lam_hint`` seeds the
    bracket search with the multiplier of the previous outer iteration.
    """
    sig, p = np.linalg.eigh(hermitize(m))
    sig = np.maximum(sig, 0.0)
    sig_max = float(sig[-1])
    phk = p.conj().T @ k
    pha = p.conj().T @ a_vt
    if not np.any(np.abs(pha) > 0.0) and b_lin > 1e-300:
        # harvesting enters only through a_vt; a vanished linearization
        # cannot reach a positive bound
        raise _SubproblemDegenerate("linearized harvesting constraint is unreachable")

    # per-eigendirection aggregates make each multiplier probe O(n)
    agg_kk = np.sum(np.abs(phk) ** 2, axis=1)
    agg_ka = np.sum(np.real(np.conj(pha) * phk), axis=1)
    agg_aa = np.sum(np.abs(pha) ** 2, axis=1)

    def probe(lam):
        """Optimal harvesting multiplier and resulting power at this lam."""
        w = 1.0 / (lam + sig)
        den = 2.0 * float(w @ agg_aa)
        if den > 0.0:
            mu = max(b_lin - 2.0 * float(w @ agg_ka), 0.0) / den
        else:
            mu = 0.0
        w2 = w * w
        power = float(w2 @ (agg_kk + (2.0 * mu) * agg_ka + (mu * mu) * agg_aa))
        return mu, power

    def v_of(lam, mu):
        return p @ ((phk + mu * pha) / (lam + sig)[:, None])

    # floor lambda when the curvature matrix is singular
    lam_floor = 0.0
    if sig[0] <= 1e-12 * max(sig_max, 1e-300):
        lam_floor = 1e-12 * max(sig_max, 1e-300)
        if sig_max <= 0.0:
            # no curvature at all: with no linear pull the zero matrix is
            # optimal whenever the harvesting bound is vacuous
            if b_lin <= 1e-300:
                return np.zeros_like(k), 0.0, 0.0
            raise _SubproblemDegenerate("curvature and harvesting both vanish")

    # unconstrained-in-power candidate
    lam0 = lam_floor
    mu0, power0 = probe(lam0)
    if power0 <= p_t:
        return v_of(lam0, mu0), float(lam0), float(mu0)

    # bracket the power multiplier: power(lam) is nonincreasing in lam
    if lam_hint is not None and lam_hint > lam_floor:
        lam_u = lam_hint
    else:
        lam_u = 1.0
    lam_l = lam_floor
    for _ in range(300):
        if probe(lam_u)[1] <= p_t:
            break
        lam_l = lam_u
        lam_u *= 2.0
    else:
        raise SolverError("failed to bracket the power multiplier")

    width_target = eps
    for _ in range(400):
        lam = 0.5 * (lam_l + lam_u)
        if probe(lam)[1] - p_t >= 0.0:
            lam_l = lam
        else:
            lam_u = lam
        if lam_u - lam_l <= width_target:
            # keep halving until the complementarity slack is negligible,
            # so the inexact V update cannot break monotonicity downstream
            mu_u, power_u = probe(lam_u)
            slack = lam_u * (p_t - power_u)
            if slack <= 1e-12 * max(1.0, lam_u * p_t) or \
                    lam_u - lam_l <= 1e-15 * max(lam_u, 1.0):
                break
    lam = lam_u
    mu, _ = probe(lam)
    return v_of(lam, mu), float(lam), float(mu)


def solve_linearized_subproblem(ch: ChannelPair, v_tilde, u, w_i, w_e,
                                budget: DesignBudget, eps: float = 1e-6,
                                lam_hint=None):
    """Exact solve of the V block at fixed auxiliaries.

    The harvesting constraint is linearized at the incumbent v_tilde, which
    makes the subproblem convex; the dual is one-dimensional in the power
    multiplier and solved by bisection, with the harvesting multiplier in
    closed form at each candidate.
    """
    v_tilde = np.asarray(v_tilde, dtype=complex)
    hi, he = ch.h_i, ch.h_e
    uw = u @ hermitize(w_i)
    m = hermitize(hi.conj().T @ (uw @ u.conj().T) @ hi
                  + he.conj().T @ hermitize(w_e) @ he)
    k = hi.conj().T @ uw
    a_vt = he.conj().T @ (he @ v_tilde)
    c_e = budget.p_e / (ch.zeta * ch.sigma2_e)
    b_lin = c_e + trace_inner(v_tilde, a_vt)
    v, lam, mu = _bisection_solve(m, k, a_vt, b_lin, budget.p_t, eps, lam_hint)
    # never hand back a point worse than the incumbent (the incumbent is
    # feasible for the linearized subproblem, so this can only trigger on
    # numerical noise)
    if _quad_obj(m, k, v) > _quad_obj(m, k, v_tilde):
        return v_tilde, lam, mu
    return v, lam, mu


def _check_initial(ch, budget, v0):
    power = float(np.linalg.norm(v0) ** 2)
    eh = harvested_power(ch, v0 @ np.asarray(v0, dtype=complex).conj().T)
    if abs(power - budget.p_t) > 1e-6 * budget.p_t:
        raise FeasibilityError(
            f"initial beamformer uses {power:.6e} W, budget is {budget.p_t:.6e} W"
        )
    if eh < budget.p_e * (1.0 - EH_FEAS_RTOL):
        raise FeasibilityError(
            f"initial beamformer harvests {eh:.3e} W < target {budget.p_e:.3e} W"
        )


def ibcd_solve(ch: ChannelPair, d: int, budget: DesignBudget, v0,
               eps: float = 1e-6, max_iter: int = 5000,
               kkt_tol: float | None = 8e-5, kkt_extra: int = 2000):
    """Run the inexact block-coordinate descent from a feasible start.

    Iterates until the secrecy-rate improvement drops to eps nats (the rate
    sequence is nondecreasing by construction), then keeps polishing with
    the same update until the KKT residual falls below kkt_tol or stops
    improving. Returns the beamformer result and the per-iteration trace.
    """
    v = np.asarray(v0, dtype=complex)
    if v.ndim == 1:
        v = v[:, None]
    if v.shape != (ch.n_t, d):
        raise FeasibilityError(
            f"initial beamformer shape {v.shape} does not match ({ch.n_t}, {d})"
        )
    _check_initial(ch, budget, v)

    rates = [_rate_nats(ch, v)]
    powers = [float(np.linalg.norm(v) ** 2)]
    margins = [harvested_power(ch, v @ v.conj().T) - budget.p_e]
    lam = mu = 0.0
    lam_hint = None
    iterations = 0

    def step(v):
        nonlocal lam, mu, lam_hint, iterations
        iterations += 1
        u, w_i, w_e = update_aux(ch, v)
        v, lam, mu = solve_linearized_subproblem(
            ch, v, u, w_i, w_e, budget, eps, lam_hint
        )
        lam_hint = lam if lam > 0 else None
        rates.append(_rate_nats(ch, v))
        powers.append(float(np.linalg.norm(v) ** 2))
        margins.append(harvested_power(ch, v @ v.conj().T) - budget.p_e)
        return v

    for _ in range(max_iter):
        v = step(v)
        if rates[-1] - rates[-2] <= eps:
            break

    if kkt_tol is not None:
        best_kkt = np.inf
        stalled = 0
        for _ in range(kkt_extra):
            kk = kkt_residual(ch, budget, v, lam, mu)
            if kk <= kkt_tol:
                break
            if kk < 0.999 * best_kkt:
                best_kkt = kk
                stalled = 0
            else:
                stalled += 1
                if stalled >= 50:
                    break
            v = step(v)

    trace = ConvergenceTrace(
        rates_bits=np.array(rates) / LN2,
        power_w=np.array(powers),
        eh_margin_w=np.array(margins),
        lam=lam,
        mu=mu,
    )
    rate_nats = rates[-1]
    result = IbcdResult(
        v=v,
        rate_bits=rate_nats / LN2,
        rate_nats=rate_nats,
        lam=lam,
        mu=mu,
        iterations=iterations,
        nonpositive_rate=rate_nats <= 0.0,
    )
    return result, trace


def exact_subproblem_sdr(ch: ChannelPair, v_shape, u, w_i, w_e,
                         budget: DesignBudget):
    """Lifted semidefinite relaxation of the exact (non-linearized) V block.

    Vectorizes V column-major into v, lifts z = [v; 1] to Z = z z^H and
    relaxes the rank constraint. Used by the warmstart and, with the
    harvesting row replaced by a linear one, as an oracle for the bisection
    solver. Returns (problem, solution).
    """
    n_t, d = v_shape
    hi, he = ch.h_i, ch.h_e
    m = hermitize(hi.conj().T @ (u @ hermitize(w_i) @ u.conj().T) @ hi
                  + he.conj().T @ hermitize(w_e) @ he)
    k = hi.conj().T @ (u @ hermitize(w_i))
    nd = n_t * d
    big = np.zeros((nd + 1, nd + 1), dtype=complex)
    big[:nd, :nd] = np.kron(np.eye(d), m)
    kvec = k.flatten(order="F")
    big[:nd, nd] = -kvec
    big[nd, :nd] = -kvec.conj()
    a_pow = np.zeros_like(big)
    a_pow[:nd, :nd] = np.eye(nd)
    a_eh = np.zeros_like(big)
    a_eh[:nd, :nd] = np.kron(np.eye(d), ch.eh_gram())
    corner = np.zeros_like(big)
    corner[nd, nd] = 1.0
    c_e = budget.p_e / (ch.zeta * ch.sigma2_e)
    cons = [(a_pow, budget.p_t, LE), (corner, 1.0, EQ)]
    if budget.p_e > 0.0:
        cons.insert(1, (a_eh, c_e, GE))
    prob = SdpProblem(hermitize(big), cons)
    return prob, solve_sdp(prob)


def warmstart(ch: ChannelPair, d: int, budget: DesignBudget, seed=0):
    """Feasible, efficient starting beamformer.

    Draws a random V, computes the auxiliaries there, then solves the exact
    V block through its lifted relaxation and rescales the extracted
    beamformer to full power (which can only help harvesting). Falls back
    to harvesting-aligned eigen-directions if the relaxation does not
    produce a usable rank-one point.
    """
    feasible, margin = feasibility(ch, budget)
    if not feasible:
        raise FeasibilityError(
            f"harvesting target misses by {-margin:.3e} W at full power",
            margin=margin,
        )
    rng = np.random.default_rng(seed)
    v_rand = rng.standard_normal((ch.n_t, d)) + 1j * rng.standard_normal((ch.n_t, d))
    v_rand *= np.sqrt(budget.p_t) / np.linalg.norm(v_rand)
    u, w_i, w_e = update_aux(ch, v_rand)

    v = None
    try:
        prob, sol = exact_subproblem_sdr(ch, (ch.n_t, d), u, w_i, w_e, budget)
        if sol.status == OPTIMAL:
            sol = rank_reduce(sol, prob)
            z = extract_rank_one(sol.x)
            v = (z[:-1] / z[-1]).reshape((ch.n_t, d), order="F")
    except Exception:
        v = None

    if v is not None:
        v = _full_power_feasible(ch, budget, v)
        if v is not None:
            return v
    return _eigen_fallback(ch, budget, d)


def _full_power_feasible(ch, budget, v):
    """Rescale to full power; blend toward the harvesting eigen-atom if a
    numerical sliver of harvesting margin is missing."""
    norm = np.linalg.norm(v)
    if norm <= 0:
        return None
    v = v * (np.sqrt(budget.p_t) / norm)
    if harvested_power(ch, v @ v.conj().T) >= budget.p_e:
        return v
    eig = np.linalg.eigh(ch.eh_gram())
    q1 = eig.eigenvectors[:, -1]
    atom = budget.p_t * np.outer(q1, q1.conj())
    cov = v @ v.conj().T
    for beta in (1e-8, 1e-6, 1e-4, 1e-2, 0.1, 0.5, 1.0):
        mix = hermitize((1.0 - beta) * cov + beta * atom)
        if harvested_power(ch, mix) >= budget.p_e:
            w, uvec = np.linalg.eigh(mix)
            order = np.argsort(w)[::-1][: v.shape[1]]
            fac = uvec[:, order] * np.sqrt(np.maximum(w[order], 0.0))
            fac *= np.sqrt(budget.p_t) / np.linalg.norm(fac)
            if harvested_power(ch, fac @ fac.conj().T) >= budget.p_e:
                return fac
    return None


def _eigen_fallback(ch, budget, d):
    """Deterministic feasible start: top harvesting eigen-direction at full
    power, with leftover power spread over further eigen-directions as the
    harvesting margin allows."""
    w, q = np.linalg.eigh(ch.eh_gram())
    lam_max = float(w[-1])
    margin = ch.zeta * ch.sigma2_e * budget.p_t * lam_max - budget.p_e
    denom = ch.zeta * ch.sigma2_e * budget.p_t * max(lam_max, 1e-300)
    spread = min(0.25, 0.5 * margin / denom) if margin > 0 else 0.0
    v = np.zeros((ch.n_t, d), dtype=complex)
    v[:, 0] = np.sqrt(budget.p_t * (1.0 - spread)) * q[:, -1]
    if d > 1 and spread > 0:
        per = np.sqrt(budget.p_t * spread / (d - 1))
        for j in range(1, d):
            v[:, j] = per * q[:, -1 - (j % ch.n_t)]
    # exact full power
    v *= np.sqrt(budget.p_t) / np.linalg.norm(v)
    if harvested_power(ch, v @ v.conj().T) < budget.p_e:
        v = np.zeros((ch.n_t, d), dtype=complex)
        v[:, 0] = np.sqrt(budget.p_t) * q[:, -1]
    return v


def kkt_residual(ch: ChannelPair, budget: DesignBudget, v, lam, mu) -> float:
    """Max KKT residual of the original problem at (V, lambda, mu):
    stationarity (normalized by max(1, ||V||_F)), complementary slackness
    for both constraints, and primal feasibility violations."""
    v = np.asarray(v, dtype=complex)
    if v.ndim == 1:
        v = v[:, None]
    hi, he = ch.h_i, ch.h_e
    hiv = hi @ v
    hev = he @ v
    g_i = hi.conj().T @ _solve_pd(np.eye(ch.n_i) + hiv @ hiv.conj().T, hi)
    g_e = he.conj().T @ _solve_pd(np.eye(ch.n_e) + hev @ hev.conj().T, he)
    a = ch.eh_gram()
    stat = (-g_i + g_e + lam * np.eye(ch.n_t) - mu * a) @ v
    r_stat = np.linalg.norm(stat) / max(1.0, np.linalg.norm(v))
    power = float(np.linalg.norm(v) ** 2)
    eh_q = trace_inner(v, a @ v)
    c_e = budget.p_e / (ch.zeta * ch.sigma2_e)
    r_comp1 = abs(lam * (power - budget.p_t))
    r_comp2 = abs(mu * (eh_q - c_e))
    r_feas1 = max(power - budget.p_t, 0.0)
    r_feas2 = max(c_e - eh_q, 0.0)
    return float(max(r_stat, r_comp1, r_comp2, r_feas1, r_feas2))
