"""Provably global solvers for two special cases of the secrecy design.

Single stream (d = 1): the fractional quadratic program collapses, after
homogenization, to minimizing u^H Q_E u over u^H Q_I u = 1 with the
quadratic harvesting cap u^H G u <= 0. When harvesting never binds this is
a generalized eigenproblem; otherwise it is solved exactly through a
two-constraint semidefinite relaxation plus rank reduction, which is tight.

Full stream (d = N_T) with H_I^H H_I - H_E^H H_E >= 0: the covariance
relaxation is tight and its objective is concave, so the problem is convex
in X = V V^H. We drive X to the optimum with a logarithmic-barrier Newton
method and certify global optimality with a conditional-gradient
(linearization) gap, whose direction subproblem is a linear SDP over the
same feasible set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FeasibilityError, PreconditionError, SolverError
from .linalg import (
    herm_basis,
    herm_coords,
    hermitize,
    hermitian_eig,
    inv_hpd,
    logdet_hpd,
    min_rayleigh_vec,
    solve_hpd,
    trace_inner,
)
from .model import (
    LN2,
    ChannelPair,
    DesignBudget,
    eh_vacuous,
    feasibility,
    harvested_power,
    secrecy_rate_nats,
)
from .sdp import EQ, GE, LE, OPTIMAL, SdpProblem, extract_rank_one, rank_reduce, solve_sdp

EIGEN_BRANCH = "eigen"
SDR_BRANCH = "sdr"

# numerical PSD test for the Gram difference F
F_PSD_RTOL = 1e-9


@dataclass
class SingleStreamSolution:
    v: np.ndarray
    rate_bits: float
    rate_nats: float
    branch: str
    nonpositive_rate: bool


@dataclass
class FullStreamSolution:
    x: np.ndarray
    v: np.ndarray
    rate_bits: float
    rate_nats: float
    fw_gap_nats: float
    iterations: int
    nonpositive_rate: bool


def gram_difference(ch: ChannelPair) -> np.ndarray:
    """F = H_I^H H_I - H_E^H H_E on normalized channels."""
    return hermitize(ch.ir_gram() - ch.eh_gram())


def gram_difference_psd(ch: ChannelPair) -> bool:
    """Numerical test of F >= 0: lambda_min(F) >= -1e-9 lambda_max(F)."""
    w = hermitian_eig(gram_difference(ch)).eigenvalues
    return bool(w[0] >= -F_PSD_RTOL * max(float(w[-1]), 0.0))


def solve_single_stream(ch: ChannelPair, budget: DesignBudget,
                        method: str = "auto") -> SingleStreamSolution:
    """Globally optimal rank-one beamformer under power and harvesting caps.

    The total power constraint is active at the optimum, so the search runs
    over full-power directions. ``method`` picks the branch: "auto" uses the
    generalized eigensolver when harvesting never binds and the semidefinite
    relaxation otherwise; "sdr" forces the relaxation (valid in both cases).
    """
    feasible, margin = feasibility(ch, budget)
    if not feasible:
        raise FeasibilityError(
            f"harvesting target misses by {-margin:.3e} W at full power",
            margin=margin,
        )
    if method not in ("auto", "sdr"):
        raise ValueError("method must be 'auto' or 'sdr'")
    n = ch.n_t
    p_t = budget.p_t
    q_e = hermitize(np.eye(n) / p_t + ch.eh_gram())
    q_i = hermitize(np.eye(n) / p_t + ch.ir_gram())
    g = hermitize(
        (budget.p_e / (p_t * ch.zeta * ch.sigma2_e)) * np.eye(n) - ch.eh_gram()
    )
    if method == "auto" and eh_vacuous(ch, budget):
        u, _ = min_rayleigh_vec(q_e, q_i)
        branch = EIGEN_BRANCH
    else:
        prob = SdpProblem(q_e, [(q_i, 1.0, EQ), (g, 0.0, LE)])
        sol = solve_sdp(prob)
        if sol.status != OPTIMAL:
            raise SolverError(f"relaxation solve ended with status {sol.status}")
        sol = rank_reduce(sol, prob)
        u = extract_rank_one(sol.x)
        branch = SDR_BRANCH
    v = np.sqrt(p_t) * u / np.linalg.norm(u)
    rate_nats = secrecy_rate_nats(ch, v)
    return SingleStreamSolution(
        v=v,
        rate_bits=rate_nats / LN2,
        rate_nats=rate_nats,
        branch=branch,
        nonpositive_rate=rate_nats <= 0.0,
    )


def _phi_parts(ch: ChannelPair, x):
    """Concave objective phi(X) in nats and its gradient on the normalized channels."""
    hi, he = ch.h_i, ch.h_e
    m_i = hermitize(np.eye(ch.n_i) + hi @ x @ hi.conj().T)
    m_e = hermitize(np.eye(ch.n_e) + he @ x @ he.conj().T)
    phi = logdet_hpd(m_i) - logdet_hpd(m_e)
    g_i = hermitize(hi.conj().T @ solve_hpd(m_i, hi))
    g_e = hermitize(he.conj().T @ solve_hpd(m_e, he))
    return phi, g_i - g_e, g_i, g_e


def _direction_sdp(ch: ChannelPair, budget: DesignBudget, grad):
    """max tr(grad S) over {S >= 0, tr S <= P_T, harvesting >= P_E}."""
    cons = [(np.eye(ch.n_t), budget.p_t, LE)]
    if budget.p_e > 0.0:
        cons.append(
            (ch.eh_gram(), budget.p_e / (ch.zeta * ch.sigma2_e), GE)
        )
    prob = SdpProblem(-np.asarray(grad), cons)
    sol = solve_sdp(prob)
    if sol.status != OPTIMAL:
        raise SolverError(f"direction solve ended with status {sol.status}")
    return sol.x


def _interior_start(ch: ChannelPair, budget: DesignBudget):
    """A strictly feasible covariance: X > 0, tr X < P_T, harvesting > P_E."""
    n = ch.n_t
    eye = np.eye(n, dtype=complex)
    if budget.p_e == 0.0:
        return (0.9 * budget.p_t / n) * eye
    q = hermitian_eig(ch.eh_gram()).eigenvectors[:, -1]
    atom = np.outer(q, q.conj())
    for c in (0.9, 0.99, 0.999, 1.0 - 1e-9):
        for beta in (0.0, 0.5, 0.9, 0.99, 0.999, 1.0 - 1e-6):
            x = (c * budget.p_t) * hermitize((1.0 - beta) * eye / n + beta * atom)
            eh_slack = harvested_power(ch, x) - budget.p_e
            if eh_slack > 1e-12 * max(budget.p_e, 1e-30):
                return x
    raise SolverError("could not find a strictly feasible starting covariance")


def _barrier_newton(ch: ChannelPair, budget: DesignBudget, x, tol_nats):
    """Path-following barrier maximization of phi over the feasible set."""
    n = ch.n_t
    eye = np.eye(n)
    basis = herm_basis(n)
    c_e = ch.zeta * ch.sigma2_e
    b_eh = ch.eh_gram()
    use_eh = budget.p_e > 0.0
    # barrier parameter count: n (PSD) + trace cap + optional harvesting cap
    nu = n + 1 + (1 if use_eh else 0)
    t = 1.0
    t_final = nu / (0.05 * tol_nats)
    while True:
        for _ in range(60):
            phi, grad_phi, g_i, g_e = _phi_parts(ch, x)
            x_inv = inv_hpd(x)
            s_t = budget.p_t - float(np.real(np.trace(x)))
            s_e = harvested_power(ch, x) - budget.p_e if use_eh else 1.0
            grad = t * grad_phi + x_inv - eye / s_t
            if use_eh:
                grad = grad + (c_e / s_e) * b_eh

            def hess_apply(delta):
                out = t * (-g_i @ delta @ g_i + g_e @ delta @ g_e)
                out = out - x_inv @ delta @ x_inv
                out = out - (np.real(np.trace(delta)) / s_t**2) * eye
                if use_eh:
                    out = out - (c_e**2 * trace_inner(b_eh, delta) / s_e**2) * b_eh
                return hermitize(out)

            dim = len(basis)
            hmat = np.empty((dim, dim))
            cols = [hess_apply(e) for e in basis]
            for j in range(dim):
                hmat[:, j] = herm_coords(cols[j], basis)
            hmat = 0.5 * (hmat + hmat.T)
            gvec = herm_coords(grad, basis)
            try:
                hvec = np.linalg.solve(-hmat, gvec)
            except np.linalg.LinAlgError:
                hvec = np.linalg.lstsq(-hmat, gvec, rcond=None)[0]
            decrement2 = float(gvec @ hvec)
            if not np.isfinite(decrement2) or decrement2 <= 1e-13:
                break
            step = hermitize(
                sum(c * e for c, e in zip(hvec, basis))
            )
            # fraction to boundary, then backtrack on the barrier value
            alpha = 1.0
            w_min = np.linalg.eigvalsh(solve_hpd(x, step))[0].real
            if w_min < 0:
                alpha = min(alpha, -0.99 / w_min)
            tr_step = float(np.real(np.trace(step)))
            if tr_step > 0:
                alpha = min(alpha, 0.99 * s_t / tr_step)
            if use_eh:
                eh_step = c_e * trace_inner(b_eh, step)
                if eh_step < 0:
                    alpha = min(alpha, -0.99 * s_e / eh_step)

            def barrier_value(xc):
                try:
                    val = t * _phi_parts(ch, xc)[0] + logdet_hpd(xc)
                except Exception:
                    return -np.inf
                st = budget.p_t - float(np.real(np.trace(xc)))
                if st <= 0:
                    return -np.inf
                val += np.log(st)
                if use_eh:
                    se = harvested_power(ch, xc) - budget.p_e
                    if se <= 0:
                        return -np.inf
                    val += np.log(se)
                return val

            base = barrier_value(x)
            improved = False
            while alpha > 1e-14:
                x_new = hermitize(x + alpha * step)
                if barrier_value(x_new) > base - 1e-12 * abs(base):
                    x = x_new
                    improved = True
                    break
                alpha *= 0.5
            if not improved:
                break
        if t >= t_final:
            return x
        t = min(10.0 * t, t_final)


def solve_full_stream(ch: ChannelPair, budget: DesignBudget,
                      tol_nats: float = 1e-6, max_fw_iter: int = 300) -> FullStreamSolution:
    """Global solve of the square-beamformer covariance problem with a
    conditional-gradient optimality certificate.

    Requires the Gram difference F = H_I^H H_I - H_E^H H_E to be positive
    semidefinite (that makes the objective concave and the covariance
    relaxation tight). The returned fw_gap_nats bounds the distance to the
    global optimum from above.
    """
    if not gram_difference_psd(ch):
        raise PreconditionError(
            "H_I^H H_I - H_E^H H_E is not positive semidefinite; "
            "use the block-coordinate solver instead"
        )
    feasible, margin = feasibility(ch, budget)
    if not feasible:
        raise FeasibilityError(
            f"harvesting target misses by {-margin:.3e} W at full power",
            margin=margin,
        )
    x = _interior_start(ch, budget)
    x = _barrier_newton(ch, budget, x, tol_nats)

    # conditional-gradient loop: linearize, optimize the linearization over
    # the feasible set, take the exact line-search step, stop on small gap.
    gap = np.inf
    iterations = 0
    for outer in range(4):
        for _ in range(max_fw_iter):
            iterations += 1
            phi, grad, _, _ = _phi_parts(ch, x)
            s = _direction_sdp(ch, budget, grad)
            gap = trace_inner(grad, s - x)
            if gap <= tol_nats:
                break
            d = s - x
            gamma = _golden_max(
                lambda g: _phi_parts(ch, hermitize(x + g * d))[0], 0.0, 1.0
            )
            x_new = hermitize(x + gamma * d)
            if _phi_parts(ch, x_new)[0] >= phi:
                x = x_new
        if gap <= tol_nats:
            break
        # fall back to a tighter barrier path if the gap has not certified
        x = _barrier_newton(ch, budget, x, tol_nats * 1e-2 ** (outer + 1))
    if gap > tol_nats:
        raise SolverError(
            f"conditional-gradient gap {gap:.3e} nats above target {tol_nats:.1e}"
        )

    eig = hermitian_eig(x)
    v = eig.eigenvectors * np.sqrt(np.maximum(eig.eigenvalues, 0.0))
    rate_nats = secrecy_rate_nats(ch, v)
    return FullStreamSolution(
        x=x,
        v=v,
        rate_bits=rate_nats / LN2,
        rate_nats=rate_nats,
        fw_gap_nats=float(gap),
        iterations=iterations,
        nonpositive_rate=rate_nats <= 0.0,
    )


def _golden_max(fun, lo, hi, tol=1e-10):
    """Golden-section maximization on [lo, hi] to interval width tol."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fun(c), fun(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fun(d)
    return 0.5 * (a + b)


def concave_form_identity_check(ch: ChannelPair, x) -> float:
    """Max deviation of two matrix identities behind the concave reformulation.

    Checks phi(X) against logdet(I + F^(1/2) (I + X B)^{-1} X F^(1/2)) with
    B = H_E^H H_E, and the resolvent identity
    (I + X B)^{-1} X = X - X H_E^H (I + H_E X H_E^H)^{-1} H_E X.
    """
    x = hermitize(np.asarray(x, dtype=complex))
    f = gram_difference(ch)
    w = hermitian_eig(f)
    f_half = (w.eigenvectors * np.sqrt(np.maximum(w.eigenvalues, 0.0))) @ \
        w.eigenvectors.conj().T
    b = ch.eh_gram()
    n = ch.n_t
    y = np.linalg.solve(np.eye(n) + x @ b, x)
    phi = _phi_parts(ch, x)[0]
    inner_mat = hermitize(np.eye(n) + f_half @ y @ f_half)
    sign, logabs = np.linalg.slogdet(inner_mat)
    dev1 = abs(phi - logabs) if sign > 0 else np.inf
    he = ch.h_e
    m_e = hermitize(np.eye(ch.n_e) + he @ x @ he.conj().T)
    rhs = x - x @ he.conj().T @ solve_hpd(m_e, he @ x)
    dev2 = float(np.max(np.abs(y - rhs)))
    return float(max(dev1, dev2))
