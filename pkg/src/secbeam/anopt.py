"""Joint beamforming and artificial-noise design.

The transmitter spends part of the power budget on a noise covariance
Z = V_E V_E^H that degrades the eavesdropping energy receiver while still
feeding its harvester. The block-coordinate scheme mirrors the no-AN
solver: five auxiliary blocks (two receive filters, three weights) have
closed-form updates, and the joint (V, V_E) block minimizes a separable
convex quadratic under the total power cap and the harvesting constraint
linearized at the incumbent pair. At fixed multipliers both blocks are
closed-form in their own eigenbases, so the dual again reduces to a
bisection on the power multiplier with an inner closed-form harvesting
multiplier summed over the two blocks.
"""

from __future__ import annotations

import numpy as np

from .errors import FeasibilityError, SolverError
from .ibcd import (
    ConvergenceTrace,
    _logdet_pd,
    _solve_pd,
    _SubproblemDegenerate,
    warmstart,
)
from .linalg import hermitize, trace_inner
from .model import (
    LN2,
    ChannelPair,
    DesignBudget,
    an_secrecy_rate_nats,
    feasibility,
    harvested_power,
)

from dataclasses import dataclass


@dataclass
class AnResult:
    v: np.ndarray
    v_e: np.ndarray
    rate_bits: float
    rate_nats: float
    lam: float
    mu: float
    iterations: int
    nonpositive_rate: bool


def _an_rate_nats(ch, v, v_e):
    gi = ch.h_i @ v
    gie = ch.h_i @ v_e
    ge = ch.h_e @ v
    gee = ch.h_e @ v_e
    n_i = np.eye(ch.n_i) + gie @ gie.conj().T
    n_e = np.eye(ch.n_e) + gee @ gee.conj().T
    t_i = _logdet_pd(n_i + gi @ gi.conj().T) - _logdet_pd(n_i)
    t_e = _logdet_pd(n_e + ge @ ge.conj().T) - _logdet_pd(n_e)
    return t_i - t_e


def an_update_aux(ch: ChannelPair, v, v_e):
    """Closed-form auxiliary updates at a fixed (V, V_E) pair.

    U_1 is the IR receive filter against signal-plus-AN, U_2 the ER filter
    for the AN component, W_1 and W_2 the corresponding inverse error
    covariances, and W_3 the inverse of the ER's total receive covariance.
    """
    v = np.asarray(v, dtype=complex)
    v_e = np.asarray(v_e, dtype=complex)
    hi, he = ch.h_i, ch.h_e
    hiv = hi @ v
    hive = hi @ v_e
    hev = he @ v
    heve = he @ v_e
    n1 = np.eye(ch.n_i) + hive @ hive.conj().T
    u1 = _solve_pd(n1 + hiv @ hiv.conj().T, hiv)
    u2 = _solve_pd(np.eye(ch.n_e) + heve @ heve.conj().T, heve)
    w1 = hermitize(np.eye(v.shape[1]) + hiv.conj().T @ _solve_pd(n1, hiv))
    w2 = hermitize(np.eye(ch.n_t) + heve.conj().T @ heve)
    w3 = hermitize(_solve_pd(
        np.eye(ch.n_e) + heve @ heve.conj().T + hev @ hev.conj().T,
        np.eye(ch.n_e),
    ))
    return u1, u2, w1, w2, w3


def an_error_matrices(ch: ChannelPair, v, v_e, u1, u2):
    """Error covariances of the two auxiliary estimation problems."""
    v = np.asarray(v, dtype=complex)
    v_e = np.asarray(v_e, dtype=complex)
    d = v.shape[1]
    hi, he = ch.h_i, ch.h_e
    r1 = np.eye(d) - u1.conj().T @ hi @ v
    hive = hi @ v_e
    e1 = hermitize(
        r1 @ r1.conj().T
        + u1.conj().T @ (np.eye(ch.n_i) + hive @ hive.conj().T) @ u1
    )
    r2 = np.eye(ch.n_t) - u2.conj().T @ he @ v_e
    e2 = hermitize(r2 @ r2.conj().T + u2.conj().T @ u2)
    return e1, e2


def an_objective_f(ch: ChannelPair, v, v_e, u1, u2, w1, w2, w3) -> float:
    """Variational objective in nats; equals the AN secrecy rate at the
    closed-form auxiliaries. Constants d, N_T, N_E keep the identity exact."""
    v = np.asarray(v, dtype=complex)
    v_e = np.asarray(v_e, dtype=complex)
    d = v.shape[1]
    e1, e2 = an_error_matrices(ch, v, v_e, u1, u2)
    hev = ch.h_e @ v
    heve = ch.h_e @ v_e
    cov3 = hermitize(
        np.eye(ch.n_e) + heve @ heve.conj().T + hev @ hev.conj().T
    )
    val = _logdet_pd(w1) - trace_inner(hermitize(w1), e1) + d
    val += _logdet_pd(w2) - trace_inner(hermitize(w2), e2) + ch.n_t
    val += _logdet_pd(w3) - trace_inner(hermitize(w3), cov3) + ch.n_e
    return float(val)


def _an_bisection(mv, kv, a_vt, me, ke, a_vet, b_lin, p_t, eps, lam_hint=None):
    """Joint two-block quadratic minimization under the shared power cap and
    the linearized harvesting bound; bisection on the power multiplier."""
    sig_v, p_v = np.linalg.eigh(hermitize(mv))
    sig_e, p_e = np.linalg.eigh(hermitize(me))
    sig_v = np.maximum(sig_v, 0.0)
    sig_e = np.maximum(sig_e, 0.0)
    sig_max = max(float(sig_v[-1]), float(sig_e[-1]))
    phk_v = p_v.conj().T @ kv
    pha_v = p_v.conj().T @ a_vt
    phk_e = p_e.conj().T @ ke
    pha_e = p_e.conj().T @ a_vet
    if not (np.any(np.abs(pha_v) > 0.0) or np.any(np.abs(pha_e) > 0.0)) \
            and b_lin > 1e-300:
        raise _SubproblemDegenerate("linearized harvesting constraint is unreachable")

    v_kk = np.sum(np.abs(phk_v) ** 2, axis=1)
    v_ka = np.sum(np.real(np.conj(pha_v) * phk_v), axis=1)
    v_aa = np.sum(np.abs(pha_v) ** 2, axis=1)
    e_kk = np.sum(np.abs(phk_e) ** 2, axis=1)
    e_ka = np.sum(np.real(np.conj(pha_e) * phk_e), axis=1)
    e_aa = np.sum(np.abs(pha_e) ** 2, axis=1)

    def probe(lam):
        wv = 1.0 / (lam + sig_v)
        we = 1.0 / (lam + sig_e)
        den = 2.0 * (float(wv @ v_aa) + float(we @ e_aa))
        if den > 0.0:
            num = b_lin - 2.0 * (float(wv @ v_ka) + float(we @ e_ka))
            mu = max(num, 0.0) / den
        else:
            mu = 0.0
        power = float((wv * wv) @ (v_kk + (2.0 * mu) * v_ka + (mu * mu) * v_aa))
        power += float((we * we) @ (e_kk + (2.0 * mu) * e_ka + (mu * mu) * e_aa))
        return mu, power

    def blocks_of(lam, mu):
        v = p_v @ ((phk_v + mu * pha_v) / (lam + sig_v)[:, None])
        v_e = p_e @ ((phk_e + mu * pha_e) / (lam + sig_e)[:, None])
        return v, v_e

    lam_floor = 0.0
    if min(float(sig_v[0]), float(sig_e[0])) <= 1e-12 * max(sig_max, 1e-300):
        lam_floor = 1e-12 * max(sig_max, 1e-300)
        if sig_max <= 0.0:
            if b_lin <= 1e-300:
                return np.zeros_like(kv), np.zeros_like(ke), 0.0, 0.0
            raise _SubproblemDegenerate("curvature and harvesting both vanish")

    mu0, power0 = probe(lam_floor)
    if power0 <= p_t:
        v, v_e = blocks_of(lam_floor, mu0)
        return v, v_e, float(lam_floor), float(mu0)

    lam_u = lam_hint if (lam_hint is not None and lam_hint > lam_floor) else 1.0
    lam_l = lam_floor
    for _ in range(300):
        if probe(lam_u)[1] <= p_t:
            break
        lam_l = lam_u
        lam_u *= 2.0
    else:
        raise SolverError("failed to bracket the power multiplier")

    for _ in range(400):
        lam = 0.5 * (lam_l + lam_u)
        if probe(lam)[1] - p_t >= 0.0:
            lam_l = lam
        else:
            lam_u = lam
        if lam_u - lam_l <= eps:
            mu_u, power_u = probe(lam_u)
            slack = lam_u * (p_t - power_u)
            if slack <= 1e-12 * max(1.0, lam_u * p_t) or \
                    lam_u - lam_l <= 1e-15 * max(lam_u, 1.0):
                break
    lam = lam_u
    mu, _ = probe(lam)
    v, v_e = blocks_of(lam, mu)
    return v, v_e, float(lam), float(mu)


def an_solve_subproblem(ch: ChannelPair, v_t, ve_t, aux, budget: DesignBudget,
                        eps: float = 1e-6, lam_hint=None):
    """Exact joint (V, V_E) update at fixed auxiliaries.

    The quadratic separates over the two blocks at fixed multipliers; the
    harvesting constraint is linearized at (v_t, ve_t) with its multiplier
    in closed form, summing the two blocks' contributions.
    """
    v_t = np.asarray(v_t, dtype=complex)
    ve_t = np.asarray(ve_t, dtype=complex)
    u1, u2, w1, w2, w3 = aux
    hi, he = ch.h_i, ch.h_e
    u1w = u1 @ hermitize(w1)
    quad_ir = hi.conj().T @ (u1w @ u1.conj().T) @ hi
    quad_e3 = he.conj().T @ hermitize(w3) @ he
    mv = hermitize(quad_ir + quad_e3)
    u2w = u2 @ hermitize(w2)
    me = hermitize(quad_ir + he.conj().T @ (u2w @ u2.conj().T) @ he + quad_e3)
    kv = hi.conj().T @ u1w
    ke = he.conj().T @ u2w
    a_vt = he.conj().T @ (he @ v_t)
    a_vet = he.conj().T @ (he @ ve_t)
    c_e = budget.p_e / (ch.zeta * ch.sigma2_e)
    b_lin = c_e + trace_inner(v_t, a_vt) + trace_inner(ve_t, a_vet)
    v, v_e, lam, mu = _an_bisection(
        mv, kv, a_vt, me, ke, a_vet, b_lin, budget.p_t, eps, lam_hint
    )

    def joint_obj(vv, vve):
        return (trace_inner(vv, mv @ vv) - 2.0 * trace_inner(kv, vv)
                + trace_inner(vve, me @ vve) - 2.0 * trace_inner(ke, vve))

    if joint_obj(v, v_e) > joint_obj(v_t, ve_t):
        return v_t, ve_t, lam, mu
    return v, v_e, lam, mu


def an_warmstart(ch: ChannelPair, d: int, budget: DesignBudget, seed=0):
    """Feasible (V, V_E) start: the no-AN warmstart scaled back to make room
    for a small isotropic AN seed, shrinking the AN share until the
    harvesting target stays met."""
    v_full = warmstart(ch, d, budget, seed=seed)
    for alpha in (0.05, 0.025, 0.01, 0.005, 0.001, 0.0):
        v = np.sqrt(1.0 - alpha) * v_full
        v_e = np.sqrt(alpha * budget.p_t / ch.n_t) * np.eye(ch.n_t, dtype=complex)
        cov = v @ v.conj().T + v_e @ v_e.conj().T
        if harvested_power(ch, cov) >= budget.p_e:
            return v, v_e
    return v_full, np.zeros((ch.n_t, ch.n_t), dtype=complex)


def _check_initial(ch, budget, v, v_e):
    power = float(np.linalg.norm(v) ** 2 + np.linalg.norm(v_e) ** 2)
    cov = v @ v.conj().T + v_e @ v_e.conj().T
    eh = harvested_power(ch, cov)
    if power > budget.p_t * (1.0 + 1e-8):
        raise FeasibilityError(
            f"initial pair uses {power:.6e} W, budget is {budget.p_t:.6e} W"
        )
    if eh < budget.p_e * (1.0 - 1e-7):
        raise FeasibilityError(
            f"initial pair harvests {eh:.3e} W < target {budget.p_e:.3e} W"
        )


def an_ibcd_solve(ch: ChannelPair, d: int, budget: DesignBudget, v0, ve0,
                  eps: float = 1e-6, max_iter: int = 5000):
    """Block-coordinate descent on the joint beamforming-plus-AN design from
    a feasible start; stops when the AN secrecy rate improvement drops to
    eps nats. The rate sequence is nondecreasing and every iterate feasible.
    """
    v = np.asarray(v0, dtype=complex)
    v_e = np.asarray(ve0, dtype=complex)
    if v.ndim == 1:
        v = v[:, None]
    if v.shape != (ch.n_t, d) or v_e.shape != (ch.n_t, ch.n_t):
        raise FeasibilityError(
            f"initial shapes {v.shape}, {v_e.shape} do not match "
            f"({ch.n_t}, {d}) and ({ch.n_t}, {ch.n_t})"
        )
    _check_initial(ch, budget, v, v_e)

    def record():
        cov = v @ v.conj().T + v_e @ v_e.conj().T
        rates.append(_an_rate_nats(ch, v, v_e))
        powers.append(float(np.linalg.norm(v) ** 2 + np.linalg.norm(v_e) ** 2))
        margins.append(harvested_power(ch, cov) - budget.p_e)
        an_powers.append(float(np.linalg.norm(v_e) ** 2))

    rates, powers, margins, an_powers = [], [], [], []
    record()
    lam = mu = 0.0
    lam_hint = None
    iterations = 0
    for _ in range(max_iter):
        iterations += 1
        aux = an_update_aux(ch, v, v_e)
        v, v_e, lam, mu = an_solve_subproblem(
            ch, v, v_e, aux, budget, eps, lam_hint
        )
        lam_hint = lam if lam > 0 else None
        record()
        if rates[-1] - rates[-2] <= eps:
            break

    trace = ConvergenceTrace(
        rates_bits=np.array(rates) / LN2,
        power_w=np.array(powers),
        eh_margin_w=np.array(margins),
        lam=lam,
        mu=mu,
        an_power_w=np.array(an_powers),
    )
    rate_nats = rates[-1]
    result = AnResult(
        v=v,
        v_e=v_e,
        rate_bits=rate_nats / LN2,
        rate_nats=rate_nats,
        lam=lam,
        mu=mu,
        iterations=iterations,
        nonpositive_rate=rate_nats <= 0.0,
    )
    return result, trace
