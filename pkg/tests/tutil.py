"""Shared fixtures and oracle helpers for the test suite."""

import numpy as np

from secbeam.linalg import hermitize
from secbeam.model import ChannelPair, DesignBudget, dbm_to_watts, harvested_power

LN2 = np.log(2.0)

# fixed 2x2 test channel with H_I^H H_I - H_E^H H_E >= 0; entries are
# already noise-normalized (unit noise power)
REF_H_I = np.array([[-0.8355 - 0.4547j, 1.5249 + 0.9305j],
                    [1.1033 - 0.9940j, 1.6232 - 1.0196j]])
REF_H_E = np.array([[0.1409 - 0.1914j, 0.3241 + 0.2328j],
                    [0.7981 + 0.7771j, -0.9295 + 0.0945j]])

# rate at V = sqrt(0.05) I on the reference channel, frozen from a 60-digit
# evaluation of the two 2x2 determinants
REF_RATE_NATS_EVEN_SPLIT = 0.327016435845010699421893040809
REF_RATE_BITS_EVEN_SPLIT = 0.471784990282780789874374879048

# global optimum of the full-stream design on the reference channel at
# P_T = 20 dBm, P_E = -30 dBm (regression constant, certified to 1e-8 nats
# and cross-checked by the block-coordinate solver)
REF_FULL_STREAM_BITS = 0.7048242521737


def ref_channel(zeta=0.5):
    return ChannelPair(REF_H_I, REF_H_E, sigma2_i=1.0, sigma2_e=1.0, zeta=zeta)


def ref_budget():
    return DesignBudget(dbm_to_watts(20.0), dbm_to_watts(-30.0))


def rayleigh_channel(seed, n_t=4, n_i=2, n_e=2, avg_power=1e-5,
                     sigma2=1e-8, zeta=0.5):
    """Random channel with the simulation-default statistics."""
    rng = np.random.default_rng(seed)
    s = np.sqrt(avg_power / 2.0)
    h_i = s * (rng.standard_normal((n_i, n_t)) + 1j * rng.standard_normal((n_i, n_t)))
    h_e = s * (rng.standard_normal((n_e, n_t)) + 1j * rng.standard_normal((n_e, n_t)))
    return ChannelPair(h_i, h_e, sigma2_i=sigma2, sigma2_e=sigma2, zeta=zeta)


def fig2_budget():
    return DesignBudget(dbm_to_watts(10.0), dbm_to_watts(-40.0))


def rand_herm(rng, n, scale=1.0):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return hermitize(a) * scale


def rand_hpd(rng, n, scale=1.0, ridge=0.1):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return hermitize(a @ a.conj().T) * scale + ridge * scale * np.eye(n)


def rand_psd(rng, n, scale=1.0, rank=None):
    r = rank or n
    a = rng.standard_normal((n, r)) + 1j * rng.standard_normal((n, r))
    return hermitize(a @ a.conj().T) * scale


def assert_trace_valid(trace, budget, eps_mono=1e-9):
    """Monotone nondecreasing rate and feasible iterates, everywhere."""
    rates_nats = trace.rates_bits * LN2
    diffs = np.diff(rates_nats)
    assert diffs.size == 0 or diffs.min() >= -eps_mono, \
        f"rate decreased by {-diffs.min():.3e} nats"
    assert trace.power_w.max() <= budget.p_t * (1.0 + 1e-8), \
        f"power exceeded budget by {trace.power_w.max() - budget.p_t:.3e} W"
    assert trace.eh_margin_w.min() >= -budget.p_e * 1e-7, \
        f"harvesting fell short by {-trace.eh_margin_w.min():.3e} W"


def well_posed_sdp(rng, n, m):
    """Random SDP instance with strictly feasible primal and dual."""
    from secbeam.sdp import EQ, GE, LE

    x0 = rand_hpd(rng, n, ridge=0.5)
    senses = [(EQ, LE, GE)[int(rng.integers(0, 3))] for _ in range(m)]
    cons, y0 = [], []
    for sense in senses:
        a = rand_herm(rng, n)
        val = float(np.real(np.sum(np.conj(a) * x0)))
        off = {EQ: 0.0, LE: 0.1 + abs(rng.standard_normal()) * 0.5,
               GE: -0.1 - abs(rng.standard_normal()) * 0.5}[sense]
        cons.append((a, val + off, sense))
        yi = rng.standard_normal()
        if sense == LE:
            yi = -abs(yi)
        elif sense == GE:
            yi = abs(yi)
        y0.append(yi)
    z0 = rand_hpd(rng, n, ridge=0.3)
    c = z0 + sum(yi * a for yi, (a, _, _) in zip(y0, cons))
    from secbeam.sdp import SdpProblem

    return SdpProblem(c, cons)


def sdp_kkt_metrics(problem, sol):
    """Worst relative KKT residual of an SDP solution."""
    from secbeam.linalg import trace_inner
    from secbeam.sdp import EQ, LE

    z = hermitize(problem.c - sum(
        y * a for y, (a, _, _) in zip(sol.duals, problem.constraints)
    ))
    z_min = float(np.linalg.eigvalsh(z)[0])
    comp = abs(trace_inner(sol.x, z))
    viol = 0.0
    for (a, b, sense), y in zip(problem.constraints, sol.duals):
        val = trace_inner(a, sol.x)
        rb = max(1.0, abs(b))
        if sense == EQ:
            viol = max(viol, abs(val - b) / rb)
        elif sense == LE:
            viol = max(viol, (val - b) / rb, y / rb if y > 0 else 0.0)
        else:
            viol = max(viol, (b - val) / rb, -y / rb if y < 0 else 0.0)
    scale = 1.0 + abs(sol.objective)
    x_min = float(np.linalg.eigvalsh(hermitize(sol.x))[0])
    return max(
        viol,
        max(-z_min, 0.0) / (1.0 + np.linalg.norm(problem.c)),
        max(-x_min, 0.0),
        comp / scale,
        sol.gap,
    )


def eh_margin(ch, budget, v, v_e=None):
    cov = np.asarray(v) @ np.asarray(v).conj().T
    if v_e is not None:
        cov = cov + np.asarray(v_e) @ np.asarray(v_e).conj().T
    return harvested_power(ch, cov) - budget.p_e
