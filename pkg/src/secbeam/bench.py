"""Monte-Carlo experiment harness: channel generation, convergence traces,
and sweep experiments over transmit power, harvesting target, or antenna
count.

Channels are i.i.d. Rayleigh with average per-entry power set by the
path-loss figure; every instance draws from its own RNG stream derived
from (master seed, instance index), so results do not depend on execution
order. Sweeps pair the artificial-noise arm with the plain arm on
identical channel realizations, skip infeasible or nonpositive-rate
instances, and report the counts.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np

from .anopt import an_ibcd_solve, an_warmstart
from .errors import FeasibilityError
from .global_opt import (
    gram_difference_psd,
    solve_full_stream,
    solve_single_stream,
)
from .ibcd import ConvergenceTrace, ibcd_solve, warmstart
from .model import ChannelPair, DesignBudget, dbm_to_watts, feasibility

METHODS = ("single_stream", "full_stream", "ibcd", "an_ibcd")

SWEEP_AXES = ("p_t_dbm", "p_e_dbm", "n_t")


@dataclass
class ScenarioConfig:
    """One experiment scenario; power quantities in dBm."""

    n_t: int = 4
    n_i: int = 2
    n_e: int = 2
    d: int = 1
    p_t_dbm: float = 10.0
    p_e_dbm: float = -40.0
    sigma2_dbm: float = -50.0
    zeta: float = 0.5
    pathloss_db: float = 50.0
    seeds: tuple = (0,)
    method: str = "ibcd"
    eps: float = 1e-6

    def __post_init__(self):
        if min(self.n_t, self.n_i, self.n_e) < 1:
            raise ValueError("antenna counts must be at least 1")
        if not (1 <= self.d <= self.n_t):
            raise ValueError("stream count must satisfy 1 <= d <= n_t")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")

    def budget(self) -> DesignBudget:
        return DesignBudget(dbm_to_watts(self.p_t_dbm), dbm_to_watts(self.p_e_dbm))


def gen_channels(cfg: ScenarioConfig, seed) -> ChannelPair:
    """Draw one channel pair: entries i.i.d. circular complex Gaussian with
    per-entry average power 10^(-pathloss_db/10). Deterministic in seed."""
    rng = np.random.default_rng(seed)
    scale = np.sqrt(10.0 ** (-cfg.pathloss_db / 10.0) / 2.0)
    h_i = scale * (rng.standard_normal((cfg.n_i, cfg.n_t))
                   + 1j * rng.standard_normal((cfg.n_i, cfg.n_t)))
    h_e = scale * (rng.standard_normal((cfg.n_e, cfg.n_t))
                   + 1j * rng.standard_normal((cfg.n_e, cfg.n_t)))
    sigma2 = dbm_to_watts(cfg.sigma2_dbm)
    return ChannelPair(h_i, h_e, sigma2_i=sigma2, sigma2_e=sigma2, zeta=cfg.zeta)


def solve_instance(cfg: ScenarioConfig, ch: ChannelPair, start_seed=0,
                   kkt_tol=8e-5):
    """Dispatch one solve for the configured method.

    Returns (rate_bits, result, trace); the trace is None for the two
    closed-form-certified global methods.
    """
    budget = cfg.budget()
    if cfg.method == "single_stream":
        res = solve_single_stream(ch, budget)
        return res.rate_bits, res, None
    if cfg.method == "full_stream":
        res = solve_full_stream(ch, budget, tol_nats=cfg.eps)
        return res.rate_bits, res, None
    if cfg.method == "ibcd":
        v0 = warmstart(ch, cfg.d, budget, seed=start_seed)
        res, trace = ibcd_solve(ch, cfg.d, budget, v0, eps=cfg.eps,
                                kkt_tol=kkt_tol)
        return res.rate_bits, res, trace
    v0, ve0 = an_warmstart(ch, cfg.d, budget, seed=start_seed)
    res, trace = an_ibcd_solve(ch, cfg.d, budget, v0, ve0, eps=cfg.eps)
    return res.rate_bits, res, trace


@dataclass
class TraceRun:
    """Traces from several random starts on one channel realization."""

    seed: int
    traces: list
    reference_rate_bits: float | None


def run_trace(cfg: ScenarioConfig, n_starts: int) -> list:
    """Convergence experiment: for each configured channel seed, run the
    block-coordinate method from ``n_starts`` random warmstarts and attach
    the matching global reference when one exists (single-stream for d = 1,
    full-stream when d = N_T and the Gram difference is PSD)."""
    if cfg.method not in ("ibcd", "an_ibcd"):
        raise ValueError("trace experiments require an iterative method")
    runs = []
    for seed in cfg.seeds:
        ch = gen_channels(cfg, seed)
        budget = cfg.budget()
        feasible, margin = feasibility(ch, budget)
        if not feasible:
            raise FeasibilityError(
                f"seed {seed}: harvesting target misses by {-margin:.3e} W",
                margin=margin,
            )
        reference = None
        if cfg.method == "ibcd" and cfg.d == 1:
            reference = solve_single_stream(ch, budget).rate_bits
        elif cfg.method == "ibcd" and cfg.d == cfg.n_t and gram_difference_psd(ch):
            reference = solve_full_stream(ch, budget, tol_nats=cfg.eps).rate_bits
        traces = []
        for j in range(n_starts):
            _, _, trace = solve_instance(cfg, ch, start_seed=(seed, j))
            traces.append(trace)
        runs.append(TraceRun(seed=seed, traces=traces,
                             reference_rate_bits=reference))
    return runs


def write_trace_csv(run: TraceRun, prefix: str) -> list:
    paths = []
    for j, trace in enumerate(run.traces):
        path = f"{prefix}_seed{run.seed}_start{j}.csv"
        trace.write_csv(path)
        paths.append(path)
    return paths


@dataclass
class SweepResult:
    """Averaged rates along one axis; arms keyed by method name."""

    axis: str
    values: list
    arms: dict = field(default_factory=dict)
    # per arm: dict with per_seed (n_values x n_channels, NaN = skipped),
    # mean_rate_bits, n_used, n_skipped

    def primary_arm(self) -> str:
        return next(iter(self.arms))

    def write_csv(self, path) -> None:
        arms = list(self.arms)
        primary = arms[0]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            header = ["axis_value", "mean_rate_bits", "n_used", "n_skipped"]
            for arm in arms[1:]:
                header += [f"{arm}_mean_rate_bits", f"{arm}_n_used",
                           f"{arm}_n_skipped"]
            writer.writerow(header)
            for i, val in enumerate(self.values):
                row = [val]
                for arm in arms:
                    stats = self.arms[arm]
                    row += [repr(float(stats["mean_rate_bits"][i])),
                            int(stats["n_used"][i]), int(stats["n_skipped"][i])]
                writer.writerow(row)


def run_sweep(cfg: ScenarioConfig, axis: str, values, n_channels: int,
              kkt_tol=None) -> SweepResult:
    """Average achieved secrecy rate along one axis.

    Channels are drawn per (master seed, channel index) so the same channel
    set is reused across axis values where dimensions permit, and the
    artificial-noise arm is paired with the plain arm on identical
    channels. Infeasible and nonpositive-rate instances are skipped and
    counted.
    """
    if axis not in SWEEP_AXES:
        raise ValueError(f"axis must be one of {SWEEP_AXES}")
    values = list(values)
    if sorted(values) != values:
        raise ValueError("axis values must be sorted ascending")
    master = cfg.seeds[0] if cfg.seeds else 0
    arms = [cfg.method]
    if cfg.method == "an_ibcd":
        arms.append("ibcd")
    result = SweepResult(axis=axis, values=values)
    for arm in arms:
        result.arms[arm] = {
            "per_seed": np.full((len(values), n_channels), np.nan),
            "mean_rate_bits": np.full(len(values), np.nan),
            "n_used": np.zeros(len(values), dtype=int),
            "n_skipped": np.zeros(len(values), dtype=int),
        }
    for i, val in enumerate(values):
        cfg_i = replace(cfg, **{axis: int(val) if axis == "n_t" else float(val)})
        for j in range(n_channels):
            ch = gen_channels(cfg_i, (master, j))
            feasible, _ = feasibility(ch, cfg_i.budget())
            for arm_idx, arm in enumerate(arms):
                stats = result.arms[arm]
                if not feasible:
                    stats["n_skipped"][i] += 1
                    continue
                cfg_arm = replace(cfg_i, method=arm)
                rate, _, _ = solve_instance(
                    cfg_arm, ch, start_seed=(master, j, arm_idx), kkt_tol=kkt_tol
                )
                if rate <= 0.0:
                    stats["n_skipped"][i] += 1
                    continue
                stats["per_seed"][i, j] = rate
                stats["n_used"][i] += 1
        for arm in arms:
            stats = result.arms[arm]
            used = stats["per_seed"][i][np.isfinite(stats["per_seed"][i])]
            stats["mean_rate_bits"][i] = used.mean() if used.size else np.nan
    return result
