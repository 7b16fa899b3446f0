"""Secrecy-rate-maximizing transmit beamforming for a two-receiver MIMO
information-energy broadcast system: global solvers for the single-stream
and Gram-dominant full-stream cases, an inexact block-coordinate-descent
solver for the general case, an artificial-noise extension, and a
Monte-Carlo experiment harness."""

__version__ = "0.1.0"

from .anopt import AnResult, an_ibcd_solve, an_warmstart
from .bench import ScenarioConfig, SweepResult, gen_channels, run_sweep, run_trace
from .errors import (
    DataError,
    DimensionError,
    FeasibilityError,
    PreconditionError,
    RankError,
    SingularityError,
    SolverError,
)
from .global_opt import (
    FullStreamSolution,
    SingleStreamSolution,
    concave_form_identity_check,
    gram_difference_psd,
    solve_full_stream,
    solve_single_stream,
)
from .ibcd import (
    ConvergenceTrace,
    IbcdResult,
    ibcd_solve,
    kkt_residual,
    objective_f,
    solve_linearized_subproblem,
    update_aux,
    warmstart,
)
from .model import (
    ChannelPair,
    DesignBudget,
    an_secrecy_rate,
    an_secrecy_rate_nats,
    dbm_to_watts,
    eh_vacuous,
    feasibility,
    harvested_power,
    secrecy_rate,
    secrecy_rate_nats,
    watts_to_dbm,
)
from .sdp import SdpProblem, SdpSolution, extract_rank_one, rank_reduce, solve_sdp

__all__ = [
    "AnResult",
    "ChannelPair",
    "ConvergenceTrace",
    "DataError",
    "DesignBudget",
    "DimensionError",
    "FeasibilityError",
    "FullStreamSolution",
    "IbcdResult",
    "PreconditionError",
    "RankError",
    "ScenarioConfig",
    "SdpProblem",
    "SdpSolution",
    "SingleStreamSolution",
    "SingularityError",
    "SolverError",
    "SweepResult",
    "an_ibcd_solve",
    "an_secrecy_rate",
    "an_secrecy_rate_nats",
    "an_warmstart",
    "concave_form_identity_check",
    "dbm_to_watts",
    "eh_vacuous",
    "extract_rank_one",
    "feasibility",
    "gen_channels",
    "gram_difference_psd",
    "harvested_power",
    "ibcd_solve",
    "kkt_residual",
    "objective_f",
    "rank_reduce",
    "run_sweep",
    "run_trace",
    "secrecy_rate",
    "secrecy_rate_nats",
    "solve_full_stream",
    "solve_linearized_subproblem",
    "solve_sdp",
    "solve_single_stream",
    "update_aux",
    "warmstart",
    "watts_to_dbm",
]
