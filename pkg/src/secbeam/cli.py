"""Command-line interface.

Subcommands: ``solve`` (one instance), ``trace`` (convergence traces from
several random starts), ``sweep`` (averaged rates along an axis), and
``gen-channels`` (emit a channel file). A JSON config file can hold any
flag value; explicit flags override it. Exit codes: 0 success, 2 the
scenario is infeasible, 3 a solver failed.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .bench import (
    ScenarioConfig,
    SWEEP_AXES,
    gen_channels,
    run_sweep,
    run_trace,
    solve_instance,
    write_trace_csv,
)
from .errors import FeasibilityError, SingularityError, SolverError
from .model import ChannelPair, matrix_to_json

EXIT_OK = 0
EXIT_INFEASIBLE = 2
EXIT_SOLVER_FAILURE = 3


def _add_scenario_flags(parser, with_method=True):
    parser.add_argument("--config", help="JSON file with default flag values")
    parser.add_argument("--channels", help="channel-pair JSON file")
    parser.add_argument("--seed", type=int, help="channel seed (ignored with --channels)")
    if with_method:
        parser.add_argument("--method", choices=("single_stream", "full_stream",
                                                 "ibcd", "an_ibcd"))
    parser.add_argument("--streams", type=int, help="stream count d")
    parser.add_argument("--pt-dbm", type=float, help="transmit power budget, dBm")
    parser.add_argument("--pe-dbm", type=float, help="harvested-power target, dBm")
    parser.add_argument("--eps", type=float, help="convergence tolerance, nats")
    parser.add_argument("--nt", type=int, help="transmit antennas")
    parser.add_argument("--ni", type=int, help="information-receiver antennas")
    parser.add_argument("--ne", type=int, help="energy-receiver antennas")
    parser.add_argument("--sigma2-dbm", type=float, help="noise power, dBm")
    parser.add_argument("--zeta", type=float, help="energy conversion efficiency")
    parser.add_argument("--pathloss-db", type=float, help="average path loss, dB")


_CFG_KEYS = {
    "seed": None,
    "method": "method",
    "streams": "d",
    "pt_dbm": "p_t_dbm",
    "pe_dbm": "p_e_dbm",
    "eps": "eps",
    "nt": "n_t",
    "ni": "n_i",
    "ne": "n_e",
    "sigma2_dbm": "sigma2_dbm",
    "zeta": "zeta",
    "pathloss_db": "pathloss_db",
}


def _build_config(args) -> tuple[ScenarioConfig, int]:
    """Merge config-file values and flags into a ScenarioConfig; flags win."""
    file_vals = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            file_vals = json.load(fh)
    merged = dict(file_vals)
    for flag, _ in _CFG_KEYS.items():
        val = getattr(args, flag, None)
        if val is not None:
            merged[flag] = val
    seed = int(merged.pop("seed", 0))
    kwargs = {}
    for flag, key in _CFG_KEYS.items():
        if key is not None and flag in merged:
            kwargs[key] = merged[flag]
    kwargs["seeds"] = (seed,)
    return ScenarioConfig(**kwargs), seed


def _load_or_gen_channels(args, cfg, seed):
    if getattr(args, "channels", None):
        return ChannelPair.load(args.channels)
    return gen_channels(cfg, seed)


def _solution_payload(cfg, rate_bits, res, trace):
    v = np.asarray(res.v)
    payload = {
        "method": cfg.method,
        "rate_bits": rate_bits,
        "rate_nats": rate_bits * float(np.log(2.0)),
        "nonpositive_rate": bool(getattr(res, "nonpositive_rate", rate_bits <= 0)),
        "v": matrix_to_json(v if v.ndim == 2 else v[:, None]),
    }
    if hasattr(res, "v_e"):
        payload["v_e"] = matrix_to_json(res.v_e)
        payload["an_power_w"] = float(np.linalg.norm(res.v_e) ** 2)
    if hasattr(res, "branch"):
        payload["branch"] = res.branch
    if hasattr(res, "fw_gap_nats"):
        payload["fw_gap_nats"] = res.fw_gap_nats
    if hasattr(res, "lam"):
        payload["lambda"] = res.lam
        payload["mu"] = res.mu
        payload["iterations"] = res.iterations
    return payload


def _cmd_solve(args):
    cfg, seed = _build_config(args)
    ch = _load_or_gen_channels(args, cfg, seed)
    rate, res, trace = solve_instance(cfg, ch, start_seed=(seed, 0))
    payload = _solution_payload(cfg, rate, res, trace)
    text = json.dumps(payload, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK


def _cmd_trace(args):
    cfg, seed = _build_config(args)
    if cfg.method not in ("ibcd", "an_ibcd"):
        print("trace requires --method ibcd or an_ibcd", file=sys.stderr)
        return EXIT_SOLVER_FAILURE
    runs = run_trace(cfg, n_starts=args.starts)
    prefix = args.out_prefix or "trace"
    for run in runs:
        paths = write_trace_csv(run, prefix)
        ref = ("" if run.reference_rate_bits is None
               else f" (global reference {run.reference_rate_bits:.6f} bits)")
        print(f"seed {run.seed}: wrote {len(paths)} trace files{ref}")
    return EXIT_OK


def _cmd_sweep(args):
    cfg, _ = _build_config(args)
    values = [float(v) for v in args.values.split(",")]
    sweep = run_sweep(cfg, args.axis, values, n_channels=args.channels_per_point)
    out = args.out or "sweep.csv"
    sweep.write_csv(out)
    print(f"wrote {out}")
    return EXIT_OK


def _cmd_gen_channels(args):
    cfg, seed = _build_config(args)
    ch = gen_channels(cfg, seed)
    if args.out:
        ch.save(args.out)
        print(f"wrote {args.out}")
    else:
        print(json.dumps(ch.to_json_dict(), indent=2))
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="secbeam",
        description="Secrecy-rate beamforming designs for information-energy broadcast",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve one instance")
    _add_scenario_flags(p_solve)
    p_solve.add_argument("--out", help="write the solution JSON here")
    p_solve.set_defaults(func=_cmd_solve)

    p_trace = sub.add_parser("trace", help="convergence traces from random starts")
    _add_scenario_flags(p_trace)
    p_trace.add_argument("--starts", type=int, default=3)
    p_trace.add_argument("--out-prefix", help="prefix for per-start CSV files")
    p_trace.set_defaults(func=_cmd_trace)

    p_sweep = sub.add_parser("sweep", help="averaged rates along an axis")
    _add_scenario_flags(p_sweep)
    p_sweep.add_argument("--axis", choices=SWEEP_AXES, required=True)
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated ascending axis values")
    p_sweep.add_argument("--channels-per-point", type=int, default=20)
    p_sweep.add_argument("--out", help="output CSV path")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_gen = sub.add_parser("gen-channels", help="emit a channel-pair JSON file")
    _add_scenario_flags(p_gen, with_method=False)
    p_gen.add_argument("--out", help="output JSON path")
    p_gen.set_defaults(func=_cmd_gen_channels)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FeasibilityError as exc:
        print(f"infeasible scenario: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (SolverError, SingularityError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER_FAILURE


if __name__ == "__main__":
    sys.exit(main())
