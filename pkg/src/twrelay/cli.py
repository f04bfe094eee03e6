"""Command line entry point: ``twrelay <experiment> [options]`` or ``twrelay solve``."""

import argparse
import logging
import math
import sys

import numpy as np

from .bound import compute_upper_bound
from .channel import SystemConfig, draw_channels, load_config
from .experiments import EXPERIMENTS, METHODS, default_spec, failed_methods, records_to_csv, run_experiment
from .potdc import run_potdc
from .problem import build_problem, log_objective, relay_matrix, sum_rate
from .rages import compute_rho_bounds, rages_1d, rages_2d

log = logging.getLogger("twrelay")


def _methods(text):
    items = [m.strip() for m in text.split(",") if m.strip()]
    bad = [m for m in items if m not in METHODS]
    if bad or not items:
        raise argparse.ArgumentTypeError(f"unknown methods {bad}; choose from {','.join(METHODS)}")
    return tuple(items)


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _ints(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser():
    parser = argparse.ArgumentParser(
        prog="twrelay", description="Two-way AF relay sum-rate optimization experiments.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file overriding the system parameters")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--segments", type=int, default=30, help="upper-bound segments")

    for name in EXPERIMENTS:
        p = sub.add_parser(name, parents=[common])
        p.add_argument("--trials", type=int)
        p.add_argument("--methods", type=_methods, default=METHODS,
                       help="comma-separated subset of " + ",".join(METHODS))
        p.add_argument("--out", help="CSV path (default: stdout)")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--timing", action="store_true", help="fill the wall_ms column")
        p.add_argument("--spacing", choices=("linear", "log"),
                       help="upper-bound segment placement (default depends on the experiment)")
        if name == "antenna_sweep":
            p.add_argument("--sweep", type=_ints, help="relay antenna counts, e.g. 2,3,4,5")
        elif name == "distance_sweep":
            p.add_argument("--sweep", type=_floats, help="relay to terminal 2 distances")
        else:
            p.add_argument("--sweep", type=_floats, help="inverse noise powers")

    p = sub.add_parser("solve", parents=[common], help="optimize one channel draw")
    p.add_argument("--method", choices=("potdc", "rages2d", "rages1d"), default="potdc")
    return parser


def _run_sweep(args):
    spec = default_spec(args.command, seed=args.seed, trials=args.trials,
                        methods=args.methods, segments_n=args.segments,
                        sweep=args.sweep, output_path=args.out,
                        workers=args.workers, timing=args.timing,
                        spacing=args.spacing)
    if args.config:
        spec.base_config = load_config(args.config, base=spec.base_config)
    records = run_experiment(spec)
    if not args.out:
        sys.stdout.write(records_to_csv(records))
    failed = failed_methods(records)
    for m in failed:
        log.error("method %s failed in every trial", m)
    return 1 if failed else 0


def _run_solve(args):
    config = load_config(args.config) if args.config else SystemConfig()
    ch = draw_channels(config, args.seed)
    pm = build_problem(config, ch)
    potdc = run_potdc(pm)
    if args.method == "potdc":
        g, iters = potdc.g, potdc.iterations
    else:
        search = rages_2d if args.method == "rages2d" else rages_1d
        res = search(pm, compute_rho_bounds(config, ch))
        g, iters = res.g, res.evaluations
    ub = compute_upper_bound(pm, potdc.relaxed_value, args.segments)
    with np.printoptions(precision=6, suppress=True, linewidth=120):
        print("relay matrix G:")
        print(relay_matrix(g, config.m_r))
    print(f"method          {args.method}")
    print(f"sum_rate        {sum_rate(g, config, ch):.12g}")
    print(f"log_objective   {log_objective(g, pm):.12g}")
    print(f"iterations      {iters}")
    print(f"upper_bound     {ub.bound:.12g}")
    print(f"bound_gap       {ub.bound - log_objective(g, pm):.3e}")
    print(f"rank_gap        {potdc.rank_gap:.3e}")
    print(f"relay_power     {float(np.real(np.vdot(g, pm.q @ g))):.12g}")
    return 0 if math.isfinite(ub.bound) else 1


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.command == "solve":
            return _run_solve(args)
        return _run_sweep(args)
    except (ValueError, OSError) as exc:
        log.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
