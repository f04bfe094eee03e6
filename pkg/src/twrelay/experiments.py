"""Monte-Carlo experiments comparing relay designs, with CSV output."""

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .bound import compute_upper_bound
from .channel import SystemConfig, draw_channels, trial_seed
from .exceptions import InvalidInputError
from .potdc import run_potdc
from .problem import build_problem, log_objective, restrict_diagonal, scale_to_power, sum_rate
from .rages import compute_rho_bounds, rages_1d, rages_2d

__all__ = [
    "EXPERIMENTS",
    "METHODS",
    "ExperimentSpec",
    "TrialRecord",
    "dft_baseline",
    "default_spec",
    "run_experiment",
    "records_to_csv",
    "failed_methods",
    "CSV_HEADER",
]

EXPERIMENTS = ("snr_sweep", "distance_sweep", "antenna_sweep", "diagonal_compare")
METHODS = ("potdc", "rages2d", "rages1d", "dft", "upper_bound")
CSV_HEADER = ("experiment", "sweep", "trial", "method", "sum_rate",
              "objective", "iters", "wall_ms", "error")

INV_NOISE_SWEEP = (0.1, 0.316, 1.0, 3.16, 10.0)
DISTANCE_SWEEP = (0.1, 0.2, 0.3, 0.4, 0.5)
ANTENNA_SWEEP = (2, 3, 4, 5)


@dataclass
class ExperimentSpec:
    """One sweep of Monte-Carlo trials.

    ``sweep`` holds inverse noise powers for ``snr_sweep`` and
    ``diagonal_compare``, relay-to-terminal-2 distances for
    ``distance_sweep`` and relay antenna counts for ``antenna_sweep``.
    ``spacing`` places the upper-bound segment edges (``"linear"`` or
    ``"log"``).
    """

    experiment: str
    sweep: list
    trials: int = 100
    base_config: SystemConfig = field(default_factory=SystemConfig)
    methods: tuple = METHODS
    seed: int = 0
    segments_n: int = 30
    spacing: str = "linear"
    output_path: str = None
    workers: int = 1
    timing: bool = False

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise InvalidInputError(f"unknown experiment {self.experiment!r}")
        if int(self.trials) < 1:
            raise InvalidInputError("trials must be at least 1")
        if len(self.sweep) == 0:
            raise InvalidInputError("sweep must not be empty")
        unknown = set(self.methods) - set(METHODS)
        if unknown or not self.methods:
            raise InvalidInputError(f"unknown methods {sorted(unknown)}")
        if int(self.segments_n) < 1:
            raise InvalidInputError("segments_n must be at least 1")
        if self.spacing not in ("linear", "log"):
            raise InvalidInputError(f"unknown spacing {self.spacing!r}")
        # canonical order keeps the CSV independent of how methods were listed
        self.methods = tuple(m for m in METHODS if m in self.methods)
        self.sweep = list(self.sweep)


@dataclass
class TrialRecord:
    experiment: str
    sweep: float
    trial: int
    method: str
    sum_rate: float
    objective: float
    iters: int
    wall_ms: float = float("nan")
    error: str = ""


def default_spec(experiment, **overrides):
    """Spec with the standard sweep, trial count and system parameters.

    The distance sweep uses log-spaced bound segments: near a terminal the
    feasible beta range spans several decades and equal linear segments
    leave the strongly curved low end of ``log(beta)`` inside one chord.
    """
    base = SystemConfig()
    spacing = "linear"
    if experiment in ("snr_sweep", "diagonal_compare"):
        sweep, trials = INV_NOISE_SWEEP, 100
        base = replace(base, m_r=3, d2=0.5)
    elif experiment == "distance_sweep":
        sweep, trials = DISTANCE_SWEEP, 100
        spacing = "log"
    elif experiment == "antenna_sweep":
        sweep, trials = ANTENNA_SWEEP, 200
        base = replace(base, d2=0.25)
    else:
        raise InvalidInputError(f"unknown experiment {experiment!r}")
    kwargs = dict(experiment=experiment, sweep=list(sweep), trials=trials, base_config=base,
                  spacing=spacing)
    kwargs.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentSpec(**kwargs)


def dft_baseline(config, ch, pm):
    """Scaled unitary DFT relay matrix, returned as ``vec(G)``.

    For a diagonal-restricted problem the diagonal of the DFT matrix is
    returned instead.
    """
    m = config.m_r
    k = np.arange(m)
    f = np.exp(-2j * np.pi * np.outer(k, k) / m) / np.sqrt(m)
    g = np.diag(f).copy() if pm.diagonal else f.reshape(-1, order="F")
    return scale_to_power(g, pm)


def _trial_config(spec, value):
    base = spec.base_config
    if spec.experiment in ("snr_sweep", "diagonal_compare"):
        return base.with_noise(1.0 / float(value))
    if spec.experiment == "distance_sweep":
        return replace(base, d2=float(value))
    return replace(base, m_r=int(value))


def _run_trial(args):
    spec, sweep_idx, trial = args
    value = spec.sweep[sweep_idx]
    config = _trial_config(spec, value)
    ch = draw_channels(config, trial_seed(spec.seed, sweep_idx, trial))
    pm = build_problem(config, ch)
    if spec.experiment == "diagonal_compare":
        pm = restrict_diagonal(pm)

    records = []
    potdc = None

    def emit(method, fn):
        start = time.perf_counter()
        try:
            rate, obj, iters = fn()
            err = ""
        except Exception as exc:  # recorded, never fatal for the sweep
            rate, obj, iters, err = math.nan, math.nan, 0, type(exc).__name__
        ms = (time.perf_counter() - start) * 1e3 if spec.timing else math.nan
        records.append(TrialRecord(spec.experiment, value, trial, method,
                                   rate, obj, iters, ms, err))

    def from_g(g, iters):
        return sum_rate(g, config, ch), log_objective(g, pm), iters

    def do_potdc():
        nonlocal potdc
        potdc = run_potdc(pm)
        return from_g(potdc.g, potdc.iterations)

    def do_rages(search):
        bounds = compute_rho_bounds(config, ch)
        res = search(pm, bounds)
        return from_g(res.g, res.evaluations)

    def do_bound():
        p_star = potdc.relaxed_value if potdc is not None else run_potdc(pm).relaxed_value
        ub = compute_upper_bound(pm, p_star, spec.segments_n, spec.spacing)
        return ub.bound / (2.0 * math.log(2.0)), ub.bound, ub.segments

    actions = {
        "potdc": do_potdc,
        "rages2d": lambda: do_rages(rages_2d),
        "rages1d": lambda: do_rages(rages_1d),
        "dft": lambda: from_g(dft_baseline(config, ch, pm), 0),
        "upper_bound": do_bound,
    }
    for method in spec.methods:
        emit(method, actions[method])
    return records


def run_experiment(spec):
    """Run every trial of ``spec``; write the CSV if ``output_path`` is set.

    Trials are independent and may run on ``spec.workers`` processes.
    Results are collected in submission order, so the output does not
    depend on scheduling.
    """
    jobs = [(spec, i, t) for i in range(len(spec.sweep)) for t in range(int(spec.trials))]
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            chunks = list(pool.map(_run_trial, jobs, chunksize=max(1, len(jobs) // (4 * spec.workers))))
    else:
        chunks = [_run_trial(job) for job in jobs]
    records = [r for chunk in chunks for r in chunk]
    if spec.output_path:
        with open(spec.output_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(records_to_csv(records))
    return records


def _fmt(x):
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None or math.isnan(x):
        return ""
    return "%.12g" % x


def records_to_csv(records):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in records:
        sweep = r.sweep if isinstance(r.sweep, (int, np.integer)) else float(r.sweep)
        writer.writerow([r.experiment, _fmt(sweep), r.trial, r.method,
                         "nan" if r.error else _fmt(r.sum_rate),
                         "nan" if r.error else _fmt(r.objective),
                         r.iters, _fmt(r.wall_ms), r.error])
    return buf.getvalue()


def failed_methods(records):
    """Methods that errored in every trial they were run in."""
    seen, ok = set(), set()
    for r in records:
        seen.add(r.method)
        if not r.error:
            ok.add(r.method)
    return sorted(seen - ok)
