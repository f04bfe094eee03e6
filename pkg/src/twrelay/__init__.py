"""Sum-rate maximizing relay design for two-way amplify-and-forward relaying."""

from .bound import UpperBoundResult, compute_q_star, compute_upper_bound
from .channel import ChannelSet, SystemConfig, draw_channels, load_config, parse_config, trial_seed
from .estimators import DftRelay, PotdcRelay, RagesRelay, RelayUpperBound
from .exceptions import (
    ConvergenceError,
    DegenerateRangeError,
    InfeasibleError,
    InvalidInputError,
    SingularPencilError,
)
from .experiments import ExperimentSpec, TrialRecord, dft_baseline, run_experiment
from .kernel import SubproblemSolution, SubproblemSpec, solve_subproblem
from .potdc import PotdcResult, extract_rank_one, run_potdc
from .problem import (
    ProblemMatrices,
    build_problem,
    log_objective,
    objective,
    restrict_diagonal,
    scale_to_power,
    sum_rate,
    tau_beta_intervals,
)
from .rages import RagesResult, RhoBounds, a_sig, candidate_g, compute_rho_bounds, rages_1d, rages_2d

__version__ = "0.1.0"
