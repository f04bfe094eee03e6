"""Estimator-style wrappers around the relay design methods.

Each wrapper keeps its tuning knobs as constructor parameters (so
``get_params``/``set_params``/``clone`` work) and stores its results in
trailing-underscore attributes after :meth:`fit`. The "data" is one channel
realization rather than a sample matrix, so ``fit`` takes the system
configuration and channels.
"""

from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .bound import compute_upper_bound
from .channel import ChannelSet, SystemConfig
from .exceptions import InvalidInputError
from .experiments import dft_baseline
from .potdc import run_potdc
from .problem import build_problem, log_objective, sum_rate
from .rages import compute_rho_bounds, rages_1d, rages_2d

__all__ = ["PotdcRelay", "RagesRelay", "DftRelay", "RelayUpperBound"]


def _check_inputs(config, channels):
    if not isinstance(config, SystemConfig):
        raise InvalidInputError("config must be a SystemConfig")
    if not isinstance(channels, ChannelSet):
        raise InvalidInputError("channels must be a ChannelSet")
    if channels.m_r != config.m_r:
        raise InvalidInputError("channel length does not match config.m_r")


class _RelayDesign(BaseEstimator):

    def _finish(self, g, config, channels, pm):
        self.g_ = g
        self.sum_rate_ = sum_rate(g, config, channels)
        self.log_objective_ = log_objective(g, pm)
        return self

    def _check_fitted(self):
        if not hasattr(self, "g_"):
            raise NotFittedError(f"{type(self).__name__} is not fitted yet")

    def score(self, config, channels):
        """Sum rate of the fitted relay vector on the given channels."""
        self._check_fitted()
        _check_inputs(config, channels)
        return sum_rate(self.g_, config, channels)


class PotdcRelay(_RelayDesign):
    """POTDC relay design.

    Parameters
    ----------
    epsilon : float
        Stop when successive log objectives differ by less.
    max_iter : int
        Cap on outer iterations.
    """

    def __init__(self, epsilon=1e-6, max_iter=50):
        self.epsilon = epsilon
        self.max_iter = max_iter

    def fit(self, config, channels):
        _check_inputs(config, channels)
        pm = build_problem(config, channels)
        res = run_potdc(pm, epsilon=self.epsilon, max_iter=self.max_iter)
        self.result_ = res
        self.n_iter_ = res.iterations
        self.relaxed_value_ = res.relaxed_value
        return self._finish(res.g, config, channels, pm)


class RagesRelay(_RelayDesign):
    """Generalized-eigenvector relay design with a 1-D or 2-D parameter search.

    Parameters
    ----------
    search : {"2d", "1d"}
    grid : int
        Lattice points per axis for the 2-D search.
    tol : float
        Final relative width of the parameter search.
    """

    def __init__(self, search="2d", grid=32, tol=1e-6):
        self.search = search
        self.grid = grid
        self.tol = tol

    def fit(self, config, channels):
        _check_inputs(config, channels)
        pm = build_problem(config, channels)
        bounds = compute_rho_bounds(config, channels)
        if self.search == "2d":
            res = rages_2d(pm, bounds, grid=self.grid, tol=self.tol)
        elif self.search == "1d":
            res = rages_1d(pm, bounds, tol=self.tol)
        else:
            raise InvalidInputError(f"search must be '1d' or '2d', got {self.search!r}")
        self.result_ = res
        self.bounds_ = bounds
        self.rho_sig_, self.rho_noi_ = res.rho_sig, res.rho_noi
        self.n_evaluations_ = res.evaluations
        return self._finish(res.g, config, channels, pm)


class DftRelay(_RelayDesign):
    """Scaled DFT relay matrix, the channel-agnostic baseline."""

    def fit(self, config, channels):
        _check_inputs(config, channels)
        pm = build_problem(config, channels)
        return self._finish(dft_baseline(config, channels, pm), config, channels, pm)


class RelayUpperBound(BaseEstimator):
    """Certified upper bound on the log objective, anchored at a POTDC run.

    Parameters
    ----------
    n_segments : int
    spacing : {"linear", "log"}
    """

    def __init__(self, n_segments=30, spacing="linear"):
        self.n_segments = n_segments
        self.spacing = spacing

    def fit(self, config, channels):
        _check_inputs(config, channels)
        pm = build_problem(config, channels)
        p_star = run_potdc(pm).relaxed_value
        self.result_ = compute_upper_bound(pm, p_star, self.n_segments, self.spacing)
        self.bound_ = self.result_.bound
        self.p_star_ = p_star
        return self
