"""Certified upper bound on the relaxed sum-rate objective.

Any feasible value ``p`` caps the optimal ``beta`` at ``exp(q - p)`` where
``q`` is the optimum with the ``-log(beta)`` term dropped. On
``[beta_min, beta_max]`` the non-convex set ``{t >= log(beta)}`` is split
into segments and each piece replaced by its convex hull (the region above
the chord), giving one concave problem per segment; the largest segment
optimum bounds the true optimum from above.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DegenerateRangeError, InvalidInputError
from .kernel import SubproblemSpec, solve_subproblem
from .problem import tau_beta_intervals

__all__ = ["UpperBoundResult", "compute_q_star", "compute_upper_bound", "segment_edges"]

RANGE_TOL = 1e-9


@dataclass
class UpperBoundResult:
    q_star: float
    beta_max: float
    beta_min: float
    segments: int
    bound: float
    per_segment_values: list = field(default_factory=list)
    edges: np.ndarray = None


def compute_q_star(pm):
    """Optimum of ``log tr(A1 X) + log tr(A2 X)`` over ``tr(B1 X) = 1``, ``X >= 0``."""
    return solve_subproblem(SubproblemSpec(pm.a1, pm.a2, pm.b1, pm.b2)).dual_value


def segment_edges(beta_min, beta_max, n_segments, spacing="linear"):
    if spacing == "linear":
        return np.linspace(beta_min, beta_max, n_segments + 1)
    if spacing == "log":
        return np.geomspace(beta_min, beta_max, n_segments + 1)
    raise InvalidInputError(f"unknown spacing {spacing!r}")


def compute_upper_bound(pm, p_star, n_segments=30, spacing="linear", q_star=None):
    """Upper bound on the optimal relaxed log objective.

    Parameters
    ----------
    pm : ProblemMatrices
    p_star : float
        Relaxed log objective of some feasible point, normally the POTDC
        result. Larger values tighten the bound.
    n_segments : int
        Number of pieces the beta range is cut into.
    spacing : {"linear", "log"}
        Placement of the segment edges.
    q_star : float, optional
        Precomputed :func:`compute_q_star` value.

    Returns
    -------
    UpperBoundResult
        ``bound`` is in the same log units as ``p_star``.
    """
    if n_segments < 1:
        raise InvalidInputError("n_segments must be at least 1")
    q = compute_q_star(pm) if q_star is None else q_star
    _, _, beta_min, beta_pencil_max = tau_beta_intervals(pm)
    slack = q - np.log(beta_min) - p_star
    if slack < -RANGE_TOL * max(1.0, abs(p_star)):
        raise DegenerateRangeError(
            f"p_star={p_star:.12g} exceeds q_star - log(beta_min)={q - np.log(beta_min):.12g}")
    beta_max = min(beta_min * np.exp(max(slack, 0.0)), beta_pencil_max)
    if beta_max - beta_min <= RANGE_TOL * beta_max:
        # beta is pinned: the dual bound of q already accounts for it
        bound = q - np.log(beta_min)
        return UpperBoundResult(q, beta_max, beta_min, 1, bound, [bound],
                                np.array([beta_min, beta_max]))

    edges = segment_edges(beta_min, beta_max, n_segments, spacing)
    values = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        slope = (np.log(hi) - np.log(lo)) / (hi - lo)
        intercept = np.log(lo) - slope * lo
        sol = solve_subproblem(
            SubproblemSpec(pm.a1, pm.a2, pm.b1, pm.b2, linear_slope=slope, beta_box=(lo, hi)))
        # the dual value keeps the bound valid despite finite solver accuracy
        values.append(sol.dual_value - intercept)
    return UpperBoundResult(q, beta_max, beta_min, n_segments, max(values), values, edges)
