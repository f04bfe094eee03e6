"""POTDC: SDP relaxation plus successive linearization of ``log(beta)``.

After fixing ``g^H B1 g = 1`` and relaxing ``g g^H`` to ``X``, the only
non-concave term of the log objective is ``-log tr(B2 X)``. Each outer
iteration replaces it by its tangent at the previous ``beta`` and solves the
resulting concave problem; the true objective never decreases.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConvergenceError, InvalidInputError
from .kernel import SubproblemSpec, solve_subproblem
from .linalg import as_hermitian, gen_eig, hermitian_eig, quad
from .problem import objective, scale_to_power, tau_beta_intervals

__all__ = [
    "PotdcResult",
    "run_potdc",
    "extract_rank_one",
    "relaxed_objective",
    "relaxed_kkt_residual",
    "RANK_ONE_TOL",
]

RANK_ONE_TOL = 1e-6
N_RANDOMIZATION = 200


@dataclass
class PotdcResult:
    """Outcome of :func:`run_potdc`.

    ``relaxed_value`` is the final true log objective of the relaxation;
    ``value`` the product-of-quotients objective of the extracted ``g``.
    ``rank_gap`` is ``lambda_2 / lambda_1`` of ``x_final`` and ``certified``
    is false when randomization had to be used.
    """

    g: np.ndarray
    relaxed_value: float
    value_history: list
    iterations: int
    x_final: np.ndarray
    rank_gap: float
    value: float = float("nan")
    beta_history: list = field(default_factory=list)
    certified: bool = True


def relaxed_objective(x, pm):
    """``log tr(A1 X) + log tr(A2 X) - log tr(B2 X)``, the relaxed log objective."""
    tr = lambda m: float(np.real(np.sum(m * x.T)))
    return np.log(tr(pm.a1)) + np.log(tr(pm.a2)) - np.log(tr(pm.b2))


def relaxed_kkt_residual(x, pm):
    """Relative KKT residual of the relaxed problem with the exact ``log(beta)``.

    The objective is degree-zero homogeneous in ``X``, so the multiplier of
    ``tr(B1 X) = 1`` is ``tr(X grad) = 1`` and the cone multiplier is
    ``Z = B1 - grad``. The residual combines the dual infeasibility of ``Z``
    and the complementarity ``||Z X||``, both relative to the problem scale.
    """
    tr = lambda m: float(np.real(np.sum(m * x.T)))
    grad = pm.a1 / tr(pm.a1) + pm.a2 / tr(pm.a2) - pm.b2 / tr(pm.b2)
    z = pm.b1 - grad
    z = 0.5 * (z + z.conj().T)
    w, _ = gen_eig(z, pm.b1)
    scale = np.linalg.norm(pm.b1) * np.linalg.norm(x)
    return max(max(0.0, -float(w[0])), float(np.linalg.norm(z @ x) / scale))


def extract_rank_one(x, pm, rng=None):
    """Recover a relay vector from the relaxed solution ``x``.

    If ``x`` is numerically rank one its principal eigenvector is returned,
    scaled to ``g^H B1 g = 1``. Otherwise Gaussian randomization picks the
    best of ``N_RANDOMIZATION`` draws ``x^{1/2} w``.

    Returns
    -------
    g : ndarray
    certified : bool
        ``True`` when the eigenvector path was taken.
    """
    x = as_hermitian(x, "x")
    w, v = hermitian_eig(x)
    if not w[-1] > 0 or w[-1] <= 1e-300:
        raise InvalidInputError("x is numerically zero")
    if max(w[-2] if w.size > 1 else 0.0, 0.0) / w[-1] <= RANK_ONE_TOL:
        g = v[:, -1]
        return g / np.sqrt(quad(g, pm.b1)), True
    rng = np.random.default_rng(0) if rng is None else rng
    root = v * np.sqrt(np.clip(w, 0.0, None))
    n = x.shape[0]
    draws = root @ (rng.standard_normal((n, N_RANDOMIZATION))
                    + 1j * rng.standard_normal((n, N_RANDOMIZATION)))
    best, best_val = None, -np.inf
    for g in draws.T:
        if not np.any(g):
            continue
        val = objective(g, pm)
        if val > best_val:
            best, best_val = g, val
    return best / np.sqrt(quad(best, pm.b1)), False


def run_potdc(pm, epsilon=1e-6, max_iter=50, beta_c_init=None):
    """Run POTDC on one problem instance.

    Parameters
    ----------
    pm : ProblemMatrices
    epsilon : float
        Stop when two consecutive true log objectives differ by less.
    max_iter : int
        Cap on the number of concave subproblems solved.
    beta_c_init : float, optional
        First linearization point; defaults to the geometric mean of the
        feasible range of ``tr(B2 X)``.
    """
    if not epsilon > 0:
        raise InvalidInputError("epsilon must be positive")
    if max_iter < 1:
        raise InvalidInputError("max_iter must be at least 1")
    _, _, beta_min, beta_max = tau_beta_intervals(pm)
    beta_c = np.sqrt(beta_min * beta_max) if beta_c_init is None else float(beta_c_init)
    if not beta_c > 0:
        raise InvalidInputError("beta_c_init must be positive")

    history, betas = [], []
    sol = None
    for k in range(1, max_iter + 1):
        spec = SubproblemSpec(pm.a1, pm.a2, pm.b1, pm.b2, linear_slope=1.0 / beta_c)
        try:
            sol = solve_subproblem(spec)
        except ConvergenceError as exc:
            raise ConvergenceError(f"POTDC iteration {k}: {exc}",
                                   residual=exc.residual, iteration=k) from exc
        except Exception as exc:
            raise type(exc)(f"POTDC iteration {k}: {exc}") from exc
        history.append(relaxed_objective(sol.x, pm))
        betas.append(sol.beta)
        done = len(history) > 1 and abs(history[-1] - history[-2]) < epsilon
        # an unchanged linearization point would reproduce the same subproblem
        fixed = abs(sol.beta - beta_c) <= 1e-12 * beta_c
        beta_c = sol.beta
        if done or fixed:
            break

    g, certified = extract_rank_one(sol.x, pm)
    w = np.linalg.eigvalsh(0.5 * (sol.x + sol.x.conj().T))
    rank_gap = float(max(w[-2], 0.0) / w[-1]) if w.size > 1 else 0.0
    g = scale_to_power(g, pm)
    return PotdcResult(
        g=g, relaxed_value=history[-1], value_history=history,
        iterations=len(history), x_final=sol.x, rank_gap=rank_gap,
        value=objective(g, pm), beta_history=betas, certified=certified,
    )
