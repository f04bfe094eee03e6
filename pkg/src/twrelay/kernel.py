"""Concave subproblem shared by POTDC and the upper bound.

Solves, over Hermitian PSD ``X``::

    maximize   log tr(A1 X) + log tr(A2 X) - slope * tr(B2 X)
    subject to tr(B1 X) = 1,  lo <= tr(B2 X) <= hi,  X >= 0

with a primal log-barrier path-following method. The barrier Hessian is
``X^{-1} (.) X^{-1}`` plus at most three rank-one terms, one per linear
functional appearing in the objective, so each equality-constrained Newton
step reduces to an ``O(n^3)`` product and a 4 x 4 linear solve instead of a
dense system in the ``n^2`` real coordinates of ``X``.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .exceptions import ConvergenceError, InfeasibleError, InvalidInputError
from .linalg import as_hermitian, gen_eig

__all__ = ["SubproblemSpec", "SubproblemSolution", "solve_subproblem"]

MU_START = 1.0
MU_END = 1e-9
MU_FACTOR = 10.0
MAX_NEWTON = 500
NEWTON_TOL = 1e-10
ARMIJO = 0.01
BACKTRACK = 0.5
MIN_STEP = 1e-6


@dataclass(frozen=True)
class SubproblemSpec:
    a1: np.ndarray
    a2: np.ndarray
    b1: np.ndarray
    b2: np.ndarray
    linear_slope: float = 0.0
    beta_box: tuple = None
    include_log_tau: bool = True

    def __post_init__(self):
        for name in ("a1", "a2", "b1", "b2"):
            object.__setattr__(self, name, as_hermitian(getattr(self, name), name))
        shapes = {getattr(self, k).shape for k in ("a1", "a2", "b1", "b2")}
        if len(shapes) != 1:
            raise InvalidInputError("all subproblem matrices must share one shape")
        if not self.linear_slope >= 0:
            raise InvalidInputError("linear_slope must be non-negative")
        if self.beta_box is not None:
            lo, hi = self.beta_box
            if not lo <= hi:
                raise InvalidInputError(f"empty beta box ({lo}, {hi})")
            object.__setattr__(self, "beta_box", (float(lo), float(hi)))
        if not self.include_log_tau:
            raise InvalidInputError("only the log-tau objective is supported")


@dataclass(frozen=True)
class SubproblemSolution:
    """Primal point plus the dual certificate that bounds its suboptimality.

    ``z`` is the multiplier of the PSD cone, ``nu`` of ``tr(B1 X) = 1``,
    ``lam_lo``/``lam_hi`` of the two sides of the beta box (zero when a side
    is inactive or absent). ``duality_gap`` is ``dual_value - value`` and
    ``nu_newton`` the multiplier estimate of the last Newton step.
    """

    x: np.ndarray
    tau: float
    beta: float
    value: float
    kkt_residual: float
    nu: float
    z: np.ndarray
    lam_lo: float
    lam_hi: float
    dual_value: float
    duality_gap: float
    nu_newton: float
    newton_steps: int


def _tr(m, x):
    # tr(M X) for Hermitian M, X
    return float(np.real(np.sum(m * x.T)))


class _Barrier:
    """Barrier objective and Newton step for a fixed spec."""

    def __init__(self, spec, use_lo, use_hi):
        self.spec = spec
        self.a1, self.a2, self.b1, self.b2 = spec.a1, spec.a2, spec.b1, spec.b2
        self.n = self.a1.shape[0]
        self.slope = spec.linear_slope
        self.lo, self.hi = spec.beta_box if spec.beta_box else (None, None)
        self.use_lo, self.use_hi = use_lo, use_hi
        self.use_b2 = self.slope != 0.0 or use_lo or use_hi

    def funcs(self):
        mats = [self.a1, self.a2]
        if self.use_b2:
            mats.append(self.b2)
        return mats

    def derivs(self, ell, mu):
        """First and second derivatives of the scalar pieces of the barrier."""
        d1 = [1.0 / ell[0], 1.0 / ell[1]]
        d2 = [-1.0 / ell[0] ** 2, -1.0 / ell[1] ** 2]
        if self.use_b2:
            b = ell[2]
            g, h = -self.slope, 0.0
            if self.use_lo:
                g += mu / (b - self.lo)
                h -= mu / (b - self.lo) ** 2
            if self.use_hi:
                g -= mu / (self.hi - b)
                h -= mu / (self.hi - b) ** 2
            d1.append(g)
            d2.append(h)
        return np.array(d1), np.array(d2)

    def interior(self, ell):
        if ell[0] <= 0 or ell[1] <= 0:
            return False
        if self.use_b2:
            if self.use_lo and not ell[2] > self.lo:
                return False
            if self.use_hi and not ell[2] < self.hi:
                return False
        return True

    def value(self, x, mu):
        """Barrier objective at ``x``, or ``-inf`` outside the domain.

        Also returns the functional values and the Cholesky factor of ``x``.
        """
        try:
            chol = np.linalg.cholesky(x)
        except np.linalg.LinAlgError:
            return -np.inf, None, None
        ell = [_tr(m, x) for m in self.funcs()]
        if not self.interior(ell):
            return -np.inf, None, None
        logdet = 2.0 * np.sum(np.log(np.real(np.diag(chol))))
        v = np.log(ell[0]) + np.log(ell[1]) + mu * logdet
        if self.use_b2:
            b = ell[2]
            v -= self.slope * b
            if self.use_lo:
                v += mu * np.log(b - self.lo)
            if self.use_hi:
                v += mu * np.log(self.hi - b)
        return v, ell, chol

    def retract(self, x):
        # rounding in the dominant direction of X drifts tr(B1 X) away from 1
        x = 0.5 * (x + x.conj().T)
        return x / _tr(self.b1, x)

    def newton(self, x, mu, ell, chol):
        """Newton direction, equality multiplier and squared decrement."""
        mats = self.funcs()
        k = len(mats)
        d1, d2 = self.derivs(ell, mu)
        allm = mats + [self.b1]
        proj = [x @ m @ x / mu for m in allm]
        gram = np.array([[_tr(mi, pj) for pj in proj] for mi in allm])
        ell_b = _tr(self.b1, x)
        # unknowns: z_j = tr(M_j D) for j < k, then nu
        lhs = np.zeros((k + 1, k + 1))
        rhs = np.zeros(k + 1)
        for j in range(k):
            lhs[j, :k] = -gram[j, :k] * d2
            lhs[j, j] += 1.0
            lhs[j, k] = gram[j, k]
            rhs[j] = ell[j] + gram[j, :k] @ d1
        lhs[k, :k] = -gram[k, :k] * d2
        lhs[k, k] = gram[k, k]
        rhs[k] = 2.0 * ell_b - 1.0 + gram[k, :k] @ d1
        sol = np.linalg.solve(lhs, rhs)
        z, nu = sol[:k], sol[k]
        coef = d1 + d2 * z
        u = sum(c * m for c, m in zip(coef, mats)) - nu * self.b1
        step = x + x @ u @ x / mu
        step = 0.5 * (step + step.conj().T)
        # -<D, H D> = mu ||C^{-1} D C^{-H}||^2 - sum d2 z^2, X = C C^H; the
        # factored form avoids cancellation once X is nearly rank one
        scaled = np.eye(self.n) + chol.conj().T @ u @ chol / mu
        dec = mu * float(np.sum(np.abs(scaled) ** 2)) - float(np.sum(d2 * z * z))
        return step, nu, max(dec, 0.0)


def _initial_point(spec, use_lo, use_hi, pencil):
    """Strictly feasible, strictly positive definite starting point."""
    n = spec.b1.shape[0]
    w, v = pencil
    b1_inv = v @ v.conj().T  # B1^{-1} since V^H B1 V = I
    x0 = 0.5 * (b1_inv + b1_inv.conj().T) / n
    if not (use_lo or use_hi):
        return x0
    lo, hi = spec.beta_box
    bmin, bmax = float(w[0]), float(w[-1])
    beta0 = _tr(spec.b2, x0)
    lo_eff = max(lo, bmin) if use_lo else bmin
    hi_eff = min(hi, bmax) if use_hi else bmax
    margin = 0.25 * (hi_eff - lo_eff)
    if (not use_lo or beta0 > lo_eff + margin) and (not use_hi or beta0 < hi_eff - margin):
        return x0
    target = 0.5 * (lo_eff + hi_eff)
    vmin, vmax = v[:, :1], v[:, -1:]
    eps = 0.5
    while eps > 1e-12:
        mix = (target - eps * beta0) / (1.0 - eps)
        theta = (mix - bmin) / (bmax - bmin)
        if 0.0 < theta < 1.0:
            x = (1.0 - eps) * (theta * vmax @ vmax.conj().T
                               + (1.0 - theta) * vmin @ vmin.conj().T) + eps * x0
            return 0.5 * (x + x.conj().T)
        eps *= 0.5
    raise InfeasibleError("could not find a strictly feasible starting point")


def solve_subproblem(spec):
    """Maximize the concave subproblem described by ``spec``.

    Raises
    ------
    InfeasibleError
        If the beta box does not meet the range of ``tr(B2 X)``.
    ConvergenceError
        If the Newton iteration cap is exhausted.
    """
    pencil = gen_eig(spec.b2, spec.b1)
    bmin, bmax = float(pencil[0][0]), float(pencil[0][-1])
    width_tol = 1e-12 * max(1.0, abs(bmax))
    use_lo = use_hi = False
    if spec.beta_box is not None:
        lo, hi = spec.beta_box
        if lo > bmax + width_tol or hi < bmin - width_tol:
            raise InfeasibleError(
                f"beta box [{lo:.6g}, {hi:.6g}] misses the feasible range "
                f"[{bmin:.6g}, {bmax:.6g}]")
        # a side is only enforced when it cuts into the pencil interval
        use_lo = lo > bmin + width_tol
        use_hi = hi < bmax - width_tol
        if use_lo and use_hi and hi - lo <= width_tol:
            raise InfeasibleError("beta box has empty interior")
        if (use_lo and lo >= bmax - width_tol) or (use_hi and hi <= bmin + width_tol):
            raise InfeasibleError("beta box touches the feasible range in a single point")

    bar = _Barrier(spec, use_lo, use_hi)
    x = bar.retract(_initial_point(spec, use_lo, use_hi, pencil))
    mu = MU_START
    steps = 0
    while True:
        val, ell, chol = bar.value(x, mu)
        if not np.isfinite(val):
            raise InfeasibleError("iterate left the barrier domain")
        while True:
            d, nu, dec = bar.newton(x, mu, ell, chol)
            if dec / 2.0 <= NEWTON_TOL:
                break
            if steps >= MAX_NEWTON:
                raise ConvergenceError(
                    f"Newton cap of {MAX_NEWTON} steps reached at mu={mu:.1e}",
                    residual=dec)
            steps += 1
            t = 1.0
            while t >= MIN_STEP:
                trial = bar.retract(x + t * d)
                new_val, new_ell, new_chol = bar.value(trial, mu)
                if np.isfinite(new_val) and new_val >= val + ARMIJO * t * dec:
                    break
                t *= BACKTRACK
            if t < MIN_STEP:
                # no measurable ascent left at working precision
                break
            x, val, ell, chol = trial, new_val, new_ell, new_chol
        if mu <= MU_END * (1 + 1e-9):
            break
        mu /= MU_FACTOR
    return _certify(bar, x, mu, nu, steps)


def _dual_bound(bar, x, mu):
    """Tightest certificate of the form below for a fixed primal point ``x``.

    For box multipliers ``lam_lo, lam_hi >= 0`` the cone multiplier comes
    from exact stationarity, ``Z = nu B1 - grad f - (lam_lo - lam_hi) B2``,
    with ``nu`` the smallest value keeping ``Z`` PSD. ``x`` then maximizes
    the concave Lagrangian, so::

        value + tr(X Z) + lam_lo (beta - lo) + lam_hi (hi - beta)

    bounds the optimum from above. The bound is convex in the box
    multipliers; it is minimized over each side that can be active,
    starting from the barrier estimates ``mu / slack``.
    """
    spec = bar.spec
    a1x, tau, beta = _tr(spec.a1, x), _tr(spec.a2, x), _tr(spec.b2, x)
    value = float(np.log(a1x) + np.log(tau) - spec.linear_slope * beta)
    grad = spec.a1 / a1x + spec.a2 / tau - spec.linear_slope * spec.b2
    lo = bar.lo if bar.use_lo else 0.0
    hi = bar.hi if bar.use_hi else 0.0

    def gap_for(lam_lo, lam_hi):
        c = grad + (lam_lo - lam_hi) * spec.b2
        nu = float(gen_eig(c, spec.b1)[0][-1])
        return nu - _tr(c, x) + lam_lo * (beta - lo) + lam_hi * (hi - beta), nu

    estimates = (mu / max(beta - lo, 1e-300) if bar.use_lo else 0.0,
                 mu / max(hi - beta, 1e-300) if bar.use_hi else 0.0)
    candidates = [(0.0, 0.0), (estimates[0], 0.0), (0.0, estimates[1])]
    best = min(candidates, key=lambda lam: gap_for(*lam)[0])
    for side, used in ((0, bar.use_lo), (1, bar.use_hi)):
        if not used:
            continue

        def along(t, side=side):
            lam = [0.0, 0.0]
            lam[side] = t
            return gap_for(*lam)[0]

        upper = max(min(estimates[side], 1e6), 1e-3)
        for _ in range(60):
            if along(2.0 * upper) >= along(upper):
                break
            upper *= 2.0
        res = minimize_scalar(along, bounds=(0.0, 2.0 * upper), method="bounded",
                              options={"xatol": 1e-12 * upper})
        if res.fun < gap_for(*best)[0]:
            best = (res.x, 0.0) if side == 0 else (0.0, res.x)
    lam_lo, lam_hi = best
    gap, nu = gap_for(lam_lo, lam_hi)
    z = nu * spec.b1 - grad - (lam_lo - lam_hi) * spec.b2
    return dict(x=x, tau=tau, beta=beta, value=value, gap=gap, nu=nu,
                z=0.5 * (z + z.conj().T), lam_lo=float(lam_lo), lam_hi=float(lam_hi))


def _certify(bar, x, mu, nu_newton, steps):
    """Primal values plus the dual certificate for the returned point.

    ``kkt_residual`` combines the equality violation with the scaled
    complementarity ``tr(Z X) / (||Z|| ||X||)`` and the box terms
    ``lam * slack / max(1, lam * |beta|)``; stationarity holds exactly by
    construction of ``Z``. The absolute gap is reported separately.
    """
    c = _dual_bound(bar, x, mu)
    x, z, beta = c["x"], c["z"], c["beta"]
    primal = abs(_tr(bar.b1, x) - 1.0)
    compl = max(_tr(z, x), 0.0) / max(np.linalg.norm(z) * np.linalg.norm(x), 1e-300)
    for lam, slack in ((c["lam_lo"], beta - (bar.lo or 0.0)), (c["lam_hi"], (bar.hi or 0.0) - beta)):
        if lam > 0:
            compl = max(compl, lam * abs(slack) / max(1.0, lam * abs(beta)))
    return SubproblemSolution(
        x=x, tau=c["tau"], beta=beta, value=c["value"],
        kkt_residual=max(primal, compl),
        nu=c["nu"], z=z, lam_lo=c["lam_lo"], lam_hi=c["lam_hi"],
        dual_value=c["value"] + c["gap"], duality_gap=c["gap"],
        nu_newton=float(nu_newton), newton_steps=steps,
    )
