"""RAGES: relay weights as dominant generalized eigenvectors.

Setting the gradient of the log objective to zero shows that the optimal
``g`` is the dominant generalized eigenvector of
``(A1 + rho_sig A2, B1 + rho_noi B2)`` where ``rho_sig = g^H A1 g / g^H A2 g``
and ``rho_noi = g^H B1 g / g^H B2 g``. Both ratios have a physical meaning
(received power and noise power ratios of the two terminals), so they can
be bounded a priori and searched directly.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cholesky, solve_triangular
from scipy.optimize import bisect, minimize_scalar, root

from .exceptions import InvalidInputError
from .linalg import gen_eig_extremes, quad
from .problem import objective, scale_to_power

__all__ = [
    "RhoBounds",
    "RagesResult",
    "candidate_g",
    "compute_rho_bounds",
    "a_sig",
    "rho_of",
    "rages_2d",
    "rages_1d",
]


@dataclass(frozen=True)
class RhoBounds:
    rho_noi_lo: float
    rho_noi_hi: float
    rho_sig_lo: float
    rho_sig_hi: float
    gamma_sq: float

    def __post_init__(self):
        for lo, hi in ((self.rho_noi_lo, self.rho_noi_hi), (self.rho_sig_lo, self.rho_sig_hi)):
            if not 0 < lo < hi < np.inf:
                raise InvalidInputError(f"invalid parameter range [{lo}, {hi}]")

    def contains(self, rho_sig, rho_noi):
        return (self.rho_sig_lo <= rho_sig <= self.rho_sig_hi
                and self.rho_noi_lo <= rho_noi <= self.rho_noi_hi)


@dataclass
class RagesResult:
    g: np.ndarray
    value: float
    rho_sig: float
    rho_noi: float
    evaluations: int


def _check_rho(rho_sig, rho_noi):
    if not (rho_sig > 0 and rho_noi > 0):
        raise InvalidInputError("rho_sig and rho_noi must be positive")


def candidate_g(rho_sig, rho_noi, pm):
    """Dominant generalized eigenvector of ``(A1 + rho_sig A2, B1 + rho_noi B2)``.

    The returned vector is scaled to the relay power budget.
    """
    _check_rho(rho_sig, rho_noi)
    _, _, v = gen_eig_extremes(pm.a1 + rho_sig * pm.a2, pm.b1 + rho_noi * pm.b2)
    return scale_to_power(v, pm)


def rho_of(g, pm):
    """Self-consistent ``(rho_sig, rho_noi)`` of a relay vector."""
    return quad(g, pm.a1) / quad(g, pm.a2), quad(g, pm.b1) / quad(g, pm.b2)


def compute_rho_bounds(config, ch):
    """A priori search box for ``(rho_sig, rho_noi)``.

    The quadratic forms in both ratios are bounded through the channel
    norms ``alpha = ||h||`` and a heuristic cap ``gamma_sq`` on ``||g||^2``
    built from the forward channel gains. With white relay noise the
    largest relay noise eigenvalue is ``p_nr`` itself; otherwise it is
    capped by ``m_r * p_nr``.
    """
    a1f = np.linalg.norm(ch.h1f) ** 2
    a2f = np.linalg.norm(ch.h2f) ** 2
    a1b = np.linalg.norm(ch.h1b) ** 2
    a2b = np.linalg.norm(ch.h2b) ** 2
    p = config
    gamma_sq = a1f * a2f * p.p_t1 * p.p_t2 / (a1f * p.p_t1 + a2f * p.p_t2)
    m = 1.0 if p.white_relay_noise else float(p.m_r)
    noi_hi = p.p_nr / p.p_n2 * m * a1b * gamma_sq + p.p_n1 / p.p_n2
    noi_lo = 1.0 / (p.p_nr / p.p_n1 * m * a2b * gamma_sq + p.p_n2 / p.p_n1)
    sig_hi = (p.p_t2 / p.p_n2 * a2f * a1b * gamma_sq
              + p.p_nr / p.p_n2 * m * a1b * gamma_sq + p.p_n1 / p.p_n2)
    sig_lo = 1.0 / (p.p_t1 / p.p_n1 * a1f * a2b * gamma_sq
                    + p.p_nr / p.p_n1 * m * a2b * gamma_sq + p.p_n2 / p.p_n1)
    return RhoBounds(noi_lo, noi_hi, sig_lo, sig_hi, gamma_sq)


def a_sig(rho_sig, rho_noi, pm):
    """Mismatch between the assumed and the realized ``rho_sig``."""
    g = candidate_g(rho_sig, rho_noi, pm)
    return quad(g, pm.a1) / quad(g, pm.a2) - rho_sig


def _result(rho_sig, rho_noi, pm, evaluations):
    g = candidate_g(rho_sig, rho_noi, pm)
    return RagesResult(g, objective(g, pm), float(rho_sig), float(rho_noi), evaluations)


def _lattice_values(pm, log_sig, log_noi):
    """Objective of every lattice candidate, shape ``(len(log_sig), len(log_noi))``.

    One Cholesky whitening per ``rho_noi`` and a stacked eigensolve over
    all ``rho_sig`` values.
    """
    out = np.empty((len(log_sig), len(log_noi)))
    rho_sig = np.exp(np.asarray(log_sig))[:, None, None]
    for j, n in enumerate(log_noi):
        ell = cholesky(pm.b1 + np.exp(n) * pm.b2, lower=True)

        def whiten(m):
            t = solve_triangular(ell, m, lower=True)
            return solve_triangular(ell, t.conj().T, lower=True).conj().T

        w1, w2 = whiten(pm.a1), whiten(pm.a2)
        _, v = np.linalg.eigh(w1[None] + rho_sig * w2[None])
        g = solve_triangular(ell.conj().T, v[:, :, -1].T, lower=False)

        def forms(m):
            return np.real(np.einsum("ik,ij,jk->k", g.conj(), m, g))

        out[:, j] = forms(pm.a1) / forms(pm.b1) * forms(pm.a2) / forms(pm.b2)
    return out


def rages_2d(pm, bounds, grid=32, tol=1e-6):
    """Log-spaced lattice search over the ``(rho_sig, rho_noi)`` box.

    The objective forms a narrow ridge: sharp across ``rho_sig``, nearly
    flat along ``rho_noi``. Every lattice column is therefore refined to
    its best ``rho_sig`` by a bounded scalar search within one lattice
    step of the best node, and the resulting profile over ``rho_noi`` is
    refined the same way around its best column. ``tol`` is the final
    width in both log-parameters.

    A flat maximum pins the parameters down only to about the square root
    of machine precision, so the best point is finally polished by solving
    the self-consistency equations ``rho_of(candidate_g(rho)) = rho``; the
    polished point is kept only if it is more self-consistent and no worse
    in objective.
    """
    if grid < 2:
        raise InvalidInputError("grid must be at least 2")
    ls = np.linspace(np.log(bounds.rho_sig_lo), np.log(bounds.rho_sig_hi), grid)
    ln = np.linspace(np.log(bounds.rho_noi_lo), np.log(bounds.rho_noi_hi), grid)
    hs = ls[1] - ls[0]
    evals = [0]

    def neg(s, n):
        evals[0] += 1
        return -objective(candidate_g(np.exp(s), np.exp(n), pm), pm)

    def column_best(n, col=None):
        if col is None:
            col = _lattice_values(pm, ls, [n])[:, 0]
            evals[0] += col.size
        i = int(np.argmax(col))
        res = minimize_scalar(neg, bounds=(ls[max(i - 1, 0)], ls[min(i + 1, grid - 1)]),
                              args=(n,), method="bounded", options={"xatol": tol})
        if -res.fun >= col[i]:
            return -res.fun, res.x
        return col[i], ls[i]

    vals = _lattice_values(pm, ls, ln)
    evals[0] += vals.size
    profile = [column_best(n, vals[:, j]) for j, n in enumerate(ln)]
    j = int(np.argmax([p[0] for p in profile]))
    best_v, best_s, best_n = profile[j][0], profile[j][1], ln[j]

    res = minimize_scalar(lambda n: -column_best(n)[0],
                          bounds=(ln[max(j - 1, 0)], ln[min(j + 1, grid - 1)]),
                          method="bounded", options={"xatol": tol})
    v, s_opt = column_best(res.x)
    if v > best_v:
        best_v, best_s, best_n = v, s_opt, res.x
    best_s, best_n = _polish(pm, best_s, best_n, best_v, evals)
    return _result(np.exp(best_s), np.exp(best_n), pm, evals[0])


def _polish(pm, log_sig, log_noi, value, evals):
    def mismatch(x):
        evals[0] += 1
        g = candidate_g(np.exp(x[0]), np.exp(x[1]), pm)
        s, n = rho_of(g, pm)
        return np.array([np.log(s) - x[0], np.log(n) - x[1]])

    x0 = np.array([log_sig, log_noi])
    sol = root(mismatch, x0, method="hybr", options={"xtol": 1e-13})
    if not np.all(np.isfinite(sol.x)):
        return log_sig, log_noi
    better = np.linalg.norm(mismatch(sol.x)) < np.linalg.norm(mismatch(x0))
    if better and objective(candidate_g(*np.exp(sol.x), pm), pm) >= value:
        return float(sol.x[0]), float(sol.x[1])
    return log_sig, log_noi


def rages_1d(pm, bounds, tol=1e-6):
    """Root search of :func:`a_sig` in ``rho_sig`` at a fixed ``rho_noi``.

    ``rho_noi`` is the geometric mean of its bounds. The zero crossing is
    bisected in ``log(rho_sig)``, so ``tol`` is a relative width. Without a
    sign change at the ends, the objective itself is maximized over the
    same interval by bounded Brent search.
    """
    if not tol > 0:
        raise InvalidInputError("tol must be positive")
    rho_noi = float(np.sqrt(bounds.rho_noi_lo * bounds.rho_noi_hi))
    lo, hi = np.log(bounds.rho_sig_lo), np.log(bounds.rho_sig_hi)
    count = [0]

    def f(s):
        count[0] += 1
        return a_sig(np.exp(s), rho_noi, pm)

    f_lo, f_hi = f(lo), f(hi)
    if f_lo == 0.0:
        root = lo
    elif f_hi == 0.0:
        root = hi
    elif f_lo > 0 > f_hi or f_lo < 0 < f_hi:
        root = bisect(f, lo, hi, xtol=tol, maxiter=200)
    else:
        def neg(s):
            count[0] += 1
            return -objective(candidate_g(np.exp(s), rho_noi, pm), pm)

        root = minimize_scalar(neg, bounds=(lo, hi), method="bounded",
                               options={"xatol": tol}).x
    return _result(np.exp(root), rho_noi, pm, count[0])
