"""Quadratic-form description of the sum-rate problem.

With ``g = vec(G)`` every power in the two-way link is a quadratic form in
``g``: relay power ``g^H Q g``, desired powers ``g^H K g`` and forwarded
relay noise ``g^H J g``. Using the fact that the relay power constraint is
active at the optimum, the constant terminal noise is absorbed into ``Q``,
which turns the sum rate into half the log2 of a product of two
generalized Rayleigh quotients::

    (g^H A1 g / g^H B1 g) * (g^H A2 g / g^H B2 g)
"""

from dataclasses import dataclass

import numpy as np

from .channel import relay_noise_covariance, relay_rx_covariance
from .exceptions import InvalidInputError
from .linalg import as_vector, gen_eig_extremes, kron, quad

__all__ = [
    "ProblemMatrices",
    "build_problem",
    "objective",
    "log_objective",
    "sum_rate",
    "scale_to_power",
    "tau_beta_intervals",
    "restrict_diagonal",
    "relay_matrix",
]


def _herm(m):
    return 0.5 * (m + m.conj().T)


@dataclass(frozen=True)
class ProblemMatrices:
    n: int
    q: np.ndarray
    k21: np.ndarray
    k12: np.ndarray
    j1: np.ndarray
    j2: np.ndarray
    b1: np.ndarray
    b2: np.ndarray
    a1: np.ndarray
    a2: np.ndarray
    p_tr: float
    p_n1: float
    p_n2: float
    p_t1: float
    p_t2: float
    m_r: int
    diagonal: bool = False


def build_problem(config, ch):
    """Build all quadratic-form matrices for one channel realization."""
    m = config.m_r
    eye = np.eye(m)
    r_r = relay_rx_covariance(config, ch)
    r_nr = relay_noise_covariance(config)

    def outer(h):
        return np.outer(h, h.conj())

    # transposes below are plain transposes, not conjugate transposes
    q = _herm(kron(r_r.T, eye))
    k21 = _herm(kron(outer(ch.h2f), outer(ch.h1b)).T)
    k12 = _herm(kron(outer(ch.h1f), outer(ch.h2b)).T)
    j1 = _herm(kron(r_nr, outer(ch.h1b)).T)
    j2 = _herm(kron(r_nr, outer(ch.h2b)).T)
    b1 = _herm(j1 + (config.p_n1 / config.p_tr) * q)
    b2 = _herm(j2 + (config.p_n2 / config.p_tr) * q)
    a1 = _herm(k21 * config.p_t2 + b1)
    a2 = _herm(k12 * config.p_t1 + b2)
    return ProblemMatrices(
        n=m * m, q=q, k21=k21, k12=k12, j1=j1, j2=j2,
        b1=b1, b2=b2, a1=a1, a2=a2,
        p_tr=config.p_tr, p_n1=config.p_n1, p_n2=config.p_n2,
        p_t1=config.p_t1, p_t2=config.p_t2, m_r=m,
    )


def _check_g(g, pm):
    g = as_vector(g, "g", nonzero=True)
    if g.shape[0] != pm.n:
        raise InvalidInputError(f"g has length {g.shape[0]}, expected {pm.n}")
    return g


def objective(g, pm):
    """Product of the two Rayleigh quotients; invariant to scaling of ``g``."""
    g = _check_g(g, pm)
    return (quad(g, pm.a1) / quad(g, pm.b1)) * (quad(g, pm.a2) / quad(g, pm.b2))


def log_objective(g, pm):
    g = _check_g(g, pm)
    return (np.log(quad(g, pm.a1)) - np.log(quad(g, pm.b1))
            + np.log(quad(g, pm.a2)) - np.log(quad(g, pm.b2)))


def relay_matrix(g, m_r):
    """Relay matrix ``G`` from either ``vec(G)`` or the diagonal of ``G``."""
    g = as_vector(g, "g")
    if g.shape[0] == m_r * m_r:
        return g.reshape((m_r, m_r), order="F")
    if g.shape[0] == m_r:
        return np.diag(g)
    raise InvalidInputError(f"g has length {g.shape[0]}, incompatible with m_r={m_r}")


def sum_rate(g, config, ch):
    """Physical sum rate ``r1 + r2`` in bits per channel use.

    ``g`` is used as is (no homogenization), so it should already satisfy
    the relay power constraint. A length-``m_r`` vector is read as the
    diagonal of ``G``.
    """
    m = config.m_r
    big_g = relay_matrix(g, m)
    gv = big_g.reshape(-1, order="F")
    r_nr = relay_noise_covariance(config)

    def outer(h):
        return np.outer(h, h.conj())

    k21 = kron(outer(ch.h2f), outer(ch.h1b)).T
    k12 = kron(outer(ch.h1f), outer(ch.h2b)).T
    j1 = kron(r_nr, outer(ch.h1b)).T
    j2 = kron(r_nr, outer(ch.h2b)).T
    p_r1 = quad(gv, k21) * config.p_t2
    p_r2 = quad(gv, k12) * config.p_t1
    pn1 = quad(gv, j1) + config.p_n1
    pn2 = quad(gv, j2) + config.p_n2
    return 0.5 * np.log2(1.0 + p_r1 / pn1) + 0.5 * np.log2(1.0 + p_r2 / pn2)


def scale_to_power(g, pm):
    """Rescale ``g`` so the relay transmits exactly ``p_tr``."""
    g = _check_g(g, pm)
    power = quad(g, pm.q)
    if not power > 0:
        raise InvalidInputError("g carries no relay power")
    c = np.sqrt(pm.p_tr / power)
    if abs(c - 1.0) <= 1e-15:
        return g
    return c * g


def tau_beta_intervals(pm):
    """Ranges of ``g^H A2 g`` and ``g^H B2 g`` over ``{g : g^H B1 g = 1}``.

    Returns ``(tau_min, tau_max, beta_min, beta_max)``.
    """
    tau_min, tau_max, _ = gen_eig_extremes(pm.a2, pm.b1)
    beta_min, beta_max, _ = gen_eig_extremes(pm.b2, pm.b1)
    return tau_min, tau_max, beta_min, beta_max


def restrict_diagonal(pm_full):
    """Restrict every matrix to the entries that act on ``diag(G)``.

    ``vec(G)`` holds ``G[m, m]`` at position ``m * (m_r + 1)``, so the
    restricted matrices are the principal submatrices on those indices.
    """
    if pm_full.diagonal:
        raise InvalidInputError("problem is already diagonal-restricted")
    m = pm_full.m_r
    if pm_full.n != m * m:
        raise InvalidInputError("expected a full problem with n = m_r**2")
    idx = np.arange(m) * (m + 1)
    sub = np.ix_(idx, idx)
    names = ("q", "k21", "k12", "j1", "j2", "b1", "b2", "a1", "a2")
    mats = {k: getattr(pm_full, k)[sub].copy() for k in names}
    return ProblemMatrices(
        n=m, **mats,
        p_tr=pm_full.p_tr, p_n1=pm_full.p_n1, p_n2=pm_full.p_n2,
        p_t1=pm_full.p_t1, p_t2=pm_full.p_t2, m_r=m, diagonal=True,
    )
