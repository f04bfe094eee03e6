"""Dense complex Hermitian linear algebra used by every solver.

All matrices are small (at most 36 x 36 for a six-antenna relay), so plain
numpy/LAPACK calls are used throughout.
"""

import numpy as np
from scipy.linalg import solve_triangular

from .exceptions import InvalidInputError, SingularPencilError

__all__ = [
    "kron",
    "vec",
    "unvec",
    "as_hermitian",
    "as_vector",
    "hermitian_eig",
    "gen_eig",
    "gen_eig_extremes",
    "quad",
]

HERMITIAN_RTOL = 1e-10


def kron(a, b):
    """Kronecker product; block ``(i, j)`` of the result is ``a[i, j] * b``."""
    return np.kron(np.asarray(a), np.asarray(b))


def vec(a):
    """Stack the columns of ``a`` into one long vector (column-major order)."""
    return np.asarray(a).reshape(-1, order="F")


def unvec(v, rows, cols=None):
    """Inverse of :func:`vec`."""
    cols = rows if cols is None else cols
    return np.asarray(v).reshape((rows, cols), order="F")


def as_hermitian(h, name="matrix", rtol=HERMITIAN_RTOL):
    """Validate a square Hermitian matrix and return its symmetrized copy.

    Parameters
    ----------
    h : array_like
        Candidate matrix.
    name : str
        Used in error messages.
    rtol : float
        Allowed ``||h - h^H|| / max(1, ||h||)`` before the input is rejected.

    Returns
    -------
    ndarray
        ``(h + h^H) / 2`` as a complex array.
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim == 0:
        h = h.reshape(1, 1)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise InvalidInputError(f"{name} must be square, got shape {h.shape}")
    if not np.all(np.isfinite(h)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    scale = max(1.0, np.linalg.norm(h))
    if np.linalg.norm(h - h.conj().T) > rtol * scale:
        raise InvalidInputError(f"{name} is not Hermitian")
    return 0.5 * (h + h.conj().T)


def as_vector(v, name="vector", nonzero=False):
    """Return ``v`` as a 1-D complex array, optionally rejecting the zero vector."""
    v = np.atleast_1d(np.asarray(v, dtype=complex))
    if v.ndim != 1 or v.size == 0:
        raise InvalidInputError(f"{name} must be a non-empty 1-D vector")
    if nonzero and not np.any(v):
        raise InvalidInputError(f"{name} must be non-zero")
    return v


def quad(v, m):
    """Real part of the quadratic form ``v^H m v``."""
    return float(np.real(np.vdot(v, m @ v)))


def hermitian_eig(h):
    """Eigendecomposition of a Hermitian matrix.

    Returns
    -------
    w : ndarray
        Real eigenvalues in ascending order.
    v : ndarray
        Unitary matrix whose columns are the matching eigenvectors.
    """
    h = as_hermitian(h, "h")
    w, v = np.linalg.eigh(h)
    return w, v


def _whitening_factor(b):
    b = as_hermitian(b, "b")
    scale = np.linalg.norm(b, 2)
    if scale == 0.0:
        raise SingularPencilError("b is the zero matrix")
    if np.linalg.eigvalsh(b)[0] <= 1e-12 * scale:
        raise SingularPencilError("b is not positive definite")
    try:
        return np.linalg.cholesky(b)
    except np.linalg.LinAlgError as exc:
        raise SingularPencilError("Cholesky factorization of b failed") from exc


def gen_eig(a, b):
    """Full solution of ``a v = lambda b v`` for Hermitian ``a`` and PD ``b``.

    ``b = L L^H`` is factored and the ordinary Hermitian problem for
    ``L^{-1} a L^{-H}`` is solved. Eigenvectors are ``b``-orthonormal
    (``V^H b V = I``) and eigenvalues ascend.
    """
    a = as_hermitian(a, "a")
    low = _whitening_factor(b)
    if low.shape != a.shape:
        raise InvalidInputError("a and b must have the same shape")
    tmp = solve_triangular(low, a, lower=True)
    c = solve_triangular(low, tmp.conj().T, lower=True).conj().T
    w, y = np.linalg.eigh(0.5 * (c + c.conj().T))
    v = solve_triangular(low.conj().T, y, lower=False)
    return w, v


def gen_eig_extremes(a, b):
    """Extreme generalized eigenvalues of the pencil ``(a, b)``.

    Returns
    -------
    lam_min, lam_max : float
    v_max : ndarray
        Eigenvector of ``lam_max`` normalized to ``v^H b v = 1``.
    """
    w, v = gen_eig(a, b)
    return float(w[0]), float(w[-1]), v[:, -1]
