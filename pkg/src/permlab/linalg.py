"""Dense linear algebra and log-domain scalar helpers.

Matrices are plain ``numpy.ndarray`` objects of dtype float64. Nonnegative
quantities that overflow binary64 (permanents, factorials) are carried as
their natural logarithm, with ``-inf`` standing for an exact zero.
"""

from __future__ import annotations

import math
import warnings
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg
from scipy.special import gammaln

from .errors import ArityError, DimensionError, SymmetryError

__all__ = [
    "as_matrix",
    "as_square",
    "lu_determinant",
    "symmetric_eigenvalues",
    "log_factorial",
    "log_factorial_table",
    "log_sum_exp",
    "combine_log_sums",
    "cofactor_matrix",
    "adjugate",
]


def as_matrix(data, name: str = "matrix") -> np.ndarray:
    """Validate ``data`` as a finite 2-D float64 array and return a copy."""
    m = np.array(data, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise DimensionError(f"{name} must be a non-empty 2-D array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DimensionError(f"{name} has non-finite entries")
    return m


def as_square(data, name: str = "matrix") -> np.ndarray:
    m = as_matrix(data, name)
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {m.shape}")
    return m


def lu_determinant(m) -> float:
    """Determinant by LU factorisation with partial pivoting.

    Parameters
    ----------
    m : array_like, shape (k, k)

    Returns
    -------
    float
        ``det(m)`` with its exact sign (row swaps are counted).
    """
    a = as_square(m)
    with warnings.catch_warnings():
        # an exactly singular input is a legitimate zero, not an error
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    swaps = np.count_nonzero(piv != np.arange(a.shape[0]))
    det = float(np.prod(np.diag(lu)))
    return -det if swaps % 2 else det


def symmetric_eigenvalues(m, tol: float = 1e-12) -> np.ndarray:
    """Eigenvalues of a real symmetric matrix, sorted in descending order.

    Raises
    ------
    SymmetryError
        If ``max|m - m.T|`` exceeds ``tol * max(1, max|m|)``.
    """
    a = as_square(m)
    scale = max(1.0, float(np.max(np.abs(a))))
    asym = float(np.max(np.abs(a - a.T)))
    if asym > tol * scale:
        raise SymmetryError(f"matrix is not symmetric (max asymmetry {asym:.3e})")
    vals = np.linalg.eigvalsh(0.5 * (a + a.T))
    return vals[::-1].copy()


def log_factorial(k: int) -> float:
    """``ln(k!)`` for a nonnegative integer ``k``."""
    k = int(k)
    if k < 0:
        raise ValueError(f"log_factorial needs k >= 0, got {k}")
    if k < 2:
        return 0.0
    return math.lgamma(k + 1.0)


@lru_cache(maxsize=32)
def _table(n: int) -> np.ndarray:
    t = gammaln(np.arange(n + 1, dtype=np.float64) + 1.0)
    t[:2] = 0.0
    t.setflags(write=False)
    return t


def log_factorial_table(n: int) -> np.ndarray:
    """Read-only array ``t`` with ``t[k] = ln(k!)`` for ``0 <= k <= n``."""
    if n < 0:
        raise ValueError(f"table size must be >= 0, got {n}")
    return _table(int(n))


def log_sum_exp(terms: Iterable[float]) -> float:
    """``ln(sum(exp(t)))`` with max-shift and correctly rounded summation.

    ``-inf`` entries encode zero summands. The result depends only on the
    multiset of terms (``math.fsum`` is order-independent).
    """
    if not isinstance(terms, np.ndarray):
        terms = list(terms)
    arr = np.asarray(terms, dtype=np.float64).ravel()
    if arr.size == 0:
        raise ArityError("log_sum_exp needs at least one term")
    top = float(np.max(arr))
    if top == -math.inf:
        return -math.inf
    if top == math.inf:
        return math.inf
    return top + math.log(math.fsum(np.exp(arr - top).tolist()))


def combine_log_sums(partials: Sequence[float]) -> float:
    """Merge per-block ``log_sum_exp`` results into the total."""
    return log_sum_exp(list(partials))


def cofactor_matrix(m) -> np.ndarray:
    """Signed cofactors ``C[i, j] = (-1)**(i+j) det(minor(i, j))``."""
    a = as_square(m)
    k = a.shape[0]
    if k == 1:
        return np.ones((1, 1))
    out = np.empty_like(a)
    idx = np.arange(k)
    for i in range(k):
        rows = idx[idx != i]
        for j in range(k):
            cols = idx[idx != j]
            out[i, j] = (-1) ** (i + j) * lu_determinant(a[np.ix_(rows, cols)])
    return out


def adjugate(m) -> np.ndarray:
    """Classical adjoint, computed from cofactors (no inverse involved)."""
    return cofactor_matrix(m).T
