"""Sinkhorn scaling of a positive block matrix to doubly stochastic form.

Given ``B > 0`` (entrywise) we look for positive vectors ``v``, ``w`` such
that ``t = diag(v) @ B @ diag(w)`` has every row and column summing to one.
The pair is unique up to ``(v, w) -> (c v, w / c)``; we fix that freedom by
requiring ``prod(v) == prod(w)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError, InputError
from .linalg import as_square

__all__ = [
    "PositiveBlockMatrix",
    "ScalingSolution",
    "sinkhorn_scale",
    "doubly_stochastic_residual",
    "DEFAULT_TOL",
    "DEFAULT_MAX_ITER",
]

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 100_000


@dataclass(frozen=True)
class PositiveBlockMatrix:
    """The ``m x m`` seed matrix ``B``; every entry strictly positive."""

    b: np.ndarray

    def __post_init__(self):
        b = as_square(self.b, "B")
        if np.any(b <= 0.0):
            raise DomainError("block matrix entries must be strictly positive")
        b.setflags(write=False)
        object.__setattr__(self, "b", b)

    @property
    def m(self) -> int:
        return self.b.shape[0]

    @classmethod
    def example1(cls, m: int) -> "PositiveBlockMatrix":
        """All entries ``1/m``."""
        return cls(np.full((m, m), 1.0 / m))

    @classmethod
    def example2(cls, delta: float) -> "PositiveBlockMatrix":
        """``0.5 * [[1+d, 1-d], [1-d, 1+d]]`` for ``0 <= d < 1``."""
        return cls(example2_matrix(delta))

    def transpose(self) -> "PositiveBlockMatrix":
        return PositiveBlockMatrix(self.b.T.copy())


def example2_matrix(delta: float) -> np.ndarray:
    """The two-block matrix with contrast ``delta``; zero entries at ``delta=1``."""
    if not 0.0 <= delta <= 1.0:
        raise DomainError(f"delta must lie in [0, 1], got {delta}")
    return 0.5 * np.array([[1.0 + delta, 1.0 - delta], [1.0 - delta, 1.0 + delta]])


def doubly_stochastic_residual(t) -> float:
    """Largest deviation of any row or column sum of ``t`` from one."""
    t = np.asarray(t, dtype=np.float64)
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise InputError(f"expected a square matrix, got shape {t.shape}")
    rows = np.abs(t.sum(axis=1) - 1.0)
    cols = np.abs(t.sum(axis=0) - 1.0)
    return float(max(rows.max(), cols.max()))


@dataclass(frozen=True)
class ScalingSolution:
    """Scaling vectors and the resulting doubly stochastic matrix.

    Attributes
    ----------
    v, w : ndarray, shape (m,)
        Row and column scalings (``v = exp(-alpha)``, ``w = exp(-beta)``).
    t : ndarray, shape (m, m)
        ``t[r, s] = b[r, s] * v[r] * w[s]``.
    residual : float
        ``doubly_stochastic_residual(t)``.
    iterations : int
        Sinkhorn sweeps performed (0 when built by hand).
    """

    v: np.ndarray
    w: np.ndarray
    t: np.ndarray
    residual: float
    iterations: int = 0

    @property
    def m(self) -> int:
        return self.t.shape[0]

    @property
    def alpha(self) -> np.ndarray:
        return -np.log(self.v)

    @property
    def beta(self) -> np.ndarray:
        return -np.log(self.w)

    @classmethod
    def from_vectors(cls, b, v, w) -> "ScalingSolution":
        """Assemble a solution from given scalings; used for degenerate ``B``.

        No positivity is required of ``b`` here, so the zero-entry case
        (``B = I``) can still be fed to the asymptotic predictor.
        """
        b = np.asarray(getattr(b, "b", b), dtype=np.float64)
        v = np.asarray(v, dtype=np.float64)
        w = np.asarray(w, dtype=np.float64)
        if np.any(v <= 0) or np.any(w <= 0):
            raise DomainError("scaling vectors must be positive")
        t = v[:, None] * b * w[None, :]
        return cls(v=v, w=w, t=t, residual=doubly_stochastic_residual(t))

    def regauge(self, c: float) -> "ScalingSolution":
        """Apply ``(v, w) -> (c v, w / c)``; ``t`` is unchanged."""
        if c <= 0:
            raise DomainError("gauge factor must be positive")
        return ScalingSolution(self.v * c, self.w / c, self.t, self.residual, self.iterations)

    def log_scaling_sum(self) -> float:
        """``sum(ln v) + sum(ln w)``, the gauge-invariant combination."""
        return float(np.sum(np.log(self.v)) + np.sum(np.log(self.w)))

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "v": self.v.tolist(),
            "w": self.w.tolist(),
            "t": self.t.tolist(),
            "residual": self.residual,
            "iterations": self.iterations,
        }


def sinkhorn_scale(
    B: PositiveBlockMatrix | np.ndarray,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> ScalingSolution:
    """Alternate row and column normalisation until ``t`` is doubly stochastic.

    Starts from ``v = w = 1`` and updates rows first. Stops once every row
    and every column sum is within ``tol`` of one, then rescales so that
    ``prod(v) == prod(w)``.

    Raises
    ------
    DomainError
        If ``B`` has a non-positive entry.
    ConvergenceError
        If ``max_iter`` sweeps do not reach ``tol``.
    """
    if not isinstance(B, PositiveBlockMatrix):
        B = PositiveBlockMatrix(B)
    if tol <= 0:
        raise InputError("tol must be positive")
    if max_iter < 1:
        raise InputError("max_iter must be >= 1")
    b = B.b
    m = B.m
    v = np.ones(m)
    w = np.ones(m)
    t = b.copy()
    residual = doubly_stochastic_residual(t)
    it = 0
    while residual > tol:
        if it >= max_iter:
            raise ConvergenceError("Sinkhorn scaling did not converge", residual, it)
        v = 1.0 / (b @ w)
        w = 1.0 / (b.T @ v)
        it += 1
        t = v[:, None] * b * w[None, :]
        residual = doubly_stochastic_residual(t)

    # gauge: sum(ln v) == sum(ln w)
    shift = (np.sum(np.log(w)) - np.sum(np.log(v))) / (2 * m)
    c = math.exp(shift)
    # t is gauge-invariant; keep the matrix whose residual was actually tested
    return ScalingSolution(v=v * c, w=w / c, t=t, residual=residual, iterations=it)
