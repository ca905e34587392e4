"""Exact permanents: brute force, Ryser, and the block expansion ``A(m, n)``.

All permanents are returned as natural logarithms (``-inf`` for zero).
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._backend import load_backend
from .errors import DomainError, SizeError
from .linalg import as_square
from .scaling import PositiveBlockMatrix

__all__ = [
    "BlockExpandedMatrix",
    "build_block_matrix",
    "permanent_naive",
    "permanent_ryser",
    "NAIVE_MAX_DIM",
    "RYSER_MAX_DIM",
]

NAIVE_MAX_DIM = 12
RYSER_MAX_DIM = 30
_NAIVE_CHUNK = 40320


@dataclass(frozen=True)
class BlockExpandedMatrix:
    """``(m n) x (m n)`` matrix with ``a[i, j] = b[i // n, j // n]`` (0-based)."""

    b: np.ndarray
    n: int

    @property
    def m(self) -> int:
        return self.b.shape[0]

    @property
    def entries(self) -> np.ndarray:
        return np.kron(self.b, np.ones((self.n, self.n)))

    def __array__(self, dtype=None, copy=None):
        out = self.entries
        return out if dtype is None else out.astype(dtype)


def build_block_matrix(B, n: int) -> BlockExpandedMatrix:
    """Expand the seed ``B`` into constant ``n x n`` blocks.

    ``B`` may be a :class:`PositiveBlockMatrix` or any nonnegative square
    array (zero entries are allowed so degenerate seeds can be studied).
    """
    if n < 1:
        raise SizeError(f"block size must be >= 1, got {n}")
    b = B.b if isinstance(B, PositiveBlockMatrix) else as_square(B, "B")
    if np.any(b < 0):
        raise DomainError("block matrix entries must be nonnegative")
    return BlockExpandedMatrix(b=np.array(b, dtype=np.float64), n=int(n))


def _nonneg_square(a, name="A") -> np.ndarray:
    a = as_square(np.asarray(a, dtype=np.float64), name)
    if np.any(a < 0):
        raise DomainError(f"{name} must be entrywise nonnegative")
    return a


def permanent_naive(a, max_dim: int = NAIVE_MAX_DIM) -> float:
    """Sum over all ``n!`` permutations; the reference oracle for small ``n``.

    Returns ``ln perm(a)``. Permutations are processed in numpy chunks and the
    chunk sums are combined with ``math.fsum``.
    """
    a = _nonneg_square(a)
    n = a.shape[0]
    if n > max_dim:
        raise SizeError(f"permanent_naive is limited to n <= {max_dim}, got {n}")
    rows = np.arange(n)
    partials = []
    perms = itertools.permutations(range(n))
    while True:
        chunk = np.array(list(itertools.islice(perms, _NAIVE_CHUNK)), dtype=np.intp)
        if chunk.size == 0:
            break
        partials.append(float(np.sum(np.prod(a[rows, chunk], axis=1))))
    total = math.fsum(partials)
    return math.log(total) if total > 0 else -math.inf


def _dd_merge(pairs):
    # fixed-order double-double accumulation of (hi, lo) partials
    hi, lo = 0.0, 0.0
    for ph, pl in pairs:
        s = hi + ph
        bb = s - hi
        e = (hi - (s - bb)) + (ph - bb) + lo + pl
        hi = s + e
        lo = e - (hi - s)
    return hi, lo


def permanent_ryser(
    a,
    workers: int = 1,
    max_dim: int = RYSER_MAX_DIM,
    backend: str | None = None,
) -> float:
    """Ryser's inclusion-exclusion formula over Gray-code ordered subsets.

    Rows are first normalised to unit sum so every intermediate lies in
    ``[-1, 1]``; the log of the normalisers is added back at the end.
    The subset range is cut into a fixed set of partitions, so the value is
    the same for every ``workers`` setting.

    Parameters
    ----------
    a : array_like, shape (n, n)
        Nonnegative matrix.
    workers : int
        Threads used for the partitions (the compiled kernel drops the GIL).
    max_dim : int
        Guard on ``n``.
    backend : {"compiled", "python", None}
        Kernel implementation; ``None`` uses the import-time default.

    Returns
    -------
    float
        ``ln perm(a)``.
    """
    a = _nonneg_square(a)
    n = a.shape[0]
    if n > max_dim:
        raise SizeError(f"permanent_ryser is limited to n <= {max_dim}, got {n}")
    row_sums = a.sum(axis=1)
    if np.any(row_sums == 0.0):
        return -math.inf
    scaled = np.ascontiguousarray(a / row_sums[:, None])
    log_scale = math.fsum(np.log(row_sums).tolist())

    kern = load_backend(backend)
    tasks = kern.ryser_tasks(n)
    if workers > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda t: kern.ryser_task(scaled, t), tasks))
    else:
        parts = [kern.ryser_task(scaled, t) for t in tasks]
    hi, lo = _dd_merge(parts)
    value = hi + lo
    if value <= 0.0:
        return -math.inf
    return log_scale + math.log(hi) + math.log1p(lo / hi)
