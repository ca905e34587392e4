"""Discretised cost kernels, Schrödinger-bridge potentials, Fredholm determinants.

A cost ``C(x, y)`` on the unit square is sampled on the right-endpoint grid
``(i/N, j/N)``, ``i, j = 1..N``, giving the matrix ``exp(-C)``. Scaling it
to uniform marginals under the ``1/N`` quadrature weight yields the
potentials ``alpha``, ``beta`` and the density ``rho``; ``I + J - T*T`` is
then approximated by an ``N x N`` Nyström matrix.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .asymptotics import SweepReport, SweepRow
from .errors import DegenerateSpectrumError, DomainError, InputError, SizeError
from .linalg import log_factorial, lu_determinant
from .permanent import permanent_ryser
from .scaling import PositiveBlockMatrix, sinkhorn_scale

__all__ = [
    "KernelSpec",
    "BridgeSolution",
    "TrendRow",
    "discretize_kernel",
    "bridge_potentials",
    "fredholm_determinant",
    "fredholm_refinement",
    "conjecture_trend",
    "read_grid_file",
    "write_grid_file",
    "TREND_MAX_N",
]

TREND_MAX_N = 26
_DEGENERATE = 1e-12


@dataclass(frozen=True)
class KernelSpec:
    """A cost function on ``[0, 1]**2`` plus the symmetries it claims.

    Build instances with the class methods rather than directly.
    """

    family: str
    params: dict
    func: Callable = field(repr=False, compare=False)
    symmetric: bool = False
    antipodal: bool = False
    zero_diagonal: bool = False
    grid: Callable | None = field(default=None, repr=False, compare=False)

    def __call__(self, x, y):
        return self.func(np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64))

    def on_grid(self, n: int) -> np.ndarray:
        """Cost values at ``(i/n, j/n)`` for ``i, j = 1..n``."""
        if self.grid is not None:
            return self.grid(n)
        pts = np.arange(1, n + 1) / n
        return np.asarray(self(pts[:, None], pts[None, :]), dtype=np.float64) * np.ones((n, n))

    def check_symmetries(self, points: int = 100, seed: int = 0, tol: float = 1e-12) -> dict:
        """Worst violation of each declared symmetry at random points."""
        rng = np.random.default_rng(seed)
        x, y = rng.uniform(0, 1, points), rng.uniform(0, 1, points)
        out = {}
        if self.symmetric:
            out["symmetric"] = float(np.max(np.abs(self(x, y) - self(y, x))))
        if self.antipodal:
            out["antipodal"] = float(np.max(np.abs(self(1 - x, 1 - y) - self(x, y))))
        if self.zero_diagonal:
            out["zero_diagonal"] = float(np.max(np.abs(self(x, x))))
        vals = self(x, y)
        if not np.all(np.isfinite(vals)):
            raise DomainError("kernel is not finite on the unit square")
        return {k: (v, v <= tol) for k, v in out.items()}

    @classmethod
    def zero(cls) -> "KernelSpec":
        return cls("zero", {}, lambda x, y: np.zeros(np.broadcast(x, y).shape),
                   symmetric=True, antipodal=True, zero_diagonal=True)

    @classmethod
    def cosine(cls, eps: float) -> "KernelSpec":
        """``eps * cos(2 pi (x - y))``."""
        return cls("cosine", {"eps": float(eps)},
                   lambda x, y: eps * np.cos(2 * np.pi * (x - y)),
                   symmetric=True, antipodal=True)

    @classmethod
    def gaussian_bump(cls, eps: float, sigma: float) -> "KernelSpec":
        """``eps * (1 - exp(-(x - y)**2 / (2 sigma**2)))``; vanishes on the diagonal."""
        if sigma <= 0:
            raise DomainError("sigma must be positive")
        return cls("gaussian-bump", {"eps": float(eps), "sigma": float(sigma)},
                   lambda x, y: eps * -np.expm1(-((x - y) ** 2) / (2 * sigma**2)),
                   symmetric=True, antipodal=True, zero_diagonal=True)

    @classmethod
    def block(cls, B) -> "KernelSpec":
        """Piecewise-constant cost ``-ln b[ceil(m x), ceil(m y)]``."""
        if not isinstance(B, PositiveBlockMatrix):
            B = PositiveBlockMatrix(B)
        b = B.b
        m = B.m
        cost = -np.log(b)

        def index(x):
            return np.clip(np.ceil(m * x).astype(np.int64), 1, m) - 1

        def func(x, y):
            return cost[index(x), index(y)]

        def grid(n):
            i = np.arange(1, n + 1)
            r = (i * m + n - 1) // n - 1  # ceil(i m / n) - 1 in exact integers
            return cost[np.ix_(r, r)]

        sym = bool(np.allclose(b, b.T, rtol=0, atol=1e-15))
        anti = bool(np.allclose(b, b[::-1, ::-1], rtol=0, atol=1e-15))
        zd = bool(np.allclose(np.diag(b), 1.0, rtol=0, atol=1e-15))
        return cls("block", {"B": b.tolist()}, func, sym, anti, zd, grid)

    @classmethod
    def from_grid(cls, values, source: str | None = None) -> "KernelSpec":
        """Bilinear interpolation of cost samples given at ``(i/N, j/N)``."""
        g = np.asarray(values, dtype=np.float64)
        if g.ndim != 2 or g.shape[0] != g.shape[1] or g.shape[0] < 1:
            raise InputError("grid must be a non-empty square array")
        if not np.all(np.isfinite(g)):
            raise InputError("grid values must be finite")
        n = g.shape[0]

        def func(x, y):
            x, y = np.broadcast_arrays(x, y)
            if n == 1:
                return np.full(x.shape, g[0, 0])
            fx = np.clip(x * n - 1, 0, n - 1)
            fy = np.clip(y * n - 1, 0, n - 1)
            i0 = np.minimum(np.floor(fx).astype(np.int64), n - 2)
            j0 = np.minimum(np.floor(fy).astype(np.int64), n - 2)
            dx, dy = fx - i0, fy - j0
            return ((1 - dx) * (1 - dy) * g[i0, j0] + dx * (1 - dy) * g[i0 + 1, j0]
                    + (1 - dx) * dy * g[i0, j0 + 1] + dx * dy * g[i0 + 1, j0 + 1])

        def grid(size):
            if size == n:
                return g.copy()
            pts = np.arange(1, size + 1) / size
            return func(pts[:, None], pts[None, :])

        sym = bool(np.allclose(g, g.T, rtol=0, atol=1e-12))
        params = {"N": n} if source is None else {"N": n, "path": source}
        return cls("grid", params, func, symmetric=sym, grid=grid)

    @classmethod
    def from_grid_file(cls, path) -> "KernelSpec":
        return cls.from_grid(read_grid_file(path), source=str(path))

    def to_dict(self) -> dict:
        return {"family": self.family, "params": self.params, "symmetric": self.symmetric,
                "antipodal": self.antipodal, "zero_diagonal": self.zero_diagonal}


def read_grid_file(path) -> np.ndarray:
    """Read the CSV grid format: first line ``N``, then ``N`` rows of ``N`` values."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise InputError(f"{path}: empty grid file")
    try:
        n = int(rows[0][0])
        data = np.array([[float(c) for c in r] for r in rows[1:]], dtype=np.float64)
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None
    if n < 1 or data.shape != (n, n):
        raise InputError(f"{path}: expected {n} rows of {n} values, got {data.shape}")
    return data


def write_grid_file(path, values) -> None:
    g = np.asarray(values, dtype=np.float64)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([g.shape[0]])
        for row in g:
            writer.writerow([format(float(x), ".17g") for x in row])


def discretize_kernel(C: KernelSpec, N: int) -> np.ndarray:
    """``exp(-C(i/N, j/N))`` for ``i, j = 1..N``."""
    if N < 1:
        raise SizeError("grid size must be >= 1")
    return np.exp(-C.on_grid(N))


@dataclass(frozen=True)
class BridgeSolution:
    """Discrete Schrödinger bridge on an ``N``-point grid.

    ``rho[i, j] = exp(-C_ij - alpha_i - beta_j)`` has row and column means
    equal to one; ``sum(alpha) == sum(beta)``.
    """

    N: int
    alpha: np.ndarray
    beta: np.ndarray
    rho: np.ndarray
    lambda_rate: float
    residual: float

    def regauge(self, shift: float) -> "BridgeSolution":
        """``(alpha, beta) -> (alpha + shift, beta - shift)``."""
        return BridgeSolution(self.N, self.alpha + shift, self.beta - shift, self.rho,
                              self.lambda_rate, self.residual)

    def marginal_residual(self) -> float:
        r = np.abs(self.rho.mean(axis=1) - 1.0).max()
        c = np.abs(self.rho.mean(axis=0) - 1.0).max()
        return float(max(r, c))


def bridge_potentials(C: KernelSpec, N: int, tol: float = 1e-12,
                      max_iter: int = 100_000) -> BridgeSolution:
    """Solve the bridge by Sinkhorn scaling of the discretised kernel."""
    a = discretize_kernel(C, N)
    sol = sinkhorn_scale(a, tol=tol, max_iter=max_iter)
    half_log_n = 0.5 * math.log(N)
    alpha = -np.log(sol.v) - half_log_n
    beta = -np.log(sol.w) - half_log_n
    rho = N * sol.t
    lam = math.fsum(alpha.tolist()) / N + math.fsum(beta.tolist()) / N
    return BridgeSolution(N, alpha, beta, rho, lam, sol.residual)


def fredholm_determinant(sol: BridgeSolution) -> float:
    """Nyström value of ``det(I + J - T*T)`` with uniform weights ``1/N``.

    Raises
    ------
    DegenerateSpectrumError
        When the determinant is ``<= 1e-12``.
    """
    if sol.residual > 1e-10:
        raise InputError(f"bridge not converged (residual {sol.residual:.3e})")
    n = sol.N
    k = sol.rho / n
    det = lu_determinant(np.eye(n) + 1.0 / n - k.T @ k)
    if det <= _DEGENERATE:
        raise DegenerateSpectrumError("Fredholm determinant vanishes", det)
    return det


def fredholm_refinement(C: KernelSpec, grids) -> list[tuple[int, float]]:
    """``(N, D_N)`` for each grid size, for convergence checks."""
    return [(int(n), fredholm_determinant(bridge_potentials(C, int(n)))) for n in grids]


@dataclass(frozen=True)
class TrendRow(SweepRow):
    lambda_n: float
    lambda_ref: float
    fredholm_det: float
    grid_ref: int
    log_predicted_continuum: float
    scaled_error_continuum: float


def conjecture_trend(
    C: KernelSpec,
    ns,
    refine: int = 8,
    workers: int = 1,
    max_n: int = TREND_MAX_N,
    backend: str | None = None,
) -> SweepReport:
    """Exact ``perm(A(n)) / n!`` against ``exp(n Lambda) / sqrt(D)`` for each ``n``.

    The lattice rate ``Lambda_n`` comes from the bridge on the ``n``-point
    grid; ``D`` and the continuum rate ``Lambda_ref`` from a grid ``refine``
    times finer. The primary prediction uses ``Lambda_n``; the continuum
    variant is reported alongside.
    """
    ns = sorted(int(n) for n in ns)
    if any(n > max_n for n in ns):
        raise SizeError(f"conjecture_trend is limited to n <= {max_n} (Ryser budget)")
    if refine < 1:
        raise InputError("refine must be >= 1")
    rows = []
    for n in ns:
        a = discretize_kernel(C, n)
        exact = permanent_ryser(a, workers=workers, backend=backend) - log_factorial(n)
        lam_n = bridge_potentials(C, n).lambda_rate
        ref = bridge_potentials(C, refine * n)
        det = fredholm_determinant(ref)
        pred = n * lam_n - 0.5 * math.log(det)
        pred_c = n * ref.lambda_rate - 0.5 * math.log(det)
        err_c = abs(math.expm1(exact - pred_c))
        rows.append(TrendRow.build(n, exact, pred, lambda_n=lam_n, lambda_ref=ref.lambda_rate,
                                   fredholm_det=det, grid_ref=refine * n,
                                   log_predicted_continuum=pred_c, scaled_error_continuum=err_c))
    return SweepReport(rows, meta={"kernel": C.to_dict(), "refine": refine})
