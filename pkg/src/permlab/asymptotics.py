"""Asymptotic prediction for block permanents and exact-vs-predicted sweeps.

For a positive seed ``B`` with scaling ``t = diag(v) B diag(w)``,

    perm(A(m, n)) / (m n)!  ~  m**(-m n) prod(v)**(-n) prod(w)**(-n)
                               / sqrt(det(I + J - t.T @ t))

where ``J`` has every entry ``1/m``. This module evaluates the right-hand
side, the Stirling functionals behind it, and sweeps over ``n`` comparing
it to the exact value from :mod:`permlab.tables`.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .errors import DegenerateSpectrumError, DomainError, InputError
from .linalg import lu_determinant
from .serialize import dumps, format_number
from .scaling import PositiveBlockMatrix, ScalingSolution, doubly_stochastic_residual, sinkhorn_scale
from .tables import DEFAULT_BUDGET, ContingencyTable, block_permanent_ratio

__all__ = [
    "AsymptoticPrediction",
    "SweepRow",
    "SweepReport",
    "fluctuation_determinant",
    "predict_ratio",
    "stirling_L",
    "stirling_K",
    "cost_P",
    "pinsky_term_asymptotic",
    "verify_sweep",
    "scaled_error",
    "stirling_log_factorial_bounds",
    "DEGENERATE_THRESHOLD",
]

DEGENERATE_THRESHOLD = 1e-12
_RESIDUAL_LIMIT = 1e-8


@dataclass(frozen=True)
class AsymptoticPrediction:
    log_leading: float
    fluct_det: float
    log_predicted_ratio: float
    degenerate: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


def fluctuation_determinant(t) -> float:
    """``det(I + J - t.T @ t)`` for a doubly stochastic ``t``.

    Lies in ``[0, 1]``: it equals the product of ``1 - lambda`` over the
    non-Perron eigenvalues of ``t t.T``.
    """
    t = np.asarray(t, dtype=np.float64)
    res = doubly_stochastic_residual(t)
    if res > _RESIDUAL_LIMIT:
        raise InputError(f"matrix is not doubly stochastic (residual {res:.3e})")
    m = t.shape[0]
    return lu_determinant(np.eye(m) + np.full((m, m), 1.0 / m) - t.T @ t)


def predict_ratio(
    B,
    n: int,
    sol: ScalingSolution | None = None,
    raise_on_degenerate: bool = True,
) -> AsymptoticPrediction:
    """Leading exponential term and Gaussian correction at block size ``n``.

    ``B`` may contain zeros only when ``sol`` is supplied explicitly (see
    :meth:`ScalingSolution.from_vectors`); that is how the degenerate
    two-block case is fed in.

    Raises
    ------
    DegenerateSpectrumError
        If the fluctuation determinant is ``<= 1e-12`` and
        ``raise_on_degenerate`` is set.
    """
    if n < 1:
        raise InputError("n must be >= 1")
    b = B.b if isinstance(B, PositiveBlockMatrix) else np.asarray(B, dtype=np.float64)
    if sol is None:
        sol = sinkhorn_scale(B)
    m = b.shape[0]
    if sol.m != m:
        raise InputError("scaling solution does not match B")
    rebuilt = sol.v[:, None] * b * sol.w[None, :]
    if not np.allclose(rebuilt, sol.t, rtol=1e-8, atol=1e-12):
        raise InputError("scaling solution was not computed from B")
    log_leading = -m * n * math.log(m) - n * sol.log_scaling_sum()
    det = fluctuation_determinant(sol.t)
    if det <= DEGENERATE_THRESHOLD:
        if raise_on_degenerate:
            raise DegenerateSpectrumError("fluctuation determinant vanishes", det)
        return AsymptoticPrediction(log_leading, det, math.inf, degenerate=True)
    return AsymptoticPrediction(log_leading, det, log_leading - 0.5 * math.log(det))


def _positive(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise InputError("expected a square matrix")
    if np.any(x <= 0):
        raise DomainError("all entries must be strictly positive")
    return x


def stirling_L(x) -> float:
    """Entropy functional ``-m ln m - sum(x ln x)``."""
    x = _positive(x)
    m = x.shape[0]
    return -m * math.log(m) - float(np.sum(x * np.log(x)))


def stirling_K(x) -> float:
    """Prefactor functional ``m**-0.5 * prod(x)**-0.5``."""
    x = _positive(x)
    m = x.shape[0]
    return math.exp(-0.5 * math.log(m) - 0.5 * float(np.sum(np.log(x))))


def cost_P(B, x) -> float:
    """Linear cost ``sum(x * ln b)``."""
    b = B.b if isinstance(B, PositiveBlockMatrix) else _positive(B)
    x = _positive(x)
    return float(np.sum(x * np.log(b)))


def pinsky_term_asymptotic(Q: ContingencyTable) -> float:
    """Stirling approximation of ``ln(|S(Q)| / (m n)!)``.

    ``n L[Q/n] + ln K[Q/n] - ((m-1)**2 / 2) ln(2 pi n)``. Diagnostic only;
    needs every ``q >= 1``.
    """
    q = Q.as_array()
    if np.any(q < 1):
        raise DomainError("asymptotic form needs every table entry >= 1")
    m, n = Q.m, Q.n
    x = q / n
    return (
        n * stirling_L(x)
        + math.log(stirling_K(x))
        - 0.5 * (m - 1) ** 2 * math.log(2 * math.pi * n)
    )


def scaled_error(log_exact: float, log_predicted: float) -> float:
    """``|exp(log_exact - log_predicted) - 1|``."""
    return abs(math.expm1(log_exact - log_predicted))


@dataclass(frozen=True)
class SweepRow:
    n: int
    log_exact_ratio: float
    log_predicted_ratio: float
    scaled_error: float
    sqrt_n_times_error: float

    @classmethod
    def build(cls, n: int, log_exact: float, log_predicted: float, **extra):
        err = scaled_error(log_exact, log_predicted)
        return cls(n, log_exact, log_predicted, err, math.sqrt(n) * err, **extra)


@dataclass
class SweepReport:
    """Rows of exact vs predicted values, kept sorted by ``n``."""

    rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.rows = sorted(self.rows, key=lambda r: r.n)

    def column(self, name: str) -> list:
        return [getattr(r, name) for r in self.rows]

    @property
    def header(self) -> list[str]:
        if not self.rows:
            return [f.name for f in fields(SweepRow)]
        return [f.name for f in fields(self.rows[0])]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.header)
        for row in self.rows:
            writer.writerow([format_number(getattr(row, h)) for h in self.header])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {"meta": self.meta, "columns": self.header,
                "rows": [asdict(r) for r in self.rows]}

    def to_json(self) -> str:
        return dumps(self.to_dict())


def verify_sweep(
    B,
    ns,
    workers: int = 1,
    budget: int = DEFAULT_BUDGET,
    backend: str | None = None,
) -> SweepReport:
    """Exact log-ratio (table enumeration) against the prediction for each ``n``."""
    if not isinstance(B, PositiveBlockMatrix):
        B = PositiveBlockMatrix(B)
    ns = sorted(int(n) for n in ns)
    sol = sinkhorn_scale(B)
    rows = []
    for n in ns:
        exact = block_permanent_ratio(B, n, workers=workers, budget=budget, backend=backend)
        pred = predict_ratio(B, n, sol)
        rows.append(SweepRow.build(n, exact.log_ratio, pred.log_predicted_ratio))
    return SweepReport(rows, meta={"m": B.m, "fluct_det": fluctuation_determinant(sol.t)})


def stirling_log_factorial_bounds(k: int) -> tuple[float, float]:
    """Open interval containing ``ln(k!)`` from the two-sided Stirling bounds."""
    if k < 1:
        raise DomainError("bounds need k >= 1")
    base = k * math.log(k) - k + 0.5 * math.log(2 * math.pi * k)
    return base + 1.0 / (12 * k + 1), base + 1.0 / (12 * k)

