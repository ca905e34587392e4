"""Exact and asymptotic permanents of block-uniform matrices."""

from ._backend import BACKEND, available_backends, load_backend
from .asymptotics import (
    AsymptoticPrediction,
    SweepReport,
    SweepRow,
    fluctuation_determinant,
    predict_ratio,
    verify_sweep,
)
from .errors import (
    ArityError,
    BudgetError,
    ConvergenceError,
    DegenerateSpectrumError,
    DimensionError,
    DomainError,
    InputError,
    PermlabError,
    SizeError,
    SymmetryError,
)
from .fluctuations import spectrum_pairing_check, verify_lemma_identity
from .kernel import KernelSpec, bridge_potentials, conjecture_trend, fredholm_determinant
from .permanent import build_block_matrix, permanent_naive, permanent_ryser
from .scaling import PositiveBlockMatrix, ScalingSolution, sinkhorn_scale
from .tables import (
    BlockPermanentResult,
    ContingencyTable,
    block_permanent_ratio,
    enumerate_contingency_tables,
    example2_exact_ratio,
    pinsky_log_count,
)

__version__ = "0.1.0"
