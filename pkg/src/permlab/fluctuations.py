"""Gaussian fluctuation apparatus around the doubly stochastic matrix ``t``.

Tables near ``n t`` are parametrised as ``n t + sqrt(n) Z`` with ``Z`` having
zero margins. Zero-margin matrices are spanned by the ``(m-1)**2`` basis
matrices ``F(rho, sigma)``; pulling the diagonal form ``G(Z) = sum(z**2 / t)``
back to that basis gives the Gram matrix whose determinant appears in the
prefactor. The functions here build every object in that chain and check
numerically that the chain collapses to ``det(I + J - t.T t)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InputError
from .linalg import adjugate, lu_determinant, symmetric_eigenvalues
from .scaling import doubly_stochastic_residual

__all__ = [
    "FluctuationModel",
    "basis_matrix",
    "basis",
    "quadratic_form_G",
    "gram_matrix",
    "covariance_K",
    "precision_block_H",
    "ttT_eigenvalues",
    "adjugate_constant_c",
    "spectrum_pairing_check",
    "verify_lemma_identity",
    "fluctuation_model",
    "IdentityCheck",
    "LemmaReport",
]

_DS_TOL = 1e-8


def _doubly_stochastic(t, positive: bool = False) -> np.ndarray:
    t = np.asarray(t, dtype=np.float64)
    res = doubly_stochastic_residual(t)
    if res > _DS_TOL:
        raise InputError(f"matrix is not doubly stochastic (residual {res:.3e})")
    if positive and np.any(t <= 0):
        raise DomainError("matrix must be strictly positive")
    return t


def basis_matrix(rho: int, sigma: int, m: int) -> np.ndarray:
    """Zero-margin integer matrix ``F(rho, sigma)`` (1-based indices).

    +1 at ``(rho, sigma)`` and ``(m, m)``, -1 at ``(rho, m)`` and ``(m, sigma)``.
    """
    if not (1 <= rho <= m - 1 and 1 <= sigma <= m - 1):
        raise IndexError(f"(rho, sigma) = ({rho}, {sigma}) out of range for m = {m}")
    f = np.zeros((m, m), dtype=np.int64)
    f[rho - 1, sigma - 1] += 1
    f[m - 1, m - 1] += 1
    f[rho - 1, m - 1] -= 1
    f[m - 1, sigma - 1] -= 1
    return f


def basis(m: int) -> list[np.ndarray]:
    """All ``F(rho, sigma)`` in row-major order of ``(rho, sigma)``."""
    return [basis_matrix(r, s, m) for r in range(1, m) for s in range(1, m)]


def quadratic_form_G(t, z) -> float:
    """``sum(z**2 / t)``."""
    t = np.asarray(t, dtype=np.float64)
    if np.any(t <= 0):
        raise DomainError("quadratic form needs strictly positive t")
    z = np.asarray(z, dtype=np.float64)
    return float(np.sum(z * z / t))


def gram_matrix(t) -> np.ndarray:
    """Matrix of the quadratic form in the ``F`` basis, built by polarisation."""
    t = _doubly_stochastic(t, positive=True)
    fs = basis(t.shape[0])
    diag = [quadratic_form_G(t, f) for f in fs]
    k = len(fs)
    g = np.empty((k, k))
    for i in range(k):
        g[i, i] = diag[i]
        for j in range(i + 1, k):
            val = 0.5 * (quadratic_form_G(t, fs[i] + fs[j]) - diag[i] - diag[j])
            g[i, j] = g[j, i] = val
    return g


def covariance_K(t) -> np.ndarray:
    """``[[I, -t], [-t.T, I]]``: covariance of row sums and negated column sums."""
    t = _doubly_stochastic(t)
    m = t.shape[0]
    eye = np.eye(m)
    return np.block([[eye, -t], [-t.T, eye]])


def precision_block_H(t) -> np.ndarray:
    """``[[I_m, U], [U.T, I_{m-1}]]`` with ``U`` = ``t`` minus its last column."""
    t = _doubly_stochastic(t)
    m = t.shape[0]
    u = t[:, : m - 1]
    return np.block([[np.eye(m), u], [u.T, np.eye(m - 1)]])


def ttT_eigenvalues(t) -> np.ndarray:
    """Eigenvalues of ``t t.T``, descending, clipped at zero."""
    t = np.asarray(t, dtype=np.float64)
    return np.clip(symmetric_eigenvalues(t @ t.T, tol=1e-10), 0.0, None)


def adjugate_constant_c(t) -> float:
    """``(1/m) prod(1 - lambda_r)`` over the non-Perron eigenvalues of ``t t.T``."""
    t = _doubly_stochastic(t)
    lam = ttT_eigenvalues(t)
    return float(np.prod(1.0 - lam[1:])) / t.shape[0]


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    lhs: float
    rhs: float
    rel_error: float
    passed: bool

    def to_dict(self) -> dict:
        return {"name": self.name, "lhs": self.lhs, "rhs": self.rhs,
                "rel_error": self.rel_error, "passed": self.passed}


@dataclass
class LemmaReport:
    checks: list = field(default_factory=list)
    tol: float = 1e-9

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def max_rel_error(self) -> float:
        return max((c.rel_error for c in self.checks), default=0.0)

    def __getitem__(self, name: str) -> IdentityCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"tol": self.tol, "passed": self.passed,
                "max_rel_error": self.max_rel_error,
                "identities": [c.to_dict() for c in self.checks]}


def _check(name, lhs, rhs, tol) -> IdentityCheck:
    lhs, rhs = float(lhs), float(rhs)
    scale = max(abs(lhs), abs(rhs))
    err = abs(lhs - rhs) / scale if scale > 0 else 0.0
    return IdentityCheck(name, lhs, rhs, err, bool(err <= tol))


def spectrum_pairing_check(t, tol: float = 1e-8) -> LemmaReport:
    """Compare the spectrum of ``K`` with ``{1 +- sqrt(lambda_r)}``.

    Eigenvalues are matched as sorted multisets; one check per position.
    """
    t = _doubly_stochastic(t)
    k_eigs = np.sort(symmetric_eigenvalues(covariance_K(t)))
    root = np.sqrt(ttT_eigenvalues(t))
    predicted = np.sort(np.concatenate([1.0 + root, 1.0 - root]))
    checks = []
    for i, (a, b) in enumerate(zip(k_eigs, predicted)):
        err = abs(a - b)
        checks.append(IdentityCheck(f"eigenvalue[{i}]", float(a), float(b), err, bool(err <= tol)))
    return LemmaReport(checks, tol)


def verify_lemma_identity(t, tol: float = 1e-9) -> LemmaReport:
    """Evaluate both sides of the four determinant identities.

    ``lemma``
        ``1 / (sqrt(m) sqrt(prod t) sqrt(det G))`` vs ``1 / sqrt(det(I + J - t.T t))``
    ``schur``
        ``det(G^-1)`` vs ``prod(t) / det(H)``
    ``adjugate``
        ``det(H)`` vs ``c = (1/m) prod(1 - lambda_r)``
    ``determinant_lemma``
        ``2 prod(1 - lambda_r)`` vs ``<chi, adj(K) chi>``, ``chi`` the unit all-ones vector
    """
    t = _doubly_stochastic(t, positive=True)
    m = t.shape[0]
    log_prod_t = float(np.sum(np.log(t)))
    g = gram_matrix(t)
    det_g = lu_determinant(g) if m > 1 else 1.0
    fluct = lu_determinant(np.eye(m) + np.full((m, m), 1.0 / m) - t.T @ t)
    det_h = lu_determinant(precision_block_H(t))
    c = adjugate_constant_c(t)
    lam = ttT_eigenvalues(t)
    kmat = covariance_K(t)
    chi = np.full(2 * m, 1.0 / math.sqrt(2 * m))
    adj = adjugate(kmat)

    checks = [
        _check("lemma",
               1.0 / math.sqrt(m * math.exp(log_prod_t) * det_g),
               1.0 / math.sqrt(fluct), tol),
        _check("schur", 1.0 / det_g, math.exp(log_prod_t) / det_h, tol),
        _check("adjugate", det_h, c, tol),
        _check("determinant_lemma", 2.0 * np.prod(1.0 - lam[1:]), chi @ adj @ chi, tol),
    ]
    return LemmaReport(checks, tol)


@dataclass(frozen=True)
class FluctuationModel:
    m: int
    t: np.ndarray
    basis: list
    gram: np.ndarray
    precision_block: np.ndarray
    covariance: np.ndarray
    lambdas: np.ndarray
    c: float
    chi: np.ndarray

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "t": self.t.tolist(),
            "gram": self.gram.tolist(),
            "precision_block": self.precision_block.tolist(),
            "covariance": self.covariance.tolist(),
            "lambdas": self.lambdas.tolist(),
            "c": self.c,
            "log_det_gram": math.log(lu_determinant(self.gram)) if self.m > 1 else 0.0,
        }


def fluctuation_model(t) -> FluctuationModel:
    t = _doubly_stochastic(t, positive=True)
    m = t.shape[0]
    return FluctuationModel(
        m=m,
        t=t,
        basis=basis(m),
        gram=gram_matrix(t),
        precision_block=precision_block_H(t),
        covariance=covariance_K(t),
        lambdas=ttT_eigenvalues(t),
        c=adjugate_constant_c(t),
        chi=np.full(2 * m, 1.0 / math.sqrt(2 * m)),
    )
