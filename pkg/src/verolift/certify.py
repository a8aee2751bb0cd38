"""Mutual coherence and the sparsity certificates built on it."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .lifting import base_dim
from .measure import ZERO_COLUMN_TOL, build_A_tilde

TIE_GUARD = 1e-12
KERNEL_TOL = 1e-8
LEMMA_SLACK = 1e-9


@dataclass(frozen=True)
class CertificateReport:
    mu: float
    bound: float
    holds_for: int
    theorem_id: str
    stability_rhs: float | None = None
    excluded_columns: int = 0

    def certifies(self, sparsity: int) -> bool:
        return sparsity <= self.holds_for

    def to_json(self) -> dict:
        return {
            "mu": self.mu,
            "bound": None if math.isinf(self.bound) else self.bound,
            "holds_for": self.holds_for,
            "theorem_id": self.theorem_id,
            "stability_rhs": self.stability_rhs,
            "excluded_columns": self.excluded_columns,
        }


def coherence_details(A) -> tuple[float, int]:
    """Mutual coherence over the nonzero columns and the number of excluded ones."""
    A = np.asarray(A, dtype=float)
    norms = np.linalg.norm(A, axis=0)
    keep = norms >= ZERO_COLUMN_TOL
    if keep.sum() < 2:
        raise ValueError("mutual coherence needs at least two nonzero columns")
    An = A[:, keep] / norms[keep]
    G = np.abs(An.T @ An)
    np.fill_diagonal(G, 0.0)
    return float(min(G.max(), 1.0)), int((~keep).sum())


def mutual_coherence(A) -> float:
    return coherence_details(A)[0]


def _threshold(n: int, mu: float) -> float:
    if not 0 <= mu <= 1:
        raise ValueError(f"coherence must lie in [0, 1], got {mu}")
    if mu == 0:
        return math.inf
    return math.sqrt(1 + 1 / mu**2) / (2 * math.sqrt(n))


def exact_bound_real(n: int, mu: float) -> float:
    return _threshold(n, mu)


def exact_bound_complex(n: int, mu_tilde: float) -> float:
    return _threshold(2 * n, mu_tilde)


def exact_bound_complex_real(n: int, mu_reA: float) -> float:
    return _threshold(n, mu_reA)


def holds_for(bound: float, n: int | None = None) -> int:
    """Largest integer sparsity strictly below ``bound``."""
    if math.isinf(bound):
        return n if n is not None else np.iinfo(np.int64).max
    k = max(math.ceil(bound - TIE_GUARD) - 1, 0)
    return min(k, n) if n is not None else k


def certificate(A, variant: str) -> CertificateReport:
    """Exact-recovery certificate for the linearised operator of a problem variant."""
    A = np.asarray(A)
    n = base_dim(A.shape[1])
    if variant == "real":
        mu, excl = coherence_details(A.real)
        bound, tid = exact_bound_real(n, mu), "real"
    elif variant == "complex":
        mu, excl = coherence_details(build_A_tilde(A))
        bound, tid = exact_bound_complex(n, mu), "complex"
    elif variant in ("complex_real", "fourier"):
        mu, excl = coherence_details(A.real)
        bound, tid = exact_bound_complex_real(n, mu), "complex_real"
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return CertificateReport(mu, bound, holds_for(bound, n), tid, excluded_columns=excl)


class StabilityBound(NamedTuple):
    condition_holds: bool
    rhs: float


def stability_bound(n: int, mu: float, sparsity: int, eps: float, variant: str = "real") -> StabilityBound:
    """Noise-stability hypothesis and the error bound on the weighted lift.

    The same formula serves the real (``mu = mu(A)``) and complex
    (``mu = mu(A_tilde)``) programs.
    """
    if variant not in ("real", "complex"):
        raise ValueError(f"stability bounds exist for 'real' and 'complex', not {variant!r}")
    if not 0 < mu <= 1:
        raise ValueError(f"coherence must lie in (0, 1], got {mu}")
    c = 2 * n**2 * (n + 1)
    holds = sparsity < (1 + 1 / mu) / c - TIE_GUARD
    denom = 1 - mu * (c * sparsity - 1)
    rhs = 4 * n * eps**2 / denom if holds else math.inf
    return StabilityBound(bool(holds), float(rhs))


def kernel_bound_check(A, weights, delta, i: int, lemma: str = "real", slack: float = LEMMA_SLACK) -> bool:
    """Check the coordinate-wise kernel bound for one lifted position ``i`` (0-based).

    ``lemma="real"`` tests ``w_i^2 d_i^2 <= mu^2/(1+mu^2) ||W d||^2`` for a real
    ``A`` and real ``delta`` in its kernel. ``lemma="complex"`` takes the
    complex ``A``, ``weights=(wR, wI)`` and a complex ``delta`` with
    ``Re(A delta) = 0`` and tests the doubled bound with ``mu(A_tilde)``.
    """
    A = np.asarray(A)
    delta = np.asarray(delta)
    if lemma == "real":
        B = np.asarray(A, dtype=float)
        d = np.asarray(delta, dtype=float)
        wd = np.asarray(weights, dtype=float) * d
        factor = 1.0
    elif lemma == "complex":
        B = build_A_tilde(A)
        d = np.concatenate([delta.real, delta.imag])
        wR, wI = weights
        wd = np.concatenate([wR, wI]) * d
        factor = 2.0
    else:
        raise ValueError(f"unknown lemma {lemma!r}")
    if np.linalg.norm(B @ d) > KERNEL_TOL * max(np.linalg.norm(d), 1.0):
        raise ValueError("delta is not in the kernel of the operator")
    if not np.any(d):
        return True
    mu = mutual_coherence(B)
    bound = factor * mu**2 / (1 + mu**2) * float(wd @ wd)
    if lemma == "real":
        lhs = wd[i] ** 2
    else:
        m = delta.size
        lhs = wd[i] ** 2 + wd[m + i] ** 2
    return bool(lhs <= bound + slack * max(1.0, float(wd @ wd)))


def kernel_bound_ratio(A, weights, delta, lemma: str = "real") -> float:
    """``max_i lhs_i / rhs`` for the kernel bound; values above 1 are violations."""
    A = np.asarray(A)
    if lemma == "real":
        B = np.asarray(A, dtype=float)
        wd = np.asarray(weights, dtype=float) * np.asarray(delta, dtype=float)
        lhs = wd**2
        factor = 1.0
    else:
        B = build_A_tilde(A)
        delta = np.asarray(delta)
        wR, wI = weights
        lhs = (wR * delta.real) ** 2 + (wI * delta.imag) ** 2
        wd = np.concatenate([wR * delta.real, wI * delta.imag])
        factor = 2.0
    mu = mutual_coherence(B)
    return float(lhs.max() / (factor * mu**2 / (1 + mu**2) * float(wd @ wd)))
