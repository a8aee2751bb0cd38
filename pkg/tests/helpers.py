"""Shared fixtures: engineered low-coherence designs and small random instances."""

from __future__ import annotations

import itertools

import numpy as np

from verolift.measure import gaussian_design


def spike_pair_design(n: int, s: float, complex_valued: bool = False, rng=None, extra: int = 0,
                      amp: float = 0.05) -> np.ndarray:
    """Rows ``s e_j`` and ``e_j +- e_k`` (plus ``e_j +- i e_k`` when complex).

    In the real case the lifted operator has coherence ``2 / (s^4 + 2(n-1))``.
    ``extra`` small Gaussian rows of amplitude ``amp`` perturb the design.
    """
    dtype = complex if complex_valued else float
    eye = np.eye(n, dtype=dtype)
    rows = [s * eye[j] for j in range(n)]
    phases = (1, -1, 1j, -1j) if complex_valued else (1, -1)
    for j, k in itertools.combinations(range(n), 2):
        for ph in phases:
            rows.append(eye[j] + ph * eye[k])
    q = np.array(rows)
    if extra:
        q = np.vstack([q, amp * gaussian_design(n, extra, complex_valued, rng)])
    return q


def weighted_scale(problem) -> np.ndarray:
    """Per-coordinate weights of a program's stacked variables."""
    scale = np.ones(problem.dim)
    for g in problem.groups:
        scale[g.index] = g.weights
    return scale


def kernel_sample(B: np.ndarray, rng, size: int = 1) -> np.ndarray:
    """Random vectors of ``ker(B)`` with Gaussian coefficients in an orthonormal basis."""
    import scipy.linalg as sla

    Z = sla.null_space(B)
    return rng.standard_normal((size, Z.shape[1])) @ Z.T


# Acceptance outcomes collected for the end-of-session summary.
ACCEPTANCE: dict[int, str] = {}


def report(number: int, passed: bool, detail: str) -> None:
    line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE[number] = line
    print(line)
