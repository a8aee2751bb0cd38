"""Groupwise greedy selection for the group-sparse lifted problem.

Base indices in this module are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .lifting import (
    TAU_NU,
    GroupStructure,
    inverse_veronese_complex,
    inverse_veronese_real,
    lifted_to_matrix,
)
from .measure import WeightSet
from .solver import (
    ConeProblem,
    InfeasibleProblemError,
    SolverConfig,
    assemble_program,
    solve,
)

TIE_TOL = 1e-12
SIGN_TOL = 1e-10


@dataclass
class GreedyState:
    support: list[int] = field(default_factory=list)
    u: np.ndarray | None = None
    residual: np.ndarray | None = None
    history: list[float] = field(default_factory=list)


@dataclass
class GreedyResult:
    lifted: np.ndarray
    u: np.ndarray
    support: list[int]
    history: list[float]
    restricted_solve: bool = False

    @property
    def iterations(self) -> int:
        return len(self.support)


def _columns(problem: ConeProblem, chosen) -> np.ndarray:
    """Coordinates whose every group is selected.

    Groups overlap, so a coordinate shared with an unselected group would
    make that group nonzero too. Coordinates in no group are always free.
    """
    total = np.zeros(problem.dim, dtype=int)
    picked = np.zeros(problem.dim, dtype=int)
    for j, g in enumerate(problem.groups):
        total[g.index] += 1
        if j in chosen:
            picked[g.index] += 1
    cols = np.flatnonzero(picked == total)
    return np.setdiff1d(cols, problem.zero, assume_unique=True)


def _fit(problem: ConeProblem, cols: np.ndarray) -> tuple[np.ndarray, float]:
    B = problem.data_matrix[:, cols]
    coef, *_ = np.linalg.lstsq(B, problem.y, rcond=None)
    return coef, float(np.linalg.norm(problem.y - B @ coef))


def greedy_program(problem: ConeProblem, k_max: int, eps: float | None = None,
                   config: SolverConfig | None = None) -> tuple[GreedyResult, GreedyState]:
    """Greedy group selection on an assembled program's data and groups."""
    n = len(problem.groups)
    if not 0 <= k_max <= n:
        raise ValueError(f"k_max must lie in [0, {n}], got {k_max}")
    eps = problem.noise_bound if eps is None else eps
    y = problem.y
    stop = max(eps, 1e-9 * float(np.linalg.norm(y)))
    state = GreedyState(u=np.zeros(problem.dim), residual=y.copy())
    res_norm = float(np.linalg.norm(y))
    free = _columns(problem, [])
    if free.size:
        coef, res_norm = _fit(problem, free)
        state.u[free] = coef
        state.residual = y - problem.data_matrix @ state.u
    state.history.append(res_norm)

    while res_norm > stop and len(state.support) < k_max:
        best = None
        for j in range(n):
            if j in state.support:
                continue
            cols = _columns(problem, state.support + [j])
            coef, r = _fit(problem, cols)
            if best is None or r < best[0] - TIE_TOL:
                best = (r, j, cols, coef)
        r, j, cols, coef = best
        state.support.append(j)
        state.u = np.zeros(problem.dim)
        state.u[cols] = coef
        state.residual = y - problem.data_matrix @ state.u
        res_norm = r
        state.history.append(r)

    u = state.u
    restricted = False
    if state.support and problem.nonneg.size and u[problem.nonneg].min() < -SIGN_TOL:
        restricted_u = _restricted_solve(problem, state.support, res_norm, config)
        if restricted_u is not None:
            u, restricted = restricted_u, True
    result = GreedyResult(problem.to_lifted(u), u, list(state.support), list(state.history), restricted)
    return result, state


def _restricted_solve(problem, support, res_norm, config) -> np.ndarray | None:
    keep = _columns(problem, support)
    outside = np.setdiff1d(np.arange(problem.dim), keep)
    zero = np.union1d(problem.zero, outside)
    eps = problem.noise_bound
    if res_norm > max(eps, 1e-9 * float(np.linalg.norm(problem.y))):
        # the restricted equality system is inconsistent; fit within the greedy residual
        eps = res_norm * (1 + 1e-6)
    restricted = replace(problem, zero=zero, noise_bound=eps)
    try:
        out = solve(restricted, config or SolverConfig())
    except InfeasibleProblemError:
        return None
    return out.u if out.diagnostics.converged else None


def greedy_solve(A, y, groups: GroupStructure | None, variant: str, k_max: int, eps: float = 0.0,
                 weights: WeightSet | None = None, config: SolverConfig | None = None) -> GreedyResult:
    """Add, one at a time, the group whose inclusion best fits ``y`` in least squares.

    Candidates are scored by unconstrained least squares on the coordinates
    covered only by selected groups (the pairs inside the selected support); ties within ``1e-12`` go to the smallest index. Stops
    once the residual is at most ``max(eps, 1e-9 ||y||)`` or after ``k_max``
    groups. When the final fit has a negative squared-modulus entry the
    restricted convex program re-imposes the sign constraints.
    """
    problem = assemble_program(variant, A, y, weights, groups, eps=eps)
    return greedy_program(problem, k_max, eps, config)[0]


def tolerant_inverse(v, complex_valued: bool) -> np.ndarray:
    """Inverse lift that projects inconsistent lifts instead of rejecting them.

    Magnitudes come from the diagonal, signs (or phases) from the pivot column.
    """
    v = np.asarray(v)
    X = lifted_to_matrix(v.astype(complex) if complex_valued else v.real.astype(float))
    diag = np.real(np.diag(X))
    n = diag.size
    positive = np.flatnonzero(diag > TAU_NU)
    if positive.size == 0:
        return np.zeros(n, dtype=complex if complex_valued else float)
    i = positive[0]
    column = X[:, i]
    mag = np.sqrt(np.maximum(diag, 0.0))
    if complex_valued:
        phase = np.where(np.abs(column) > 0, column / np.where(column == 0, 1, np.abs(column)), 1.0)
        x = mag * phase
    else:
        x = mag * np.where(column < 0, -1.0, 1.0)
    x[i] = mag[i]
    return x


def greedy_refine(lifted, complex_valued: bool) -> np.ndarray:
    """Signal estimate from a lifted vector; falls back to :func:`tolerant_inverse`."""
    lifted = np.asarray(lifted)
    if complex_valued:
        x = inverse_veronese_complex(lifted)
    else:
        x = inverse_veronese_real(np.real(lifted))
    if np.any(x) or not np.any(lifted):
        return x
    return tolerant_inverse(lifted, complex_valued)
