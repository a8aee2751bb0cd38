"""Brute-force references for tiny instances.

Nothing here calls the solver: support enumeration uses dense linear algebra
and the inverse lift, and the objective oracle is a nested grid search over
the affine feasible set.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .lifting import flat_table, inverse_veronese_complex, inverse_veronese_real, lifted_dim
from .measure import MeasurementSet, build_A_tilde, measure

MAX_N = 6
MAX_FREE_DIM = 3
RESID_TOL = 1e-8


@dataclass
class OracleResult:
    best_sparsity: int
    solutions: list[np.ndarray] = field(default_factory=list)
    exhaustive: bool = True


def _pairs_within(support, n: int) -> np.ndarray:
    table = flat_table(n)
    return np.unique([table[i, j] for i in support for j in support])


def _same_up_to_phase(a: np.ndarray, b: np.ndarray) -> bool:
    inner = np.vdot(b, a)
    z = inner / abs(inner) if abs(inner) > 0 else 1.0
    return np.linalg.norm(a - z * b) <= 1e-6 * max(np.linalg.norm(b), 1.0)


def brute_force_l0(measurements: MeasurementSet, variant: str | None = None, k_max: int | None = None) -> OracleResult:
    """Sparsest signals consistent with exact quadratic measurements.

    For each support ``S`` of size ``1..k_max`` the lifted system is solved
    on the pairs within ``S``; a solution counts when its squared moduli are
    nonnegative, it unlifts consistently with full support ``S``, and it
    reproduces ``y``. ``exhaustive`` is False if some system was
    underdetermined (only its least-norm solution was tested).
    """
    ms = measurements
    variant = variant or ms.variant
    n = ms.n
    if n > MAX_N:
        raise ValueError(f"brute force is limited to n <= {MAX_N}, got n={n}")
    k_max = n if k_max is None else k_max
    if not 0 <= k_max <= n:
        raise ValueError(f"k_max must lie in [0, {n}], got {k_max}")
    y = ms.y
    ytol = RESID_TOL * max(1.0, float(np.linalg.norm(y)))
    if np.linalg.norm(y) <= ytol:
        zero = np.zeros(n, dtype=complex if variant == "complex" else float)
        return OracleResult(0, [zero], True)

    A = ms.A
    M = lifted_dim(n)
    complex_signal = variant == "complex"
    B = build_A_tilde(A) if complex_signal else np.asarray(A.real, dtype=float)
    exhaustive = True
    for s in range(1, k_max + 1):
        found: list[np.ndarray] = []
        for S in itertools.combinations(range(n), s):
            pos = _pairs_within(S, n)
            if complex_signal:
                diag = np.array([flat_table(n)[i, i] for i in S])
                im = np.setdiff1d(pos, diag) + M
                cols = np.concatenate([pos, im])
            else:
                cols = pos
            sub = B[:, cols]
            sol, _, rank, _ = np.linalg.lstsq(sub, y, rcond=None)
            if rank < cols.size:
                exhaustive = False
            if np.linalg.norm(sub @ sol - y) > ytol:
                continue
            full = np.zeros(B.shape[1])
            full[cols] = sol
            v = full[:M] + 1j * full[M:] if complex_signal else full
            x = inverse_veronese_complex(v) if complex_signal else inverse_veronese_real(v)
            if np.count_nonzero(np.abs(x) > 1e-9) != s:
                continue
            if np.linalg.norm(measure(ms.q, x) - y) > ytol:
                continue
            if not any(_same_up_to_phase(x, f) for f in found):
                found.append(x)
        if found:
            return OracleResult(s, found, exhaustive)
    return OracleResult(k_max + 1, [], exhaustive)


def _equality_system(problem) -> tuple[np.ndarray, np.ndarray]:
    d = problem.dim
    rows, rhs = [], []
    if not problem.noise_bound > 0:
        rows.append(problem.data_matrix)
        rhs.append(problem.y)
    if problem.eq_extra.shape[0]:
        rows.append(problem.eq_extra)
        rhs.append(problem.eq_rhs)
    if problem.zero.size:
        Z = np.zeros((problem.zero.size, d))
        Z[np.arange(problem.zero.size), problem.zero] = 1.0
        rows.append(Z)
        rhs.append(np.zeros(problem.zero.size))
    if not rows:
        return np.zeros((0, d)), np.zeros(0)
    return np.vstack(rows), np.concatenate(rhs)


def _objective(problem, U: np.ndarray) -> np.ndarray:
    total = np.zeros(U.shape[0])
    for g in problem.groups:
        total += g.multiplier * np.linalg.norm(U[:, g.index] * g.weights, axis=1)
    return total


def _constraint_rows(problem, Z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Inequalities ``G u <= 0`` and ``|G Z|``, their per-axis rates in nullspace coordinates."""
    d = problem.dim
    G = [problem.ineq]
    if problem.nonneg.size:
        neg = np.zeros((problem.nonneg.size, d))
        neg[np.arange(problem.nonneg.size), problem.nonneg] = -1.0
        G.append(neg)
    G = np.vstack(G) if G else np.zeros((0, d))
    return G, np.abs(G @ Z)


def _feasible(problem, U: np.ndarray, G: np.ndarray, rates: np.ndarray, ball_rates: np.ndarray,
              spacing: np.ndarray) -> np.ndarray:
    """Grid points whose cell (half a spacing per axis) may meet every inequality."""
    ok = np.ones(U.shape[0], dtype=bool)
    if G.shape[0]:
        ok &= (U @ G.T <= 0.5 * rates @ spacing + 1e-14).all(axis=1)
    if problem.noise_bound > 0:
        res = np.linalg.norm(U @ problem.data_matrix.T - problem.y, axis=1)
        ok &= res <= problem.noise_bound + 0.5 * float(ball_rates @ spacing) + 1e-14
    return ok


def _grid(center: np.ndarray, half: np.ndarray, points: int) -> tuple[np.ndarray, np.ndarray]:
    axes = [np.linspace(c - h, c + h, points) for c, h in zip(center, half)]
    T = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, center.size)
    return T, 2 * half / (points - 1)


def _axis_lipschitz(problem, Z: np.ndarray) -> np.ndarray:
    """Per-axis Lipschitz constants of the objective in nullspace coordinates."""
    L = np.zeros(Z.shape[1])
    for g in problem.groups:
        L += g.multiplier * np.linalg.norm(g.weights[:, None] * Z[g.index], axis=0)
    return L


def grid_objective_oracle(problem, points: int = 33, rtol: float = 1e-9, slack: float = 2.0,
                          max_levels: int = 400, max_grid: int = 300_000) -> float:
    """Minimal block-l1 objective by coarse-to-fine grid search.

    Equalities (data rows, extra rows and pinned coordinates) are eliminated
    with an orthonormal nullspace basis; the remaining ``<= 3`` free
    coordinates are gridded. A grid point is accepted when its grid cell
    may meet the inequality constraints, so every feasible point has an
    accepted neighbour, and that neighbour is worse by at most
    ``sum_k L_k s_k / 2`` (``L_k`` the per-axis Lipschitz constant, ``s_k``
    the spacing). The first box is widened until it holds every point as
    good as the best accepted one (the objective dominates ``w_min ||u||``).
    Each later box is the bounding box of the accepted points within
    ``slack`` times that bound of the best value. The search stops once the
    bound falls below ``rtol * max(1, value)``. When pruning stalls (smooth
    optima on a curved or tilted boundary grow only quadratically), the
    points per axis are doubled up to ``max_grid`` grid points; beyond that
    the box is halved around the best point, a local refinement without the
    global guarantee. Returns ``inf`` when nothing feasible is found.
    """
    E, f = _equality_system(problem)
    d = problem.dim
    if E.shape[0]:
        u_p, *_ = np.linalg.lstsq(E, f, rcond=None)
        if np.linalg.norm(E @ u_p - f) > 1e-9 * max(1.0, np.linalg.norm(f)):
            return float("inf")
        Z = sla.null_space(E, rcond=1e-10)
    else:
        u_p, Z = np.zeros(d), np.eye(d)
    m = Z.shape[1]
    if m > MAX_FREE_DIM:
        raise ValueError(f"free dimension {m} exceeds the oracle limit of {MAX_FREE_DIM}")
    G, rates = _constraint_rows(problem, Z)
    ball_rates = np.linalg.norm(problem.data_matrix @ Z, axis=0)
    if m == 0:
        U = u_p[None, :]
        feasible = _feasible(problem, U, G, rates, ball_rates, np.zeros(0))[0] or \
            max(problem.violations(u_p).values()) <= 1e-9
        return float(_objective(problem, U)[0]) if feasible else float("inf")

    # Every coordinate lies in a group, so objective >= w_min ||u|| bounds the minimiser.
    w_min = max(min((float(np.min(g.weights) * g.multiplier) for g in problem.groups), default=1.0), 1e-12)
    L = _axis_lipschitz(problem, Z)
    f_p = float(_objective(problem, u_p[None, :])[0])
    half = np.full(m, np.linalg.norm(u_p) + f_p / w_min + 1.0)
    center = np.zeros(m)
    widen = 0
    bounded = False
    val = float("inf")
    best = None
    for _ in range(max_levels):
        T, spacing = _grid(center, half, points)
        U = u_p + T @ Z.T
        ok = _feasible(problem, U, G, rates, ball_rates, spacing)
        if not ok.any():
            widen += 1
            if widen > 8:
                return float("inf")
            half = 2 * half
            if best is not None:
                center = best
            continue
        vals = np.where(ok, _objective(problem, U), np.inf)
        val = float(vals.min())
        best = T[int(np.argmin(vals))]
        widen = 0
        if not bounded:
            radius = np.linalg.norm(u_p) + val / w_min + float(spacing.max())
            if radius > half.min():
                half = np.full(m, 1.01 * radius)
                continue
            bounded = True
        gap = 0.5 * float(L @ spacing)
        if gap <= rtol * max(1.0, abs(val)):
            return val
        cand = T[vals <= val + slack * gap]
        lo, hi = cand.min(axis=0) - spacing, cand.max(axis=0) + spacing
        new_center, new_half = (lo + hi) / 2, np.maximum((hi - lo) / 2, 1e-300)
        if np.max(new_half / half) > 0.9:
            if (2 * points - 1) ** m <= max_grid:
                points = 2 * points - 1
            else:
                new_half = np.minimum(new_half, half / 2)
                new_center = np.clip(best, lo + new_half, hi - new_half)
        center, half = new_center, new_half
    return val
