"""Block-l1 cone programs over lifted vectors and an ADMM solver for them.

Every convex program of the package has the form::

    minimize    sum_g  c_g || w_g * u[idx_g] ||_2
    subject to  B u = y            (or ||B u - y||_2 <= eps)
                E u = f,  C u <= 0,  u[nonneg] >= 0,  u[zero] = 0

over a real variable ``u``. Complex lifted vectors are stacked as
``u = [Re(v); Im(v)]``. Groups overlap (each lifted entry belongs to two
groups) and are handled with one local copy per group; the affine equalities
are enforced exactly in the consensus step through a factorisation computed
once per problem.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg as sla

from .lifting import GroupStructure, diag_positions, lifted_dim
from .measure import WeightSet, build_A_tilde, compute_weights

log = logging.getLogger(__name__)

RANK_TOL = 1e-10
TOL_FEAS = 1e-8
# residuals are evaluated every CHECK_EVERY iterations
CHECK_EVERY = 10


class InfeasibleProblemError(RuntimeError):
    """The affine constraints of a cone program admit no solution."""


@dataclass(frozen=True)
class Group:
    index: np.ndarray
    weights: np.ndarray
    multiplier: float = 1.0


@dataclass(frozen=True)
class ConeProblem:
    """A block-l1 program in stacked-real variables.

    ``variant`` and ``n`` record how to map the variables back to a lifted
    vector: ``"complex"`` problems have ``2M`` variables ``[Re(v); Im(v)]``,
    every other variant has ``M`` real variables.
    """

    variant: str
    n: int
    data_matrix: np.ndarray
    y: np.ndarray
    groups: tuple[Group, ...]
    noise_bound: float = 0.0
    nonneg: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.intp))
    zero: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.intp))
    ineq: np.ndarray | None = None
    eq_extra: np.ndarray | None = None
    eq_rhs: np.ndarray | None = None

    def __post_init__(self):
        d = self.dim
        B = np.asarray(self.data_matrix, dtype=float)
        if B.ndim != 2 or B.shape[1] != d:
            raise ValueError(f"data matrix must have {d} columns, got shape {B.shape}")
        if np.asarray(self.y).shape != (B.shape[0],):
            raise ValueError("y does not match the rows of the data matrix")
        if self.noise_bound < 0:
            raise ValueError("noise bound must be nonnegative")
        ineq = np.zeros((0, d)) if self.ineq is None else np.atleast_2d(np.asarray(self.ineq, dtype=float))
        eq = np.zeros((0, d)) if self.eq_extra is None else np.atleast_2d(np.asarray(self.eq_extra, dtype=float))
        rhs = np.zeros(eq.shape[0]) if self.eq_rhs is None else np.asarray(self.eq_rhs, dtype=float)
        if ineq.shape[1] != d or eq.shape[1] != d or rhs.shape != (eq.shape[0],):
            raise ValueError("constraint rows do not match the variable dimension")
        object.__setattr__(self, "data_matrix", B)
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float))
        object.__setattr__(self, "ineq", ineq)
        object.__setattr__(self, "eq_extra", eq)
        object.__setattr__(self, "eq_rhs", rhs)
        object.__setattr__(self, "nonneg", np.asarray(self.nonneg, dtype=np.intp))
        object.__setattr__(self, "zero", np.asarray(self.zero, dtype=np.intp))

    @property
    def dim(self) -> int:
        M = lifted_dim(self.n)
        return 2 * M if self.variant == "complex" else M

    @property
    def is_ball(self) -> bool:
        return self.noise_bound > 0

    def with_multipliers(self, multipliers) -> "ConeProblem":
        groups = tuple(replace(g, multiplier=float(m)) for g, m in zip(self.groups, multipliers))
        return replace(self, groups=groups)

    def objective(self, u) -> float:
        u = np.asarray(u, dtype=float)
        return float(sum(g.multiplier * np.linalg.norm(g.weights * u[g.index]) for g in self.groups))

    def group_norms(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        return np.array([np.linalg.norm(g.weights * u[g.index]) for g in self.groups])

    def violations(self, u) -> dict[str, float]:
        """Absolute constraint violations of ``u``."""
        u = np.asarray(u, dtype=float)
        res = np.linalg.norm(self.data_matrix @ u - self.y)
        return {
            "data": max(res - self.noise_bound, 0.0) if self.is_ball else res,
            "nonneg": float(max(-u[self.nonneg].min(), 0.0)) if self.nonneg.size else 0.0,
            "zero": float(np.abs(u[self.zero]).max()) if self.zero.size else 0.0,
            "ineq": float(max((self.ineq @ u).max(), 0.0)) if self.ineq.shape[0] else 0.0,
            "eq_extra": float(np.abs(self.eq_extra @ u - self.eq_rhs).max()) if self.eq_extra.shape[0] else 0.0,
        }

    def to_lifted(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if self.variant == "complex":
            M = lifted_dim(self.n)
            return u[:M] + 1j * u[M:]
        return u.copy()

    def from_lifted(self, v) -> np.ndarray:
        v = np.asarray(v)
        if self.variant == "complex":
            return np.concatenate([v.real, v.imag]).astype(float)
        return np.real(v).astype(float)


def _weight_vector(weights: WeightSet, variant: str) -> np.ndarray:
    if variant == "real":
        return weights.w
    if variant == "complex":
        return np.concatenate([weights.wR, weights.wI])
    return weights.wR


def assemble_program(variant: str, A, y, weights: WeightSet | None = None,
                     groups: GroupStructure | None = None, eps: float = 0.0) -> ConeProblem:
    """Block-l1 relaxation of the group-sparse lifted problem for ``variant``.

    Real variants get ``M`` variables with ``v_jj >= 0``. The complex variant
    gets ``2M`` stacked variables, each group realised as a ``2n``-coordinate
    norm over real and imaginary parts, with ``Re(v_jj) >= 0`` and
    ``Im(v_jj) = 0``. ``eps > 0`` replaces the data equality by an
    ``eps``-ball.
    """
    if eps < 0:
        raise ValueError("noise bound must be nonnegative")
    A = np.asarray(A)
    M = A.shape[1]
    n = int(round((math.sqrt(8 * M + 1) - 1) / 2))
    if lifted_dim(n) != M:
        raise ValueError(f"A has {M} columns, which is not n(n+1)/2")
    y = np.asarray(y, dtype=float)
    if y.shape != (A.shape[0],):
        raise ValueError("y does not match the rows of A")
    groups = groups or GroupStructure.build(n)
    if groups.n != n:
        raise ValueError("group structure dimension does not match A")
    weights = weights or compute_weights(A, variant)
    wvec = _weight_vector(weights, variant)
    diag = diag_positions(n)

    if variant == "complex":
        B = build_A_tilde(A)
        idx = [np.concatenate([g, g + M]) for g in groups.index]
        zero = diag + M
    else:
        B = np.asarray(A.real if np.iscomplexobj(A) else A, dtype=float)
        idx = list(groups.index)
        zero = np.zeros(0, dtype=np.intp)
    gs = tuple(Group(ix, wvec[ix]) for ix in idx)
    return ConeProblem(variant, n, B, y, gs, noise_bound=float(eps), nonneg=diag.copy(), zero=zero)


@dataclass
class SolverConfig:
    max_iter: int = 20000
    tol: float = 1e-10
    rho: float = 1.0
    reweight_rounds: int = 5
    eps_rw_factor: float = 1e-3
    alpha: float = 1.6
    polish: bool = True
    adapt_every: int = 10

    @classmethod
    def from_dict(cls, d: dict | None) -> "SolverConfig":
        d = dict(d or {})
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown solver config keys: {sorted(unknown)}")
        return cls(**d)


@dataclass
class SolveDiagnostics:
    iterations: int
    primal_residual: float
    dual_residual: float
    objective_value: float
    converged: bool
    reweight_rounds: int = 1
    polished: bool = False
    objective_trace: list[float] = field(default_factory=list)
    violations: dict[str, float] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "iterations": self.iterations,
            "primal_residual": self.primal_residual,
            "dual_residual": self.dual_residual,
            "objective_value": self.objective_value,
            "converged": self.converged,
            "reweight_rounds": self.reweight_rounds,
            "polished": self.polished,
            "objective_trace": list(self.objective_trace),
            "violations": dict(self.violations),
        }


@dataclass
class SolveResult:
    u: np.ndarray
    lifted: np.ndarray
    diagnostics: SolveDiagnostics


def independent_rows(E: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    """Indices of a maximal set of linearly independent rows (pivoted QR)."""
    if E.shape[0] == 0:
        return np.zeros(0, dtype=np.intp)
    _, R, piv = sla.qr(E.T, mode="economic", pivoting=True)
    d = np.abs(np.diag(R))
    if d.size == 0 or d[0] == 0:
        return np.zeros(0, dtype=np.intp)
    rank = int(np.count_nonzero(d > tol * d[0]))
    return np.sort(piv[:rank])


def _equalities(problem: ConeProblem) -> tuple[np.ndarray, np.ndarray]:
    if problem.is_ball:
        E, f = problem.eq_extra, problem.eq_rhs
    else:
        E = np.vstack([problem.data_matrix, problem.eq_extra])
        f = np.concatenate([problem.y, problem.eq_rhs])
    return E, f


def _check_consistent(E: np.ndarray, f: np.ndarray, keep: np.ndarray) -> None:
    if E.shape[0] == 0:
        return
    sol, *_ = np.linalg.lstsq(E[keep], f[keep], rcond=None)
    res = np.abs(E @ sol - f)
    scale = np.linalg.norm(E, axis=1) * max(np.linalg.norm(sol), 1.0) + np.abs(f)
    if np.any(res > 1e-8 * np.maximum(scale, 1.0)):
        raise InfeasibleProblemError(
            f"equality constraints are inconsistent (max residual {res.max():.3e})"
        )


class _Workspace:
    """Problem data in scaled variables ``s = scale * u`` plus the consensus factorisation."""

    def __init__(self, problem: ConeProblem):
        d = problem.dim
        scale = np.ones(d)
        seen = np.zeros(d, dtype=bool)
        for g in problem.groups:
            w = np.where(g.weights > 0, g.weights, 1.0)
            clash = seen[g.index] & ~np.isclose(scale[g.index], w, rtol=1e-12, atol=0)
            if np.any(clash):
                raise ValueError("a variable carries different weights in different groups")
            scale[g.index] = w
            seen[g.index] = True
        self.scale = scale
        self.d = d

        gidx = [g.index for g in problem.groups]
        self.gidx = np.concatenate(gidx) if gidx else np.zeros(0, dtype=np.intp)
        sizes = np.array([len(i) for i in gidx], dtype=np.intp)
        self.gsizes = sizes
        self.gstart = np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(np.intp) if sizes.size else sizes
        self.gmult = np.array([g.multiplier for g in problem.groups], dtype=float)

        lo = np.full(d, -np.inf)
        hi = np.full(d, np.inf)
        lo[problem.nonneg] = 0.0
        lo[problem.zero] = 0.0
        hi[problem.zero] = 0.0
        # box copies exist for bounded coordinates and for those outside every group
        counts = np.bincount(self.gidx, minlength=d)
        self.box = np.flatnonzero(np.isfinite(lo) | np.isfinite(hi) | (counts == 0))
        self.lo, self.hi = lo[self.box], hi[self.box]
        self.copy_group = np.repeat(np.arange(sizes.size), sizes)

        self.C = problem.ineq / scale
        self.ball = problem.is_ball
        self.B = problem.data_matrix / scale
        self.y = problem.y
        self.eps = problem.noise_bound

        E, f = _equalities(problem)
        E = E / scale
        norms = np.linalg.norm(E, axis=1)
        nz = norms > 0
        if np.any(~nz & (np.abs(f) > TOL_FEAS)):
            raise InfeasibleProblemError("a zero constraint row has a nonzero right-hand side")
        E, f, norms = E[nz], f[nz], norms[nz]
        E = E / norms[:, None]
        f = f / norms
        keep = independent_rows(E)
        _check_consistent(E, f, keep)
        E, f = E[keep], f[keep]

        H = np.diag(counts.astype(float))
        H[self.box, self.box] += 1.0
        if self.C.shape[0]:
            H += self.C.T @ self.C
        if self.ball:
            H += self.B.T @ self.B
        cho = sla.cho_factor(H)
        Hinv = sla.cho_solve(cho, np.eye(d))
        if E.shape[0]:
            HE = Hinv @ E.T
            S = E @ HE
            Scho = sla.cho_factor(S)
            self.P = Hinv - HE @ sla.cho_solve(Scho, HE.T)
            self.s_f = HE @ sla.cho_solve(Scho, f)
        else:
            self.P = Hinv
            self.s_f = np.zeros(d)
        self.P = (self.P + self.P.T) / 2
        self.E, self.f = E, f

        # stacked copy operator K: group copies, box copy, inequality rows, ball rows
        sel = np.zeros((self.gidx.size, d))
        sel[np.arange(self.gidx.size), self.gidx] = 1.0
        blocks = [sel, np.eye(d)[self.box], self.C, self.B if self.ball else np.zeros((0, d))]
        sizes = np.array([blk.shape[0] for blk in blocks])
        ends = np.cumsum(sizes)
        sizes = sizes.astype(int)
        self.sl = [slice(e - z, e) for z, e in zip(sizes, ends)]
        self.Kmat = np.vstack(blocks)
        self.PK = self.P @ self.Kmat.T
        self.Q = self.Kmat @ self.PK
        self.kf = self.Kmat @ self.s_f
        self.m = int(ends[-1])

    def K(self, s: np.ndarray) -> np.ndarray:
        return self.Kmat @ s

    def KT(self, v: np.ndarray) -> np.ndarray:
        return self.Kmat.T @ v


def _block_shrink(v: np.ndarray, ws: _Workspace, thresh: np.ndarray) -> np.ndarray:
    if v.size == 0:
        return v
    norms = np.sqrt(np.add.reduceat(v * v, ws.gstart))
    factor = np.maximum(1.0 - thresh / np.maximum(norms, 1e-300), 0.0)
    return v * factor[ws.copy_group]


@dataclass
class _WarmState:
    s: np.ndarray
    copies: np.ndarray
    duals: np.ndarray
    rho: float


def _admm(ws: _Workspace, config: SolverConfig, start: np.ndarray | None, warm: _WarmState | None = None):
    alpha = float(config.alpha)
    if warm is not None:
        rho, c, lam = warm.rho, warm.copies.copy(), warm.duals.copy()
    else:
        rho = float(config.rho)
        s0 = np.zeros(ws.d) if start is None else np.asarray(start, dtype=float) * ws.scale
        c = ws.K(s0)
        lam = np.zeros(ws.m)
    zs, bs, hs, ps = ws.sl
    eps_abs = eps_rel = float(config.tol)
    r_norm = d_norm = math.inf
    converged = False
    it = 0
    new = np.empty(ws.m)
    for it in range(1, config.max_iter + 1):
        # consensus step, written directly in copy space: Ks = K P K^T (c - lam) + K s_f
        Ks = ws.Q @ (c - lam) + ws.kf
        relaxed = alpha * Ks + (1 - alpha) * c
        pre = relaxed + lam

        new[zs] = _block_shrink(pre[zs], ws, ws.gmult / rho)
        new[bs] = np.minimum(np.maximum(pre[bs], ws.lo), ws.hi)
        new[hs] = np.minimum(pre[hs], 0.0)
        if ws.ball:
            diff = pre[ps] - ws.y
            nd = np.linalg.norm(diff)
            new[ps] = ws.y + diff * (ws.eps / nd if nd > ws.eps else 1.0)

        lam += relaxed - new
        delta = new - c
        c, new = new, c

        if it % CHECK_EVERY and it != config.max_iter:
            continue
        r_norm = float(np.linalg.norm(Ks - c))
        d_norm = rho * float(np.linalg.norm(ws.KT(delta)))
        eps_pri = math.sqrt(ws.m) * eps_abs + eps_rel * max(float(np.linalg.norm(Ks)), float(np.linalg.norm(c)))
        eps_dual = math.sqrt(ws.d) * eps_abs + eps_rel * rho * float(np.linalg.norm(ws.KT(lam)))
        if r_norm <= eps_pri and d_norm <= eps_dual:
            converged = True
            break
        if it % config.adapt_every == 0:
            if r_norm > 10 * d_norm:
                rho *= 2.0
                lam /= 2.0
            elif d_norm > 10 * r_norm:
                rho /= 2.0
                lam *= 2.0
    s = ws.PK @ (c - lam) + ws.s_f
    return s / ws.scale, _WarmState(s, c.copy(), lam.copy(), rho), it, r_norm, d_norm, converged


def _polish(problem: ConeProblem, u: np.ndarray, active_groups: np.ndarray) -> np.ndarray | None:
    """Fix inactive groups at zero and restore the affine equalities.

    Returns the nearest such point or ``None`` when the restricted system is
    inconsistent. Ball constraints are left to the caller's feasibility check.
    """
    d = problem.dim
    free = np.zeros(d, dtype=bool)
    covered = np.zeros(d, dtype=bool)
    for g, active in zip(problem.groups, active_groups):
        covered[g.index] = True
        if active:
            free[g.index] = True
    free |= ~covered
    free[problem.zero] = False
    E, f = _equalities(problem)
    F = np.flatnonzero(free)
    u_new = np.zeros(d)
    if E.shape[0] == 0:
        u_new[F] = u[F]
        return u_new
    EF = E[:, F]
    if F.size == 0:
        return u_new if np.allclose(f, 0, atol=TOL_FEAS) else None
    # nearest point to u on {E_F u_F = f}
    r = f - EF @ u[F]
    corr, *_ = np.linalg.lstsq(EF, r, rcond=None)
    u_new[F] = u[F] + corr
    if np.linalg.norm(E @ u_new - f) > 1e-10 * max(1.0, np.linalg.norm(f)):
        return None
    return u_new


def _solve(problem: ConeProblem, ws: _Workspace, config: SolverConfig, start=None,
           warm: _WarmState | None = None) -> tuple[SolveResult, _WarmState]:
    u, state, iters, r_norm, d_norm, converged = _admm(ws, config, start, warm)
    polished = False
    if config.polish and ws.gidx.size:
        zsplit = np.split(state.copies[ws.sl[0]], np.cumsum(ws.gsizes)[:-1])
        active = np.array([np.any(z != 0) for z in zsplit])
        cand = _polish(problem, u, active)
        if cand is not None:
            viol = max(problem.violations(cand).values())
            limit = 0.1 * TOL_FEAS if problem.is_ball else 1e-12 * max(1.0, np.abs(cand).max())
            if viol <= limit and problem.objective(cand) <= problem.objective(u) * (1 + 1e-7) + 1e-12:
                u, polished = cand, True
    viol = problem.violations(u)
    primal = max(viol.values())
    diag = SolveDiagnostics(
        iterations=iters,
        primal_residual=float(primal),
        dual_residual=float(d_norm),
        objective_value=problem.objective(u),
        converged=bool(converged and primal <= TOL_FEAS),
        polished=polished,
        objective_trace=[problem.objective(u)],
        violations=viol,
    )
    if not diag.converged:
        log.debug("ADMM stopped after %d iterations (primal %.2e, dual %.2e)", iters, r_norm, d_norm)
    return SolveResult(u, problem.to_lifted(u), diag), state


def solve(problem: ConeProblem, config: SolverConfig | None = None, start=None) -> SolveResult:
    """Solve ``problem`` with ADMM; ``start`` is an optional initial point in ``u`` space.

    Raises :class:`InfeasibleProblemError` when the equality constraints are
    inconsistent. Non-convergence is reported through ``converged=False``.
    """
    config = config or SolverConfig()
    return _solve(problem, _Workspace(problem), config, start)[0]


def solve_reweighted(problem: ConeProblem, config: SolverConfig | None = None, start=None) -> SolveResult:
    """Iteratively reweighted block-l1 solve.

    Round ``t+1`` scales each group's term by ``1/(||group_t|| + eps_rw)``
    with ``eps_rw`` fixed from the first round's largest group norm. Each
    round restarts ADMM from the previous round's iterate, duals and penalty.
    """
    config = config or SolverConfig()
    rounds = max(1, int(config.reweight_rounds))
    ws = _Workspace(problem)
    result, state = _solve(problem, ws, config, start)
    trace = [result.diagnostics.objective_value]
    iters = result.diagnostics.iterations
    base = np.array([g.multiplier for g in problem.groups])
    norms = problem.group_norms(result.u)
    eps_rw = config.eps_rw_factor * (norms.max() if norms.size else 0.0)
    done = 1
    for _ in range(1, rounds):
        if eps_rw <= 0:
            break
        weighted = problem.with_multipliers(base / (problem.group_norms(result.u) + eps_rw))
        ws.gmult = np.array([g.multiplier for g in weighted.groups])
        result, state = _solve(weighted, ws, config, warm=state)
        iters += result.diagnostics.iterations
        trace.append(result.diagnostics.objective_value)
        done += 1
    d = result.diagnostics
    d.iterations = iters
    d.reweight_rounds = done
    d.objective_trace = trace
    d.objective_value = problem.objective(result.u)
    return result
