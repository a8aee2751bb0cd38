"""End-to-end recovery from one measurement set, plus the error metrics."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .certify import CertificateReport, certificate
from .greedy import greedy_program, greedy_refine
from .invariance import (
    assemble_reflection_program,
    assemble_shift_invariant_program,
    autocorrelation_from_spectrum,
    orbit,
    support_equivalent,
)
from .measure import MeasurementSet, measure
from .oracle import brute_force_l0
from .solver import (
    ConeProblem,
    InfeasibleProblemError,
    SolverConfig,
    assemble_program,
    solve,
    solve_reweighted,
)

METHODS = ("convex", "greedy", "oracle")
INVARIANCE_MODES = ("none", "shift", "reflect")
EXACT_THRESHOLD = 1e-6
SUPPORT_RTOL = 1e-6


@dataclass
class RecoveryOptions:
    method: str = "convex"
    invariance: str = "none"
    autocorr: bool | None = None
    reweight: bool = True
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.invariance not in INVARIANCE_MODES:
            raise ValueError(f"unknown invariance mode {self.invariance!r}; expected one of {INVARIANCE_MODES}")


@dataclass
class TrialRecord:
    seed: tuple | int | None
    planted_support: list[int] | None
    estimated_support: list[int]
    relative_error: float | None
    exact_success: bool
    support_success: bool
    mu: float
    cert_holds_for: int
    certified: bool | None
    residual: float
    iterations: int
    converged: bool
    seconds: float
    failure: str | None = None
    diagnostics: dict | None = None

    def to_json(self) -> dict:
        out = dict(self.__dict__)
        out["seed"] = list(self.seed) if isinstance(self.seed, tuple) else self.seed
        return out


@dataclass
class Recovery:
    x_hat: np.ndarray
    lifted: np.ndarray | None
    record: TrialRecord
    certificate: CertificateReport


def relative_error(x_hat, x0, variant: str = "real") -> float:
    """``min ||x_hat - z x0|| / ||x0||`` over unit-modulus ``z`` (``z = +-1`` for real signals)."""
    x0 = np.asarray(x0)
    x_hat = np.asarray(x_hat)
    nrm = np.linalg.norm(x0)
    if nrm == 0:
        raise ValueError("relative error is undefined for x0 = 0")
    if variant == "complex" or np.iscomplexobj(x0) or np.iscomplexobj(x_hat):
        inner = np.vdot(x0, x_hat)
        z = inner / abs(inner) if abs(inner) > 0 else 1.0
        return float(np.linalg.norm(x_hat - z * x0) / nrm)
    return float(min(np.linalg.norm(x_hat - x0), np.linalg.norm(x_hat + x0)) / nrm)


def estimated_support(x_hat) -> list[int]:
    """Indices with ``|x_j| > 1e-6 ||x_hat||_inf`` (0-based)."""
    mag = np.abs(np.asarray(x_hat))
    if mag.size == 0 or mag.max() == 0:
        return []
    return np.flatnonzero(mag > SUPPORT_RTOL * mag.max()).tolist()


def support_metrics(x_hat, x0, invariance_mode: str = "none") -> bool:
    n = np.asarray(x0).size
    s_hat = estimated_support(x_hat)
    s0 = np.flatnonzero(np.asarray(x0)).tolist()
    if invariance_mode == "none":
        return s_hat == s0
    return support_equivalent(s_hat, s0, n, shifts=True, reflections=invariance_mode == "reflect")


def orbit_relative_error(x_hat, x0, invariance_mode: str) -> float:
    """Relative error up to the invariances of the measurement model."""
    if invariance_mode == "none":
        return relative_error(x_hat, x0)
    return min(relative_error(c, x0) for c in orbit(x_hat, invariance_mode == "reflect"))


def build_problem(ms: MeasurementSet, options: RecoveryOptions) -> ConeProblem:
    eps = ms.noise_bound
    if options.invariance == "none":
        return assemble_program(ms.variant, ms.A, ms.y, ms.weights, eps=eps)
    if ms.variant == "complex":
        raise ValueError("shift/reflection invariance applies to real signals only")
    if options.invariance == "shift":
        return assemble_shift_invariant_program(ms.A, ms.y, ms.weights, eps=eps)
    use_r = options.autocorr
    if use_r is None:
        use_r = ms.variant == "fourier" and ms.N >= 2 * ms.n - 1
    if use_r:
        if ms.variant != "fourier" or ms.N < 2 * ms.n - 1:
            raise ValueError("autocorrelation constraints need Fourier data with N >= 2n - 1")
        r = autocorrelation_from_spectrum(ms.y, ms.n)
        return assemble_reflection_program(ms.A, ms.y, ms.weights, r=r, eps=eps)
    return assemble_reflection_program(ms.A, ms.y, ms.weights, eps=eps)


def _certificate(ms: MeasurementSet) -> CertificateReport:
    try:
        return certificate(ms.A, ms.variant)
    except ValueError:
        return CertificateReport(1.0, 0.0, 0, ms.variant)


def recover(ms: MeasurementSet, options: RecoveryOptions | None = None, seed=None) -> Recovery:
    """Assemble, solve, unlift and score one measurement set.

    Infeasible programs are recorded as failures with a zero estimate.
    Metrics against the planted signal are filled when ``ms.x0`` is set.
    """
    options = options or RecoveryOptions()
    complex_signal = ms.variant == "complex"
    cert = _certificate(ms)
    start = time.perf_counter()
    lifted = None
    diagnostics = None
    failure = None
    iterations, converged = 0, True
    x_hat = np.zeros(ms.n, dtype=complex if complex_signal else float)

    try:
        if options.method == "oracle":
            res = brute_force_l0(ms, ms.variant)
            if res.solutions:
                x_hat = res.solutions[0]
            else:
                failure = "no solution within the enumerated supports"
            residual = float(np.linalg.norm(measure(ms.q, x_hat) - ms.y))
        else:
            problem = build_problem(ms, options)
            if options.method == "greedy":
                g, _ = greedy_program(problem, len(problem.groups), ms.noise_bound, options.solver)
                u = g.u
                iterations = g.iterations
            else:
                run = solve_reweighted if options.reweight else solve
                out = run(problem, options.solver)
                u = out.u
                diagnostics = out.diagnostics.to_json()
                iterations, converged = out.diagnostics.iterations, out.diagnostics.converged
            lifted = problem.to_lifted(u)
            residual = float(np.linalg.norm(problem.data_matrix @ u - problem.y))
            x_hat = greedy_refine(lifted, complex_signal)
    except InfeasibleProblemError as exc:
        failure = f"infeasible: {exc}"
        residual = float("nan")
        converged = False
    seconds = time.perf_counter() - start

    rel = None
    exact = supp = False
    planted = None
    if ms.x0 is not None and np.any(ms.x0):
        x0 = ms.x0
        planted = np.flatnonzero(x0).tolist()
        rel = orbit_relative_error(x_hat, x0, options.invariance) if not complex_signal \
            else relative_error(x_hat, x0, "complex")
        exact = failure is None and rel < EXACT_THRESHOLD
        supp = failure is None and (exact or support_metrics(x_hat, x0, options.invariance))
    certified = None if planted is None else len(planted) <= cert.holds_for
    record = TrialRecord(
        seed=seed if seed is not None else ms.seed,
        planted_support=planted,
        estimated_support=estimated_support(x_hat),
        relative_error=rel,
        exact_success=bool(exact),
        support_success=bool(supp),
        mu=cert.mu,
        cert_holds_for=cert.holds_for,
        certified=certified,
        residual=residual,
        iterations=int(iterations),
        converged=bool(converged),
        seconds=seconds,
        failure=failure,
        diagnostics=diagnostics,
    )
    return Recovery(x_hat, lifted, record, cert)
