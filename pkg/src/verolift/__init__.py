"""Sparse phase retrieval through group-sparse recovery of Veronese-lifted signals."""

from .certify import CertificateReport, certificate, mutual_coherence, stability_bound
from .greedy import greedy_refine, greedy_solve
from .lifting import GroupStructure, LiftedVector, inverse_veronese_complex, inverse_veronese_real, veronese
from .measure import MeasurementSet, build_A
from .pipeline import RecoveryOptions, recover, relative_error
from .solver import ConeProblem, InfeasibleProblemError, SolverConfig, assemble_program, solve, solve_reweighted

__all__ = [
    "CertificateReport",
    "ConeProblem",
    "GroupStructure",
    "InfeasibleProblemError",
    "LiftedVector",
    "MeasurementSet",
    "RecoveryOptions",
    "SolverConfig",
    "assemble_program",
    "build_A",
    "certificate",
    "greedy_refine",
    "greedy_solve",
    "inverse_veronese_complex",
    "inverse_veronese_real",
    "mutual_coherence",
    "recover",
    "relative_error",
    "solve",
    "solve_reweighted",
    "stability_bound",
    "veronese",
]
