import numpy as np
import pytest

from helpers import spike_pair_design
from verolift.certify import certificate
from verolift.lifting import veronese_complex, veronese_real
from verolift.measure import MeasurementSet, build_A, gaussian_design, random_sparse_signal
from verolift.oracle import grid_objective_oracle
from verolift.solver import (
    ConeProblem,
    InfeasibleProblemError,
    SolverConfig,
    assemble_program,
    independent_rows,
    solve,
    solve_reweighted,
)

ONE = SolverConfig(reweight_rounds=1)


def _instance(variant, n, N, k, seed, eps=0.0):
    rng = np.random.default_rng(seed)
    q = gaussian_design(n, N, variant != "real", rng)
    x = random_sparse_signal(n, k, variant == "complex", rng)
    ms = MeasurementSet.generate(variant, q, x, eps, seed)
    return ms, x


def test_real_structure():
    A = build_A(np.random.default_rng(0).standard_normal((3, 2)), "real")
    p = assemble_program("real", A, np.ones(3))
    assert p.dim == 3
    assert [g.index.size for g in p.groups] == [2, 2]
    assert p.nonneg.tolist() == [0, 2]
    assert not p.is_ball and p.zero.size == 0


def test_complex_structure():
    q = np.random.default_rng(1).standard_normal((3, 2)) * (1 + 1j)
    p = assemble_program("complex", build_A(q, "complex"), np.ones(3))
    assert p.dim == 6
    assert [g.index.size for g in p.groups] == [4, 4]
    assert p.zero.tolist() == [3, 5]


def test_noise_ball():
    A = build_A(np.eye(2), "real")
    p = assemble_program("real", A, np.ones(2), eps=3.0)
    assert p.is_ball and p.noise_bound == 3.0
    with pytest.raises(ValueError):
        assemble_program("real", A, np.ones(2), eps=-1.0)


def test_dimension_errors():
    with pytest.raises(ValueError):
        assemble_program("real", np.ones((2, 4)), np.ones(2))
    with pytest.raises(ValueError):
        assemble_program("real", np.ones((2, 3)), np.ones(3))


def test_zero_measurements_give_zero():
    ms, _ = _instance("real", 4, 12, 2, 2)
    p = assemble_program("real", ms.A, np.zeros(ms.N), ms.weights)
    res = solve(p)
    assert np.abs(res.u).max() <= 1e-12
    assert res.diagnostics.converged


@pytest.mark.parametrize("variant", ["real", "complex", "complex_real"])
def test_single_spike_recovered(variant):
    rng = np.random.default_rng(3)
    n = 5
    q = gaussian_design(n, 20, variant != "real", rng)
    x = np.zeros(n, dtype=complex if variant == "complex" else float)
    x[0] = 1
    ms = MeasurementSet.generate(variant, q, x)
    p = assemble_program(variant, ms.A, ms.y, ms.weights)
    res = solve_reweighted(p)
    lift = veronese_complex(x) if variant == "complex" else veronese_real(x)
    np.testing.assert_allclose(res.lifted, lift.entries, atol=1e-6)
    assert max(p.violations(res.u).values()) <= 1e-8


def test_matches_grid_oracle_on_tiny_instance():
    ms, _ = _instance("real", 2, 2, 2, 4)
    p = assemble_program("real", ms.A, ms.y, ms.weights)
    assert solve(p, ONE).diagnostics.objective_value == pytest.approx(grid_objective_oracle(p), abs=1e-5)


def test_noisy_solution_inside_ball():
    ms, _ = _instance("complex", 5, 20, 2, 5, eps=0.5)
    p = assemble_program("complex", ms.A, ms.y, ms.weights, eps=0.5)
    res = solve_reweighted(p)
    assert res.diagnostics.converged
    assert np.linalg.norm(p.data_matrix @ res.u - p.y) <= 0.5 + 1e-8


def test_scaling():
    ms, x = _instance("real", 5, 20, 2, 6)
    p1 = assemble_program("real", ms.A, ms.y, ms.weights)
    p2 = assemble_program("real", ms.A, 9.0 * ms.y, ms.weights)
    np.testing.assert_allclose(solve(p2).u, 9.0 * solve(p1).u, atol=1e-6)


def test_deterministic():
    ms, _ = _instance("complex", 5, 15, 3, 7)
    p = assemble_program("complex", ms.A, ms.y, ms.weights)
    a, b = solve_reweighted(p), solve_reweighted(p)
    assert a.u.tobytes() == b.u.tobytes()
    assert a.diagnostics.to_json() == b.diagnostics.to_json()


def test_single_round_equals_plain_solve():
    ms, _ = _instance("real", 6, 16, 3, 8)
    p = assemble_program("real", ms.A, ms.y, ms.weights)
    a, b = solve(p), solve_reweighted(p, ONE)
    assert a.u.tobytes() == b.u.tobytes()
    assert b.diagnostics.reweight_rounds == 1


def test_zero_group_gets_finite_multiplier():
    ms, x = _instance("real", 5, 20, 1, 9)
    p = assemble_program("real", ms.A, ms.y, ms.weights)
    res = solve_reweighted(p, SolverConfig(reweight_rounds=3))
    assert np.all(np.isfinite(res.u))
    assert len(res.diagnostics.objective_trace) == 3


def test_reweighting_removes_spurious_groups():
    rng = np.random.default_rng(15)
    q = gaussian_design(6, 16, False, rng)
    x = random_sparse_signal(6, 2, False, rng)
    ms = MeasurementSet.generate("real", q, x)
    p = assemble_program("real", ms.A, ms.y, ms.weights)
    off = [j for j in range(6) if x[j] == 0]
    assert p.group_norms(solve(p).u)[off].max() > 1e-3
    res = solve_reweighted(p)
    assert p.group_norms(res.u)[off].max() < 1e-8
    np.testing.assert_allclose(res.u, veronese_real(x).entries, atol=1e-8)


def test_start_point_does_not_matter_when_certified():
    rng = np.random.default_rng(10)
    q = spike_pair_design(3, 3.0, False, rng, extra=2)
    cert = certificate(build_A(q, "real"), "real")
    assert cert.holds_for >= 1
    x = random_sparse_signal(3, 1, False, rng)
    ms = MeasurementSet.generate("real", q, x)
    p = assemble_program("real", ms.A, ms.y, ms.weights)
    base = solve(p, ONE).u
    for _ in range(3):
        other = solve(p, ONE, start=rng.standard_normal(p.dim)).u
        np.testing.assert_allclose(other, base, atol=1e-6)


def test_infeasible_equalities():
    q = np.array([[1.0], [1.0]])
    p = assemble_program("real", build_A(q, "real"), np.array([1.0, 5.0]))
    with pytest.raises(InfeasibleProblemError):
        solve(p)


def test_iteration_cap_reports_non_convergence():
    ms, _ = _instance("complex", 6, 18, 3, 11)
    p = assemble_program("complex", ms.A, ms.y, ms.weights)
    res = solve(p, SolverConfig(max_iter=3, reweight_rounds=1, polish=False))
    assert not res.diagnostics.converged
    assert res.diagnostics.iterations <= 10


def test_config_validation():
    assert SolverConfig.from_dict({"max_iter": 50}).max_iter == 50
    with pytest.raises(ValueError):
        SolverConfig.from_dict({"bogus": 1})


def test_independent_rows():
    E = np.array([[1.0, 0.0], [2.0, 0.0], [0.0, 1.0]])
    assert len(independent_rows(E)) == 2


def test_cone_problem_validation():
    with pytest.raises(ValueError):
        ConeProblem("real", 2, np.ones((1, 2)), np.ones(1), ())
