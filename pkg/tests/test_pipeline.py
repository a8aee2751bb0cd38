import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from verolift.measure import MeasurementSet, gaussian_design, make_fourier_design
from verolift.pipeline import (
    RecoveryOptions,
    estimated_support,
    orbit_relative_error,
    recover,
    relative_error,
    support_metrics,
)


def test_relative_error_matches_phase_grid():
    rng = np.random.default_rng(0)
    for _ in range(20):
        x0 = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        xh = np.exp(1j * rng.uniform(0, 2 * np.pi)) * x0 + 0.1 * rng.standard_normal(5)
        dist = lambda t: np.linalg.norm(xh - np.exp(1j * t) * x0) / np.linalg.norm(x0)
        grid = np.linspace(0, 2 * np.pi, 2001)
        t0 = grid[np.argmin([dist(t) for t in grid])]
        h = grid[1]
        brute = minimize_scalar(dist, bounds=(t0 - h, t0 + h), method="bounded", options={"xatol": 1e-12}).fun
        assert relative_error(xh, x0, "complex") == pytest.approx(brute, abs=1e-9)


def test_relative_error_examples():
    x0 = np.array([0.0, 1.0, 0.0])
    xh = x0 + 0.5 * np.eye(3)[0]
    assert relative_error(xh, x0) == pytest.approx(0.5)
    assert relative_error(-x0, x0) == 0.0
    assert relative_error(1j * x0, x0, "complex") == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ValueError):
        relative_error(x0, np.zeros(3))


def test_support_helpers():
    assert estimated_support([0.0, 1.0, 1e-7, -2.0]) == [1, 3]
    assert estimated_support(np.zeros(3)) == []
    assert support_metrics([0, 2.0, 0, 0], [0, -1.0, 0, 0])
    assert not support_metrics([2.0, 0, 0, 0], [0, 1.0, 0, 0])
    assert support_metrics([2.0, 0, 0, 0], [0, 1.0, 0, 0], "shift")
    assert orbit_relative_error([0, 0, 1.0, 2.0], [2.0, 1.0, 0, 0], "reflect") == pytest.approx(0.0)


def test_recover_single_spike():
    rng = np.random.default_rng(1)
    x0 = np.zeros(6, dtype=complex)
    x0[2] = 1 - 2j
    ms = MeasurementSet.generate("complex", gaussian_design(6, 24, True, rng), x0)
    for method in ("convex", "greedy"):
        rec = recover(ms, RecoveryOptions(method=method))
        assert rec.record.exact_success and rec.record.support_success
        assert rec.record.estimated_support == [2]
        assert relative_error(rec.x_hat, x0, "complex") < 1e-6


def test_recover_oracle_method():
    rng = np.random.default_rng(2)
    x0 = np.array([0.0, 1.5, 0.0, -1.0])
    ms = MeasurementSet.generate("real", gaussian_design(4, 10, False, rng), x0)
    rec = recover(ms, RecoveryOptions(method="oracle"))
    assert rec.record.exact_success


def test_recover_records_infeasible():
    ms = MeasurementSet("real", np.array([[1.0], [1.0]]), np.array([1.0, 5.0]))
    rec = recover(ms)
    assert rec.record.failure.startswith("infeasible")
    assert not rec.x_hat.any()


def test_recover_fourier_reflect_mode():
    x0 = np.array([0.0, 0.0, 0.0, -1.5, 0.0, 0.0])
    ms = MeasurementSet.generate("fourier", make_fourier_design(6, 12), x0)
    rec = recover(ms, RecoveryOptions(invariance="reflect"))
    assert rec.record.exact_success
    assert rec.record.support_success


def test_invalid_options():
    with pytest.raises(ValueError):
        RecoveryOptions(method="magic")
    with pytest.raises(ValueError):
        RecoveryOptions(invariance="rotate")
