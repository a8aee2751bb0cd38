import numpy as np
import pytest

from verolift.greedy import greedy_refine, greedy_solve, tolerant_inverse
from verolift.lifting import inverse_veronese_real, pair_arrays, veronese_complex, veronese_real
from verolift.measure import (
    MeasurementSet,
    build_A,
    gaussian_design,
    make_fourier_design,
    measure,
    random_sparse_signal,
)
from verolift.pipeline import RecoveryOptions, recover, relative_error


def _data(variant, n, N, k, seed):
    rng = np.random.default_rng(seed)
    q = gaussian_design(n, N, variant != "real", rng)
    x = random_sparse_signal(n, k, variant == "complex", rng)
    return q, x, build_A(q, variant), measure(q, x)


def test_single_spike():
    q, _, A, _ = _data("real", 5, 15, 1, 0)
    x = np.zeros(5)
    x[0] = 3.0
    res = greedy_solve(A, measure(q, x), None, "real", k_max=5)
    assert res.support == [0]
    assert res.iterations == 1
    assert res.history[-1] <= 1e-9 * np.linalg.norm(measure(q, x))


def test_zero_measurements():
    _, _, A, _ = _data("real", 5, 15, 1, 1)
    res = greedy_solve(A, np.zeros(15), None, "real", k_max=5)
    assert res.support == [] and not res.lifted.any()


def test_support_recovery_rate():
    hits = 0
    for seed in range(50):
        _, x, A, y = _data("real", 6, 30, 2, 100 + seed)
        res = greedy_solve(A, y, None, "real", k_max=6)
        hits += sorted(res.support) == np.flatnonzero(x).tolist()
    assert hits >= 45


@pytest.mark.parametrize("variant", ["real", "complex"])
def test_residual_monotone_and_lift_confined(variant):
    _, x, A, y = _data(variant, 6, 20, 3, 2)
    res = greedy_solve(A, y, None, variant, k_max=6)
    assert all(b <= a + 1e-12 for a, b in zip(res.history, res.history[1:]))
    rows, cols = pair_arrays(6)
    inside = np.isin(rows, res.support) & np.isin(cols, res.support)
    assert not np.asarray(res.lifted)[~inside].any()


def test_free_coordinates_fitted_first():
    x0 = np.zeros(8)
    x0[5] = -2.0
    ms = MeasurementSet.generate("fourier", make_fourier_design(8, 8), x0)
    rec = recover(ms, RecoveryOptions(method="greedy", invariance="shift"))
    assert rec.record.exact_success


def test_permutation_equivariance():
    rng = np.random.default_rng(3)
    q = gaussian_design(6, 25, False, rng)
    x = random_sparse_signal(6, 2, False, rng)
    perm = rng.permutation(6)
    a = greedy_solve(build_A(q, "real"), measure(q, x), None, "real", k_max=6)
    b = greedy_solve(build_A(q[:, perm], "real"), measure(q, x), None, "real", k_max=6)
    assert sorted(perm[b.support].tolist()) == sorted(a.support)


def test_full_support_fits_consistent_system():
    _, x, A, y = _data("real", 4, 30, 4, 4)
    res = greedy_solve(A, y, None, "real", k_max=4)
    assert res.history[-1] <= 1e-9 * np.linalg.norm(y)


def test_noise_tolerance_stops_early():
    _, x, A, y = _data("real", 6, 30, 2, 5)
    res = greedy_solve(A, y, None, "real", k_max=6, eps=10 * np.linalg.norm(y))
    assert res.support == []


def test_refine_examples():
    x = np.array([1.0, -2.0, 0.0, 0.5])
    v = veronese_real(x).entries
    np.testing.assert_array_equal(greedy_refine(v, False), inverse_veronese_real(v))
    assert not greedy_refine(np.zeros(10), False).any()
    rng = np.random.default_rng(6)
    z = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    noisy = veronese_complex(z).entries + 1e-7 * (rng.standard_normal(10) + 1j * rng.standard_normal(10))
    assert relative_error(greedy_refine(noisy, True), z, "complex") <= 1e-5
    assert relative_error(tolerant_inverse(noisy, True), z, "complex") <= 1e-5
