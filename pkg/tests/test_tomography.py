import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import REFERENCE_AXIS
from qdcsim.errors import InconsistentEstimate, InsufficientSample, InvalidTolerance
from qdcsim.qubit import E3, density_matrix, measure_many, outcome_probability
from qdcsim.rng import rng_stream
from qdcsim.tomography import (
    AxisSample,
    BlochEstimate,
    bob_determine_basis,
    complexity,
    contiguous_thirds,
    estimate_axis_mean,
    eve_estimate_arrays,
    eve_estimate_basis,
    expected_eve_means,
    reconstruct_state,
    round_robin,
)


def minimal_k(s):
    # 1/sqrt(k) <= s  <=>  k s^2 >= 1, checked exactly
    s = Fraction(s)
    k = 1
    while k * s * s < 1:
        k += 1
    return k


def test_complexity_examples():
    assert complexity(1) == 1
    assert complexity(0.05) == 400
    assert complexity(0.1) == 100


@given(st.floats(0.02, 1.0))
def test_complexity_is_minimal_k(s):
    assert complexity(s) == minimal_k(s)


@pytest.mark.parametrize("s", [0, -0.1, 1.5])
def test_complexity_rejects_bad_tolerance(s):
    with pytest.raises(InvalidTolerance):
        complexity(s)


def test_axis_mean_examples():
    assert estimate_axis_mean(AxisSample(E3, (1,) * 5)) == (1.0, 0.5)
    mean, se = estimate_axis_mean(AxisSample(E3, (0, 1) * 200 + (0,)))
    assert mean == pytest.approx(-1 / 401)
    assert se == pytest.approx(0.05)
    mean, se = estimate_axis_mean(AxisSample(E3, (0, 1) * 200))
    assert mean == 0.0
    with pytest.raises(InsufficientSample):
        estimate_axis_mean(AxisSample(E3, (1,)))


def test_axis_mean_monte_carlo():
    p = outcome_probability(E3, 1, 1, REFERENCE_AXIS)
    outcomes = measure_many(E3, np.ones(10**4, dtype=np.int8), REFERENCE_AXIS, rng_stream(0, "mc"))
    mean, _ = estimate_axis_mean(AxisSample(E3, tuple(outcomes.tolist())))
    assert mean == pytest.approx(2 * p - 1, abs=0.02)
    assert mean == pytest.approx(0.707, abs=0.02)


def test_bob_reference_axis_one_sigma():
    hits = np.zeros(3)
    seeds = 300
    for seed in range(seeds):
        est = bob_determine_basis(REFERENCE_AXIS, 401, rng_stream(seed, "bob"))
        assert est.std_error == pytest.approx((0.05,) * 3)
        assert est.sample_sizes == (401, 401, 401)
        hits += np.abs(np.subtract(est.mean, REFERENCE_AXIS)) <= 0.05
    assert (hits / seeds >= 2 / 3).all()


def test_bob_z_axis_large_k():
    est = bob_determine_basis((0, 0, 1), 10**4, rng_stream(1, "bob"))
    assert abs(est.mean[0]) <= 0.02 and abs(est.mean[1]) <= 0.02
    assert 1 - est.mean[2] <= 0.001


def test_quadrupled_sample_halves_error_bound():
    est = bob_determine_basis(REFERENCE_AXIS, 1604, rng_stream(2, "bob"))
    assert est.std_error[0] == pytest.approx(0.025, abs=1e-4)
    assert est.std_error[0] / 0.05 == pytest.approx(0.5, abs=1e-3)


def test_bob_estimate_is_not_normalized():
    est = bob_determine_basis(REFERENCE_AXIS, 50, rng_stream(3, "bob"))
    assert est.norm != pytest.approx(1.0, abs=1e-12)


def test_bob_unbiased():
    K, seeds = 401, 200
    means = np.array([bob_determine_basis(REFERENCE_AXIS, K, rng_stream(s, "unbiased")).mean for s in range(seeds)])
    assert (np.abs(means.mean(axis=0) - REFERENCE_AXIS) <= 3 / math.sqrt(seeds * K)).all()


@pytest.mark.parametrize("K", [101, 401, 1601])
def test_error_scaling(K):
    """Spread across seeds matches the binomial law sqrt((1 - n_i**2)/K) and never exceeds 1/sqrt(K-1)."""
    seeds = 400
    means = np.array([bob_determine_basis(REFERENCE_AXIS, K, rng_stream(s, f"scale{K}")).mean for s in range(seeds)])
    spread = means.std(axis=0, ddof=1)
    predicted = np.sqrt((1 - np.square(REFERENCE_AXIS)) / K)
    ratio = spread / predicted
    assert ((ratio >= 0.8) & (ratio <= 1.25)).all()
    assert (spread <= 1.25 / math.sqrt(K - 1)).all()


@pytest.mark.parametrize("K", [101, 401, 1601])
def test_error_scaling_matches_unit_variance_bound(K):
    """Spread across seeds within a factor [0.8, 1.25] of 1/sqrt(K-1) on every component."""
    seeds = 400
    means = np.array([bob_determine_basis(REFERENCE_AXIS, K, rng_stream(s, f"bound{K}")).mean for s in range(seeds)])
    ratio = means.std(axis=0, ddof=1) * math.sqrt(K - 1)
    assert ((ratio >= 0.8) & (ratio <= 1.25)).all(), f"spread / bound = {np.round(ratio, 3).tolist()}"


def alternating(n, length):
    return [(i % 2, n) for i in range(length)]


def test_eve_balanced_stream_is_blind():
    est = eve_estimate_basis(alternating(REFERENCE_AXIS, 3 * 10**4), round_robin, rng_stream(0, "eve"))
    assert est.sample_sizes == (10**4,) * 3
    assert all(abs(m) <= 3 / math.sqrt(10**4) for m in est.mean)


def test_eve_all_ones_reduces_to_bob():
    stream = [(1, REFERENCE_AXIS)] * (3 * 10**4)
    est = eve_estimate_basis(stream, "round_robin", rng_stream(1, "eve"))
    assert np.allclose(est.mean, REFERENCE_AXIS, atol=3 * est.std_error[0])


def test_eve_partial_bias_matches_formula():
    # subsequence position j within each axis has bit 1 for j % 5 < 3: nu = 0.6 everywhere
    n_per = 10**4
    stream = [(int((i // 3) % 5 < 3), REFERENCE_AXIS) for i in range(3 * n_per)]
    expected = expected_eve_means(REFERENCE_AXIS, (0.6, 0.6, 0.6))
    assert expected == pytest.approx((0.1, 0.1, 0.2 / math.sqrt(2)))
    est = eve_estimate_basis(stream, round_robin, rng_stream(2, "eve"))
    for m, e, se in zip(est.mean, expected, est.std_error):
        assert abs(m - e) <= 3 * se


def test_eve_contiguous_assignment():
    stream = alternating(REFERENCE_AXIS, 3000)
    est = eve_estimate_basis(stream, contiguous_thirds, rng_stream(3, "eve"))
    assert est.sample_sizes == (1000, 1000, 1000)


def test_eve_empty_subsequence():
    with pytest.raises(InsufficientSample):
        eve_estimate_basis([(1, REFERENCE_AXIS)] * 4, round_robin, rng_stream(0, "eve"))
    with pytest.raises(InsufficientSample):
        eve_estimate_basis([], round_robin, rng_stream(0, "eve"))


def test_eve_blindness_over_seeds():
    n = 3 * 10**4
    bits = np.arange(n) % 2
    which = np.arange(n) % 3
    inside = np.zeros(3)
    seeds = 300
    for seed in range(seeds):
        est = eve_estimate_arrays(bits, np.asarray(REFERENCE_AXIS), which, rng_stream(seed, "blind"))
        inside += np.abs(est.mean) <= 3 * np.asarray(est.std_error)
    assert (inside / seeds >= 0.99).all()


def test_array_and_list_forms_agree():
    stream = alternating(REFERENCE_AXIS, 300)
    a = eve_estimate_basis(stream, round_robin, rng_stream(4, "eve"))
    b = eve_estimate_arrays(np.arange(300) % 2, np.asarray(REFERENCE_AXIS), np.arange(300) % 3, rng_stream(4, "eve"))
    assert a == b


def est(mean, se=0.05):
    return BlochEstimate(tuple(mean), (se,) * 3, (401,) * 3)


def test_reconstruct_examples():
    rho, clipped = reconstruct_state(est((0, 0, 0)))
    assert np.allclose(rho, np.eye(2) / 2) and not clipped
    rho, clipped = reconstruct_state(est((0, 0, 1)))
    assert np.allclose(rho, np.diag([1, 0])) and not clipped


def test_reconstruct_overshooting_estimate():
    r = np.array([0.5, 0.5, 0.71])
    assert np.linalg.norm(r) == pytest.approx(1.00205, abs=1e-5)
    rho, clipped = reconstruct_state(est(r))
    assert clipped
    assert np.allclose(rho, density_matrix(r / np.linalg.norm(r)), atol=1e-12)
    # same estimate shrunk below unit norm is used as is
    x, y, z = 0.99 * r / np.linalg.norm(r)
    rho, clipped = reconstruct_state(est((x, y, z)))
    assert not clipped
    oracle = 0.5 * np.array([[1 + z, x - 1j * y], [x + 1j * y, 1 - z]])
    assert np.allclose(rho, oracle, atol=1e-12)


def test_reconstruct_rejects_gross_overshoot():
    with pytest.raises(InconsistentEstimate):
        reconstruct_state(est((1, 1, 1), se=0.01))
