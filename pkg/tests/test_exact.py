import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from leader_election.exact import (
    binomial_weights,
    exact_cdf_dp,
    exact_mean,
    exact_mean_table,
    forcing,
    poisson_mixture,
    poisson_transform_fixpoint,
    poisson_transform_series,
    survival_table,
    tail_cap,
    tail_sum_mean,
)

probs = st.floats(min_value=0.05, max_value=0.95)


def test_small_means_by_hand():
    assert exact_mean(0, 0.5) == 0.0
    assert exact_mean(1, 0.5) == 0.0
    assert exact_mean(2, 0.5) == pytest.approx(2.0, abs=1e-15)
    assert exact_mean(3, 0.5) == pytest.approx(7 / 3, abs=1e-15)


@settings(max_examples=50, deadline=None)
@given(p=probs)
def test_two_stations_closed_form(p):
    q = 1 - p
    assert exact_mean(2, p) == pytest.approx(1 / (2 * p * q), rel=1e-13)
    assert exact_mean(3, p) == pytest.approx(
        (1 + 3 * p * p * q / (2 * p * q)) / (1 - p**3 - q**3), rel=1e-13
    )
    for k in range(6):
        assert exact_cdf_dp(2, k, p) == pytest.approx(1 - (1 - 2 * p * q) ** k, abs=1e-14)


@pytest.mark.parametrize("n", [3, 40, 60, 500])
def test_binomial_weights_sum_to_one(n):
    w = binomial_weights(n, 0.3, 0.7)
    assert math.fsum(w) == pytest.approx(1.0, abs=1e-12)
    assert w[1] == pytest.approx(n * 0.3 * 0.7 ** (n - 1), rel=1e-10)


def test_table_extends_consistently():
    a = exact_mean_table(80, 0.41).values.copy()
    b = exact_mean_table(300, 0.41).values
    assert np.array_equal(a, b[:81])
    assert exact_mean_table(10, 0.41).N == 10


def test_half_is_symmetric_under_swap():
    # at p = 1/2 swapping the roles of p and q cannot change anything
    table = exact_mean_table(60, 0.5).values
    swapped = np.zeros(61)
    for n in range(2, 61):
        w = binomial_weights(n, 0.5, 0.5)[::-1][1:n]
        swapped[n] = (1 + np.dot(w, swapped[1:n])) / (1 - 2 * 0.5**n)
    assert np.allclose(table, swapped, rtol=1e-13)
    assert exact_mean(20, 0.3) != pytest.approx(exact_mean(20, 0.7), rel=1e-3)


def test_dp_hand_values():
    assert exact_cdf_dp(2, 1, 0.5) == pytest.approx(0.5)
    assert exact_cdf_dp(2, 2, 0.5) == pytest.approx(0.75)
    for n in range(2, 8):
        assert exact_cdf_dp(n, 0, 0.3) == 0.0
    assert exact_cdf_dp(1, 0, 0.3) == 1.0
    assert exact_cdf_dp(5, -1, 0.3) == 0.0


@pytest.mark.parametrize("p", [0.2, 0.5, 0.8])
def test_dp_is_a_distribution(p):
    K = tail_cap(25, p)
    s = survival_table(25, K, p)
    assert np.all(np.diff(s[2:], axis=1) <= 1e-16)
    assert s[2:, -1].max() <= 1e-15
    assert np.all((s >= 0) & (s <= 1))


@pytest.mark.parametrize("p", [0.2, 0.5, 0.8])
def test_tail_sum_equals_mean(p):
    for n in (0, 1, 2, 7, 33, 50):
        assert tail_sum_mean(n, p) == pytest.approx(exact_mean(n, p), abs=1e-9)


def test_forcing():
    assert forcing(0.0) == 0.0
    for x in (1e-4, 9.9e-4, 1e-3, 0.5, 4.0):
        assert forcing(x) == pytest.approx(1 - (1 + x) * math.exp(-x), rel=1e-9)


def test_transform_at_zero_and_small_x():
    assert poisson_transform_series(0.0, 0.5) == 0.0
    # the relative gap to the leading term is E(H_3) x / (3 E(H_2)) + O(x^2)
    for x in (1e-3, 1e-4):
        lead = exact_mean(2, 0.5) * x * x / 2 * math.exp(-x)
        gap = exact_mean(3, 0.5) * x / (3 * exact_mean(2, 0.5))
        assert poisson_transform_series(x, 0.5) / lead - 1 == pytest.approx(gap, rel=1e-2)
    x = 1e-5
    lead = exact_mean(2, 0.5) * x * x / 2 * math.exp(-x)
    assert poisson_transform_series(x, 0.5) / lead == pytest.approx(1.0, abs=1e-4)


@pytest.mark.parametrize("p", [0.3, 0.5, 0.7])
@pytest.mark.parametrize("x", [0.2, 1.0, 5.0, 10.0, 40.0])
def test_transform_routes_agree(p, x):
    assert poisson_transform_fixpoint(x, p) == pytest.approx(poisson_transform_series(x, p), abs=1e-10)


def test_fixpoint_depth_error():
    with pytest.raises(RecursionError):
        poisson_transform_fixpoint(1e6, 0.5, depth=3)


def test_transform_is_mixture_of_means():
    E = exact_mean_table(200, 0.4).values
    assert poisson_transform_series(7.0, 0.4) == pytest.approx(poisson_mixture(7.0, E), abs=1e-12)
    assert poisson_mixture(0.0, [3.0, 1.0]) == 3.0


@pytest.mark.parametrize("n", [4096, 7000, 10_000])
def test_fair_coin_classical_constant(n):
    # fair coin: E(H_n) = log2(n) + 1/2 + a fluctuation of order 1e-5 + O(1/n)
    assert exact_mean(n, 0.5) - math.log2(n) == pytest.approx(0.5, abs=2e-4)
