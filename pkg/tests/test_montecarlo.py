import math

import numpy as np
import pytest
from scipy import stats

from leader_election.exact import exact_mean
from leader_election.intervals import shared_levels
from leader_election.montecarlo import (
    Estimate,
    default_xgrid,
    estimate,
    log_moment,
    mc_conjecture,
    mc_lemma_check,
    mc_mean_cost_via_tau,
    mc_protocol_mean,
    sample_order_stats,
    sample_order_stats_pair,
)
from leader_election.splitchain import SplitParams
from leader_election.streams import block_rng


def test_estimate_basics():
    e = estimate(np.array([1.0, 2.0, 3.0, np.inf]), seed=4, truncated=2)
    assert e.value == pytest.approx(2.0)
    assert e.stderr == pytest.approx(1 / math.sqrt(3))
    assert (e.trials, e.overflow_count, e.truncated_count) == (3, 1, 2)
    assert e.unreliable
    assert Estimate(1.0, 0.0, 5).zscore(1.0) == 0.0
    assert Estimate(1.0, 0.1, 5).agrees(Estimate(1.2, 0.1, 5))
    assert not Estimate(1.0, 0.01, 5).agrees(1.2)


def test_order_stats_construction():
    u1, u2 = sample_order_stats(5, block_rng(1, 0, "os"), 10**5)
    assert np.all((0 < u1) & (u1 < u2) & (u2 < 1))
    # P(U_(1) > a) = (1 - a)^n
    assert stats.kstest(u1, lambda a: 1 - (1 - a) ** 5).pvalue > 0.01
    assert stats.kstest(u2, stats.beta(2, 4).cdf).pvalue > 0.01
    a, b = sample_order_stats_pair(3, block_rng(1, 0, "pair"))
    assert 0 < a < b < 1
    with pytest.raises(ValueError):
        sample_order_stats(1, block_rng(1, 0), 3)


def test_scaled_second_minimum():
    n = 10**4
    _, u2 = sample_order_stats(n, block_rng(1, 0, "t2"), 10**6)
    v = n * u2
    # E(n U_(2)) = 2n / (n + 1)
    assert abs(v.mean() - 2.0) <= 3 * v.std(ddof=1) / 1e3


@pytest.mark.parametrize("n,p", [(2, 0.5), (3, 0.5), (50, 0.3)])
def test_tau_estimator_is_unbiased(n, p):
    e = mc_mean_cost_via_tau(n, p, 10**6 if n < 50 else 2 * 10**5, seed=1)
    assert e.truncated_count == 0
    assert abs(e.zscore(exact_mean(n, p))) <= 3


def test_protocol_estimator():
    assert mc_protocol_mean(1, 0.5, 100, 1).value == 0.0
    e = mc_protocol_mean(2, 0.2, 10**6, 1)
    assert abs(e.zscore(3.125)) <= 3
    a = mc_protocol_mean(20, 0.5, 10**5, 1)
    b = mc_mean_cost_via_tau(20, 0.5, 10**5, 1)
    assert a.agrees(b)


def test_reproducible_and_worker_independent():
    a = mc_mean_cost_via_tau(10, 0.4, 20_000, seed=1)
    b = mc_mean_cost_via_tau(10, 0.4, 20_000, seed=1, workers=3)
    c = mc_mean_cost_via_tau(10, 0.4, 20_000, seed=2)
    assert a == b
    assert a.value != c.value


def test_tau_mean_reproducible_across_seeds():
    a = mc_conjecture([0.5], 0.5, 10**5, seed=1)[0].mean_tau
    b = mc_conjecture([0.5], 0.5, 10**5, seed=2)[0].mean_tau
    assert math.isfinite(a.value) and a.agrees(b)


@pytest.mark.parametrize("p", [0.3, 0.5, 0.7])
@pytest.mark.parametrize("xy", [(0.3, 0.35), (0.4, 0.6), (0.55, 0.6)])
def test_lemma_harness(p, xy):
    c = mc_lemma_check(*xy, p, 10**5, seed=1)
    assert c.agrees(3.0)
    # the direct sum also has a closed form: the number of shared levels
    assert abs(c.lhs.zscore(shared_levels(*xy, p))) <= 3


def test_common_numbers_reduce_variance():
    c = mc_lemma_check(0.55, 0.6, 0.3, 20_000, seed=1)
    assert c.combined_stderr < 0.5 * c.independent_stderr


def test_log_moment_matches_direct():
    tau = np.array([1, 2, 2, 3, 5])
    lm, lse, top = log_moment(tau, math.log(4.0))
    vals = 4.0**tau
    assert math.exp(lm) == pytest.approx(vals.mean())
    assert math.exp(lse) == pytest.approx(vals.std(ddof=1) / math.sqrt(5))
    assert top == pytest.approx(vals.max() / vals.sum())


def test_log_moment_never_overflows():
    lm, lse, top = log_moment(np.array([2000, 3000]), math.log(4.0))
    assert math.isfinite(lm) and math.isfinite(lse)
    assert lm == pytest.approx(3000 * math.log(4) - math.log(2), rel=1e-12)


def test_conjecture_points():
    pts = mc_conjecture([0.7, 0.3], SplitParams(0.5), 5000, seed=1)
    assert [pt.x for pt in pts] == [0.3, 0.7]
    for pt in pts:
        assert pt.finite and pt.truncated == 0 and pt.trials == 5000 and pt.seed == 1
        assert pt.mean_tau.value >= 1
    with pytest.raises(ValueError):
        mc_conjecture([0.0], 0.5, 10, 1)


def test_default_grid():
    g = default_xgrid()
    assert len(g) == 19 and g[0] == 0.05 and g[-1] == 0.95
