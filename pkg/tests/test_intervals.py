import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from leader_election.asymptotics import lemma_terms
from leader_election.exact import exact_cdf_dp, survival_table, poisson_mixture
from leader_election.intervals import (
    K_CAP,
    LevelTooDeep,
    build_intervals,
    cdf_exact,
    iter_atoms,
    measure,
    poisson_cdf,
    shared_levels,
    tail_approx,
)

probs = st.floats(min_value=0.05, max_value=0.95)


def test_first_split():
    d = build_intervals(1, 0.3)
    assert d.lengths == pytest.approx([0.3, 0.7])
    assert d.lefts == pytest.approx([0.0, 0.3])


@pytest.mark.parametrize("method", ["recursion", "digits"])
def test_level_two_hand_values(method):
    d = build_intervals(2, 0.3, method)
    assert d.lengths == pytest.approx([0.09, 0.21, 0.21, 0.49])
    assert d.rights == pytest.approx([0.09, 0.30, 0.51, 1.0])


def test_unknown_method():
    with pytest.raises(ValueError):
        build_intervals(2, 0.3, "magic")


@settings(max_examples=40, deadline=None)
@given(p=probs, k=st.integers(0, 12))
def test_methods_agree_and_refine(p, k):
    a = build_intervals(k, p, "recursion")
    b = build_intervals(k, p, "digits")
    assert np.allclose(a.lengths, b.lengths, rtol=1e-12)
    assert np.allclose(a.rights, b.rights, atol=1e-12)
    assert math.fsum(a.lengths) == pytest.approx(1.0, abs=1e-12)
    finer = build_intervals(k + 1, p)
    # the right end of every parent is the right end of its second child
    assert np.allclose(finer.rights[1::2], a.rights, atol=1e-12)
    assert np.allclose(finer.lengths[0::2] + finer.lengths[1::2], a.lengths, rtol=1e-12)


def test_measure_atoms():
    assert measure(0, 0.4).atoms == [(1.0, 1.0)]
    assert measure(1, 0.5).atoms == [(0.5, 0.5), (0.5, 1.0)]
    m = measure(6, 0.3)
    assert m.total_mass == pytest.approx(1.0, abs=1e-15)
    assert m.integrate(lambda t: np.ones_like(t)) == pytest.approx(1.0)


def test_streaming_matches_materialised():
    d = build_intervals(14, 0.37)
    parts = list(iter_atoms(14, 0.37, chunk=1000))
    assert len(parts) == math.ceil(2**14 / 1000)
    lengths = np.concatenate([l for l, _ in parts])
    rights = np.concatenate([r for _, r in parts])
    assert np.allclose(lengths, d.lengths, rtol=1e-12)
    assert np.allclose(rights, d.rights, atol=1e-12)


def test_level_cap():
    with pytest.raises(LevelTooDeep):
        build_intervals(K_CAP + 1, 0.5)
    with pytest.raises(ValueError):
        build_intervals(-1, 0.5)


def test_cdf_hand_values():
    assert cdf_exact(2, 1, 0.5) == pytest.approx(0.5)
    assert cdf_exact(2, 2, 0.5) == pytest.approx(0.75)
    assert cdf_exact(5, 0, 0.3) == 0.0
    with pytest.raises(ValueError):
        cdf_exact(1, 3, 0.5)


@pytest.mark.parametrize("p", [0.2, 0.5, 0.8])
def test_cdf_matches_recurrence(p):
    s = survival_table(30, 12, p)
    for n in (2, 3, 9, 30):
        for k in range(13):
            assert cdf_exact(n, k, p) == pytest.approx(1 - s[n, k], abs=1e-12)


def test_poisson_cdf_hand_value():
    x = 3.0
    expected = math.exp(-3) + 3 * (0.5 * math.exp(-1.5) + 0.5 * math.exp(-3))
    assert poisson_cdf(x, 1, 0.5) == pytest.approx(expected, rel=1e-14)
    assert poisson_cdf(0.0, 4, 0.5) == 1.0


def test_poisson_cdf_is_a_mixture():
    s = survival_table(200, 20, 0.5)
    mix = poisson_mixture(3.0, 1 - s[:, 20])
    assert poisson_cdf(3.0, 20, 0.5) == pytest.approx(mix, abs=1e-6)
    vals = [poisson_cdf(3.0, k, 0.5) for k in range(20)]
    assert np.all(np.diff(vals) >= 0) and vals[-1] < 1


def test_tail_approx():
    assert tail_approx(5, 0, 0.5) == pytest.approx(1.0)
    d = build_intervals(4, 0.3)
    assert tail_approx(2, 4, 0.3) == pytest.approx(np.sum(d.lengths * d.rights**2), rel=1e-12)
    ratios = [tail_approx(n, 3, 0.5) / (1 - cdf_exact(n, 3, 0.5)) for n in (10, 100, 1000)]
    assert abs(ratios[2] - 1) < 0.02
    assert abs(ratios[2] - 1) <= abs(ratios[1] - 1) <= abs(ratios[0] - 1)


@settings(max_examples=300, deadline=None)
@given(p=probs, x=st.floats(0.01, 0.98), gap=st.floats(1e-3, 0.5))
def test_shared_levels_without_omega_is_first_term(p, x, gap):
    y = x + gap
    assume(y < 0.99)
    t = lemma_terms(x, y, p)
    n = shared_levels(x, y, p)
    assert n >= t.first >= 1
    if not t.omega:
        assert n == t.first


def test_shared_levels_examples():
    assert shared_levels(0.3, 0.35, 0.5) == 4
    assert shared_levels(0.3, 0.35, 0.7) == 3
    assert shared_levels(0.1, 0.9, 0.5) == 1
    with pytest.raises(ValueError):
        shared_levels(0.5, 0.4, 0.5)
