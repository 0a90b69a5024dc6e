import json
import math

import numpy as np
import pytest

from leader_election.exact import survival_table
from leader_election.protocol import (
    ChannelFeedback,
    Feedback,
    ScriptedFlips,
    Status,
    iter_traces,
    run_election,
    run_round,
    simulate_costs,
    station_labels,
)
from leader_election.splitchain import SplitParams
from leader_election.streams import block_rng

HALF = SplitParams(0.5)


@pytest.mark.parametrize(
    "senders,kind",
    [((), Feedback.SILENCE), ((3,), Feedback.SUCCESS), ((0, 2), Feedback.COLLISION), ((0, 1, 2), Feedback.COLLISION)],
)
def test_feedback_from_senders(senders, kind):
    fb = ChannelFeedback.from_senders(senders)
    assert fb.kind is kind
    assert (fb.station is not None) == (kind is Feedback.SUCCESS)


def test_single_sender_succeeds():
    out = run_round([5], HALF, flips=lambda c: [True])
    assert out.feedback == ChannelFeedback(Feedback.SUCCESS, 5)


def test_two_senders_collide_and_stay():
    out = run_round([0, 1], HALF, flips=lambda c: [True, True])
    assert out.feedback.kind is Feedback.COLLISION
    assert out.candidates == (0, 1) and out.eliminated == ()


def test_silence_keeps_everyone():
    out = run_round([0, 1, 2], HALF, flips=lambda c: [False] * 3)
    assert out.feedback.kind is Feedback.SILENCE
    assert out.candidates == (0, 1, 2)


def test_scripted_replay():
    tr = run_election(4, HALF, script="1110,000,1000")
    assert tr.leader == 0
    assert tr.coin_flip_rounds == 3 and tr.time_units == 4
    kinds = [r.feedback.kind for r in tr.rounds]
    assert kinds == [Feedback.COLLISION, Feedback.COLLISION, Feedback.SILENCE, Feedback.SUCCESS]
    assert tr.rounds[0].initialization
    assert tr.rounds[1].active == (0, 1, 2) and tr.rounds[1].non_active == (3,)
    assert tr.rounds[2].eliminated == (3,) and tr.rounds[2].non_active == (0, 1, 2)
    assert tr.status(0) is Status.LEADER and tr.status(3) is Status.ELIMINATED
    d = tr.to_dict(p=0.5, labels=station_labels(4))
    assert d["leader"] == "A" and d["schema"] == 1
    assert json.loads(tr.to_json(p=0.5))["time_units"] == 4


def test_script_with_one_digit_per_station():
    a = run_election(4, HALF, script="1110,000,1000")
    b = run_election(4, HALF, script="1110,0000,1000")
    assert (a.leader, a.coin_flip_rounds) == (b.leader, b.coin_flip_rounds)


@pytest.mark.parametrize("script", ["11,11", "1x", "111"])
def test_bad_scripts(script):
    with pytest.raises(ValueError):
        run_election(2, HALF, script=script)


def test_scripted_flips_exhaustion():
    f = ScriptedFlips("10", 2)
    f((0, 1))
    with pytest.raises(ValueError):
        f((0, 1))


def test_truncated_trace():
    tr = run_election(2, HALF, script="00,00", max_rounds=2)
    assert tr.truncated and tr.leader is None and tr.coin_flip_rounds == 2


@pytest.mark.parametrize("n", [0, 1])
def test_trivial_networks(n):
    tr = run_election(n, HALF, rng=block_rng(1, 0))
    assert tr.coin_flip_rounds == 0
    assert tr.leader == (0 if n == 1 else None)
    assert np.all(simulate_costs(n, HALF, block_rng(1, 0), 10) == 0)


def test_candidate_counts_never_grow(rng):
    for tr in iter_traces(9, SplitParams(0.3), rng, 200):
        alive = 9
        for r in tr.rounds[1:]:
            cands = len(r.active) + len(r.non_active)
            assert cands <= alive
            if r.feedback.kind is Feedback.COLLISION:
                alive = len(r.active)
            # eliminated stations never transmit again
            assert not set(r.eliminated) & set(r.active + r.non_active)
        assert tr.leader is not None


@pytest.mark.parametrize("p,expected", [(0.5, 2.0), (0.2, 3.125)])
def test_two_station_mean(p, expected):
    n = 10**6
    c = simulate_costs(2, SplitParams(p), block_rng(1, 0, "two"), n)
    assert abs(c.mean() - expected) <= 3 * c.std(ddof=1) / math.sqrt(n)


def test_trace_simulator_matches_count_simulator(rng):
    sp = SplitParams(0.7)
    a = np.array([t.coin_flip_rounds for t in iter_traces(6, sp, rng, 4000)])
    b = simulate_costs(6, sp, block_rng(1, 1, "count"), 4000)
    se = math.hypot(a.std(ddof=1), b.std(ddof=1)) / math.sqrt(4000)
    assert abs(a.mean() - b.mean()) <= 4 * se


@pytest.mark.parametrize("p", [0.3, 0.5, 0.7])
@pytest.mark.parametrize("n", range(2, 13))
def test_cost_law_matches_recurrence(n, p):
    trials = 10**5
    costs = simulate_costs(n, SplitParams(p), block_rng(1, n, f"ks:{p}"), trials)
    K = int(costs.max())
    ecdf = np.searchsorted(np.sort(costs), np.arange(K + 1), side="right") / trials
    cdf = 1.0 - survival_table(n, K, p)[n, :]
    # 1% critical value of the KS statistic; conservative for a discrete law
    assert np.max(np.abs(ecdf - cdf)) < 1.628 / math.sqrt(trials)
