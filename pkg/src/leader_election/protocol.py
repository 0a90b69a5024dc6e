"""Leader election on a multiple access channel with ternary feedback.

Stations are the integers ``0..n-1``. After the deterministic initialisation
slot every candidate flips a Bernoulli(p) coin per round; 1-flippers
transmit. The channel answers

* ``silence``   -- nobody transmitted, every candidate flips again;
* ``success``   -- exactly one transmitter, it becomes the leader;
* ``collision`` -- two or more transmitters, the 0-flippers are eliminated.

``coin_flip_rounds`` is the cost ``H_n`` (``H_0 = H_1 = 0``);
``time_units`` additionally counts the initialisation slot.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence, Union

import numpy as np

from .splitchain import SplitParams, as_params

TRACE_SCHEMA = 1
DEFAULT_MAX_ROUNDS = 10**6


class Feedback(enum.Enum):
    SILENCE = "silence"
    SUCCESS = "success"
    COLLISION = "collision"


class Status(enum.Enum):
    ACTIVE = "active"
    NON_ACTIVE = "non_active"
    ELIMINATED = "eliminated"
    LEADER = "leader"


@dataclass(frozen=True)
class ChannelFeedback:
    kind: Feedback
    station: Optional[int] = None

    @classmethod
    def from_senders(cls, senders: Sequence[int]) -> "ChannelFeedback":
        if len(senders) == 0:
            return cls(Feedback.SILENCE)
        if len(senders) == 1:
            return cls(Feedback.SUCCESS, int(senders[0]))
        return cls(Feedback.COLLISION)


@dataclass(frozen=True)
class RoundRecord:
    """One time unit: the partition of the stations and what the channel said."""

    active: tuple
    non_active: tuple
    eliminated: tuple
    feedback: ChannelFeedback
    initialization: bool = False


@dataclass
class ElectionTrace:
    n: int
    rounds: list = field(default_factory=list)
    coin_flip_rounds: int = 0
    leader: Optional[int] = None
    truncated: bool = False

    @property
    def time_units(self) -> int:
        return self.coin_flip_rounds + 1

    def status(self, station: int) -> Status:
        """Final status of a station."""
        if station == self.leader:
            return Status.LEADER
        last = self.rounds[-1] if self.rounds else None
        if last is not None and station in last.eliminated:
            return Status.ELIMINATED
        if last is not None and station in last.active:
            return Status.ACTIVE
        return Status.NON_ACTIVE

    def to_dict(self, p: Optional[float] = None, labels: Optional[Sequence[str]] = None) -> dict:
        name = (lambda s: labels[s]) if labels else (lambda s: s)
        rounds = []
        for t, r in enumerate(self.rounds, start=1):
            rounds.append({
                "time_unit": t,
                "initialization": r.initialization,
                "active": [name(s) for s in r.active],
                "non_active": [name(s) for s in r.non_active],
                "eliminated": [name(s) for s in r.eliminated],
                "feedback": r.feedback.kind.value,
                "station": None if r.feedback.station is None else name(r.feedback.station),
            })
        return {
            "schema": TRACE_SCHEMA,
            "n": self.n,
            "p": p,
            "leader": None if self.leader is None else name(self.leader),
            "coin_flip_rounds": self.coin_flip_rounds,
            "time_units": self.time_units,
            "truncated": self.truncated,
            "rounds": rounds,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(**kwargs), indent=2)


def station_labels(n: int) -> list[str]:
    """Letters ``A, B, ...`` for small networks, decimal ids otherwise."""
    if n <= 26:
        return [chr(ord("A") + i) for i in range(n)]
    return [str(i) for i in range(n)]


class ScriptedFlips:
    """Replays a fixed flip sequence, e.g. ``"1110,000,1000"``.

    Each comma-separated group gives one round. A group may list one digit
    per current candidate (in id order) or one digit per station, in which
    case the digits of eliminated stations are ignored.
    """

    def __init__(self, script: Union[str, Sequence[str]], n: int):
        groups = script.split(",") if isinstance(script, str) else list(script)
        self.groups = [g.strip() for g in groups if g.strip()]
        for g in self.groups:
            if set(g) - {"0", "1"}:
                raise ValueError(f"flip group {g!r} must contain only 0/1")
        self.n = n
        self._pos = 0

    def __call__(self, candidates: Sequence[int]) -> np.ndarray:
        if self._pos >= len(self.groups):
            raise ValueError("flip script exhausted before the election ended")
        g = self.groups[self._pos]
        self._pos += 1
        if len(g) == len(candidates):
            bits = g
        elif len(g) == self.n:
            bits = "".join(g[s] for s in candidates)
        else:
            raise ValueError(
                f"flip group {g!r} has {len(g)} digits; expected {len(candidates)} or {self.n}"
            )
        return np.array([c == "1" for c in bits], dtype=bool)


def _random_flips(params: SplitParams, rng: np.random.Generator):
    def flips(candidates: Sequence[int]) -> np.ndarray:
        return rng.random(len(candidates)) < params.p
    return flips


@dataclass(frozen=True)
class RoundOutcome:
    feedback: ChannelFeedback
    active: tuple
    non_active: tuple
    eliminated: tuple
    candidates: tuple


def run_round(candidates: Sequence[int], params, rng=None, flips=None) -> RoundOutcome:
    """Play one randomized selection round among ``candidates``.

    Either ``rng`` or a ``flips`` callable (candidates -> bool array) must be
    given. ``eliminated`` lists the stations removed by this round only.
    """
    cands = tuple(candidates)
    if not cands:
        raise ValueError("candidates must be nonempty")
    if flips is None:
        if rng is None:
            raise ValueError("need rng or flips")
        flips = _random_flips(as_params(params), rng)
    f = np.asarray(flips(cands), dtype=bool)
    active = tuple(s for s, b in zip(cands, f) if b)
    non_active = tuple(s for s, b in zip(cands, f) if not b)
    fb = ChannelFeedback.from_senders(active)
    if fb.kind is Feedback.COLLISION:
        return RoundOutcome(fb, active, non_active, non_active, active)
    if fb.kind is Feedback.SUCCESS:
        return RoundOutcome(fb, active, non_active, (), active)
    return RoundOutcome(fb, active, non_active, (), cands)


def run_election(
    n: int,
    params,
    rng: Optional[np.random.Generator] = None,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
    script: Union[str, Sequence[str], None] = None,
    record: bool = True,
) -> ElectionTrace:
    """Elect a leader among ``n`` stations.

    With ``script`` the coin flips are replayed from a fixed sequence instead
    of drawn from ``rng``. A trace that reaches ``max_rounds`` coin-flip
    rounds without a leader is returned with ``truncated=True``.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if max_rounds < 1:
        raise ValueError("max_rounds must be >= 1")
    params = as_params(params)
    if script is not None:
        flips = ScriptedFlips(script, n)
    elif rng is not None:
        flips = _random_flips(params, rng)
    else:
        raise ValueError("need rng or script")

    trace = ElectionTrace(n=n)
    everyone = tuple(range(n))
    # initialisation slot: every station transmits its id
    init_fb = ChannelFeedback.from_senders(everyone)
    if record:
        trace.rounds.append(RoundRecord(everyone, (), (), init_fb, initialization=True))
    if n <= 1:
        trace.leader = 0 if n == 1 else None
        return trace

    candidates = everyone
    eliminated: tuple = ()
    while trace.coin_flip_rounds < max_rounds:
        out = run_round(candidates, params, flips=flips)
        trace.coin_flip_rounds += 1
        if record:
            trace.rounds.append(
                RoundRecord(out.active, out.non_active, eliminated, out.feedback)
            )
        eliminated = tuple(sorted(eliminated + out.eliminated))
        candidates = out.candidates
        if out.feedback.kind is Feedback.SUCCESS:
            trace.leader = out.feedback.station
            return trace
    trace.truncated = True
    return trace


def simulate_costs(
    n: int,
    params,
    rng: np.random.Generator,
    size: int,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
) -> np.ndarray:
    """Coin-flip round counts of ``size`` independent elections.

    Stations are exchangeable, so only the candidate count is tracked: each
    round the number of 1-flippers is Binomial(candidates, p). Truncated
    elections are reported as ``-1``.
    """
    params = as_params(params)
    out = np.zeros(size, dtype=np.int64)
    if n <= 1:
        return out
    live = np.arange(size)
    m = np.full(size, n, dtype=np.int64)
    rounds = 0
    while live.size and rounds < max_rounds:
        s = rng.binomial(m, params.p)
        rounds += 1
        done = s == 1
        out[live[done]] = rounds
        m = np.where(s == 0, m, s)[~done]
        live = live[~done]
    out[live] = -1
    return out


def iter_traces(n: int, params, rng: np.random.Generator, count: int) -> Iterator[ElectionTrace]:
    for _ in range(count):
        yield run_election(n, params, rng)
