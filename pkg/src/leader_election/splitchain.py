"""Random interval chain driven by the split pair (A, B).

Each step either keeps the left part of the current interval
``[alpha, alpha + pi]`` (factor ``p``, no shift) or moves to its right part
(factor ``q``, shift ``pi * p``). The chain starts at ``pi = 1, alpha = 0``.

Hitting times for ``0 < x <= y < 1``::

    nu(x)  = first i >= 1 with alpha_i > x
    mu(y)  = first i >= 1 with alpha_i + pi_i < y
    tau    = min(nu, mu)

so that ``{i : alpha_i <= x, alpha_i + pi_i >= y} = {0, ..., tau - 1}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

import numpy as np

DEFAULT_MAX_STEPS = 10**6
# below this the linear pi is abandoned in favour of exp(-log_pi)
TINY_PI = 1e-300


class Truncated:
    """Marker for a chain that hit its step cap before stopping."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "TRUNCATED"

    def __bool__(self) -> bool:
        return False


TRUNCATED = Truncated()


@dataclass(frozen=True)
class SplitParams:
    """Split probability ``p`` of the left subgroup; ``q = 1 - p``."""

    p: float
    q: float = field(init=False)
    delta: float = field(init=False)

    def __post_init__(self):
        p = float(self.p)
        if not (0.0 < p < 1.0) or math.isnan(p):
            raise ValueError(f"p must lie in (0, 1), got {self.p!r}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", 1.0 - p)
        object.__setattr__(self, "delta", min(p, 1.0 - p))

    @property
    def log_p(self) -> float:
        return math.log(self.p)

    def swapped(self) -> "SplitParams":
        return SplitParams(self.q)


def as_params(p: Union[float, SplitParams]) -> SplitParams:
    return p if isinstance(p, SplitParams) else SplitParams(p)


@dataclass(frozen=True)
class SplitStep:
    """One realisation of (A, B): ``(p, 0)`` or ``(q, p)``."""

    a: float
    b: float
    jump: bool

    @classmethod
    def left(cls, params: SplitParams) -> "SplitStep":
        return cls(params.p, 0.0, False)

    @classmethod
    def right(cls, params: SplitParams) -> "SplitStep":
        return cls(params.q, params.p, True)


@dataclass(frozen=True)
class SplitChain:
    index: int = 0
    pi: float = 1.0
    alpha: float = 0.0
    log_pi: float = 0.0

    @property
    def upper(self) -> float:
        """Right end ``alpha + pi`` of the current interval."""
        return self.alpha + self.pi

    @property
    def inv_pi(self) -> float:
        if self.pi > TINY_PI:
            return 1.0 / self.pi
        # may be inf; callers treat that as overflow
        return math.exp(-self.log_pi) if -self.log_pi < 709.0 else math.inf


def sample_step(params: SplitParams, rng: np.random.Generator) -> SplitStep:
    """Draw (A, B): left with probability ``p``, right with probability ``q``."""
    if rng.random() < params.p:
        return SplitStep.left(params)
    return SplitStep.right(params)


def advance(chain: SplitChain, step: SplitStep) -> SplitChain:
    return SplitChain(
        index=chain.index + 1,
        pi=chain.pi * step.a,
        alpha=chain.alpha + chain.pi * step.b,
        log_pi=chain.log_pi + math.log(step.a),
    )


def walk(params: SplitParams, steps: Iterable[SplitStep]) -> list[SplitChain]:
    """All states visited along a finite step sequence, starting state first."""
    states = [SplitChain()]
    for st in steps:
        states.append(advance(states[-1], st))
    return states


def jump_indices(step_prefix: Sequence[SplitStep]) -> list[int]:
    """Indices ``j`` with ``B_j = p`` (the jump times gamma_0 < gamma_1 < ...)."""
    return [j for j, st in enumerate(step_prefix) if st.jump]


@dataclass(frozen=True)
class HittingTimes:
    """Outcome of :func:`hitting_times`.

    ``nu`` / ``mu`` hold the index at which each rule fired, or ``None`` when
    it had not fired by ``tau``. All three are :data:`TRUNCATED` when the cap
    was reached.
    """

    nu: Union[int, None, Truncated]
    mu: Union[int, None, Truncated]
    tau: Union[int, Truncated]
    inv_pi_sum: float
    steps: tuple = ()

    @property
    def truncated(self) -> bool:
        return self.tau is TRUNCATED


def hitting_times(
    params: SplitParams,
    x: float,
    y: float,
    rng: np.random.Generator,
    max_steps: int = DEFAULT_MAX_STEPS,
    keep_steps: bool = False,
) -> HittingTimes:
    """Run one chain until ``alpha_i > x`` or ``alpha_i + pi_i < y``.

    Also accumulates ``sum_{i < tau} 1 / pi_i``. With ``keep_steps`` the
    realised steps are returned for jump-time inspection.
    """
    if not (0.0 < x <= y < 1.0):
        raise ValueError(f"need 0 < x <= y < 1, got x={x}, y={y}")
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    chain = SplitChain()
    total = 0.0
    kept = []
    while chain.index < max_steps:
        total += chain.inv_pi
        step = sample_step(params, rng)
        if keep_steps:
            kept.append(step)
        chain = advance(chain, step)
        hit_nu = chain.alpha > x
        hit_mu = chain.upper < y
        if hit_nu or hit_mu:
            i = chain.index
            return HittingTimes(
                nu=i if hit_nu else None,
                mu=i if hit_mu else None,
                tau=i,
                inv_pi_sum=total,
                steps=tuple(kept),
            )
    return HittingTimes(TRUNCATED, TRUNCATED, TRUNCATED, total, tuple(kept))


@dataclass
class BatchWalk:
    """Vectorised hitting-time results; ``tau == -1`` marks truncation."""

    tau: np.ndarray
    inv_pi_sum: np.ndarray
    gamma0: np.ndarray
    gamma1: np.ndarray
    tail_sum: Optional[np.ndarray] = None

    @property
    def truncated(self) -> np.ndarray:
        return self.tau < 0


def walk_batch(
    params: SplitParams,
    x: np.ndarray,
    y: np.ndarray,
    rng: np.random.Generator,
    max_steps: int = DEFAULT_MAX_STEPS,
    tail_start: Optional[np.ndarray] = None,
) -> BatchWalk:
    """Run one independent chain per entry of ``(x, y)``.

    Consumes one uniform per live chain per step, in chain order, so a batch
    of size one reproduces :func:`hitting_times` draw for draw.

    ``tail_start`` (integer array) additionally accumulates
    ``sum_{tail_start <= i < tau} 1 / pi_i`` per chain.
    The first two jump indices are recorded (``-1`` when not reached).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    m = x.shape[0]
    p, q = params.p, params.q
    lp, lq = math.log(p), math.log(q)

    tau = np.full(m, -1, dtype=np.int64)
    total = np.zeros(m)
    g0 = np.full(m, -1, dtype=np.int64)
    g1 = np.full(m, -1, dtype=np.int64)
    tail = np.zeros(m) if tail_start is not None else None

    live = np.arange(m)
    pi = np.ones(m)
    log_pi = np.zeros(m)
    alpha = np.zeros(m)
    xs, ys = x.copy(), y.copy()
    ts = None if tail_start is None else np.asarray(tail_start, dtype=np.int64).copy()
    i = 0
    while live.size and i < max_steps:
        with np.errstate(over="ignore"):
            term = np.where(pi > TINY_PI, 1.0 / np.maximum(pi, TINY_PI), np.exp(-log_pi))
        total[live] += term
        if tail is not None:
            tail[live] += np.where(i >= ts, term, 0.0)

        left = rng.random(live.size) < p
        jump = ~left
        if jump.any():
            first = jump & (g0[live] < 0)
            second = jump & ~first & (g1[live] < 0)
            g0[live[first]] = i
            g1[live[second]] = i
        alpha = alpha + np.where(jump, pi * p, 0.0)
        pi = pi * np.where(left, p, q)
        log_pi = log_pi + np.where(left, lp, lq)
        i += 1

        stop = (alpha > xs) | (alpha + pi < ys)
        if stop.any():
            tau[live[stop]] = i
            keep = ~stop
            live, pi, log_pi, alpha, xs, ys = (
                live[keep], pi[keep], log_pi[keep], alpha[keep], xs[keep], ys[keep],
            )
            if ts is not None:
                ts = ts[keep]
    return BatchWalk(tau=tau, inv_pi_sum=total, gamma0=g0, gamma1=g1, tail_sum=tail)
