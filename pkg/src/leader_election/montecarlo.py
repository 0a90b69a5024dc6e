"""Monte Carlo estimators.

Every estimator splits its trials into blocks (see :mod:`.streams`); block
``b`` of an estimator only depends on ``(seed, tag, b)``. Blocks may run on
several processes and are always reduced in block order, so the result is
the same for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from . import streams
from .asymptotics import lemma_terms
from .protocol import simulate_costs
from .splitchain import DEFAULT_MAX_STEPS, SplitParams, as_params, walk_batch

LN10 = math.log(10.0)


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float
    trials: int
    truncated_count: int = 0
    seed: Optional[int] = None
    overflow_count: int = 0

    @property
    def unreliable(self) -> bool:
        return self.truncated_count > 0 or self.overflow_count > 0

    def zscore(self, target: float) -> float:
        if self.stderr == 0:
            return 0.0 if self.value == target else math.inf
        return (self.value - target) / self.stderr

    def agrees(self, other, k: float = 3.0) -> bool:
        """``|a - b| <= k * combined stderr`` (``other`` may be a plain number)."""
        if isinstance(other, Estimate):
            se = math.hypot(self.stderr, other.stderr)
            diff = self.value - other.value
        else:
            se = self.stderr
            diff = self.value - float(other)
        return abs(diff) <= k * se


def estimate(samples: np.ndarray, seed=None, truncated: int = 0) -> Estimate:
    """Mean and standard error of the finite samples."""
    samples = np.asarray(samples, dtype=float)
    finite = samples[np.isfinite(samples)]
    overflow = int(samples.size - finite.size)
    t = finite.size
    if t == 0:
        return Estimate(math.nan, math.nan, 0, truncated, seed, overflow)
    sd = float(np.std(finite, ddof=1)) if t > 1 else 0.0
    return Estimate(float(np.mean(finite)), sd / math.sqrt(t), t, truncated, seed, overflow)


def run_blocks(block_fn: Callable, trials: int, seed: int, tag: str, workers: int = 1) -> dict:
    """Apply ``block_fn(rng, size)`` to every block and concatenate the arrays it returns."""
    jobs = [(b, size) for b, _, size in streams.iter_blocks(trials)]
    call = partial(_call_block, block_fn, seed, tag)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(call, jobs))
    else:
        parts = [call(j) for j in jobs]
    return {k: np.concatenate([part[k] for part in parts]) for k in parts[0]}


def _call_block(block_fn, seed, tag, job):
    block, size = job
    return block_fn(streams.block_rng(seed, block, tag), size)


# -- order statistics ---------------------------------------------------------

def sample_order_stats(n: int, rng: np.random.Generator, size: int) -> tuple[np.ndarray, np.ndarray]:
    """The two smallest of ``n`` iid uniforms, ``size`` times.

    Uses exponential spacings: ``U_(1) = E1 / S``, ``U_(2) = (E1 + E2) / S``
    with ``S = E1 + E2 + Gamma(n - 1)``.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    e = rng.standard_exponential((2, size))
    rest = rng.standard_gamma(n - 1, size)
    s = e[0] + e[1] + rest
    return e[0] / s, (e[0] + e[1]) / s


def sample_order_stats_pair(n: int, rng: np.random.Generator) -> tuple[float, float]:
    u1, u2 = sample_order_stats(n, rng, 1)
    return float(u1[0]), float(u2[0])


# -- mean cost through the hitting time ----------------------------------------

def _tau_cost_block(n, p, max_steps, rng, size):
    params = SplitParams(p)
    u1, u2 = sample_order_stats(n, rng, size)
    w = walk_batch(params, u1, u2, rng, max_steps)
    return {"cost": w.inv_pi_sum, "truncated": w.truncated, "tau": w.tau}


def mc_mean_cost_via_tau(n: int, params, trials: int, seed: int,
                         max_steps: int = DEFAULT_MAX_STEPS, workers: int = 1) -> Estimate:
    """``E(H_n) = E sum_{i < tau(U_(1), U_(2))} 1 / pi_i``.

    One fresh chain per trial, run up to ``tau``. Truncated chains are
    excluded from the mean and counted.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    params = as_params(params)
    out = run_blocks(partial(_tau_cost_block, n, params.p, max_steps),
                     trials, seed, f"tau-cost:{n}:{params.p.hex()}", workers)
    trunc = out["truncated"]
    return estimate(out["cost"][~trunc], seed, int(trunc.sum()))


# -- protocol simulation ---------------------------------------------------------

def _protocol_block(n, p, rng, size):
    return {"cost": simulate_costs(n, SplitParams(p), rng, size)}


def mc_protocol_mean(n: int, params, trials: int, seed: int, workers: int = 1) -> Estimate:
    """Mean number of coin-flip rounds over simulated elections."""
    if n < 0:
        raise ValueError("n must be >= 0")
    params = as_params(params)
    out = run_blocks(partial(_protocol_block, n, params.p), trials, seed,
                     f"protocol:{n}:{params.p.hex()}", workers)
    cost = out["cost"]
    trunc = cost < 0
    return estimate(cost[~trunc], seed, int(trunc.sum()))


# -- decomposition check ---------------------------------------------------------

@dataclass(frozen=True)
class LemmaCheck:
    """Direct sum (``lhs``) against closed-form terms plus simulated remainder (``rhs``).

    ``diff`` is the paired per-trial difference; ``independent_stderr`` is what
    the standard error of ``lhs - rhs`` would be without common random numbers.
    """

    x: float
    y: float
    lhs: Estimate
    rhs: Estimate
    diff: Estimate
    deterministic: int
    independent_stderr: float

    @property
    def combined_stderr(self) -> float:
        return self.diff.stderr

    def agrees(self, k: float = 3.0) -> bool:
        return abs(self.diff.value) <= k * self.diff.stderr


def _lemma_block(x, y, p, start, gamma0, gamma1, max_steps, rng, size):
    params = SplitParams(p)
    xs = np.full(size, x)
    ys = np.full(size, y)
    w = walk_batch(params, xs, ys, rng, max_steps, tail_start=np.full(size, start))
    gated = (w.gamma0 == gamma0) & (w.gamma1 == gamma1)
    third = np.where(gated, w.tail_sum, 0.0)
    return {"lhs": w.inv_pi_sum, "third": third, "truncated": w.truncated}


def mc_lemma_check(x: float, y: float, params, trials: int, seed: int,
                   max_steps: int = DEFAULT_MAX_STEPS, workers: int = 1) -> LemmaCheck:
    """Check the three-term decomposition of ``E sum_{i < tau(x, y)} 1 / pi_i``.

    The remainder term is read off the same chains as the direct sum.
    """
    params = as_params(params)
    t = lemma_terms(x, y, params)
    if t.omega:
        block = partial(_lemma_block, x, y, params.p, t.second_jump + 1,
                        t.first_jump, t.second_jump, max_steps)
    else:
        # both gated terms vanish; no chain can satisfy gamma0 == -2
        block = partial(_lemma_block, x, y, params.p, 0, -2, -2, max_steps)
    out = run_blocks(block, trials, seed, f"lemma:{x!r}:{y!r}:{params.p.hex()}", workers)
    keep = ~out["truncated"]
    lhs = out["lhs"][keep]
    rhs = t.deterministic + out["third"][keep]
    trunc = int((~keep).sum())
    lhs_e = estimate(lhs, seed, trunc)
    rhs_e = estimate(rhs, seed, trunc)
    return LemmaCheck(
        x=x, y=y, lhs=lhs_e, rhs=rhs_e,
        diff=estimate(lhs - rhs, seed, trunc),
        deterministic=t.deterministic,
        independent_stderr=math.hypot(lhs_e.stderr, rhs_e.stderr),
    )


# -- exponential moment of tau(x, x) ----------------------------------------------

@dataclass(frozen=True)
class ConjecturePoint:
    """Estimates of ``E(delta^(-2 tau(x, x)))`` (log10 scale) and ``E(tau(x, x))``.

    ``top_share`` is the fraction of the moment estimate owed to the single
    largest trial; above one half the estimate is tail-dominated
    (``caveat``).
    """

    x: float
    log10_moment: float
    log10_moment_stderr: float
    mean_tau: Estimate
    truncated: int
    trials: int
    seed: int
    max_tau: int
    top_share: float

    @property
    def caveat(self) -> bool:
        return self.top_share > 0.5

    @property
    def finite(self) -> bool:
        return math.isfinite(self.log10_moment)


def log_moment(tau: np.ndarray, log_base: float) -> tuple[float, float, float]:
    """Natural logs of the mean and standard error of ``exp(log_base * tau)``,
    and the share of the largest term. Never leaves log space."""
    a = log_base * np.asarray(tau, dtype=float)
    t = a.size
    lse = float(logsumexp(a))
    log_mean = lse - math.log(t)
    if t < 2:
        return log_mean, -math.inf, 1.0
    log_m2 = float(logsumexp(2.0 * a)) - math.log(t)
    gap = 2.0 * log_mean - log_m2  # <= 0 by Jensen
    if gap >= 0.0:
        log_var = -math.inf
    else:
        log_var = log_m2 + math.log(-math.expm1(gap)) + math.log(t / (t - 1))
    log_se = 0.5 * (log_var - math.log(t))
    top = math.exp(float(a.max()) - lse)
    return log_mean, log_se, top


def _conjecture_block(x, p, max_steps, rng, size):
    params = SplitParams(p)
    xs = np.full(size, x)
    w = walk_batch(params, xs, xs, rng, max_steps)
    return {"tau": w.tau}


def mc_conjecture(xgrid: Sequence[float], params, trials: int, seed: int,
                  max_steps: int = DEFAULT_MAX_STEPS, workers: int = 1) -> list[ConjecturePoint]:
    """Estimate ``E(delta^(-2 tau(x, x)))`` and ``E(tau(x, x))`` on a grid of ``x``.

    Output is sorted by ``x``. Truncated chains are left out of both
    estimates and reported in ``truncated``.
    """
    params = as_params(params)
    xs = sorted(float(x) for x in xgrid)
    if not xs or any(not (0.0 < x < 1.0) for x in xs):
        raise ValueError("xgrid must be a nonempty subset of (0, 1)")
    log_base = -2.0 * math.log(params.delta)
    points = []
    for x in xs:
        out = run_blocks(partial(_conjecture_block, x, params.p, max_steps),
                         trials, seed, f"conjecture:{x!r}:{params.p.hex()}", workers)
        tau = out["tau"]
        ok = tau > 0
        done = tau[ok]
        if done.size:
            lm, lse, top = log_moment(done, log_base)
        else:
            lm, lse, top = math.nan, math.nan, math.nan
        points.append(ConjecturePoint(
            x=x,
            log10_moment=lm / LN10,
            log10_moment_stderr=lse / LN10,
            mean_tau=estimate(done, seed, int((~ok).sum())),
            truncated=int((~ok).sum()),
            trials=trials,
            seed=seed,
            max_tau=int(done.max()) if done.size else -1,
            top_share=top,
        ))
    return points


def default_xgrid(step: float = 0.05) -> list[float]:
    k = int(round(1.0 / step))
    return [round(i * step, 10) for i in range(1, k)]
