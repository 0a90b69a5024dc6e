"""Exact (non-asymptotic) quantities for the election cost ``H_n``.

The cost satisfies, for ``n >= 2``,
``H_n = 1 + H_{S_n} + H_n 1{S_n = 0}`` in distribution, with
``S_n ~ Binomial(n, p)`` and ``H_0 = H_1 = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .splitchain import SplitParams, as_params

LOG_SPACE_FROM = 50
SURVIVAL_FLOOR = 1e-15
WEIGHT_CUTOFF = math.exp(-50.0)


def binomial_weights(n: int, p: float, q: float) -> np.ndarray:
    """``C(n, j) p^j q^(n-j)`` for ``j = 0..n``."""
    j = np.arange(n + 1)
    if n <= LOG_SPACE_FROM:
        comb = np.array([math.comb(n, int(k)) for k in j], dtype=float)
        return comb * p**j * q ** (n - j)
    lw = gammaln(n + 1) - gammaln(j + 1) - gammaln(n - j + 1) + j * math.log(p) + (n - j) * math.log(q)
    return np.exp(lw)


@dataclass(frozen=True)
class MeanTable:
    p: float
    values: np.ndarray

    @property
    def N(self) -> int:
        return len(self.values) - 1

    def __getitem__(self, n):
        return self.values[n]


_MEAN_CACHE: dict = {}


def _extend_means(old, N: int, p: float) -> np.ndarray:
    q = 1.0 - p
    vals = np.zeros(N + 1)
    lo = 2
    if old is not None:
        vals[: len(old)] = old
        lo = max(lo, len(old))
    for n in range(lo, N + 1):
        w = binomial_weights(n, p, q)[1:n]
        # weights below e^-50 of the peak cannot move the sum
        keep = w > w.max() * WEIGHT_CUTOFF
        conv = math.fsum((w[keep] * vals[1:n][keep]).tolist())
        vals[n] = (1.0 + conv) / (1.0 - p**n - q**n)
    vals.setflags(write=False)
    return vals


def exact_mean_table(N: int, params) -> MeanTable:
    """``E(H_0), ..., E(H_N)`` from the mean recurrence.

    ``E(H_n) (1 - p^n - q^n) = 1 + sum_{j=1}^{n-1} C(n,j) p^j q^(n-j) E(H_j)``.
    Tables are cached per exact value of ``p`` and extended incrementally.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    params = as_params(params)
    key = params.p.hex()
    vals = _MEAN_CACHE.get(key)
    if vals is None or len(vals) <= N:
        vals = _extend_means(vals, N, params.p)
        _MEAN_CACHE[key] = vals
    return MeanTable(params.p, vals[: N + 1])


def exact_mean(n: int, params) -> float:
    return float(exact_mean_table(max(n, 1), params)[n])


@lru_cache(maxsize=32)
def _survival_table(N: int, K: int, p_bits: str) -> np.ndarray:
    p = float.fromhex(p_bits)
    q = 1.0 - p
    # surv[n, k] = P(H_n > k); rows 0 and 1 stay zero
    surv = np.zeros((N + 1, K + 1))
    W = np.zeros((N + 1, N + 1))
    for n in range(2, N + 1):
        W[n, 1 : n + 1] = binomial_weights(n, p, q)[1:]
        W[n, n] += q**n
    prev = np.ones(N + 1)  # P(H_n > -1) = 1 for every n, including 0 and 1
    for k in range(K + 1):
        # at k = 0 the row sums are 1 analytically; skip the rounding
        cur = W @ prev if k else np.ones(N + 1)
        cur[:2] = 0.0
        surv[:, k] = cur
        prev = cur
    surv.setflags(write=False)
    return surv


def survival_table(N: int, K: int, params) -> np.ndarray:
    """``P(H_n > k)`` for ``0 <= n <= N``, ``0 <= k <= K``.

    The survival form of the distributional recurrence is used directly
    (the weights over ``S_n`` plus the silent repeat sum to one), which keeps
    the far tail free of cancellation.
    """
    params = as_params(params)
    return _survival_table(int(N), int(K), params.p.hex())


def exact_cdf_dp(n: int, k: int, params) -> float:
    """``P(H_n <= k)`` by dynamic programming over ``(n, k)``."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if k < 0:
        return 0.0 if n >= 2 else 1.0
    if n <= 1:
        return 1.0
    return 1.0 - float(survival_table(n, k, params)[n, k])


def tail_cap(N: int, params, floor: float = SURVIVAL_FLOOR) -> int:
    """Smallest ``k`` with ``P(H_n > k) <= floor`` for every ``n <= N``."""
    K = 64
    while True:
        s = survival_table(N, K, params)
        hit = np.nonzero(s.max(axis=0) <= floor)[0]
        if hit.size:
            return int(hit[0])
        K *= 2


def tail_sum_mean(n: int, params, floor: float = 1e-17) -> float:
    """``sum_k P(H_n > k)``; equals ``E(H_n)``."""
    if n <= 1:
        return 0.0
    K = tail_cap(n, params, floor)
    return math.fsum(survival_table(n, K, params)[n, : K + 1].tolist())


# -- Poisson transform ------------------------------------------------------

def forcing(x: float) -> float:
    """``1 - (1 + x) e^{-x}``, the probability of at least two Poisson points."""
    if x < 1e-3:
        # series avoids cancellation near 0
        return x * x / 2 - x**3 / 3 + x**4 / 8 - x**5 / 30
    return -math.expm1(-x) - x * math.exp(-x)


def poisson_transform_series(x: float, params, tol: float = 1e-16) -> float:
    """``h(x) = sum_{n>=2} E(H_n) x^n / n! e^{-x}`` by direct summation."""
    if x < 0:
        raise ValueError("x must be >= 0")
    if x == 0:
        return 0.0
    params = as_params(params)
    N = max(64, int(2 * x + 40 * math.sqrt(x + 1) + 40))
    while True:
        E = exact_mean_table(N, params).values
        n = np.arange(2, N + 1)
        logw = n * math.log(x) - gammaln(n + 1) - x
        terms = E[2:] * np.exp(logw)
        total = math.fsum(terms.tolist())
        # tail beyond N: terms decay at least geometrically with ratio x/(N+1),
        # E(H_n) grows at most logarithmically
        ratio = x / (N + 1)
        last = terms[-1] * (1.0 + math.log(N + 1))
        if ratio < 0.5 and last / (1.0 - ratio) <= tol * max(total, 1e-300):
            return total
        N *= 2


def poisson_transform_fixpoint(
    x: float,
    params,
    depth: int = 400,
    base: float = 0.5,
    tol: float = 1e-16,
) -> float:
    """``h(x)`` by unrolling ``h(x) = h(px) + h(qx) e^{-px} + f(x)``.

    Arguments below ``base`` are evaluated with the power series. Raises
    ``RecursionError`` when ``depth`` levels do not bring every argument
    below ``base``.
    """
    if x < 0:
        raise ValueError("x must be >= 0")
    params = as_params(params)
    p, q = params.p, params.q
    cache: dict = {}

    def h(t: float, level: int) -> float:
        if t < base:
            if t not in cache:
                cache[t] = poisson_transform_series(t, params, tol)
            return cache[t]
        if level >= depth:
            raise RecursionError(
                f"argument {t:g} still >= base {base:g} after {depth} levels"
            )
        return h(p * t, level + 1) + h(q * t, level + 1) * math.exp(-p * t) + forcing(t)

    return h(float(x), 0)


def poisson_mixture(x: float, values) -> float:
    """``sum_n values[n] P(Poisson(x) = n)`` for a finite sequence ``values``."""
    values = np.asarray(values, dtype=float)
    if x == 0:
        return float(values[0])
    n = np.arange(len(values))
    w = np.exp(n * math.log(x) - gammaln(n + 1) - x)
    return math.fsum((values * w).tolist())
