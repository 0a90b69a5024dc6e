"""Base-(p, q) binary decomposition of [0, 1] and the law of ``H_n``.

Level ``k`` splits [0, 1] into ``2**k`` consecutive intervals. Interval ``j``
has length ``p**(k - b) * q**b`` where ``b`` is the number of one bits of
``j``; its two children at level ``k + 1`` are ``2j`` (left part, factor
``p``) and ``2j + 1`` (right part, factor ``q``).

The measure ``mu_k`` puts the mass ``|I_j|`` at the right end of ``I_j``; then

    P(H_n <= k) = n * sum_j |I_j| (1 - right_j)**(n - 1)          (n >= 2)
    P(H_N(x) <= k) = exp(-x) + x * sum_j |I_j| exp(-x * right_j)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from .splitchain import SplitParams, as_params

K_CAP = 25
STREAM_CAP = 40
CHUNK = 1 << 18


class LevelTooDeep(ValueError):
    """Requested level would need more than ``2**cap`` atoms."""


@dataclass(frozen=True)
class IntervalDecomposition:
    level: int
    rights: np.ndarray
    lengths: np.ndarray

    @property
    def lefts(self) -> np.ndarray:
        return self.rights - self.lengths


@dataclass(frozen=True)
class DiscreteMeasure:
    weights: np.ndarray
    locations: np.ndarray

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return list(zip(self.weights.tolist(), self.locations.tolist()))

    def integrate(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        return float(np.sum(self.weights * f(self.locations)))

    @property
    def total_mass(self) -> float:
        return math.fsum(self.weights.tolist())


def _check_level(k: int, cap: int) -> None:
    if k < 0:
        raise ValueError("level must be >= 0")
    if k > cap:
        raise LevelTooDeep(f"level {k} exceeds cap {cap} (2**{k} atoms)")


def intervals_by_recursion(k: int, params) -> IntervalDecomposition:
    """Refine level by level: child ``2j`` gets ``p |I_j|``, child ``2j+1`` gets ``q |I_j|``,
    and the children are laid end to end from 0."""
    _check_level(k, K_CAP)
    params = as_params(params)
    lengths = np.ones(1)
    for _ in range(k):
        lengths = np.column_stack((params.p * lengths, params.q * lengths)).ravel()
    rights = np.cumsum(lengths)
    rights[-1] = 1.0
    return IntervalDecomposition(k, rights, lengths)


def _atoms_by_digits(j: np.ndarray, k: int, p: float, q: float) -> tuple[np.ndarray, np.ndarray]:
    # walk the digits of j from the most significant (first split) down
    length = np.ones(j.shape)
    left = np.zeros(j.shape)
    for level in range(k):
        bit = ((j >> (k - 1 - level)) & 1).astype(bool)
        left = left + np.where(bit, p * length, 0.0)
        length = length * np.where(bit, q, p)
    return length, left + length


def intervals_by_digits(k: int, params) -> IntervalDecomposition:
    """Closed form from the binary digits of each index."""
    _check_level(k, K_CAP)
    params = as_params(params)
    j = np.arange(1 << k, dtype=np.int64)
    lengths, rights = _atoms_by_digits(j, k, params.p, params.q)
    return IntervalDecomposition(k, rights, lengths)


def build_intervals(k: int, params, method: str = "recursion") -> IntervalDecomposition:
    if method == "recursion":
        return intervals_by_recursion(k, params)
    if method == "digits":
        return intervals_by_digits(k, params)
    raise ValueError(f"unknown method {method!r}")


def measure(k: int, params) -> DiscreteMeasure:
    dec = build_intervals(k, params)
    return DiscreteMeasure(weights=dec.lengths, locations=dec.rights)


def iter_atoms(k: int, params, chunk: int = CHUNK) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Stream ``(lengths, rights)`` in index order without materialising level ``k``."""
    _check_level(k, STREAM_CAP)
    params = as_params(params)
    total = 1 << k
    for start in range(0, total, chunk):
        j = np.arange(start, min(start + chunk, total), dtype=np.int64)
        yield _atoms_by_digits(j, k, params.p, params.q)


def _reduce(k: int, params, f) -> float:
    # fsum over per-chunk pairwise sums
    return math.fsum(float(np.sum(f(l, r))) for l, r in iter_atoms(k, params))


def cdf_exact(n: int, k: int, params) -> float:
    """``P(H_n <= k) = n * integral (1 - t)**(n-1) d mu_k(t)``."""
    if n < 2:
        raise ValueError("n must be >= 2")
    return n * _reduce(k, params, lambda l, r: l * (1.0 - r) ** (n - 1))


def poisson_cdf(x: float, k: int, params) -> float:
    """``P(H_{N_x} <= k)`` for a Poisson(x) number of stations.

    The exponent carries the factor ``x``: ``exp(-x * right_j)``.
    """
    if x < 0:
        raise ValueError("x must be >= 0")
    return math.exp(-x) + x * _reduce(k, params, lambda l, r: l * np.exp(-x * r))


def tail_approx(n: int, k: int, params) -> float:
    """``integral P(U_{2,n} < t) d mu_k(t)``, the large-``n`` form of ``P(H_n > k)``."""
    if n < 2:
        raise ValueError("n must be >= 2")

    def f(l, r):
        c = 1.0 - r
        return l * (1.0 - c**n - n * r * c ** (n - 1))

    return _reduce(k, params, f)


def shared_levels(x: float, y: float, params, max_levels: int = 10_000) -> int:
    """Number of levels ``i >= 0`` whose interval ``[a, a + l]`` satisfies
    ``a <= x`` and ``a + l >= y``.

    For ``x < y`` at most one interval per level qualifies and every interval
    is reached with probability equal to its length, so this count is
    exactly ``E sum_{i < tau(x, y)} 1 / pi_i``.
    """
    if not (0.0 <= x < y <= 1.0):
        raise ValueError("need 0 <= x < y <= 1")
    params = as_params(params)
    a, length = 0.0, 1.0
    count = 1
    while count < max_levels:
        m = a + params.p * length
        if y <= m:
            length *= params.p
        elif x >= m:
            a, length = m, length * params.q
        else:
            return count
        count += 1
    raise RuntimeError("x and y share more than max_levels levels")
