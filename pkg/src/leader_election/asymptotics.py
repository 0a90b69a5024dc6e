"""Periodic asymptotic expansion of the mean cost.

    E(H_n) ~ -log_p(n) + E ceil(log_p t2) + F(log_p n) + R(n)

where ``t2 ~ Gamma(2, 1)`` and ``F`` is the one-periodic oscillation

    F(z) = int_0^inf y (1 - p^(1-u)) (ceil(log_p rho(u) + u)) e^(-y) dy,
    u = frac(log_p y - z),   rho(u) = (1 - p^(1-u)) / (1 - p).

On ``log_p y - z in (m + u_{j-1}, m + u_j)`` with ``u_j = log_p(p + q p^j)``
the ceiling equals ``j`` and the integrand is ``j (y - p^(m+1+z)) e^(-y)``,
so the breakpoints are known in closed form.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate
from scipy.special import gammainc

from .exact import exact_mean
from .splitchain import SplitParams, as_params

EXACT_CAP = 10**4


class QuadratureError(RuntimeError):
    def __init__(self, message: str, breakpoints):
        super().__init__(message)
        self.breakpoints = list(breakpoints)


def frac(z: float) -> float:
    r = z - math.floor(z)
    # tiny negative z rounds to 1.0
    return 0.0 if r >= 1.0 else r


def rho(z: float, params) -> float:
    """``(1 - p^(1 - frac(z))) / (1 - p)``; one-periodic, in (0, 1]."""
    params = as_params(params)
    return (1.0 - params.p ** (1.0 - frac(z))) / params.q


def omega_indicator(x: float, y: float, params) -> bool:
    """True when ``ceil(log_p x) == ceil(log_p y)``."""
    if not (0.0 < x < 1.0 and 0.0 < y < 1.0):
        raise ValueError("x and y must lie in (0, 1)")
    params = as_params(params)
    return math.ceil(math.log(x) / params.log_p) == math.ceil(math.log(y) / params.log_p)


def residual_exponent(params) -> float:
    """``beta = log_p(1 - delta)`` with ``delta = min(p, q)``."""
    params = as_params(params)
    return math.log(1.0 - params.delta) / params.log_p


def _gamma2_cdf(s):
    return gammainc(2.0, s)


def _gamma2_sf(s):
    return (1.0 + s) * np.exp(-s)


def _ceil_log_law(params: SplitParams, shift: float, tol: float):
    """Support and probabilities of ``ceil(log_p t2 - shift)``."""
    # ceil(...) = k  <=>  p^(k+shift) <= t2 < p^(k-1+shift)
    lp = params.log_p
    k_lo = math.floor(math.log(60.0) / lp - shift) - 1
    k_hi = k_lo + 8
    while True:
        ks = np.arange(k_lo, k_hi + 1)
        lo = params.p ** (ks + shift)
        hi = params.p ** (ks - 1 + shift)
        probs = _gamma2_cdf(hi) - _gamma2_cdf(lo)
        if abs(ks[-1]) * _gamma2_cdf(lo[-1]) < tol * 1e-2:
            return ks, probs
        k_hi += 64


def const_term(params, tol: float = 1e-15) -> float:
    """``E ceil(log_p t2)`` for ``t2`` the sum of two unit exponentials."""
    params = as_params(params)
    ks, probs = _ceil_log_law(params, 0.0, tol)
    return math.fsum((ks * probs).tolist())


def const_term_mass(params, tol: float = 1e-15) -> float:
    """Total probability of the law behind :func:`const_term` (telescopes to 1)."""
    _, probs = _ceil_log_law(as_params(params), 0.0, tol)
    return math.fsum(probs.tolist())


def ceiling_offset(z: float, params, tol: float = 1e-15) -> float:
    """``E ceil(log_p t2 - z) - (E ceil(log_p t2) - z)``.

    Vanishes for integer ``z``; a one-periodic function otherwise.
    """
    params = as_params(params)
    ks, probs = _ceil_log_law(params, frac(z), tol)
    shifted = math.fsum((ks * probs).tolist()) - math.floor(z)
    return shifted - (const_term(params, tol) - z)


# -- the oscillation F -------------------------------------------------------

@dataclass(frozen=True)
class QuadConfig:
    tol: float = 1e-14
    y_max: Optional[float] = None
    method: str = "quad"  # "quad" (adaptive Gauss-Kronrod panels) or "exact"


def _y_max(tol: float) -> float:
    # Gamma(2, 1) tail (1 + y) e^-y below tol
    y = 1.0
    while (1.0 + y) * math.exp(-y) > tol * 1e-2:
        y += 1.0
    return y


def f_integrand(y, z: float, params):
    """``y (1 - p^(1-u)) ceil(log_p rho(u) + u) e^(-y)``, the integrand of ``F(z)``."""
    params = as_params(params)
    y = np.asarray(y, dtype=float)
    return y * np.exp(-y) * f_factor(y, z, params)


def f_factor(y, z: float, params):
    """``(1 - p^(1-u)) ceil(log_p rho(u) + u)`` with ``u = frac(log_p y - z)``.

    ``y e^(-y)`` is the Gamma(2, 1) density, so ``F(z) = E f_factor(t2, z)``.
    """
    params = as_params(params)
    s = np.log(np.asarray(y, dtype=float)) / params.log_p - z
    u = s - np.floor(s)
    one_minus = 1.0 - params.p ** (1.0 - u)
    with np.errstate(divide="ignore"):
        g = np.log(one_minus / params.q) / params.log_p + u
    ceil = np.where(one_minus > 0, np.ceil(g), 0.0)
    return one_minus * ceil


def jump_levels(params, tol: float) -> np.ndarray:
    """``u_j = log_p(p + q p^j)`` for ``j = 0..J`` where the ceiling steps to ``j + 1``."""
    params = as_params(params)
    p, q = params.p, params.q
    J = 1
    while (J + 2) * p**J > tol * 1e-3:
        J += 1
    j = np.arange(J + 1)
    return np.log(p + q * p**j) / params.log_p


def f_breakpoints(z: float, params, tol: float = 1e-14, y_max: Optional[float] = None):
    """Panels ``(a, b, j, c)`` on which the integrand is ``j (y - c) e^-y``."""
    params = as_params(params)
    z = frac(z)
    y_max = y_max or _y_max(tol)
    y_min = math.sqrt(tol) * 1e-2
    lp = params.log_p
    us = jump_levels(params, tol)
    m_lo = math.floor(math.log(y_max) / lp - z) - 1
    m_hi = math.ceil(math.log(y_min) / lp - z) + 1
    panels = []
    for m in range(m_lo, m_hi + 1):
        c = params.p ** (m + 1 + z)
        ys = params.p ** (m + z + us)  # decreasing in j
        for j in range(1, len(us)):
            a, b = ys[j], ys[j - 1]
            a, b = max(a, y_min), min(b, y_max)
            if a >= b:
                # outside the range, or collapsed where the u_j pile up near 1
                continue
            panels.append((a, b, j, c))
    return panels


def _panel_exact(a: float, b: float, c: float) -> float:
    # int_a^b (y - c) e^-y dy
    return (a - c + 1.0) * math.exp(-a) - (b - c + 1.0) * math.exp(-b)


def big_F(z: float, params, quad_config: Optional[QuadConfig] = None) -> float:
    """Periodic oscillation ``F(z)``; depends on ``z`` only through ``frac(z)``."""
    params = as_params(params)
    cfg = quad_config or QuadConfig()
    panels = f_breakpoints(z, params, cfg.tol, cfg.y_max)
    if cfg.method == "exact":
        return math.fsum(j * _panel_exact(a, b, c) for a, b, j, c in panels)
    if cfg.method != "quad":
        raise ValueError(f"unknown method {cfg.method!r}")
    zf = frac(z)
    pieces = []
    for a, b, j, c in panels:
        if b - a < 1e-9 * b:
            # sliver near an accumulation point: rounding in frac() would
            # misplace the nodes, and the panel weighs < 1e-9 anyway
            mid = 0.5 * (a + b)
            pieces.append(j * (mid - c) * math.exp(-mid) * (b - a))
            continue
        # generic integrand; Gauss-Kronrod nodes never touch panel ends
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                val, err = integrate.quad(
                    lambda y: float(f_integrand(y, zf, params)), a, b,
                    epsabs=cfg.tol * 1e-2, epsrel=1e-13, limit=50,
                )
            except integrate.IntegrationWarning as exc:
                raise QuadratureError(
                    f"panel [{a:.6g}, {b:.6g}] did not converge: {exc}",
                    [pp[:2] for pp in panels],
                ) from exc
        if err > max(cfg.tol, 1e-12 * abs(val)):
            raise QuadratureError(
                f"panel [{a:.6g}, {b:.6g}] error estimate {err:.3g}",
                [pp[:2] for pp in panels],
            )
        pieces.append(val)
    return math.fsum(pieces)


@dataclass(frozen=True)
class AsymptoticDecomposition:
    n: int
    p: float
    leading: float
    constant: float
    oscillation: float
    exact: Optional[float]
    beta: float

    @property
    def predicted(self) -> float:
        return self.leading + self.constant + self.oscillation

    @property
    def residual(self) -> Optional[float]:
        return None if self.exact is None else self.exact - self.predicted

    @property
    def scaled_residual(self) -> Optional[float]:
        r = self.residual
        return None if r is None else r * self.n**self.beta


def asymptotic_mean(n: int, params, exact_cap: int = EXACT_CAP,
                    quad_config: Optional[QuadConfig] = None) -> AsymptoticDecomposition:
    if n < 2:
        raise ValueError("n must be >= 2")
    params = as_params(params)
    z = math.log(n) / params.log_p
    return AsymptoticDecomposition(
        n=n,
        p=params.p,
        leading=-z,
        constant=const_term(params),
        oscillation=big_F(z, params, quad_config),
        exact=exact_mean(n, params) if n <= exact_cap else None,
        beta=residual_exponent(params),
    )


# -- deterministic part of the hitting-time sum -------------------------------

@dataclass(frozen=True)
class LemmaTerms:
    """Closed-form pieces of ``E sum_{i < tau(x, y)} 1 / pi_i``.

    ``first = ceil(log_p y)``; ``second`` is the count gated by :func:`omega_indicator`,
    ``ceil(log_p(rho y)) - floor(log_p y)``; the remainder is carried by chains
    with ``gamma_0 = floor(log_p y)`` and ``gamma_1 = second_jump``, summed
    from index ``second_jump + 1``.
    """

    first: int
    second: int
    omega: bool
    first_jump: int
    second_jump: int

    @property
    def deterministic(self) -> int:
        return self.first + (self.second if self.omega else 0)


def lemma_terms(x: float, y: float, params) -> LemmaTerms:
    if not (0.0 < x < y < 1.0):
        raise ValueError("need 0 < x < y < 1")
    params = as_params(params)
    ly = math.log(y) / params.log_p
    ky = math.ceil(math.log(rho(ly, params) * y) / params.log_p)
    return LemmaTerms(
        first=math.ceil(ly),
        second=ky - math.floor(ly),
        omega=omega_indicator(x, y, params),
        first_jump=math.floor(ly),
        second_jump=ky,
    )
