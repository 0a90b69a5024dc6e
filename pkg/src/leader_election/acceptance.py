"""End-to-end acceptance checks.

Each check returns a :class:`CheckResult`; the CLI ``crossval`` command and the
test suite both run them. Tolerances are fixed here and never adapted to the
outcome; the seed defaults to 1 everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import streams
from .asymptotics import asymptotic_mean, big_F, f_factor, residual_exponent
from .exact import (
    exact_cdf_dp,
    exact_mean,
    poisson_mixture,
    poisson_transform_fixpoint,
    poisson_transform_series,
    survival_table,
    tail_sum_mean,
)
from .intervals import cdf_exact, poisson_cdf
from .montecarlo import (
    default_xgrid,
    estimate,
    mc_conjecture,
    mc_lemma_check,
    mc_mean_cost_via_tau,
    mc_protocol_mean,
)
from .protocol import run_election
from .splitchain import SplitParams

DEFAULT_SEED = 1


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    summary: str
    details: list[str] = field(default_factory=list)

    def line(self) -> str:
        return f"criterion {self.number} [{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.summary}"


def check_trace_replay(**_) -> CheckResult:
    tr = run_election(4, SplitParams(0.5), script="1110,000,1000")
    ok = tr.leader == 0 and tr.time_units == 4 and tr.coin_flip_rounds == 3
    return CheckResult(1, "scripted replay", ok,
                       f"leader={'ABCD'[tr.leader]} time_units={tr.time_units} "
                       f"coin_flip_rounds={tr.coin_flip_rounds}")


def check_triple_agreement(seed: int = DEFAULT_SEED, trials: int = 10**5, workers: int = 1, **_) -> CheckResult:
    details, worst, ok = [], 0.0, True
    for p in (0.2, 0.5, 0.8):
        for n in (2, 5, 10, 20, 50):
            exact = exact_mean(n, p)
            prot = mc_protocol_mean(n, p, trials, seed, workers=workers)
            tau = mc_mean_cost_via_tau(n, p, trials, seed, workers=workers)
            z = [
                prot.zscore(exact),
                tau.zscore(exact),
                (prot.value - tau.value) / math.hypot(prot.stderr, tau.stderr),
            ]
            clean = prot.truncated_count == 0 and tau.truncated_count == 0
            good = clean and all(abs(v) <= 3.0 for v in z)
            ok &= good
            worst = max(worst, max(abs(v) for v in z))
            details.append(
                f"p={p} n={n} exact={exact:.6f} protocol={prot.value:.6f}±{prot.stderr:.4f} "
                f"tau={tau.value:.6f}±{tau.stderr:.4f} z=({z[0]:+.2f},{z[1]:+.2f},{z[2]:+.2f}) "
                f"{'ok' if good else 'MISMATCH'}"
            )
    return CheckResult(2, "three-way mean agreement", ok, f"max |z| = {worst:.2f} (limit 3)", details)


def check_interval_identity(**_) -> CheckResult:
    worst = 0.0
    for p in (0.2, 0.5, 0.8):
        surv = survival_table(30, 15, p)
        for n in range(2, 31):
            for k in range(16):
                worst = max(worst, abs(cdf_exact(n, k, p) - (1.0 - surv[n, k])))
    return CheckResult(3, "interval cdf = recurrence cdf", worst <= 1e-10,
                       f"max diff {worst:.2e} (limit 1e-10)")


def check_poisson(**_) -> CheckResult:
    worst_h, worst_c = 0.0, 0.0
    for p in (0.3, 0.5, 0.7):
        for x in (1.0, 5.0, 10.0):
            d = abs(poisson_transform_series(x, p) - poisson_transform_fixpoint(x, p))
            worst_h = max(worst_h, d)
        for x in (1.0, 3.0, 10.0):
            N = int(x + 40 * math.sqrt(x) + 40)
            surv = survival_table(N, 15, p)
            for k in range(16):
                values = 1.0 - surv[:, k]
                worst_c = max(worst_c, abs(poisson_cdf(x, k, p) - poisson_mixture(x, values)))
    ok = worst_h <= 1e-8 and worst_c <= 1e-8
    return CheckResult(4, "Poisson consistency", ok,
                       f"transform diff {worst_h:.2e}, cdf diff {worst_c:.2e} (limit 1e-8)")


def check_lemma(seed: int = DEFAULT_SEED, trials: int = 10**5, workers: int = 1, **_) -> CheckResult:
    details, ok, worst = [], True, 0.0
    for p in (0.3, 0.5, 0.7):
        for x, y in ((0.3, 0.35), (0.1, 0.9), (0.55, 0.6)):
            c = mc_lemma_check(x, y, p, trials, seed, workers=workers)
            good = c.agrees(3.0) and c.diff.truncated_count == 0
            z = c.diff.zscore(0.0)
            worst = max(worst, abs(z))
            ok &= good
            details.append(
                f"p={p} (x,y)=({x},{y}) lhs={c.lhs.value:.5f} rhs={c.rhs.value:.5f} "
                f"diff={c.diff.value:+.5f}±{c.diff.stderr:.5f} "
                f"(independent se {c.independent_stderr:.5f}) {'ok' if good else 'MISMATCH'}"
            )
    return CheckResult(5, "hitting-time decomposition", ok, f"max |z| = {worst:.2f} (limit 3)", details)


def _no_growth(values_low, values_high, factor: float = 2.0) -> bool:
    return max(values_high) <= factor * max(values_low)


def _envelope(n: int, params: SplitParams, points: int = 8) -> float:
    # max |residual| over one period of log_p n ending at n
    ms = sorted({max(2, int(round(n * params.p ** (t / (points - 1))))) for t in range(points)})
    return max(abs(asymptotic_mean(m, params).residual) for m in ms)


def check_residual(**_) -> CheckResult:
    details = []
    half = SplitParams(0.5)
    res = {m: asymptotic_mean(2**m, half).residual for m in range(6, 13)}
    scaled = {m: abs(r) * 2**m for m, r in res.items()}
    r64, r4096 = abs(res[6]), abs(res[12])
    a = r4096 <= 0.05
    b = r4096 <= 0.5 * r64
    c = _no_growth([scaled[m] for m in (6, 7, 8)], [scaled[m] for m in (10, 11, 12)])
    details.append("p=0.5 residuals: " + ", ".join(f"n=2^{m}: {r:+.5f}" for m, r in res.items()))
    details.append(f"p=0.5 |R(4096)| <= 0.05: {a}; |R(4096)| <= |R(64)|/2: {b}; R(n)*n no growth: {c}")

    low = SplitParams(0.2)
    beta = residual_exponent(low)
    env = {n: _envelope(n, low) for n in (100, 1000, 10_000)}
    d = env[1000] <= env[100] * (1 + 1e-12) and env[10_000] <= env[1000] * (1 + 1e-12)
    e = _no_growth([env[100] * 100**beta], [env[10_000] * 10_000**beta])
    details.append("p=0.2 envelopes: " + ", ".join(f"n={n}: {v:.5f}" for n, v in env.items()))
    details.append(f"p=0.2 envelope non-increasing: {d}; envelope*n^beta bounded: {e}")
    ok = a and b and c and d and e
    return CheckResult(6, "residual decay", ok,
                       f"|R(4096)|={r4096:.4f} at p=0.5, |R(64)|={r64:.4f}; "
                       f"p=0.2 envelope {env[100]:.4f} -> {env[10_000]:.4f}", details)


def check_oscillation(seed: int = DEFAULT_SEED, samples: int = 10**7, **_) -> CheckResult:
    details, ok, worst_period, worst_z = [], True, 0.0, 0.0
    chunk = 10**6
    for i, p in enumerate((0.3, 0.5)):
        params = SplitParams(p)
        for j, z in enumerate((0.1, 0.37, 0.9)):
            F = big_F(z, params)
            worst_period = max(worst_period, abs(big_F(z + 1.0, params) - F))
            parts = []
            for b in range(0, samples, chunk):
                rng = streams.block_rng(seed, b // chunk, f"F-oracle:{p.hex()}:{z!r}")
                parts.append(f_factor(rng.standard_gamma(2.0, min(chunk, samples - b)), z, params))
            est = estimate(np.concatenate(parts), seed)
            zs = est.zscore(F)
            worst_z = max(worst_z, abs(zs))
            details.append(f"p={p} z={z} F={F:.8f} oracle={est.value:.8f}±{est.stderr:.2e} z={zs:+.2f}")
    ok = worst_period <= 1e-8 and worst_z <= 3.0
    return CheckResult(7, "oscillation F", ok,
                       f"period error {worst_period:.1e} (limit 1e-8), oracle max |z| {worst_z:.2f}", details)


def check_conjecture(seed: int = DEFAULT_SEED, trials: int = 10**5, workers: int = 1,
                     max_steps: int = 10**6, **_) -> CheckResult:
    pts = mc_conjecture(default_xgrid(), SplitParams(0.5), trials, seed, max_steps, workers)
    finite = all(pt.finite for pt in pts)
    trunc = sum(pt.truncated for pt in pts)
    best = max(pts, key=lambda pt: pt.log10_moment)
    interior = best.x not in (pts[0].x, pts[-1].x) and 0.35 <= best.x <= 0.65
    bound = max(pt.mean_tau.value + 3 * pt.mean_tau.stderr for pt in pts)
    ok = finite and trunc == 0 and interior and bound < 23.25
    details = [
        f"x={pt.x:.2f} log10 E4^tau={pt.log10_moment:.3f} top_share={pt.top_share:.2f} "
        f"E tau={pt.mean_tau.value:.4f}±{pt.mean_tau.stderr:.4f} max tau={pt.max_tau}"
        for pt in pts
    ]
    details.append(f"finite: {finite}; truncations: {trunc}; argmax x={best.x} in [0.35, 0.65]: {interior}; "
                   f"max E tau + 3se = {bound:.3f} < 23.25: {bound < 23.25}")
    return CheckResult(8, "exponential moment study", ok,
                       f"argmax x={best.x}, truncations={trunc}, max E tau+3se={bound:.3f}", details)


def check_tail_sum(**_) -> CheckResult:
    worst = 0.0
    for p in (0.2, 0.5, 0.8):
        for n in range(51):
            worst = max(worst, abs(tail_sum_mean(n, p) - exact_mean(n, p)))
    return CheckResult(9, "tail-sum identity", worst <= 1e-9, f"max diff {worst:.2e} (limit 1e-9)")


CHECKS: dict[int, Callable[..., CheckResult]] = {
    1: check_trace_replay,
    2: check_triple_agreement,
    3: check_interval_identity,
    4: check_poisson,
    5: check_lemma,
    6: check_residual,
    7: check_oscillation,
    8: check_conjecture,
    9: check_tail_sum,
}


def run_checks(which=None, **kwargs) -> list[CheckResult]:
    return [CHECKS[i](**kwargs) for i in sorted(which or CHECKS)]
