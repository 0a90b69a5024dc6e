"""
How heavy is the tail of the stopping time?
===========================================

Estimate E(4^tau(x, x)) at p = 1/2 over a grid of x. The estimates are
driven by a handful of long chains (top_share close to 1), so the shape of
the curve changes from seed to seed: P(tau >= k) decays like 2^-k while
4^k grows faster, and the moment is infinite.
"""

from leader_election import mc_conjecture
from leader_election.montecarlo import default_xgrid

for seed in (1, 2):
    pts = mc_conjecture(default_xgrid(0.1), 0.5, 20_000, seed=seed)
    best = max(pts, key=lambda pt: pt.log10_moment)
    print(f"seed {seed}: argmax x = {best.x}")
    for pt in pts:
        print(f"  x={pt.x:.1f}  log10 E4^tau={pt.log10_moment:6.2f}  "
              f"top share {pt.top_share:.2f}  E tau={pt.mean_tau.value:.3f}")
