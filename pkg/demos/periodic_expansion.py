"""
Leading term, constant and oscillation of the mean cost
=======================================================

The mean is split as -log_p(n) + E ceil(log_p t2) + F(log_p n) + R(n). This
script prints F over one period and the remainder R(n) against the exact
table. The remainder settles near 0.18 at p = 1/2 instead of vanishing; see
the README for the discussion.
"""

import numpy as np

from leader_election import asymptotic_mean, big_F, const_term

for p in (0.2, 0.5):
    zs = np.linspace(0, 1, 6)
    vals = ", ".join(f"{big_F(z, p):.6f}" for z in zs)
    print(f"p={p}: constant {const_term(p):+.6f}; F over one period: {vals}")

print("\n     n   predicted      exact   residual")
for n in (64, 256, 1024, 4096):
    d = asymptotic_mean(n, 0.5)
    print(f"{n:6d}  {d.predicted:10.6f} {d.exact:10.6f} {d.residual:+.6f}")
