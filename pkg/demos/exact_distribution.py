"""
The law of the election cost, computed three ways
=================================================

The mean follows from a recurrence over the number of stations, the
distribution from a dynamic program over (n, k), and the same distribution
again from the base-(p, q) splitting of [0, 1] into 2**k intervals.
"""

import numpy as np

from leader_election import cdf_exact, exact_cdf_dp, exact_mean_table, poisson_cdf, tail_sum_mean
from leader_election.intervals import build_intervals

p = 0.3

table = exact_mean_table(20, p)
print("n   E(H_n)")
for n in (2, 3, 5, 10, 20):
    print(f"{n:<3d} {table[n]:.6f}   tail sum {tail_sum_mean(n, p):.6f}")

# %%
# Level-2 intervals: lengths are products of p and q along the binary digits
# of the index, and their right ends carry the mass of the measure.
d = build_intervals(2, p)
print("lengths", np.round(d.lengths, 4), "rights", np.round(d.rights, 4))

# %%
# P(H_n <= k) from the intervals agrees with the dynamic program to rounding.
n = 10
print(" k   intervals      recurrence     Poisson(x=n)")
for k in range(0, 9):
    print(f"{k:2d}   {cdf_exact(n, k, p):.12f} {exact_cdf_dp(n, k, p):.12f} {poisson_cdf(n, k, p):.6f}")
