"""
Replaying an election, round by round
=====================================

Four stations A-D contend for leadership. Every round each remaining
candidate flips a biased coin and the 1-flippers transmit.
"""

from leader_election import SplitParams, run_election
from leader_election.protocol import station_labels
from leader_election.streams import trial_rng

params = SplitParams(0.5)
labels = station_labels(4)

# A fixed flip script: A, B, C flip 1 and D flips 0, then a silent round,
# then only A transmits.
trace = run_election(4, params, script="1110,000,1000")

for t, r in enumerate(trace.rounds, start=1):
    names = lambda ids: "".join(labels[i] for i in ids) or "-"
    print(f"t={t}  active={names(r.active):5s} non-active={names(r.non_active):5s} "
          f"eliminated={names(r.eliminated):5s} -> {r.feedback.kind.value}")

print(f"leader {labels[trace.leader]}; {trace.coin_flip_rounds} coin-flip rounds, "
      f"{trace.time_units} time units including the initial slot")

# %%
# The same protocol with random flips. The generator is tied to a trial
# index, so trial 3 can be rerun on its own.
random_trace = run_election(12, SplitParams(0.3), rng=trial_rng(1, 3))
print(f"n=12, p=0.3: leader {random_trace.leader} after {random_trace.coin_flip_rounds} rounds")
