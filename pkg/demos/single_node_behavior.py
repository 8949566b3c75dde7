"""
Single-node behavior model
==========================

Build the four-state transition matrix of one node, look at its stationary
vector, then compare the analytic limiting distribution with a Monte Carlo
estimate from simulated trajectories.
"""

import numpy as np

from ncbm import BehaviorParams, build_tpm, classify_status
from ncbm.errors import Unclassifiable
from ncbm.smp import (SojournSpec, limiting_distribution, occupancy_estimate,
                      simulate_many, transient_occupancy)

np.set_printoptions(precision=4, suppress=True)

# %%
# A mostly cooperative node that occasionally drops, injects or fails
params = BehaviorParams(a=0.1, b=0.2, c=0.05, d=0.05, e=0.3)
p = build_tpm(params)
print("transition matrix (rows W D I L):")
print(p)
try:
    print("status:", classify_status(*params.as_tuple()))
except Unclassifiable as exc:
    # mild misbehavior falls between the status thresholds
    print(exc)

# %%
# Embedded-chain stationary vector and time-weighted limiting distribution.
# Sojourns in W last twice as long as anywhere else.
means = np.ones((4, 4))
means[0, :] = 2.0
ss = limiting_distribution(p, SojournSpec(means))
print("pi       :", ss.pi)
print("limiting :", ss.limiting)

# %%
# How fast does a node started in W approach steady state?
for n in (1, 5, 20, 100):
    print(n, transient_occupancy(p, "W", n))

# %%
# Simulate 100 trajectories long enough for 10^4 mean sojourns
runs = simulate_many(p, SojournSpec(means), "W", 1e4 * ss.mean_jump_time, 100, seed=7)
est = occupancy_estimate(runs)
print("simulated:", est.occupancy)
print("stderr   :", est.stderr)
print("max abs error:", np.max(np.abs(est.occupancy - ss.limiting)))
