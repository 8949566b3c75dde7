"""
Correlated clusters
===================

Compose member chains into one cluster chain and evaluate the correlated
functions u, v, w and x. Clusters become more "sticky" as they grow, because
the entrywise product rewards transitions that every member agrees on.
"""

import numpy as np

from ncbm import BehaviorParams, compose_cluster, correlated_functions
from ncbm.errors import ZeroDenominator

np.set_printoptions(precision=5, suppress=True)

members = [
    BehaviorParams(0.10, 0.20, 0.05, 0.05, 0.30),
    BehaviorParams(0.15, 0.25, 0.05, 0.10, 0.40),
    BehaviorParams(0.05, 0.30, 0.02, 0.03, 0.20),
]

# %%
cluster = compose_cluster(members)
print(cluster.cluster_tpm)
f = correlated_functions(cluster)
print(f"u={f.u:.3e} v={f.v:.3e} w={f.w:.3e} x={f.x:.3e}")

# %%
# The S0 -> S0 entry grows with the number of identical members
for m in range(1, 8):
    q = compose_cluster([members[0]] * m).cluster_tpm
    print(m, q[0, 0])

# %%
# A member that can never leave I drags the whole cluster there, so pi_0 = 0
stuck = BehaviorParams(0.1, 0.2, 0.2, 0.0, 0.3)
try:
    correlated_functions(compose_cluster([stuck, stuck]))
except ZeroDenominator as exc:
    print("singular:", exc)
