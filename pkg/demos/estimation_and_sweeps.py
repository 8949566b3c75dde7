"""
From traffic logs to survivability curves
=========================================

Estimate behavior parameters from per-node traffic counters, then sweep one
parameter of a misbehavior scenario and compare the cluster-chain metric with
the independent-nodes product.
"""

from ncbm.chart import Series, line_chart
from ncbm.estimation import TrafficRecord, estimate_params
from ncbm.scenarios import Metric, SweepConfig, run_sweep

# %%
# Forwarding 80 of 100 received packets, half the battery left
rec = TrafficRecord("n1", 0, pkts_forwarded=80, pkts_received=100, remaining_power=100,
                    power_consumption_rate=2, initial_energy=200, recovery_durations=(4.0,))
est = estimate_params(rec, eta=10)
print("raw      :", {k: round(v, 5) for k, v in est.raw.items()})
print("feasible :", est.params)
print("flags    :", est.flags)
for adj in est.adjustments:
    print("  ", adj)

# %%
# Dropping sweep: survivability of 5..50 nodes after 100 steps
result = run_sweep(SweepConfig("dropping", node_counts=(5, 50), grid=20))
for m in (5, 50):
    x, y = result.curve(m, Metric.INDEPENDENT)
    print(f"m={m}: independent {y[0]:.3g} -> {y[-1]:.3g}")
    _, yc = result.curve(m, Metric.CLUSTER)
    print(f"m={m}: cluster     {yc[0]:.3g} -> {yc[-1]:.3g}")

# %%
series = []
for m in (5, 50):
    for metric, dashed in ((Metric.CLUSTER, False), (Metric.INDEPENDENT, True)):
        x, y = result.curve(m, metric)
        series.append(Series(f"m={m} {metric.value}", x, y, dashed=dashed))
svg = line_chart(series, "dropping", "a", "survivability")
with open("dropping.svg", "w") as fh:
    fh.write(svg)
print("wrote dropping.svg")
