"""Behavior parameters from per-node traffic and energy counters.

    L      = remaining power / power consumption rate     (average lifetime)
    T_self = (1 - 1/eta) * L                             (time to turn selfish)
    a      = eta / (eta - 1) / L
    b      = forwarded / received
    c      = received / forwarded
    d      = b / (forwarded + received)
    e      = 1 / mean(recovery durations)

b and c are reciprocals, so b * c == 1 whenever both exist, and d divides a
probability by a packet count. Both quirks are kept as-is. Raw estimates
routinely fall outside [0, 1] or break the row constraints of the transition
matrix; :func:`project_feasible` repairs them explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import groupby
from typing import NamedTuple, Sequence

from .behavior import ROW_TOL, BehaviorParams
from .errors import DivisionByZero, OutOfRange

PARAM_NAMES = ("a", "b", "c", "d", "e")
FEASIBILITY_EPS = 1e-9


class ZeroConsumptionRate(DivisionByZero):
    def __init__(self):
        super().__init__("lifetime", "power consumption rate is 0")


@dataclass(frozen=True)
class TrafficRecord:
    """Counters reported by one node for one interval."""

    node_id: str
    interval_index: int
    pkts_forwarded: float
    pkts_received: float
    remaining_power: float
    power_consumption_rate: float
    initial_energy: float
    recovery_durations: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "recovery_durations", tuple(float(x) for x in self.recovery_durations))
        if self.interval_index < 0:
            raise ValueError("interval_index must be >= 0")
        if self.pkts_forwarded < 0 or self.pkts_received < 0:
            raise ValueError("packet counts must be >= 0")
        if self.power_consumption_rate < 0:
            raise ValueError("power_consumption_rate must be >= 0")
        if not self.initial_energy > 0:
            raise ValueError("initial_energy must be > 0")
        if not 0 <= self.remaining_power <= self.initial_energy:
            raise ValueError("remaining_power must lie in [0, initial_energy]")
        if any(x < 0 for x in self.recovery_durations):
            raise ValueError("recovery durations must be >= 0")


def aggregate_records(records: Sequence[TrafficRecord]) -> list[TrafficRecord]:
    """Merge multi-interval records into one record per node.

    Counts are summed, the energy snapshot comes from the latest interval and
    recovery durations are concatenated in interval order. Nodes keep their
    order of first appearance.
    """
    order = {}
    for r in records:
        order.setdefault(r.node_id, len(order))
    merged = []
    for node_id, group in groupby(sorted(records, key=lambda r: (order[r.node_id], r.interval_index)),
                                  key=lambda r: r.node_id):
        group = list(group)
        last = group[-1]
        merged.append(TrafficRecord(
            node_id=node_id,
            interval_index=last.interval_index,
            pkts_forwarded=sum(r.pkts_forwarded for r in group),
            pkts_received=sum(r.pkts_received for r in group),
            remaining_power=last.remaining_power,
            power_consumption_rate=last.power_consumption_rate,
            initial_energy=last.initial_energy,
            recovery_durations=tuple(x for r in group for x in r.recovery_durations),
        ))
    return merged


@dataclass(frozen=True)
class LifetimeStats:
    avg_lifetime: float
    t_selfish: float


def lifetime(record: TrafficRecord, eta: float) -> LifetimeStats:
    """Average lifetime and the time at which the node turns selfish."""
    if not eta > 1:
        raise OutOfRange("eta", eta, "(1, inf)")
    if record.power_consumption_rate == 0:
        raise ZeroConsumptionRate()
    avg = record.remaining_power / record.power_consumption_rate
    return LifetimeStats(avg_lifetime=avg, t_selfish=(1.0 - 1.0 / eta) * avg)


class Adjustment(NamedTuple):
    parameter: str
    before: float
    after: float
    reason: str


@dataclass(frozen=True)
class Estimate:
    """Raw estimates plus their feasible projection.

    ``params`` is None when some raw value could not be computed (only in
    non-strict mode).
    """

    node_id: str
    raw: dict
    params: BehaviorParams | None
    lifetime: LifetimeStats | None
    flags: tuple = ()
    adjustments: tuple = field(default=())


def _raw_estimates(record: TrafficRecord, eta: float):
    raw, errors, flags = {}, {}, []
    fwd, rcv = record.pkts_forwarded, record.pkts_received
    stats = None
    try:
        stats = lifetime(record, eta)
        if stats.avg_lifetime == 0:
            raise DivisionByZero("a", "average lifetime is 0")
        raw["a"] = eta / (eta - 1.0) / stats.avg_lifetime
    except DivisionByZero as exc:
        errors["a"] = exc if exc.parameter == "a" else DivisionByZero("a", exc.reason)
    if rcv == 0:
        errors["b"] = DivisionByZero("b", "no packets received")
    else:
        raw["b"] = fwd / rcv
    if fwd == 0:
        errors["c"] = DivisionByZero("c", "no packets forwarded")
    else:
        raw["c"] = rcv / fwd
    if fwd + rcv == 0:
        errors["d"] = DivisionByZero("d", "no packets forwarded or received")
    elif "b" not in raw:
        errors["d"] = DivisionByZero("d", "b is undefined")
    else:
        raw["d"] = raw["b"] / (fwd + rcv)
    if not record.recovery_durations:
        raw["e"] = 0.0
        flags.append("no_recovery_observed")
    else:
        mean_recovery = math.fsum(record.recovery_durations) / len(record.recovery_durations)
        if mean_recovery == 0:
            errors["e"] = DivisionByZero("e", "average recovery time is 0")
        else:
            raw["e"] = 1.0 / mean_recovery
    return raw, errors, flags, stats


def estimate_params(record: TrafficRecord, eta: float, strict: bool = True) -> Estimate:
    """Estimate a..e for one node.

    In strict mode the first zero denominator raises :class:`DivisionByZero`.
    Otherwise undefined parameters come back as NaN with a
    ``<name>_div_by_zero`` flag and no projection.

    Raw values above 1 are flagged ``<name>_clamped``; row rescaling done by
    the projection is flagged ``row_W_scaled`` / ``row_D_scaled``.
    """
    if not eta > 1:
        raise OutOfRange("eta", eta, "(1, inf)")
    raw, errors, flags, stats = _raw_estimates(record, eta)
    if errors and strict:
        raise errors[min(errors, key=PARAM_NAMES.index)]
    for name in PARAM_NAMES:
        if name in errors:
            raw[name] = math.nan
            flags.append(f"{name}_div_by_zero")
    for name in PARAM_NAMES:
        if raw[name] > 1.0:
            flags.append(f"{name}_clamped")
    params, adjustments = None, ()
    if not errors:
        params, adjustments = project_feasible(raw, eta)
        for row in ("W", "D"):
            if any(adj.reason == f"row {row} scaled" for adj in adjustments):
                flags.append(f"row_{row}_scaled")
    raw = {name: raw[name] for name in PARAM_NAMES}
    return Estimate(record.node_id, raw, params, stats, tuple(flags), tuple(adjustments))


def project_feasible(raw, eta: float = 10.0) -> tuple[BehaviorParams, list[Adjustment]]:
    """Map raw estimates onto valid parameters.

    Each value is clamped to [0, 1]. Then, while a row constraint is broken,
    the worse row's triple ((a, c, d) for W, (b, c, d) for D) is scaled down
    to sum to 1 - 1e-9. Feasible input comes back unchanged. Every change is
    listed in the returned adjustments.
    """
    if not isinstance(raw, dict):
        raw = dict(zip(PARAM_NAMES, raw))
    values = {name: float(raw[name]) for name in PARAM_NAMES}
    adjustments = []
    for name in PARAM_NAMES:
        v = values[name]
        if math.isnan(v):
            raise ValueError(f"raw {name} is NaN")
        clamped = min(max(v, 0.0), 1.0)
        if clamped != v:
            adjustments.append(Adjustment(name, v, clamped, "clamped to [0, 1]"))
            values[name] = clamped

    rows = {"W": ("a", "c", "d"), "D": ("b", "c", "d")}
    for _ in range(4):
        sums = {row: sum(values[k] for k in keys) for row, keys in rows.items()}
        worst = max(sums, key=lambda row: sums[row])
        if sums[worst] <= 1.0 + ROW_TOL:
            break
        scale = (1.0 - FEASIBILITY_EPS) / sums[worst]
        for k in rows[worst]:
            before = values[k]
            values[k] = before * scale
            if values[k] != before:
                adjustments.append(Adjustment(k, before, values[k], f"row {worst} scaled"))
    return BehaviorParams(eta=eta, **values), adjustments


def synthetic_record(a, b, d, e, eta, node_id="n0", rate=1.0, interval_index=0) -> TrafficRecord:
    """Build a record whose estimates reproduce the given a, b, d, e exactly.

    Inverts the estimation formulas; c is not free and comes out as 1/b.
    Packet counts are real-valued. Requires a, b, d > 0.
    """
    if not (a > 0 and b > 0 and d > 0):
        raise ValueError("a, b and d must be positive to invert the estimators")
    avg_lifetime = eta / ((eta - 1.0) * a)
    remaining = avg_lifetime * rate
    received = (b / d) / (1.0 + b)
    forwarded = b * received
    recoveries = (1.0 / e,) if e > 0 else ()
    return TrafficRecord(
        node_id=str(node_id),
        interval_index=interval_index,
        pkts_forwarded=forwarded,
        pkts_received=received,
        remaining_power=remaining,
        power_consumption_rate=rate,
        initial_energy=remaining * eta,
        recovery_durations=recoveries,
    )
