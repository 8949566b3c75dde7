import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import many_params
from ncbm.behavior import BehaviorParams
from ncbm.errors import DivisionByZero
from ncbm.estimation import (FEASIBILITY_EPS, TrafficRecord, ZeroConsumptionRate,
                             aggregate_records, estimate_params, lifetime, project_feasible,
                             synthetic_record)


def record(fwd=80, rcv=100, remaining=100, rate=2, initial=200, recoveries=(4,), node="n1", interval=0):
    return TrafficRecord(node, interval, fwd, rcv, remaining, rate, initial, recoveries)


@pytest.mark.parametrize("remaining, rate, eta, l_bar, t_selfish", [
    (100, 2, 10, 50, 45),
    (0, 2, 10, 0, 0),
    (100, 2, 2, 50, 25),
])
def test_lifetime(remaining, rate, eta, l_bar, t_selfish):
    stats = lifetime(record(remaining=remaining, rate=rate), eta)
    assert stats.avg_lifetime == pytest.approx(l_bar)
    assert stats.t_selfish == pytest.approx(t_selfish)


def test_lifetime_zero_rate():
    with pytest.raises(ZeroConsumptionRate):
        lifetime(record(rate=0), 10)


def test_estimate_example():
    est = estimate_params(record(), eta=10)
    assert est.raw["b"] == pytest.approx(0.8)
    assert est.raw["c"] == pytest.approx(1.25)
    assert est.raw["d"] == pytest.approx(0.8 / 180)
    assert est.raw["a"] == pytest.approx((10 / 9) / 50)
    assert est.raw["e"] == pytest.approx(0.25)
    assert "c_clamped" in est.flags
    assert est.params is not None


def test_estimate_symmetric_counts():
    est = estimate_params(record(fwd=100, rcv=100), eta=10)
    assert est.raw["b"] == est.raw["c"] == 1.0
    assert est.raw["d"] == pytest.approx(0.005)


def test_never_failed_node_gets_e_zero():
    est = estimate_params(record(recoveries=()), eta=10)
    assert est.raw["e"] == 0.0
    assert "no_recovery_observed" in est.flags


@pytest.mark.parametrize("kwargs, parameter", [
    (dict(remaining=0), "a"),
    (dict(rate=0), "a"),
    (dict(rcv=0), "b"),
    (dict(fwd=0), "c"),
    (dict(recoveries=(0.0, 0.0)), "e"),
])
def test_division_by_zero_named(kwargs, parameter):
    with pytest.raises(DivisionByZero) as exc:
        estimate_params(record(**kwargs), eta=10)
    assert exc.value.parameter == parameter


def test_nonstrict_flags_instead_of_raising():
    est = estimate_params(record(fwd=0, rcv=0), eta=10, strict=False)
    assert math.isnan(est.raw["b"]) and math.isnan(est.raw["c"]) and math.isnan(est.raw["d"])
    assert {"b_div_by_zero", "c_div_by_zero", "d_div_by_zero"} <= set(est.flags)
    assert est.params is None


def test_b_times_c_is_one():
    rng = np.random.default_rng(3)
    for _ in range(200):
        fwd, rcv = rng.integers(1, 10_000, size=2)
        est = estimate_params(record(fwd=fwd, rcv=rcv), eta=10)
        assert est.raw["b"] * est.raw["c"] == pytest.approx(1.0, rel=1e-15)


def test_a_monotone_in_lifetime_and_eta():
    a_by_life = [estimate_params(record(remaining=r), eta=5).raw["a"] for r in (10, 20, 50, 100, 150)]
    assert all(x > y for x, y in zip(a_by_life, a_by_life[1:]))
    a_by_eta = [estimate_params(record(), eta=eta).raw["a"] for eta in (1.5, 2, 5, 10, 100)]
    assert all(x > y for x, y in zip(a_by_eta, a_by_eta[1:]))


def test_round_trip_synthetic_logs():
    for k, params in enumerate(many_params(1000, seed=99, interior=True)):
        rec = synthetic_record(params.a, params.b, params.d, params.e, params.eta, node_id=k)
        est = estimate_params(rec, params.eta)
        for name, expected in (("a", params.a), ("b", params.b), ("d", params.d), ("e", params.e),
                               ("c", 1.0 / params.b)):
            assert est.raw[name] == pytest.approx(expected, rel=1e-9)


def test_aggregate_records_sums_counts_and_takes_last_energy():
    recs = [
        record(fwd=10, rcv=20, remaining=90, interval=1, recoveries=(2,)),
        record(fwd=5, rcv=5, remaining=100, interval=0, recoveries=()),
        record(fwd=1, rcv=1, remaining=50, node="n2"),
        record(fwd=30, rcv=40, remaining=80, interval=2, recoveries=(4, 6)),
    ]
    merged = aggregate_records(recs)
    assert [r.node_id for r in merged] == ["n1", "n2"]
    n1 = merged[0]
    assert (n1.pkts_forwarded, n1.pkts_received, n1.remaining_power) == (45, 65, 80)
    assert n1.recovery_durations == (2.0, 4.0, 6.0)


def test_record_validation():
    with pytest.raises(ValueError):
        record(fwd=-1)
    with pytest.raises(ValueError):
        record(remaining=300, initial=200)


def test_project_feasible_identity_on_feasible():
    raw = dict(a=0.1, b=0.2, c=0.05, d=0.05, e=0.3)
    params, adjustments = project_feasible(raw)
    assert params.as_tuple() == (0.1, 0.2, 0.05, 0.05, 0.3)
    assert adjustments == []
    params, adjustments = project_feasible(dict(a=0, b=0, c=0, d=0, e=0.7))
    assert params.as_tuple() == (0, 0, 0, 0, 0.7) and adjustments == []


def test_project_feasible_clamps_then_scales_row_w():
    raw = dict(a=0.02, b=0.0, c=1.25, d=0.004, e=0.0)
    params, adjustments = project_feasible(raw)
    scale = (1 - FEASIBILITY_EPS) / 1.024
    assert params.c == pytest.approx(scale, rel=1e-12)
    assert params.a == pytest.approx(0.02 * scale, rel=1e-12)
    assert params.d == pytest.approx(0.004 * scale, rel=1e-12)
    assert ("c", 1.25, 1.0, "clamped to [0, 1]") in adjustments
    assert {adj.reason for adj in adjustments} == {"clamped to [0, 1]", "row W scaled"}
    # re-validation oracle
    BehaviorParams(*params.as_tuple())


raw_values = st.floats(0, 5, allow_nan=False)


@given(raw_values, raw_values, raw_values, raw_values, raw_values)
def test_project_feasible_valid_and_idempotent(a, b, c, d, e):
    params, _ = project_feasible(dict(a=a, b=b, c=c, d=d, e=e))
    BehaviorParams(*params.as_tuple(), eta=params.eta)
    again, adjustments = project_feasible(dict(zip("abcde", params.as_tuple())))
    assert again == params
    assert adjustments == []
