"""Survivability sweeps over the four misbehavior scenarios.

Survivability is the probability that a group of m nodes is still entirely
cooperative after a fixed number of embedded jumps, starting from all-W.
Two readings are computed side by side:

* cluster: state S0 of the composed m-member cluster chain;
* independent: the single-node W occupancy raised to the m-th power.

The steady state is useless here because every scenario makes some state
absorbing, hence the finite horizon.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .behavior import BehaviorParams, BehaviorState, build_tpm
from .correlation import compose_matrices
from .errors import InfeasibleGrid
from .smp import transient_occupancy

DEFAULT_NODE_COUNTS = (5, 15, 25, 50)
DEFAULT_GRID = 50
DEFAULT_HORIZON = 100


class Scenario(str, enum.Enum):
    FORWARDING = "forwarding"
    DROPPING = "dropping"
    INJECTION = "injection"
    LOSS = "loss"

    @property
    def swept(self) -> str:
        return _SWEPT[self]

    @property
    def forced_zero(self) -> tuple[str, ...]:
        return _FORCED_ZERO[self]

    @property
    def increasing(self) -> bool:
        """True if survivability should grow with the swept parameter."""
        return self is Scenario.FORWARDING


class Metric(str, enum.Enum):
    CLUSTER = "cluster"
    INDEPENDENT = "independent"
    BOTH = "both"


_SWEPT = {
    Scenario.FORWARDING: "b",
    Scenario.DROPPING: "a",
    Scenario.INJECTION: "c",
    Scenario.LOSS: "d",
}

_FORCED_ZERO = {
    Scenario.FORWARDING: ("c", "d", "e"),
    Scenario.DROPPING: ("c", "d", "e"),
    Scenario.INJECTION: ("a", "d"),
    Scenario.LOSS: ("a", "c"),
}

# b never matters once a = 0 (D is unreachable from W), so injection and loss
# keep it at 0 to open the full [0, 1] range for the swept parameter.
_DEFAULT_TEMPLATES = {
    Scenario.FORWARDING: BehaviorParams(a=0.2, b=0.0, c=0.0, d=0.0, e=0.0),
    Scenario.DROPPING: BehaviorParams(a=0.0, b=0.3, c=0.0, d=0.0, e=0.0),
    Scenario.INJECTION: BehaviorParams(a=0.0, b=0.0, c=0.0, d=0.0, e=0.0),
    Scenario.LOSS: BehaviorParams(a=0.0, b=0.0, c=0.0, d=0.0, e=0.0),
}


def default_template(scenario) -> BehaviorParams:
    return _DEFAULT_TEMPLATES[Scenario(scenario)]


def scenario_params(scenario, value: float, template: BehaviorParams | None = None) -> BehaviorParams:
    """Template with the scenario's forced zeros applied and the swept parameter set to ``value``."""
    scenario = Scenario(scenario)
    template = template or default_template(scenario)
    changes = {name: 0.0 for name in scenario.forced_zero}
    changes[scenario.swept] = value
    return template.replace(**changes)


def sweep_upper_bound(scenario, template: BehaviorParams | None = None) -> float:
    """Largest swept value that keeps both constrained rows of the matrix stochastic."""
    scenario = Scenario(scenario)
    base = scenario_params(scenario, 0.0, template)
    a, b, c, d = base.a, base.b, base.c, base.d
    bounds = {
        "a": 1.0 - c - d,
        "b": 1.0 - c - d,
        "c": min(1.0 - a - d, 1.0 - b - d),
        "d": min(1.0 - a - c, 1.0 - b - c),
    }
    return min(1.0, bounds[scenario.swept])


def survivability(params: BehaviorParams, m: int, horizon_steps: int = DEFAULT_HORIZON,
                  metric=Metric.BOTH):
    """Probability that all m nodes are still forwarding after ``horizon_steps`` jumps.

    Returns a float for a single metric, or ``(cluster, independent)`` for
    ``Metric.BOTH``.
    """
    metric = Metric(metric)
    if m < 1:
        raise ValueError("m must be >= 1")
    tpm = build_tpm(params)
    cluster = independent = None
    if metric in (Metric.CLUSTER, Metric.BOTH):
        q = compose_matrices([tpm] * m)
        cluster = _clip01(transient_occupancy(q, BehaviorState.W, horizon_steps)[0])
    if metric in (Metric.INDEPENDENT, Metric.BOTH):
        single = transient_occupancy(tpm, BehaviorState.W, horizon_steps)[0]
        independent = _clip01(single) ** m
    if metric is Metric.CLUSTER:
        return cluster
    if metric is Metric.INDEPENDENT:
        return independent
    return cluster, independent


def _clip01(x: float) -> float:
    # matrix powers can drift by a few ulps outside [0, 1]
    return float(min(max(x, 0.0), 1.0))


@dataclass(frozen=True)
class SweepConfig:
    scenario: Scenario
    node_counts: tuple[int, ...] = DEFAULT_NODE_COUNTS
    grid: int = DEFAULT_GRID
    fixed_params: BehaviorParams | None = None
    horizon_steps: int = DEFAULT_HORIZON
    metric: Metric = Metric.BOTH

    def __post_init__(self):
        object.__setattr__(self, "scenario", Scenario(self.scenario))
        object.__setattr__(self, "metric", Metric(self.metric))
        object.__setattr__(self, "node_counts", tuple(int(m) for m in self.node_counts))
        if self.grid < 2:
            raise ValueError("grid must have at least 2 points")
        if not self.node_counts or min(self.node_counts) < 1:
            raise ValueError("node_counts must be a nonempty list of positive integers")
        if self.horizon_steps < 0:
            raise ValueError("horizon_steps must be >= 0")
        if self.fixed_params is None:
            object.__setattr__(self, "fixed_params", default_template(self.scenario))
        # the swept value 0 must be admissible once forced zeros are applied
        object.__setattr__(self, "fixed_params", scenario_params(self.scenario, 0.0, self.fixed_params))


@dataclass(frozen=True)
class SweepRow:
    scenario: str
    m: int
    param_name: str
    param_value: float
    surv_cluster: float | None
    surv_independent: float | None
    horizon_steps: int


@dataclass(frozen=True)
class SweepResult:
    config: SweepConfig
    rows: tuple[SweepRow, ...] = field(default=())

    def curve(self, m: int, metric="cluster") -> tuple[np.ndarray, np.ndarray]:
        attr = "surv_cluster" if Metric(metric) is Metric.CLUSTER else "surv_independent"
        sel = [r for r in self.rows if r.m == m]
        return (np.array([r.param_value for r in sel]),
                np.array([getattr(r, attr) for r in sel], dtype=float))


def sweep_values(config: SweepConfig) -> np.ndarray:
    upper = sweep_upper_bound(config.scenario, config.fixed_params)
    if not upper > 0:
        raise InfeasibleGrid(
            f"{config.scenario.value}: fixed parameters leave no room to sweep "
            f"{config.scenario.swept} (upper bound {upper})"
        )
    return np.linspace(0.0, upper, config.grid)


def run_sweep(config: SweepConfig) -> SweepResult:
    """Evaluate survivability on every (node count, grid point); node count major."""
    values = sweep_values(config)
    name = config.scenario.swept
    metric = config.metric
    rows = []
    for m in config.node_counts:
        for v in values:
            params = config.fixed_params.replace(**{name: float(v)})
            cluster = independent = None
            if metric is Metric.BOTH:
                cluster, independent = survivability(params, m, config.horizon_steps, metric)
            elif metric is Metric.CLUSTER:
                cluster = survivability(params, m, config.horizon_steps, metric)
            else:
                independent = survivability(params, m, config.horizon_steps, metric)
            rows.append(SweepRow(config.scenario.value, m, name, float(v), cluster, independent,
                                 config.horizon_steps))
    return SweepResult(config, tuple(rows))
