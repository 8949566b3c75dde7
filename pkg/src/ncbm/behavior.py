"""Behavior states, parameter validation and the single-node transition matrix.

A node is in one of four observable states: forwarding (W), dropping (D),
injecting (I) or lost (L). Five probabilities drive the embedded jump chain::

        W            D            I      L
    W [ 1-(a+c+d)    a            c      d   ]
    D [ b            1-(b+c+d)    c      d   ]
    I [ 0            0            1-d    d   ]
    L [ e            0            0      1-e ]

An injecting (malicious) node never returns to W or D, and a lost node only
comes back through recovery to W.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import OutOfRange, RowOverflow, Unclassifiable

# Slack on the row constraints; sums produced by feasibility scaling sit at 1 - 1e-9.
ROW_TOL = 1e-12

STRUCTURAL_ZEROS = ((2, 0), (2, 1), (3, 1), (3, 2))


class BehaviorState(enum.IntEnum):
    W = 0  # forward
    D = 1  # drop
    I = 2  # inject  # noqa: E741
    L = 3  # loss

    @classmethod
    def parse(cls, label) -> "BehaviorState":
        if isinstance(label, cls):
            return label
        if isinstance(label, (int, np.integer)):
            return cls(int(label))
        try:
            return cls[str(label).strip().upper()]
        except KeyError:
            raise ValueError(f"unknown behavior state {label!r}") from None


class ClusterState(enum.IntEnum):
    """States of a correlated cluster; S_k is the all-members-in-state-k case."""

    S0 = 0
    S1 = 1
    S2 = 2
    S3 = 3

    @property
    def behavior(self) -> BehaviorState:
        return BehaviorState(int(self))


STATE_LABELS = tuple(s.name for s in BehaviorState)
CLUSTER_LABELS = tuple(s.name for s in ClusterState)


@dataclass(frozen=True)
class BehaviorParams:
    """Transition probabilities of one node plus its selfish threshold.

    Parameters
    ----------
    a : float
        Probability of starting to drop packets (W -> D).
    b : float
        Probability of resuming forwarding (D -> W).
    c : float
        Probability of starting to inject packets.
    d : float
        Probability of being lost (battery, range, malfunction).
    e : float
        Probability of recovering from loss (L -> W).
    eta : float
        Selfish threshold; a node turns selfish below 1/eta of its initial
        energy. Must exceed 1.
    """

    a: float
    b: float
    c: float
    d: float
    e: float
    eta: float = 10.0

    def __post_init__(self):
        for name in ("a", "b", "c", "d", "e"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float, np.floating, np.integer))
                    and math.isfinite(value) and 0.0 <= value <= 1.0):
                raise OutOfRange(name, value)
            object.__setattr__(self, name, float(value))
        if not (math.isfinite(self.eta) and self.eta > 1.0):
            raise OutOfRange("eta", self.eta, "(1, inf)")
        object.__setattr__(self, "eta", float(self.eta))
        w_total = self.a + self.c + self.d
        d_total = self.b + self.c + self.d
        if w_total > 1.0 + ROW_TOL or d_total > 1.0 + ROW_TOL:
            # report the worse row first
            if w_total - 1.0 >= d_total - 1.0:
                raise RowOverflow("W", w_total)
            raise RowOverflow("D", d_total)

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.a, self.b, self.c, self.d, self.e)

    def replace(self, **changes) -> "BehaviorParams":
        values = dict(a=self.a, b=self.b, c=self.c, d=self.d, e=self.e, eta=self.eta)
        values.update(changes)
        return BehaviorParams(**values)


def validate_params(a, b, c, d, e, eta=10.0) -> BehaviorParams:
    """Validate five probabilities and eta; raise instead of clamping."""
    return BehaviorParams(a, b, c, d, e, eta)


def build_tpm(params: BehaviorParams) -> np.ndarray:
    """Return the 4x4 embedded transition matrix of one node (read-only)."""
    a, b, c, d, e = params.as_tuple()
    p = np.array([
        [max(0.0, 1.0 - (a + c + d)), a, c, d],
        [b, max(0.0, 1.0 - (b + c + d)), c, d],
        [0.0, 0.0, 1.0 - d, d],
        [e, 0.0, 0.0, 1.0 - e],
    ])
    p.flags.writeable = False
    return p


def params_from_tpm(p) -> BehaviorParams:
    """Read a, b, c, d, e back out of a matrix with the single-node structure."""
    p = np.asarray(p, dtype=float)
    return BehaviorParams(p[0, 1], p[1, 0], p[0, 2], p[0, 3], p[3, 0])


def check_tpm(p, atol=1e-12) -> None:
    """Raise ``ValueError`` unless ``p`` is row-stochastic with the four structural zeros."""
    p = np.asarray(p, dtype=float)
    if p.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got shape {p.shape}")
    if np.any(p < 0) or np.any(p > 1):
        raise ValueError("matrix entries must lie in [0, 1]")
    sums = p.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > atol):
        raise ValueError(f"rows do not sum to 1: {sums}")
    for i, j in STRUCTURAL_ZEROS:
        if p[i, j] != 0.0:
            raise ValueError(f"entry ({STATE_LABELS[i]}, {STATE_LABELS[j]}) must be 0")


@dataclass(frozen=True)
class StatusThresholds:
    """Thresholds used to classify observed levels.

    The defaults are tool defaults, not values taken from measurements.
    """

    theta_drop: float = 0.3
    theta_forward: float = 0.5
    theta_inject: float = 0.3

    def __post_init__(self):
        for name in ("theta_drop", "theta_forward", "theta_inject"):
            value = getattr(self, name)
            if not (math.isfinite(value) and 0.0 <= value <= 1.0):
                raise OutOfRange(name, value)


def classify_status(a, b, c, d, e, thresholds: StatusThresholds | None = None) -> BehaviorState:
    """Classify a node from its observed dropping/forwarding/injecting levels.

    Clauses are checked in the order L, I, D, W with strict comparisons; the
    first match wins. ``d`` and ``e`` act as 0/1 indicators of loss and of
    being up (recovered or never failed).

    Raises
    ------
    Unclassifiable
        If no clause holds, e.g. ``a`` sits exactly on ``theta_drop``.
    """
    th = thresholds or StatusThresholds()
    if d == 1:
        return BehaviorState.L
    if c > th.theta_inject and b < th.theta_forward:
        return BehaviorState.I
    if a > th.theta_drop:
        return BehaviorState.D
    if a < th.theta_drop and b > th.theta_forward and e == 1:
        return BehaviorState.W
    raise Unclassifiable(
        f"no status clause matches a={a}, b={b}, c={c}, d={d}, e={e} "
        f"with thresholds {th}"
    )


def random_params(rng: np.random.Generator, interior: bool = False, eta: float = 10.0) -> BehaviorParams:
    """Draw a valid parameter set.

    ``(a, c, d)`` is the first three coordinates of a flat Dirichlet draw and
    ``b`` is uniform on what is left of row D. With ``interior=True`` every
    parameter lies strictly inside (0, 1) and both row sums stay below 1, which
    makes the embedded chain irreducible and aperiodic.
    """
    while True:
        a, c, d, _ = rng.dirichlet(np.ones(4))
        b = rng.uniform(0.0, 1.0 - c - d)
        e = rng.uniform(0.0, 1.0)
        if not interior:
            return BehaviorParams(a, b, c, d, e, eta)
        values = (a, b, c, d, e)
        if min(values) > 1e-3 and max(values) < 1 - 1e-3 and b + c + d < 1 - 1e-3:
            return BehaviorParams(a, b, c, d, e, eta)
