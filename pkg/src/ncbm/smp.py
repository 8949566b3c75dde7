"""Semi-Markov machinery for the four-state behavior chain.

Covers the embedded chain's stationary vector, the time-weighted limiting
distribution of the semi-Markov process, finite-step transient occupancy and
Monte Carlo sampling of trajectories.
"""

from __future__ import annotations

import enum
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components

from .behavior import BehaviorState
from .errors import EmptyInput, NumericalFailure

RESIDUAL_TOL = 1e-10


class SojournFamily(str, enum.Enum):
    EXPONENTIAL = "exponential"
    DETERMINISTIC = "deterministic"


@dataclass(frozen=True)
class SojournSpec:
    """Holding-time means ``mean[i, j]`` for a jump i -> j, plus one distribution family.

    Entries for impossible transitions are ignored; entries for possible ones
    must be positive and finite (see :meth:`check`).
    """

    mean: np.ndarray
    family: SojournFamily = SojournFamily.EXPONENTIAL

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float)
        if mean.shape != (4, 4):
            raise ValueError(f"sojourn means must be 4x4, got {mean.shape}")
        mean.flags.writeable = False
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "family", SojournFamily(self.family))

    @classmethod
    def uniform(cls, mean=1.0, family=SojournFamily.EXPONENTIAL) -> "SojournSpec":
        return cls(np.full((4, 4), float(mean)), family)

    @classmethod
    def per_state(cls, means, family=SojournFamily.EXPONENTIAL) -> "SojournSpec":
        """Every jump out of state i has mean ``means[i]``."""
        means = np.asarray(means, dtype=float).reshape(4, 1)
        return cls(np.repeat(means, 4, axis=1), family)

    def check(self, p) -> None:
        support = np.asarray(p) > 0
        m = self.mean[support]
        if not np.all(np.isfinite(m) & (m > 0)):
            raise ValueError("sojourn means must be positive and finite on every possible transition")


@dataclass(frozen=True)
class SteadyState:
    pi: np.ndarray
    mean_sojourn: np.ndarray
    limiting: np.ndarray

    @property
    def mean_jump_time(self) -> float:
        """Long-run average time between embedded jumps, sum_i pi_i E[T_i]."""
        return float(self.pi @ self.mean_sojourn)


def _as_matrix(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {p.shape}")
    return p


def residual(pi, p) -> float:
    """Infinity norm of pi P - pi."""
    return float(np.max(np.abs(pi @ p - pi)))


def _solve_irreducible(sub: np.ndarray) -> np.ndarray:
    # balance equations with the last one swapped for normalization
    n = sub.shape[0]
    a = sub.T - np.eye(n)
    a[-1, :] = 1.0
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    return np.linalg.solve(a, rhs)


def _reachable(p: np.ndarray, start: int) -> np.ndarray:
    seen = np.zeros(len(p), dtype=bool)
    seen[start] = True
    frontier = [start]
    while frontier:
        i = frontier.pop()
        for j in np.flatnonzero(p[i] > 0):
            if not seen[j]:
                seen[j] = True
                frontier.append(j)
    return seen


def _decomposed_limit(p: np.ndarray, start: int) -> np.ndarray:
    """Stationary vector seen from ``start``: closed classes weighted by absorption probability."""
    n = len(p)
    support = p > 0
    _, labels = connected_components(support, directed=True, connection="strong")
    reach = _reachable(p, start)
    closed = []
    for lab in np.unique(labels[reach]):
        members = np.flatnonzero(labels == lab)
        outside = np.ones(n, dtype=bool)
        outside[members] = False
        if not support[np.ix_(members, outside)].any():
            closed.append(members)

    pi = np.zeros(n)
    if len(closed) == 1:
        members = closed[0]
        pi[members] = _solve_irreducible(p[np.ix_(members, members)])
        return pi

    in_closed = np.zeros(n, dtype=bool)
    for members in closed:
        in_closed[members] = True
    transient = np.flatnonzero(reach & ~in_closed)
    q = p[np.ix_(transient, transient)]
    for members in closed:
        if start in members:
            weight = 1.0
        else:
            r = p[np.ix_(transient, members)].sum(axis=1)
            h = np.linalg.solve(np.eye(len(transient)) - q, r)
            weight = h[np.searchsorted(transient, start)]
        if weight > 0:
            pi[members] += weight * _solve_irreducible(p[np.ix_(members, members)])
    return pi


def _power_limit(p: np.ndarray, start: int, max_squarings=64) -> np.ndarray | None:
    x = np.zeros(len(p))
    x[start] = 1.0
    q = p.copy()
    prev = x @ q
    for _ in range(max_squarings):
        q = q @ q
        cur = x @ q
        if np.max(np.abs(cur - prev)) < 1e-15:
            return cur / cur.sum()
        prev = cur
    return None


def stationary(p, start: int = BehaviorState.W, tol: float = RESIDUAL_TOL) -> np.ndarray:
    """Stationary vector of the embedded chain.

    For an irreducible chain this is the unique solution of ``pi P = pi``,
    ``sum(pi) = 1``. When the chain has several closed classes, the result is
    the long-run distribution of the chain started in ``start`` (W unless told
    otherwise), which is still a stationary vector.

    The direct linear solve runs first; repeated squaring of P applied to the
    start indicator is the fallback.

    Raises
    ------
    NumericalFailure
        If neither route reaches ``tol`` on the balance residual.
    """
    p = _as_matrix(p)
    start = int(start)
    try:
        pi = _decomposed_limit(p, start)
    except np.linalg.LinAlgError:
        pi = None
    if pi is not None and np.all(pi > -1e-14):
        pi = np.clip(pi, 0.0, None)
        pi = pi / pi.sum()
        if residual(pi, p) <= tol:
            return pi
    pi = _power_limit(p, start)
    if pi is not None and residual(pi, p) <= tol:
        return pi
    raise NumericalFailure("stationary solve and power iteration both failed to converge")


def mean_sojourn_times(p, sojourn: SojournSpec) -> np.ndarray:
    """E[T_i] = sum_j P_ij E[T_ij]."""
    p = _as_matrix(p)
    return np.where(p > 0, p * sojourn.mean, 0.0).sum(axis=1)


def limiting_distribution(p, sojourn: SojournSpec | None = None, start: int = BehaviorState.W) -> SteadyState:
    """Long-run fraction of time spent in each state.

    ``P_i = pi_i E[T_i] / sum_j pi_j E[T_j]`` with ``pi`` from :func:`stationary`.
    """
    p = _as_matrix(p)
    sojourn = sojourn or SojournSpec.uniform()
    sojourn.check(p)
    pi = stationary(p, start)
    means = mean_sojourn_times(p, sojourn)
    weighted = pi * means
    return SteadyState(pi=pi, mean_sojourn=means, limiting=weighted / weighted.sum())


def transient_occupancy(p, initial, steps: int) -> np.ndarray:
    """Distribution of the embedded chain after ``steps`` jumps from ``initial``."""
    p = _as_matrix(p)
    if steps < 0:
        raise ValueError("steps must be >= 0")
    x = np.zeros(len(p))
    x[int(BehaviorState.parse(initial))] = 1.0
    return x @ np.linalg.matrix_power(p, int(steps))


@dataclass(frozen=True)
class Trajectory:
    """Piecewise-constant path: ``states[k]`` holds on ``[times[k], times[k+1])``."""

    states: np.ndarray
    times: np.ndarray
    horizon: float

    def __post_init__(self):
        states = np.asarray(self.states, dtype=np.int64)
        times = np.asarray(self.times, dtype=float)
        states.flags.writeable = False
        times.flags.writeable = False
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "times", times)

    def __len__(self):
        return len(self.states)

    def pairs(self) -> list[tuple[BehaviorState, float]]:
        return [(BehaviorState(int(s)), float(t)) for s, t in zip(self.states, self.times)]

    def occupancy(self) -> np.ndarray:
        """Fraction of ``[0, horizon]`` spent in each state."""
        durations = np.diff(np.append(self.times, self.horizon))
        return np.bincount(self.states, weights=durations, minlength=4) / self.horizon


def _jump_table(p: np.ndarray):
    table = []
    for row in p:
        targets = [int(j) for j in np.flatnonzero(row > 0)]
        thresholds = list(np.cumsum(row[targets]))
        thresholds[-1] = 2.0  # uniforms are < 1; absorbs rounding in the cumulative sum
        table.append((thresholds, targets))
    return table


def _seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(int(seed))


def _sample(p, mean, deterministic, initial, horizon, seed, chunk=4096) -> Trajectory:
    rng = np.random.default_rng(_seed_sequence(seed))
    table = _jump_table(p)
    s = int(initial)
    t = 0.0
    states = [s]
    times = [0.0]
    while p[s, s] < 1.0:
        path = [s]
        for u in rng.random(chunk):
            thresholds, targets = table[path[-1]]
            k = 0
            while u >= thresholds[k]:
                k += 1
            path.append(targets[k])
        path = np.asarray(path)
        mu = mean[path[:-1], path[1:]]
        hold = mu if deterministic else rng.exponential(mu)
        arrive = t + np.cumsum(hold)
        inside = arrive <= horizon
        n_in = int(np.argmin(inside)) if not inside.all() else len(inside)
        moved = path[1:n_in + 1] != path[:n_in]
        states.extend(path[1:n_in + 1][moved].tolist())
        times.extend(arrive[:n_in][moved].tolist())
        if n_in < len(inside):
            break
        s = int(path[-1])
        t = float(arrive[-1])
    return Trajectory(states, times, float(horizon))


def simulate(p, sojourn: SojournSpec, initial, horizon: float, seed) -> Trajectory:
    """Sample one semi-Markov trajectory up to ``horizon``.

    Each embedded jump i -> j is drawn from row i of ``p``; the time spent
    before it is exponential with mean ``sojourn.mean[i, j]`` or exactly that
    mean for the deterministic family. Self-transitions extend the current
    sojourn rather than opening a new entry, so consecutive recorded states
    always differ. An absorbing state ends sampling.

    The result is a pure function of the inputs; ``seed`` may be an integer
    or a ``numpy.random.SeedSequence``.
    """
    p = _as_matrix(p)
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    sojourn.check(p)
    return _sample(
        p, np.asarray(sojourn.mean), sojourn.family is SojournFamily.DETERMINISTIC,
        int(BehaviorState.parse(initial)), horizon, seed,
    )


def trajectory_seed(seed: int, k: int) -> np.random.SeedSequence:
    """Independent stream for trajectory ``k`` of a batch seeded with ``seed``."""
    return np.random.SeedSequence(int(seed), spawn_key=(int(k),))


def _simulate_one(args):
    p, sojourn, initial, horizon, seed, k = args
    return simulate(p, sojourn, initial, horizon, trajectory_seed(seed, k))


def simulate_many(p, sojourn: SojournSpec, initial, horizon: float, n: int, seed: int,
                  workers: int = 1) -> list[Trajectory]:
    """Sample ``n`` trajectories; trajectory k always uses the stream derived from (seed, k).

    The output does not depend on ``workers``.
    """
    p = _as_matrix(p)
    jobs = [(p, sojourn, initial, horizon, seed, k) for k in range(n)]
    if workers <= 1:
        return [_simulate_one(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_simulate_one, jobs, chunksize=max(1, n // (4 * workers))))


@dataclass(frozen=True)
class OccupancyEstimate:
    occupancy: np.ndarray
    stderr: np.ndarray
    n: int


def occupancy_estimate(trajectories) -> OccupancyEstimate:
    """Average time-fraction per state over trajectories, with the standard error of the mean."""
    trajectories = list(trajectories)
    if not trajectories:
        raise EmptyInput("need at least one trajectory")
    horizons = {t.horizon for t in trajectories}
    if len(horizons) != 1:
        raise ValueError(f"trajectories have different horizons: {sorted(horizons)}")
    occ = np.array([t.occupancy() for t in trajectories])
    n = len(occ)
    if n > 1:
        se = occ.std(axis=0, ddof=1) / np.sqrt(n)
    else:
        se = np.zeros(occ.shape[1])
    return OccupancyEstimate(occupancy=occ.mean(axis=0), stderr=se, n=n)
