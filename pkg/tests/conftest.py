"""Shared fixtures and independent oracles.

The oracles here deliberately avoid the package's solvers: they use plain
loops and repeated multiplication only.
"""

import numpy as np
import pytest

from ncbm.behavior import BehaviorParams, random_params


def power_iteration_oracle(p, start=None, tol=1e-13, max_iter=5_000_000):
    """Apply x <- x P until successive iterates differ by less than ``tol``."""
    p = np.asarray(p, dtype=float)
    n = len(p)
    x = np.full(n, 1.0 / n) if start is None else np.eye(n)[start]
    for _ in range(max_iter):
        nxt = x @ p
        if np.max(np.abs(nxt - x)) < tol:
            return nxt
        x = nxt
    raise RuntimeError("power iteration oracle did not converge")


def batched_power_iteration(ps, tol=1e-13, max_iter=5_000_000):
    """Power iteration from the uniform start on a stack of chains at once."""
    ps = np.asarray(ps, dtype=float)
    x = np.full(ps.shape[:2], 1.0 / ps.shape[1])
    for _ in range(max_iter):
        nxt = np.einsum("ki,kij->kj", x, ps)
        if np.max(np.abs(nxt - x)) < tol:
            return nxt
        x = nxt
    raise RuntimeError("batched power iteration did not converge")


def repeated_multiplication(p, initial, steps):
    x = np.zeros(len(p))
    x[initial] = 1.0
    for _ in range(steps):
        x = x @ np.asarray(p)
    return x


def entrywise_product_oracle(matrices):
    """One-shot product of all matrices, rows normalized with explicit loops."""
    raw = np.ones((4, 4))
    for m in matrices:
        for i in range(4):
            for j in range(4):
                raw[i][j] *= m[i][j]
    out = np.zeros((4, 4))
    for i in range(4):
        s = sum(raw[i])
        for j in range(4):
            out[i][j] = raw[i][j] / s
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240531)


@pytest.fixture
def example_params():
    return BehaviorParams(a=0.1, b=0.2, c=0.05, d=0.05, e=0.3, eta=10)


def many_params(n, seed=12345, interior=False):
    rng = np.random.default_rng(seed)
    return [random_params(rng, interior=interior) for _ in range(n)]
