"""Correlated clusters of nodes.

A cluster of m nodes is collapsed onto four cluster states S0..S3, where S_k
means every member sits in behavior state k. The cluster chain is built by
folding members in pairwise: the raw entry for i -> j is the product of the
members' i -> j probabilities, and each row is renormalized afterwards. This
takes O(m) 4x4 operations instead of enumerating the 4**m joint states.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .behavior import CLUSTER_LABELS, BehaviorParams, BehaviorState, build_tpm
from .errors import DegenerateRow, ZeroDenominator
from .smp import SojournSpec, stationary

DENOMINATOR_TOL = 1e-14


def _normalize_rows(raw: np.ndarray, position=None) -> np.ndarray:
    sums = raw.sum(axis=1)
    for i, s in enumerate(sums):
        if not s > 0:
            raise DegenerateRow(CLUSTER_LABELS[i], position)
    return raw / sums[:, None]


def compose_pair(p1, p2, position=None) -> np.ndarray:
    """Entrywise product of two transition matrices, rows renormalized to 1.

    Raises
    ------
    DegenerateRow
        If a product row is all zeros, e.g. one node always recovers (e=1)
        while the other never does (e=0).
    """
    raw = np.asarray(p1, dtype=float) * np.asarray(p2, dtype=float)
    return _normalize_rows(raw, position)


def compose_matrices(matrices: Sequence[np.ndarray], deferred: bool = False) -> np.ndarray:
    """Fold ``compose_pair`` left to right over ``matrices``.

    With ``deferred=True`` the full m-fold product is taken first and rows are
    normalized once at the end.
    """
    if not matrices:
        raise ValueError("need at least one matrix")
    if deferred:
        raw = np.prod(np.stack([np.asarray(m, dtype=float) for m in matrices]), axis=0)
        if len(matrices) == 1:
            return raw.copy()
        return _normalize_rows(raw, position=len(matrices) - 1)
    acc = np.array(matrices[0], dtype=float)
    for k, m in enumerate(matrices[1:], start=1):
        acc = compose_pair(acc, m, position=k)
    return acc


@dataclass(frozen=True)
class CorrelatedCluster:
    """A composed cluster chain over S0..S3.

    ``products`` holds the un-normalized product over members of each
    parameter a, b, c, d, e; these are the aggregate probabilities used by
    the correlated functions.
    """

    member_params: tuple[BehaviorParams, ...]
    cluster_tpm: np.ndarray
    cluster_sojourn: SojournSpec
    products: dict

    @property
    def m(self) -> int:
        return len(self.member_params)


def compose_cluster(members: Sequence[BehaviorParams], sojourn=None, deferred: bool = False) -> CorrelatedCluster:
    """Compose member nodes into one correlated cluster.

    Parameters
    ----------
    members : sequence of BehaviorParams
        At least one member; folded in list order.
    sojourn : SojournSpec or sequence of SojournSpec, optional
        One spec shared by all members or one per member. The cluster uses
        the arithmetic mean of member means for each transition; the family
        of the first member applies. Defaults to unit exponential means.
    deferred : bool
        Normalize once after the full product instead of after each fold step.
    """
    members = tuple(members)
    if not members:
        raise ValueError("a cluster needs at least one member")
    if sojourn is None:
        sojourns = [SojournSpec.uniform()] * len(members)
    elif isinstance(sojourn, SojournSpec):
        sojourns = [sojourn] * len(members)
    else:
        sojourns = list(sojourn)
        if len(sojourns) != len(members):
            raise ValueError("need one sojourn spec per member")
    tpm = compose_matrices([build_tpm(m) for m in members], deferred=deferred)
    tpm.flags.writeable = False
    mean = np.mean([s.mean for s in sojourns], axis=0)
    products = {
        name: float(np.prod([getattr(m, name) for m in members]))
        for name in ("a", "b", "c", "d", "e")
    }
    return CorrelatedCluster(
        member_params=members,
        cluster_tpm=tpm,
        cluster_sojourn=SojournSpec(mean, sojourns[0].family),
        products=products,
    )


@dataclass(frozen=True)
class CorrelatedFunctions:
    u: float
    v: float
    w: float
    x: float
    pi: np.ndarray


def _term(name, numerator, pi, excluded, weight):
    # numerator / (1 - sum of pi over `excluded`) * weight; a zero numerator
    # contributes nothing even when the denominator vanishes
    if numerator == 0.0:
        return 0.0
    denominator = 1.0 - sum(pi[k] for k in excluded)
    if denominator <= DENOMINATOR_TOL:
        label = "1-(" + "+".join(f"pi_{k}" for k in excluded) + ")"
        raise ZeroDenominator(name, label)
    return numerator / denominator * weight


def correlated_functions(cluster: CorrelatedCluster, pi=None, strict: bool = True) -> CorrelatedFunctions:
    """Evaluate the correlated functions u, v, w, x of a cluster.

    With A..E the member products of a..e and ``pi`` the stationary vector of
    the cluster chain (started in S0)::

        u = A^2 pi_1 / (1-(pi_1+pi_2+pi_3))
        v = B^2 pi_0 / (1-(pi_0+pi_2+pi_3)) + E^2 pi_0 / (1-(pi_0+pi_1+pi_2))
        w = C^2 pi_2 / (1-(pi_1+pi_2+pi_3)) + C^2 pi_2 / (1-(pi_0+pi_2+pi_3))
        x = D^2 pi_3 * [1/(1-(pi_1+pi_2+pi_3)) + 1/(1-(pi_0+pi_2+pi_3))
                        + 1/(1-(pi_0+pi_1+pi_3))]

    Raises
    ------
    ZeroDenominator
        If a term with a nonzero numerator has a denominator <= 1e-14. With
        ``strict=False`` that function is reported as NaN instead.
    """
    if pi is None:
        pi = stationary(cluster.cluster_tpm, start=BehaviorState.W)
    pi = np.asarray(pi, dtype=float)
    pr = cluster.products
    A2, B2, C2, D2, E2 = (pr[k] ** 2 for k in ("a", "b", "c", "d", "e"))
    not0, not1, not2, not3 = (1, 2, 3), (0, 2, 3), (0, 1, 3), (0, 1, 2)
    terms = {
        "u": [(A2, not0, pi[1])],
        "v": [(B2, not1, pi[0]), (E2, not3, pi[0])],
        "w": [(C2, not0, pi[2]), (C2, not1, pi[2])],
        "x": [(D2, not0, pi[3]), (D2, not1, pi[3]), (D2, not2, pi[3])],
    }
    values = {}
    for name, parts in terms.items():
        try:
            values[name] = sum(_term(name, num, pi, excluded, weight) for num, excluded, weight in parts)
        except ZeroDenominator:
            if strict:
                raise
            values[name] = float("nan")
    return CorrelatedFunctions(pi=pi, **values)
