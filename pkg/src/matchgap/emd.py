"""Exact earth mover's distance and its link to bipartite matching.

Given a bipartite graph with sides of size ``n``, put unit mass ``1/n`` on
every vertex of each side and use the (1,2)-metric: distance ``1/2`` across
an edge, ``1`` between any other pair of distinct points. The optimal
transport cost is then ``(2n - mu) / (2n)``.

Costs are solved exactly: distances and weights are scaled to integers by
their common denominators, the integer transportation problem is solved by
successive shortest paths, and the optimum is returned as a ``Fraction``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _backend
from .matching import max_matching
from .sampler import SimpleGraph


class InfeasibleSupplies(ValueError):
    pass


@dataclass
class TransportProblem:
    """Supplies ``p`` on ``sources``, demands ``q`` on ``sinks``.

    Distances are ``dist_num / dist_den`` with ``dist_num`` indexed
    ``[source, sink]``.
    """

    sources: np.ndarray
    sinks: np.ndarray
    p: tuple[Fraction, ...]
    q: tuple[Fraction, ...]
    dist_num: np.ndarray
    dist_den: int = 1

    def __post_init__(self) -> None:
        if sum(self.p) != 1 or sum(self.q) != 1:
            raise InfeasibleSupplies(f"weights sum to {sum(self.p)} and {sum(self.q)}, expected 1")
        if any(x < 0 for x in self.p) or any(x < 0 for x in self.q):
            raise InfeasibleSupplies("weights must be nonnegative")
        if self.dist_num.shape != (len(self.p), len(self.q)):
            raise ValueError("distance matrix shape does not match the weights")
        if np.any(self.dist_num < 0):
            raise ValueError("distances must be nonnegative")


def from_fractions(
    p: Sequence[Fraction], q: Sequence[Fraction], dist: Sequence[Sequence[Fraction]]
) -> TransportProblem:
    """Build a problem from a matrix of rational distances."""
    flat = [Fraction(x) for row in dist for x in row]
    den = math.lcm(*(x.denominator for x in flat)) if flat else 1
    num = np.array([[int(Fraction(x) * den) for x in row] for row in dist], dtype=np.int64).reshape(len(p), len(q))
    return TransportProblem(
        np.arange(len(p)), np.arange(len(q)),
        tuple(Fraction(x) for x in p), tuple(Fraction(x) for x in q), num, den,
    )


def metric_from_graph(g: SimpleGraph, part: np.ndarray) -> TransportProblem:
    """Uniform masses on the two sides with the (1,2)-metric of ``g``."""
    part = np.asarray(part)
    left = np.nonzero(part == 0)[0]
    right = np.nonzero(part == 1)[0]
    if len(left) != len(right):
        raise InfeasibleSupplies(f"sides differ in size ({len(left)} vs {len(right)})")
    n = len(left)
    pos = np.empty(g.n, dtype=np.int64)
    pos[left] = np.arange(n)
    pos[right] = np.arange(n)
    num = np.full((n, n), 2, dtype=np.int64)
    e = np.asarray(g.edges, dtype=np.int64).reshape(-1, 2)
    if len(e):
        a, b = e[:, 0], e[:, 1]
        if np.any(part[a] == part[b]):
            raise ValueError("graph is not bipartite under the given sides")
        lv = np.where(part[a] == 0, a, b)
        rv = np.where(part[a] == 0, b, a)
        num[pos[lv], pos[rv]] = 1
    w = (Fraction(1, n),) * n
    return TransportProblem(left, right, w, w, num, 2)


def emd_exact(t: TransportProblem) -> Fraction:
    dens = [x.denominator for x in t.p + t.q]
    scale = math.lcm(*dens)
    supply = np.array([int(x * scale) for x in t.p], dtype=np.int64)
    demand = np.array([int(x * scale) for x in t.q], dtype=np.int64)
    live_s = supply > 0
    live_t = demand > 0
    cost = np.ascontiguousarray(t.dist_num[np.ix_(live_s, live_t)])
    total, _ = _backend.transport_ssp(supply[live_s], demand[live_t], cost)
    return Fraction(total, scale * t.dist_den)


@dataclass
class ReductionReport:
    n: int
    mu: int
    emd: Fraction
    predicted: Fraction
    holds: bool

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "mu": self.mu,
            "emd": str(self.emd),
            "predicted": str(self.predicted),
            "holds": self.holds,
        }


def verify_reduction(g: SimpleGraph, part: np.ndarray) -> ReductionReport:
    """Check EMD = (2n - mu) / (2n) by two independent solvers."""
    t = metric_from_graph(g, part)
    n = len(t.p)
    mu = max_matching(g, part).size
    emd = emd_exact(t)
    pred = Fraction(2 * n - mu, 2 * n)
    return ReductionReport(n, mu, emd, pred, emd == pred)


def additive_error_transfer(
    n: int, *, emd_err: float | None = None, matching_err: float | None = None
) -> dict[str, float]:
    """Convert between additive errors of the two estimates (slope ``2n``)."""
    if (emd_err is None) == (matching_err is None):
        raise ValueError("give exactly one of emd_err and matching_err")
    if emd_err is not None:
        return {"emd_err": emd_err, "matching_err": 2 * n * emd_err}
    return {"emd_err": matching_err / (2 * n), "matching_err": matching_err}
