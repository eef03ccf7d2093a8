"""Maximum bipartite matching with a Koenig vertex-cover certificate."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .construction import Instance, SetLabel, recursive_template
from .sampler import SimpleGraph


class NotBipartite(ValueError):
    pass


@dataclass
class MatchingResult:
    size: int
    pairs: np.ndarray  # shape (size, 2)
    cover: np.ndarray  # vertex cover of the same size


def _csr(n_left: int, left: np.ndarray, right: np.ndarray):
    order = np.argsort(left, kind="stable")
    indices = right[order]
    indptr = np.zeros(n_left + 1, dtype=np.int64)
    np.add.at(indptr, left + 1, 1)
    return np.cumsum(indptr), indices


def max_matching(g: SimpleGraph, part: np.ndarray) -> MatchingResult:
    """Hopcroft-Karp on ``g`` with sides given by ``part`` (0/1 per vertex)."""
    part = np.asarray(part)
    edges = np.asarray(g.edges, dtype=np.int64).reshape(-1, 2)
    a, b = edges[:, 0], edges[:, 1]
    if np.any(part[a] == part[b]):
        k = int(np.nonzero(part[a] == part[b])[0][0])
        raise NotBipartite(f"edge ({a[k]}, {b[k]}) joins two vertices of side {part[a[k]]}")
    left_ids = np.nonzero(part == 0)[0]
    right_ids = np.nonzero(part == 1)[0]
    pos = np.empty(g.n, dtype=np.int64)
    pos[left_ids] = np.arange(len(left_ids))
    pos[right_ids] = np.arange(len(right_ids))
    lv = np.where(part[a] == 0, a, b)
    rv = np.where(part[a] == 0, b, a)
    # dedupe so the adjacency is simple
    key = np.unique(pos[lv] * max(len(right_ids), 1) + pos[rv])
    ll = key // max(len(right_ids), 1)
    rr = key % max(len(right_ids), 1)
    indptr, indices = _csr(len(left_ids), ll, rr)
    size, ml, mr = _backend.hopcroft_karp(len(left_ids), len(right_ids), indptr, indices)
    matched = np.nonzero(ml >= 0)[0]
    pairs = np.stack([left_ids[matched], right_ids[ml[matched]]], axis=1) if size else np.empty((0, 2), dtype=np.int64)
    cover = _koenig_cover(len(left_ids), indptr, indices, ml, mr)
    cover_ids = np.sort(np.concatenate([left_ids[cover[0]], right_ids[cover[1]]]))
    return MatchingResult(int(size), pairs, cover_ids)


def _koenig_cover(n_left: int, indptr, indices, ml, mr):
    seen_l = np.zeros(n_left, dtype=bool)
    seen_r = np.zeros(len(mr), dtype=bool)
    queue = deque(int(u) for u in np.nonzero(ml < 0)[0])
    seen_l[ml < 0] = True
    while queue:
        u = queue.popleft()
        for v in indices[indptr[u]:indptr[u + 1]]:
            if seen_r[v]:
                continue
            seen_r[v] = True
            w = mr[v]
            if w >= 0 and not seen_l[w]:
                seen_l[w] = True
                queue.append(int(w))
    return np.nonzero(~seen_l)[0], np.nonzero(seen_r)[0]


def is_vertex_cover(g: SimpleGraph, cover) -> bool:
    mask = np.zeros(g.n, dtype=bool)
    mask[np.asarray(cover, dtype=np.int64)] = True
    e = np.asarray(g.edges).reshape(-1, 2)
    return bool(np.all(mask[e[:, 0]] | mask[e[:, 1]]))


@dataclass
class GapReport:
    case: str
    mu: int
    half_n: int
    deficiency: int
    threshold: float
    holds: bool
    cover_size: int | None = None
    cover_valid: bool | None = None
    block_matchings: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "case": self.case,
            "mu": self.mu,
            "half_n": self.half_n,
            "deficiency": self.deficiency,
            "threshold": self.threshold,
            "holds": self.holds,
            "cover_size": self.cover_size,
            "cover_valid": self.cover_valid,
            "block_matchings": self.block_matchings,
        }


def _top_blocks(inst: Instance) -> list[tuple[str, SetLabel, SetLabel]]:
    p = inst.params
    L = p.L
    if L > 1:
        return [(f"{b.x.name}-{b.y.name}", b.x, b.y) for b in recursive_template(p, L, inst.case)]
    out = []
    for j in (1, 2):
        for i in range(1, p.r):
            out.append((SetLabel("A", i, j), SetLabel("B", i + 1, j)))
        out.append((SetLabel("B", 1, j), SetLabel("S", 0, j)))
    for i in range(1, p.r + 1):
        out.append((SetLabel("D", i, 1), SetLabel("D", i, 2)))
    out.append((SetLabel("A", p.r, 1), SetLabel("A", p.r, 2)))
    return [(f"{x.name}-{y.name}", x, y) for x, y in out]


def _induced(g: SimpleGraph, keep: np.ndarray) -> SimpleGraph:
    mask = np.zeros(g.n, dtype=bool)
    mask[keep] = True
    e = np.asarray(g.edges).reshape(-1, 2)
    return SimpleGraph(g.n, e[mask[e[:, 0]] & mask[e[:, 1]]])


def certify_gap(inst: Instance, g: SimpleGraph) -> GapReport:
    """Matching number of the sampled graph against the promised gap.

    YES instances also report which top-level blocks are perfectly matched
    on their own; NO instances check the nested vertex cover.
    """
    p = inst.params
    res = max_matching(g, inst.part)
    half = p.half
    rep = GapReport(
        case=inst.case_name, mu=res.size, half_n=half, deficiency=half - res.size,
        threshold=p.decision_threshold(), holds=False,
    )
    if inst.case:
        rep.holds = res.size == half
        for name, x, y in _top_blocks(inst):
            X = inst.members_of(p.L, 0, x)
            Y = inst.members_of(p.L, 0, y)
            sub = max_matching(_induced(g, np.concatenate([X, Y])), inst.part)
            rep.block_matchings.append({
                "block": name, "size_x": len(X), "size_y": len(Y),
                "mu": sub.size, "perfect": sub.size == min(len(X), len(Y)),
            })
    else:
        cover = inst.vertex_cover_witness()
        rep.cover_size = int(len(cover))
        rep.cover_valid = is_vertex_cover(g, cover)
        rep.holds = res.size <= half - p.N1 / 2 and rep.cover_valid
    return rep
