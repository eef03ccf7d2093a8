"""Structure of the discovered subgraph recorded in a transcript.

A query whose pseudo count is nonzero discovers an edge. Each discovered
edge gets a direction: from the endpoint that already had discovered
edges to the one that had none; when both or neither had any, a seeded
coin decides. The rest follows from that orientation:

* spoilers: endpoints of an edge discovered between two non-singletons,
* shallow subgraph ``T(v)``: vertices reachable from ``v`` along at most
  ``floor(10 ln n)`` directed edges,
* spoiled vertices: ``T(v)`` holds a spoiler or is large,
* spoiled edges: out of ``A_r`` into a spoiled vertex, or out of a vertex
  with many spoiled neighbours.

Passing ``level`` restricts everything to inner edges, those whose
internal level is below ``level``.
"""
from __future__ import annotations

import csv
import io
import math
from collections import Counter, deque
from dataclasses import dataclass, field

import numpy as np

from ._rng import Stream, pair_key, stream_key, uniform
from .oracle import PrivilegedView, Transcript
from .params import ParamSet


@dataclass
class DirectedTranscriptGraph:
    n: int
    src: np.ndarray
    dst: np.ndarray
    step: np.ndarray
    real: np.ndarray
    level: np.ndarray  # internal level per edge, 0 when unknown
    spoiler_edge: np.ndarray
    first_seen: np.ndarray
    _out: dict[int, list[int]] = field(default_factory=dict, repr=False)

    def __len__(self) -> int:
        return len(self.src)

    @property
    def spoilers(self) -> set[int]:
        return set(self.src[self.spoiler_edge].tolist()) | set(self.dst[self.spoiler_edge].tolist())

    def indegree(self) -> np.ndarray:
        return np.bincount(self.dst, minlength=self.n) if len(self.dst) else np.zeros(self.n, dtype=np.int64)

    def out_edges(self, v: int) -> list[int]:
        if not self._out and len(self.src):
            for k, a in enumerate(self.src.tolist()):
                self._out.setdefault(a, []).append(k)
        return self._out.get(v, [])


def depth_cap(n: int) -> int:
    return int(math.floor(10 * math.log(n)))


def indegree_bound(n: int) -> float:
    return 3 * math.sqrt(math.log(n))


def orient(t: Transcript, seed: int = 0, view: PrivilegedView | None = None) -> DirectedTranscriptGraph:
    """Direct every discovered edge of the transcript, in query order."""
    key = stream_key(seed, Stream.ORIENT)
    hits = np.nonzero(t.pseudo > 0)[0]
    order = hits[np.argsort(t.steps[hits], kind="stable")]
    touched = np.zeros(t.n, dtype=bool)
    first_seen = np.full(t.n, -1, dtype=np.int64)
    seen_pairs: set[tuple[int, int]] = set()
    src, dst, step, real, spoil = [], [], [], [], []
    for k in order.tolist():
        u, v = int(t.us[k]), int(t.vs[k])
        pair = (u, v) if u < v else (v, u)
        if pair in seen_pairs:
            continue
        seen_pairs.add(pair)
        tu, tv = touched[u], touched[v]
        if tu and not tv:
            a, b = u, v
        elif tv and not tu:
            a, b = v, u
        else:
            lo, hi = pair
            a, b = (lo, hi) if uniform(key, pair_key(lo, hi)) < 0.5 else (hi, lo)
        s = int(t.steps[k])
        for x in (u, v):
            if not touched[x]:
                touched[x] = True
                first_seen[x] = s
        src.append(a)
        dst.append(b)
        step.append(s)
        real.append(bool(t.real[k] > 0))
        spoil.append(bool(tu and tv))
    src_a = np.array(src, dtype=np.int64)
    dst_a = np.array(dst, dtype=np.int64)
    level = np.zeros(len(src_a), dtype=np.int64)
    if view is not None and len(src_a):
        _, level = view.levels(src_a, dst_a)
    return DirectedTranscriptGraph(
        t.n, src_a, dst_a, np.array(step, dtype=np.int64), np.array(real, dtype=bool),
        level, np.array(spoil, dtype=bool), first_seen,
    )


def _edge_ok(g: DirectedTranscriptGraph, level: int | None) -> np.ndarray:
    if level is None:
        return np.ones(len(g), dtype=bool)
    if len(g) and np.any(g.level == 0):
        raise ValueError("edge levels unknown; orient with a privileged view")
    return g.level < level


def shallow_subgraph(g: DirectedTranscriptGraph, v: int, level: int | None = None, depth: int | None = None) -> set[int]:
    ok = _edge_ok(g, level)
    cap = depth_cap(g.n) if depth is None else depth
    seen = {v}
    frontier = deque([(v, 0)])
    while frontier:
        x, dx = frontier.popleft()
        if dx == cap:
            continue
        for e in g.out_edges(x):
            if not ok[e]:
                continue
            y = int(g.dst[e])
            if y not in seen:
                seen.add(y)
                frontier.append((y, dx + 1))
    return seen


def shallow_sizes(
    g: DirectedTranscriptGraph,
    level: int | None = None,
    depth: int | None = None,
    marked: set[int] | None = None,
    *,
    block: int = 4096,
) -> tuple[dict[int, int], dict[int, bool]]:
    """``|T(v)|`` for every vertex on a discovered edge, all at once.

    Reachability rows are bitsets over a block of target columns and are
    widened one step per round, so the cost is about ``E * V / 64`` per
    round instead of one BFS per vertex. The second map tells whether
    ``T(v)`` meets ``marked``.
    """
    ok = _edge_ok(g, level)
    cap = depth_cap(g.n) if depth is None else depth
    active = np.unique(np.concatenate([g.src, g.dst])) if len(g) else np.empty(0, dtype=np.int64)
    k = len(active)
    if k == 0:
        return {}, {}
    pos = np.full(g.n, -1, dtype=np.int64)
    pos[active] = np.arange(k)
    a = pos[g.src[ok]]
    b = pos[g.dst[ok]]
    mark = np.zeros(k, dtype=bool)
    if marked:
        ids = np.array(sorted(marked), dtype=np.int64)
        ids = ids[pos[ids] >= 0]
        mark[pos[ids]] = True
    sizes = np.zeros(k, dtype=np.int64)
    hits = np.zeros(k, dtype=bool)
    for lo in range(0, k, block):
        hi = min(k, lo + block)
        width = (hi - lo + 7) // 8
        reach = np.zeros((k, width), dtype=np.uint8)
        cols = np.arange(lo, hi)
        reach[cols, (cols - lo) >> 3] = (1 << ((cols - lo) & 7)).astype(np.uint8)
        for _ in range(cap):
            nxt = reach.copy()
            np.bitwise_or.at(nxt, a, reach[b])
            if np.array_equal(nxt, reach):
                break
            reach = nxt
        bits = np.unpackbits(reach, axis=1, count=hi - lo, bitorder="little")
        sizes += bits.sum(axis=1, dtype=np.int64)
        if mark[lo:hi].any():
            hits |= bits[:, mark[lo:hi]].any(axis=1)
    ids = active.tolist()
    return dict(zip(ids, sizes.tolist())), dict(zip(ids, hits.tolist()))


def _sigma_for(p: ParamSet, level: int | None) -> float:
    if level is None:
        return p.sigma[-1]
    if not 1 <= level <= p.L:
        raise ValueError(f"level {level} outside [1, {p.L}]")
    return 0.0 if level == 1 else p.sigma[level - 2]


@dataclass
class Classification:
    spoilers: set[int]
    spoiled_vertices: set[int]
    spoiled_edges: list[tuple[int, int]]
    size_threshold: float
    neighbour_threshold: float


def classify(
    g: DirectedTranscriptGraph,
    p: ParamSet,
    level: int | None = None,
    a_r: np.ndarray | None = None,
) -> Classification:
    """Spoilers, spoiled vertices and spoiled edges.

    ``a_r`` is an optional boolean mask of the ``A_r`` vertices; without it
    every directed edge is a candidate spoiled edge.
    """
    ok = _edge_ok(g, level)
    sig = _sigma_for(p, level)
    size_thr = p.n ** (p.delta - 2 * sig)
    nb_thr = p.n ** sig / 3
    spoilers = set(g.src[ok & g.spoiler_edge].tolist()) | set(g.dst[ok & g.spoiler_edge].tolist())
    active = set(g.src[ok].tolist()) | set(g.dst[ok].tolist())
    if size_thr <= 1:
        spoiled = set(range(g.n))
    else:
        sizes, touches = shallow_sizes(g, level, marked=spoilers)
        spoiled = {v for v in active if sizes.get(v, 1) >= size_thr or touches.get(v, False)}
    nb_count: Counter[int] = Counter()
    for a, b in zip(g.src[ok].tolist(), g.dst[ok].tolist()):
        if b in spoiled:
            nb_count[a] += 1
        if a in spoiled:
            nb_count[b] += 1
    edges = []
    for a, b in zip(g.src[ok].tolist(), g.dst[ok].tolist()):
        if a_r is not None and not a_r[a]:
            continue
        if b in spoiled or nb_count[a] >= nb_thr:
            edges.append((a, b))
    return Classification(spoilers, spoiled, edges, size_thr, nb_thr)


def discovery_stats(t: Transcript, p: ParamSet, *, seed: int = 0, view: PrivilegedView | None = None) -> dict:
    g = orient(t, seed, view)
    indeg = g.indegree()
    active = set(g.src.tolist()) | set(g.dst.tolist())
    sizes = Counter(shallow_sizes(g)[0].values())
    return {
        "queries": int(len(t)),
        "edges_found": int(len(g)),
        "real_edges_found": int(g.real.sum()),
        "inner_edges_found": int(np.count_nonzero(g.level < p.L)) if view is not None else None,
        "pseudo_ge2": int(np.count_nonzero(t.pseudo >= 2)),
        "spoilers": len(g.spoilers),
        "max_indegree": int(indeg.max()) if len(indeg) else 0,
        "indegree_bound": indegree_bound(p.n),
        "indegree_histogram": {int(k): int(c) for k, c in sorted(Counter(indeg[list(active)].tolist()).items())} if active else {},
        "shallow_size_histogram": {int(k): int(c) for k, c in sorted(sizes.items())},
    }


def histogram_csv(hist: dict[int, int], label: str) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([label, "count"])
    for k, c in sorted(hist.items()):
        w.writerow([k, c])
    return buf.getvalue()
