"""numpy implementations of the hot kernels.

Used when the compiled extension is unavailable. Results are bit-identical
to ``_kernels.pyx``.
"""
from __future__ import annotations

import numpy as np

from ._rng import INV_2_53, mix64_array, pair_key_array

_S11 = np.uint64(11)
_CHUNK = 1 << 20


def sample_block(key: int, xs: np.ndarray, ys: np.ndarray, cdf: np.ndarray):
    """Draw the count of every pair in ``xs x ys``; return the nonzero ones."""
    xs = np.asarray(xs, dtype=np.int64)
    ys = np.asarray(ys, dtype=np.int64)
    cdf = np.asarray(cdf, dtype=np.float64)
    out_u, out_v, out_c = [], [], []
    if len(xs) == 0 or len(ys) == 0 or len(cdf) == 1:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty.copy(), empty.copy()
    rows = max(1, _CHUNK // len(ys))
    k = np.uint64(key)
    for start in range(0, len(xs), rows):
        x = xs[start:start + rows]
        uu = np.repeat(x, len(ys))
        vv = np.tile(ys, len(x))
        with np.errstate(over="ignore"):
            h = mix64_array(k ^ mix64_array(pair_key_array(uu, vv)))
        u = (h >> _S11).astype(np.float64) * INV_2_53
        hit = u >= cdf[0]
        if not hit.any():
            continue
        c = np.searchsorted(cdf, u[hit], side="right")
        out_u.append(uu[hit])
        out_v.append(vv[hit])
        out_c.append(c.astype(np.int64))
    if not out_u:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty.copy(), empty.copy()
    return np.concatenate(out_u), np.concatenate(out_v), np.concatenate(out_c)


def hopcroft_karp(n_left: int, n_right: int, indptr: np.ndarray, indices: np.ndarray):
    """Maximum bipartite matching on a CSR left-to-right adjacency.

    Returns ``(size, match_left, match_right)`` with -1 for unmatched.
    """
    indptr = [int(x) for x in indptr]
    indices = [int(x) for x in indices]
    inf = n_left + n_right + 1
    match_l = [-1] * n_left
    match_r = [-1] * n_right
    dist = [inf] * n_left
    size = 0
    while True:
        queue = []
        for u in range(n_left):
            if match_l[u] == -1:
                dist[u] = 0
                queue.append(u)
            else:
                dist[u] = inf
        found = False
        head = 0
        while head < len(queue):
            u = queue[head]
            head += 1
            for e in range(indptr[u], indptr[u + 1]):
                w = match_r[indices[e]]
                if w == -1:
                    found = True
                elif dist[w] == inf:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        if not found:
            break
        it = indptr[:-1].copy() if n_left else []
        for root in range(n_left):
            if match_l[root] != -1:
                continue
            stack = [root]
            while stack:
                x = stack[-1]
                if it[x] == indptr[x + 1]:
                    dist[x] = inf
                    stack.pop()
                    if stack:
                        it[stack[-1]] += 1
                    continue
                v = indices[it[x]]
                w = match_r[v]
                if w == -1:
                    for y in stack:
                        vy = indices[it[y]]
                        match_l[y] = vy
                        match_r[vy] = y
                    size += 1
                    break
                if dist[w] == dist[x] + 1:
                    stack.append(w)
                else:
                    it[x] += 1
    return size, np.array(match_l, dtype=np.int64), np.array(match_r, dtype=np.int64)


def transport_ssp(supply: np.ndarray, demand: np.ndarray, cost: np.ndarray):
    """Exact min-cost transportation by successive shortest paths.

    Integer supplies, demands and nonnegative integer costs. Returns
    ``(total_cost, flow)``.
    """
    a = np.array(supply, dtype=np.int64)
    b = np.array(demand, dtype=np.int64)
    c = np.ascontiguousarray(cost, dtype=np.int64)
    ns, nt = len(a), len(b)
    if a.sum() != b.sum():
        raise ValueError("supply and demand totals differ")
    flow = np.zeros((ns, nt), dtype=np.int64)
    # node layout: 0 = super source, 1..ns sources, ns+1..ns+nt sinks, last = super sink
    nv = ns + nt + 2
    sink = nv - 1
    big = np.int64(1 << 62)
    pot = np.zeros(nv, dtype=np.int64)
    rem_a, rem_b = a.copy(), b.copy()
    src = slice(1, ns + 1)
    snk = slice(ns + 1, ns + nt + 1)
    while rem_a.sum() > 0:
        dist = np.full(nv, big, dtype=np.int64)
        prev = np.full(nv, -1, dtype=np.int64)
        done = np.zeros(nv, dtype=bool)
        dist[0] = 0
        while True:
            masked = np.where(done, big, dist)
            x = int(np.argmin(masked))
            if masked[x] >= big:
                break
            done[x] = True
            dx = dist[x]
            if x == 0:
                live = rem_a > 0
                nd = dx + pot[0] - pot[src]
                better = live & (nd < dist[src])
                idx = np.nonzero(better)[0] + 1
                dist[idx] = nd[better]
                prev[idx] = 0
            elif x <= ns:
                i = x - 1
                nd = dx + c[i] + pot[x] - pot[snk]
                better = nd < dist[snk]
                idx = np.nonzero(better)[0] + ns + 1
                dist[idx] = nd[better]
                prev[idx] = x
            elif x < sink:
                j = x - ns - 1
                live = flow[:, j] > 0
                nd = dx - c[:, j] + pot[x] - pot[src]
                better = live & (nd < dist[src])
                idx = np.nonzero(better)[0] + 1
                dist[idx] = nd[better]
                prev[idx] = x
                if rem_b[j] > 0:
                    nds = dx + pot[x] - pot[sink]
                    if nds < dist[sink]:
                        dist[sink] = nds
                        prev[sink] = x
        if not done[sink]:
            raise ValueError("infeasible transport problem")
        reach_max = dist[done].max()
        pot += np.where(done, dist, reach_max)
        # bottleneck along the path
        t = int(prev[sink])
        d = int(rem_b[t - ns - 1])
        x = t
        while True:
            y = int(prev[x])
            if y == 0:
                d = min(d, int(rem_a[x - 1]))
                break
            if x <= ns:  # reverse edge sink y -> source x
                d = min(d, int(flow[x - 1, y - ns - 1]))
            x = y
        x = t
        while True:
            y = int(prev[x])
            if y == 0:
                rem_a[x - 1] -= d
                break
            if x > ns:
                flow[y - 1, x - ns - 1] += d
            else:
                flow[x - 1, y - ns - 1] -= d
            x = y
        rem_b[t - ns - 1] -= d
    return int((flow * c).sum()), flow
