# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Mirrors ``_fallback.py`` exactly."""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t, uint64_t
from libcpp.vector cimport vector

cnp.import_array()

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef double INV_2_53 = 1.0 / 9007199254740992.0


cdef inline uint64_t mix64(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


def sample_block(uint64_t key, xs, ys, cdf):
    cdef const int64_t[::1] X = np.ascontiguousarray(xs, dtype=np.int64)
    cdef const int64_t[::1] Y = np.ascontiguousarray(ys, dtype=np.int64)
    cdef const double[::1] F = np.ascontiguousarray(cdf, dtype=np.float64)
    cdef Py_ssize_t nx = X.shape[0], ny = Y.shape[0], nf = F.shape[0]
    cdef Py_ssize_t a, b, k
    cdef int64_t x, y, lo, hi
    cdef uint64_t h
    cdef double u, f0
    cdef vector[int64_t] ou, ov, oc
    if nx > 0 and ny > 0 and nf > 1:
        f0 = F[0]
        with nogil:
            for a in range(nx):
                x = X[a]
                for b in range(ny):
                    y = Y[b]
                    if x < y:
                        lo = x
                        hi = y
                    else:
                        lo = y
                        hi = x
                    h = mix64(key ^ mix64((<uint64_t>lo << 32) | <uint64_t>hi))
                    u = <double>(h >> 11) * INV_2_53
                    if u < f0:
                        continue
                    k = 1
                    while u >= F[k]:
                        k += 1
                    ou.push_back(x)
                    ov.push_back(y)
                    oc.push_back(k)
    cdef Py_ssize_t n = ou.size()
    us = np.empty(n, dtype=np.int64)
    vs = np.empty(n, dtype=np.int64)
    cs = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] us_v = us, vs_v = vs, cs_v = cs
    for a in range(n):
        us_v[a] = ou[a]
        vs_v[a] = ov[a]
        cs_v[a] = oc[a]
    return us, vs, cs


def hopcroft_karp(Py_ssize_t n_left, Py_ssize_t n_right, indptr_in, indices_in):
    cdef const int64_t[::1] indptr = np.ascontiguousarray(indptr_in, dtype=np.int64)
    cdef const int64_t[::1] indices = np.ascontiguousarray(indices_in, dtype=np.int64)
    ml = np.full(n_left, -1, dtype=np.int64)
    mr = np.full(n_right, -1, dtype=np.int64)
    cdef int64_t[::1] match_l = ml, match_r = mr
    cdef int64_t[::1] dist = np.empty(max(n_left, 1), dtype=np.int64)
    cdef int64_t[::1] queue = np.empty(max(n_left, 1), dtype=np.int64)
    cdef int64_t[::1] it = np.empty(max(n_left, 1), dtype=np.int64)
    cdef int64_t[::1] stack = np.empty(max(n_left, 1) + 1, dtype=np.int64)
    cdef int64_t inf = n_left + n_right + 1
    cdef Py_ssize_t size = 0, head, tail, u, e, w, v, root, top, s, x, y, vy
    cdef bint found
    with nogil:
        while True:
            tail = 0
            for u in range(n_left):
                if match_l[u] == -1:
                    dist[u] = 0
                    queue[tail] = u
                    tail += 1
                else:
                    dist[u] = inf
            found = False
            head = 0
            while head < tail:
                u = queue[head]
                head += 1
                for e in range(indptr[u], indptr[u + 1]):
                    w = match_r[indices[e]]
                    if w == -1:
                        found = True
                    elif dist[w] == inf:
                        dist[w] = dist[u] + 1
                        queue[tail] = w
                        tail += 1
            if not found:
                break
            for u in range(n_left):
                it[u] = indptr[u]
            for root in range(n_left):
                if match_l[root] != -1:
                    continue
                top = 0
                stack[0] = root
                while top >= 0:
                    x = stack[top]
                    if it[x] == indptr[x + 1]:
                        dist[x] = inf
                        top -= 1
                        if top >= 0:
                            it[stack[top]] += 1
                        continue
                    v = indices[it[x]]
                    w = match_r[v]
                    if w == -1:
                        for s in range(top + 1):
                            y = stack[s]
                            vy = indices[it[y]]
                            match_l[y] = vy
                            match_r[vy] = y
                        size += 1
                        break
                    if dist[w] == dist[x] + 1:
                        top += 1
                        stack[top] = w
                    else:
                        it[x] += 1
    return size, ml, mr


def transport_ssp(supply, demand, cost):
    a_np = np.array(supply, dtype=np.int64)
    b_np = np.array(demand, dtype=np.int64)
    if a_np.sum() != b_np.sum():
        raise ValueError("supply and demand totals differ")
    cdef const int64_t[:, ::1] c = np.ascontiguousarray(cost, dtype=np.int64)
    cdef Py_ssize_t ns = a_np.shape[0], nt = b_np.shape[0]
    cdef Py_ssize_t nv = ns + nt + 2, sink = nv - 1
    flow_np = np.zeros((ns, nt), dtype=np.int64)
    cdef int64_t[:, ::1] flow = flow_np
    cdef int64_t[::1] rem_a = a_np.copy(), rem_b = b_np.copy()
    cdef int64_t[::1] pot = np.zeros(nv, dtype=np.int64)
    cdef int64_t[::1] dist = np.empty(nv, dtype=np.int64)
    cdef int64_t[::1] prev = np.empty(nv, dtype=np.int64)
    cdef char[::1] done = np.zeros(nv, dtype=np.int8)
    cdef int64_t big = 1 << 62
    cdef int64_t remaining = a_np.sum(), best, nd, dx, d, reach_max, total = 0
    cdef Py_ssize_t x, i, j, k, t, y
    cdef bint ok = True
    with nogil:
        while remaining > 0:
            for k in range(nv):
                dist[k] = big
                prev[k] = -1
                done[k] = 0
            dist[0] = 0
            while True:
                x = -1
                best = big
                for k in range(nv):
                    if not done[k] and dist[k] < best:
                        best = dist[k]
                        x = k
                if x < 0:
                    break
                done[x] = 1
                dx = dist[x]
                if x == 0:
                    for i in range(ns):
                        if rem_a[i] > 0:
                            nd = dx + pot[0] - pot[i + 1]
                            if nd < dist[i + 1]:
                                dist[i + 1] = nd
                                prev[i + 1] = 0
                elif x <= ns:
                    i = x - 1
                    for j in range(nt):
                        nd = dx + c[i, j] + pot[x] - pot[ns + 1 + j]
                        if nd < dist[ns + 1 + j]:
                            dist[ns + 1 + j] = nd
                            prev[ns + 1 + j] = x
                elif x < sink:
                    j = x - ns - 1
                    for i in range(ns):
                        if flow[i, j] > 0:
                            nd = dx - c[i, j] + pot[x] - pot[i + 1]
                            if nd < dist[i + 1]:
                                dist[i + 1] = nd
                                prev[i + 1] = x
                    if rem_b[j] > 0:
                        nd = dx + pot[x] - pot[sink]
                        if nd < dist[sink]:
                            dist[sink] = nd
                            prev[sink] = x
            if not done[sink]:
                ok = False
                break
            reach_max = 0
            for k in range(nv):
                if done[k] and dist[k] > reach_max:
                    reach_max = dist[k]
            for k in range(nv):
                if done[k]:
                    pot[k] += dist[k]
                else:
                    pot[k] += reach_max
            t = prev[sink]
            d = rem_b[t - ns - 1]
            x = t
            while True:
                y = prev[x]
                if y == 0:
                    if rem_a[x - 1] < d:
                        d = rem_a[x - 1]
                    break
                if x <= ns and flow[x - 1, y - ns - 1] < d:
                    d = flow[x - 1, y - ns - 1]
                x = y
            x = t
            while True:
                y = prev[x]
                if y == 0:
                    rem_a[x - 1] -= d
                    break
                if x > ns:
                    flow[y - 1, x - ns - 1] += d
                else:
                    flow[x - 1, y - ns - 1] -= d
                x = y
            rem_b[t - ns - 1] -= d
            remaining -= d
        if ok:
            for i in range(ns):
                for j in range(nt):
                    total += flow[i, j] * c[i, j]
    if not ok:
        raise ValueError("infeasible transport problem")
    return int(total), flow_np
