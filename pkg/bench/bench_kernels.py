"""Time the compiled kernels against the numpy/pure-Python fallback.

    python bench/bench_kernels.py [--repeat 3]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from matchgap import _backend
from matchgap._rng import Stream, binom_cdf, stream_key
from matchgap.construction import build_instance
from matchgap.params import desk_preset


def _best(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    key = stream_key(1, Stream.REAL)
    xs = np.arange(0, 2000, dtype=np.int64)
    ys = np.arange(2000, 4000, dtype=np.int64)
    cdf = binom_cdf(1016, 1 / 2200)
    yield "sample_block 2000x2000", lambda m: m.sample_block(key, xs, ys, cdf)

    p = desk_preset("tiny-L2")
    inst = build_instance(p, True, 0)
    from matchgap.sampler import sample_simple

    g = sample_simple(inst)
    part = inst.part
    left = np.nonzero(part == 0)[0]
    right = np.nonzero(part == 1)[0]
    pos = np.empty(p.n, dtype=np.int64)
    pos[left] = np.arange(len(left))
    pos[right] = np.arange(len(right))
    a, b = g.edges[:, 0], g.edges[:, 1]
    lv = pos[np.where(part[a] == 0, a, b)]
    rv = pos[np.where(part[a] == 0, b, a)]
    order = np.argsort(lv, kind="stable")
    indptr = np.zeros(len(left) + 1, dtype=np.int64)
    np.add.at(indptr, lv + 1, 1)
    indptr = np.cumsum(indptr)
    indices = rv[order].astype(np.int64)
    yield f"hopcroft_karp n={p.n} m={len(g)}", lambda m: m.hopcroft_karp(len(left), len(right), indptr, indices)

    rng = np.random.default_rng(0)
    k = 300
    cost = rng.integers(1, 3, (k, k)).astype(np.int64)
    ones = np.ones(k, dtype=np.int64)
    yield f"transport_ssp {k}x{k}", lambda m: m.transport_ssp(ones, ones, cost)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = _backend.available_backends()
    names = sorted(backends)
    print(f"{'kernel':36s}" + "".join(f"{n:>12s}" for n in names) + ("     speedup" if len(names) > 1 else ""))
    for label, fn in cases():
        t = {n: _best(lambda: fn(backends[n]), args.repeat) for n in names}
        row = f"{label:36s}" + "".join(f"{t[n]:11.4f}s" for n in names)
        if "compiled" in t:
            row += f"{t['python'] / t['compiled']:11.1f}x"
        print(row, flush=True)


if __name__ == "__main__":
    main()
