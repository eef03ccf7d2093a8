import os
import subprocess
import sys

import numpy as np
import pytest

from matchgap import _backend
from matchgap._rng import Stream, binom_cdf, stream_key

BACKENDS = _backend.available_backends()
needs_compiled = pytest.mark.skipif("compiled" not in BACKENDS, reason="extension not built")


@needs_compiled
@pytest.mark.parametrize("m,q", [(3, 0.2), (600, 1 / 700), (40, 0.9)])
def test_sample_block_identical(m, q):
    key = stream_key(8, Stream.REAL)
    xs = np.arange(0, 300, 3, dtype=np.int64)
    ys = np.arange(1000, 1250, dtype=np.int64)
    cdf = binom_cdf(m, q)
    a = BACKENDS["python"].sample_block(key, xs, ys, cdf)
    b = BACKENDS["compiled"].sample_block(key, xs, ys, cdf)
    for x, y in zip(a, b):
        assert np.array_equal(np.asarray(x), np.asarray(y))


@needs_compiled
@pytest.mark.parametrize("seed", range(8))
def test_hopcroft_karp_identical(seed):
    rng = np.random.default_rng(seed)
    nl, nr = int(rng.integers(1, 60)), int(rng.integers(1, 60))
    mask = rng.random((nl, nr)) < 0.08
    ll, rr = np.nonzero(mask)
    indptr = np.concatenate([[0], np.cumsum(mask.sum(axis=1))]).astype(np.int64)
    a = BACKENDS["python"].hopcroft_karp(nl, nr, indptr, rr.astype(np.int64))
    b = BACKENDS["compiled"].hopcroft_karp(nl, nr, indptr, rr.astype(np.int64))
    assert a[0] == b[0]
    for x, y in zip(a[1:], b[1:]):
        assert np.array_equal(np.asarray(x), np.asarray(y))


@needs_compiled
@pytest.mark.parametrize("seed", range(8))
def test_transport_identical_cost(seed):
    rng = np.random.default_rng(seed)
    k, j = int(rng.integers(1, 9)), int(rng.integers(1, 9))
    supply = rng.integers(1, 20, k)
    demand = rng.multinomial(int(supply.sum()), np.ones(j) / j).astype(np.int64)
    cost = rng.integers(0, 50, (k, j)).astype(np.int64)
    ta, fa = BACKENDS["python"].transport_ssp(supply.astype(np.int64), demand, cost)
    tb, fb = BACKENDS["compiled"].transport_ssp(supply.astype(np.int64), demand, cost)
    assert ta == tb
    for f in (np.asarray(fa), np.asarray(fb)):
        assert np.array_equal(f.sum(axis=1), supply) and np.array_equal(f.sum(axis=0), demand)
        assert int((f * cost).sum()) == ta


def test_pure_switch():
    env = dict(os.environ, MATCHGAP_PURE="1")
    out = subprocess.run([sys.executable, "-c", "from matchgap import _backend; print(_backend.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
