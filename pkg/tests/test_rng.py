import numpy as np
import pytest
from scipy.stats import binom

from matchgap import _rng


def test_mix64_matches_published_splitmix64_outputs():
    # first outputs of splitmix64 started from state 0
    assert _rng.mix64(_rng.GOLDEN) == 0xE220A8397B1DCDAF
    assert _rng.mix64(2 * _rng.GOLDEN & _rng.MASK64) == 0x6E789E6AA1B965F4


def test_array_hash_matches_scalar():
    rng = np.random.default_rng(0)
    us = rng.integers(0, 10**6, 500)
    vs = rng.integers(0, 10**6, 500)
    key = _rng.stream_key(123, _rng.Stream.REAL)
    arr = _rng.uniform_array(key, _rng.pair_key_array(us, vs), 3)
    scalar = [_rng.uniform(key, _rng.pair_key(int(a), int(b)), 3) for a, b in zip(us, vs)]
    assert np.array_equal(arr, np.array(scalar))


def test_pair_key_is_symmetric():
    assert _rng.pair_key(3, 9) == _rng.pair_key(9, 3)


def test_uniform_range_and_mean():
    key = _rng.stream_key(5, _rng.Stream.PSEUDO_GROUND)
    u = _rng.uniform_array(key, np.arange(200_000, dtype=np.uint64))
    assert u.min() >= 0.0 and u.max() < 1.0
    assert abs(u.mean() - 0.5) < 0.005


def test_streams_are_distinct():
    a = _rng.stream_key(1, _rng.Stream.REAL)
    b = _rng.stream_key(1, _rng.Stream.PSEUDO_LABELLED)
    c = _rng.stream_key(2, _rng.Stream.REAL)
    assert len({a, b, c}) == 3


@pytest.mark.parametrize("m,q", [(1, 0.3), (10, 0.5), (550, 1 / 648), (1017, 1 / 2200), (40, 0.97)])
def test_binomial_table_matches_scipy(m, q):
    cdf = _rng.binom_cdf(m, q)
    ref = binom.cdf(np.arange(len(cdf)), m, q)
    assert np.allclose(cdf[:-1], ref[:-1], rtol=1e-10, atol=1e-14)
    assert cdf[-1] == 1.0
    assert binom.sf(len(cdf) - 2, m, q) < 1e-15 or len(cdf) == m + 1


def test_binomial_degenerate_tables():
    assert list(_rng.binom_cdf(0, 0.4)) == [1.0]
    assert list(_rng.binom_cdf(5, 0.0)) == [1.0]
    assert _rng.binom_from_uniform(0.0, 4, 1.0) == 4
    assert _rng.binom_from_uniform(0.999, 4, 1.0) == 4


def test_inverse_cdf_sampling_law():
    u = _rng.uniform_array(_rng.stream_key(9, _rng.Stream.REAL), np.arange(100_000, dtype=np.uint64))
    x = _rng.binom_from_uniform_array(u, 20, 0.1)
    assert abs(x.mean() - 2.0) < 0.03
    assert abs(x.var() - 1.8) < 0.05
