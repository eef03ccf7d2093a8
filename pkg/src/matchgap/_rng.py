"""Counter-based randomness keyed by (seed, stream, pair, index).

Every random quantity attached to a vertex pair is a pure function of the
pair, so sampling order and query order never change an outcome.
"""
from __future__ import annotations

import math
from enum import IntEnum
from functools import lru_cache

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
INV_2_53 = 1.0 / 9007199254740992.0

_U_GOLDEN = np.uint64(GOLDEN)
_U_M1 = np.uint64(_M1)
_U_M2 = np.uint64(_M2)
_S30, _S27, _S31 = np.uint64(30), np.uint64(27), np.uint64(31)
_S11, _S32 = np.uint64(11), np.uint64(32)


class Stream(IntEnum):
    REAL = 1
    PSEUDO_LABELLED = 2
    PSEUDO_GROUND = 3
    LEVEL = 4
    ORIENT = 5


def mix64(z: int) -> int:
    """splitmix64 finaliser on a Python int."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def mix64_array(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.uint64)
    z = (z ^ (z >> _S30)) * _U_M1
    z = (z ^ (z >> _S27)) * _U_M2
    return z ^ (z >> _S31)


def stream_key(seed: int, tag: int) -> int:
    return mix64((mix64(seed & MASK64) + tag * GOLDEN) & MASK64)


def pair_key(u: int, v: int) -> int:
    a, b = (u, v) if u < v else (v, u)
    return (a << 32) | b


def pair_key_array(us: np.ndarray, vs: np.ndarray) -> np.ndarray:
    us = np.asarray(us, dtype=np.uint64)
    vs = np.asarray(vs, dtype=np.uint64)
    return (np.minimum(us, vs) << _S32) | np.maximum(us, vs)


def draw(key: int, pkey: int, idx: int = 0) -> int:
    return mix64(key ^ mix64((pkey + idx * GOLDEN) & MASK64))


def uniform(key: int, pkey: int, idx: int = 0) -> float:
    return (draw(key, pkey, idx) >> 11) * INV_2_53


def uniform_array(key: int, pkeys: np.ndarray, idx: np.ndarray | int = 0) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = np.asarray(pkeys, dtype=np.uint64) + np.asarray(idx, dtype=np.uint64) * _U_GOLDEN
        h = mix64_array(np.uint64(key) ^ mix64_array(z))
    return (h >> _S11).astype(np.float64) * INV_2_53


@lru_cache(maxsize=4096)
def _cdf_cached(m: int, q: float) -> np.ndarray:
    if m <= 0 or q <= 0.0:
        return np.ones(1)
    if q >= 1.0:
        out = np.zeros(m + 1)
        out[-1] = 1.0
        return out
    lq, lp = math.log(q), math.log1p(-q)
    base = math.lgamma(m + 1)
    mean = m * q
    logs = []
    for k in range(m + 1):
        lpmf = base - math.lgamma(k + 1) - math.lgamma(m - k + 1) + k * lq + (m - k) * lp
        logs.append(lpmf)
        if k > mean and lpmf < -50.0:
            break
    pmf = np.exp(np.array(logs))
    pmf /= pmf.sum() if len(logs) == m + 1 else 1.0
    lower = np.cumsum(pmf)
    # upper half from the survival sum so the tail keeps full precision
    sf = np.concatenate([np.cumsum(pmf[::-1])[::-1][1:], [0.0]])
    ks = np.arange(len(pmf))
    out = np.where(ks < mean, lower, 1.0 - sf)
    out = np.minimum(np.maximum.accumulate(out), 1.0)
    out[-1] = 1.0
    out.setflags(write=False)
    return out


def binom_cdf(m: int, q: float) -> np.ndarray:
    """Truncated CDF table of Binomial(m, q); the last entry is exactly 1.

    A uniform ``u`` maps to the count ``#{k : cdf[k] <= u}``.
    """
    return _cdf_cached(int(m), float(q))


def binom_from_uniform(u: float, m: int, q: float) -> int:
    cdf = binom_cdf(m, q)
    return int(np.searchsorted(cdf, u, side="right"))


def binom_from_uniform_array(u: np.ndarray, m: int, q: float) -> np.ndarray:
    cdf = binom_cdf(m, q)
    return np.searchsorted(cdf, u, side="right").astype(np.int64)
