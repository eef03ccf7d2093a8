"""Acceptance gate: one function per criterion, each returning (ok, summary).

Run under pytest for the per-criterion summary lines, or directly with
``python tests/test_acceptance.py``.
"""
from __future__ import annotations

import math
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
from scipy import stats

sys.path.insert(0, str(Path(__file__).parent))
from conftest import ACCEPTANCE, brute_matching, random_bipartite  # noqa: E402

from matchgap.analysis import discovery_stats, indegree_bound  # noqa: E402
from matchgap.construction import build_instance  # noqa: E402
from matchgap.emd import emd_exact, from_fractions, verify_reduction  # noqa: E402
from matchgap.estimators import EstimatorSpec, distinguishing_experiment  # noqa: E402
from matchgap.matching import certify_gap, is_vertex_cover, max_matching  # noqa: E402
from matchgap.oracle import Model, Oracle, answer_pairs, query_budget_for  # noqa: E402
from matchgap.params import PRESETS, desk_preset, g_properties, theoretical_preset  # noqa: E402
from matchgap.sampler import SimpleGraph, pair_distribution, real_degree, sample_simple  # noqa: E402

SEEDS = 200


def _pooled_chisquare(obs: np.ndarray, exp: np.ndarray, min_exp: float = 5.0):
    """Chi-square after merging adjacent bins until each expects >= min_exp."""
    o_bins, e_bins = [], []
    acc_o = acc_e = 0.0
    for o, e in zip(obs, exp):
        acc_o += o
        acc_e += e
        if acc_e >= min_exp:
            o_bins.append(acc_o)
            e_bins.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0 or acc_o > 0:
        if o_bins:
            o_bins[-1] += acc_o
            e_bins[-1] += acc_e
        else:
            o_bins.append(acc_o)
            e_bins.append(acc_e)
    o_arr, e_arr = np.array(o_bins), np.array(e_bins)
    e_arr *= o_arr.sum() / e_arr.sum()
    return stats.chisquare(o_arr, e_arr)


def criterion_1():
    worst = {}
    ok = True
    slow = 0.0
    for name in sorted(PRESETS):
        p = desk_preset(name)
        bound = p.half - p.N1 / 2
        margin = math.inf
        for s in range(SEEDS):
            t0 = time.perf_counter()
            inst = build_instance(p, False, s)
            g = sample_simple(inst)
            rep = certify_gap(inst, g)
            slow = max(slow, time.perf_counter() - t0)
            ok &= rep.holds and rep.cover_valid and rep.mu <= bound
            margin = min(margin, bound - rep.mu)
        worst[name] = margin
    ok &= slow < 1.0
    summary = ", ".join(f"{k} min slack {v:g}" for k, v in worst.items())
    return ok, f"NO gap certified on {SEEDS} seeds x {len(PRESETS)} presets ({summary}); slowest seed {slow:.2f}s"


def criterion_2():
    p = desk_preset("er-L1")
    perfect = 0
    for s in range(SEEDS):
        inst = build_instance(p, True, s)
        perfect += max_matching(sample_simple(inst), inst.part).size == p.half
    freq = perfect / SEEDS
    return freq >= 0.9, f"er-L1 YES perfect matching in {perfect}/{SEEDS} seeds ({freq:.3f})"


def criterion_3():
    rng = np.random.default_rng(3)
    good = 0
    for _ in range(100):
        k = int(rng.integers(1, 26))
        edges = random_bipartite(rng, k, k, float(rng.uniform(0.02, 0.4)))
        g = SimpleGraph(2 * k, np.array([(a, k + b) for a, b in edges], dtype=np.int64).reshape(-1, 2))
        good += verify_reduction(g, np.array([0] * k + [1] * k)).holds
    p = desk_preset("tiny-L1")
    inst_good = 0
    for s in range(50):
        inst = build_instance(p, bool(s & 1), 1000 + s)
        rep = verify_reduction(sample_simple(inst), inst.part)
        inst_good += rep.holds and rep.emd == Fraction(2 * rep.n - rep.mu, 2 * rep.n)
    return good == 100 and inst_good == 50, f"exact identity on {good}/100 random graphs and {inst_good}/50 instances"


def _pick_pair(inst, kind_x: str, kind_y: str):
    codes = inst.tables[0].codes
    for u in range(inst.n):
        if codes[inst.code_of[0, u]].kind != kind_x:
            continue
        for v in range(inst.n):
            if v != u and codes[inst.code_of[0, v]].kind == kind_y:
                d = pair_distribution(inst, u, v)
                if d.level and d.density > 0:
                    return u, v, d
    raise LookupError("no such gadget pair")


def criterion_4(draws: int = 10_000):
    p = desk_preset("er-L1")
    inst = build_instance(p, False, 0)
    u, v, d = _pick_pair(inst, "D", "D")
    counts = np.array([answer_pairs(inst, [u], [v], seed)[1][0] for seed in range(draws)])
    top = int(counts.max()) + 1
    pmf = stats.binom.pmf(np.arange(top), d.m, d.q)
    exp = np.append(pmf, stats.binom.sf(top - 1, d.m, d.q)) * draws
    obs = np.append(np.bincount(counts, minlength=top), 0)
    chi = _pooled_chisquare(obs, exp)
    se = math.sqrt(d.density * (1 - d.q) / draws) if d.density else 0.0
    z = abs(counts.mean() - d.density) / se
    ok = chi.pvalue > 1e-3 and z <= 3
    return ok, f"D-D pair m={d.m} q={d.q:.3g}: chi2 p={chi.pvalue:.3f}, mean {counts.mean():.4f} vs {d.density:.4f} ({z:.2f} SE)"


def criterion_5(draws: int = 10_000):
    p = desk_preset("tiny-L1")
    inst = build_instance(p, False, 0)
    codes = inst.tables[0].codes

    def first(kind):
        return next(v for v in range(inst.n) if codes[inst.code_of[0, v]].kind == kind)

    a, b = first("A"), first("D")
    ea, eb = inst.expected_degree(a), inst.expected_degree(b)
    da = np.array([real_degree(inst, a, s, level=1) for s in range(draws)])
    db = np.array([real_degree(inst, b, s, level=1) for s in range(draws)])
    top = int(max(da.max(), db.max())) + 1
    ca = np.bincount(da, minlength=top)
    cb = np.bincount(db, minlength=top)
    keep_a, keep_b = [], []
    acc_a = acc_b = 0
    for x, y in zip(ca, cb):
        acc_a += x
        acc_b += y
        if acc_a + acc_b >= 10:
            keep_a.append(acc_a)
            keep_b.append(acc_b)
            acc_a = acc_b = 0
    keep_a[-1] += acc_a
    keep_b[-1] += acc_b
    res = stats.chi2_contingency(np.array([keep_a, keep_b]))
    ok = abs(ea - eb) < 1e-9 and res.pvalue > 1e-3
    return ok, f"A vs D vertex (expected degree {ea:.4f}): two-sample chi2 p={res.pvalue:.3f}"


_SCALE_CACHE: dict[str, list[dict]] = {}


def _scale_runs(name: str, runs: int = 30) -> list[dict]:
    if name not in _SCALE_CACHE:
        p = desk_preset(name)
        spec = EstimatorSpec("random-pair", query_budget_for(p.n, p.delta))
        _, ts = distinguishing_experiment(p, spec, runs, seed=17, keep_transcripts=True)
        _SCALE_CACHE[name] = [discovery_stats(t, p, seed=k) for k, t in enumerate(ts)]
    return _SCALE_CACHE[name]


def criterion_6():
    small, large = _scale_runs("scale-L1-n"), _scale_runs("scale-L1-2n")
    f_small = np.median([s["pseudo_ge2"] / s["queries"] for s in small])
    f_large = np.median([s["pseudo_ge2"] / s["queries"] for s in large])
    return f_large < f_small, f"median per-query pseudo>=2 frequency {f_small:.3g} at n=2024, {f_large:.3g} at n=4048"


def criterion_7():
    ps, pl = desk_preset("scale-L1-n"), desk_preset("scale-L1-2n")
    small, large = _scale_runs("scale-L1-n"), _scale_runs("scale-L1-2n")
    within = sum(s["max_indegree"] <= indegree_bound(ps.n) for s in small)
    within += sum(s["max_indegree"] <= indegree_bound(pl.n) for s in large)
    frac = within / (len(small) + len(large))
    e_s = np.median([s["edges_found"] for s in small])
    e_l = np.median([s["edges_found"] for s in large])
    slope = math.log(e_l / e_s) / math.log(pl.n / ps.n)
    target = 1 - ps.delta + ps.sigma[-1]
    ok = frac >= 0.95 and abs(slope - target) <= 0.15
    return ok, f"indegree bound met in {frac:.2%} of runs; edges_found exponent {slope:.3f} vs {target:.3f}"


def criterion_8(schedules: int = 100_000):
    inst = build_instance(desk_preset("tiny-L1"), True, 4)
    n = inst.n
    rng = np.random.default_rng(8)
    pool_u = rng.integers(0, n, 400)
    pool_v = (pool_u + rng.integers(1, n, 400)) % n
    ref_ps, ref_rl, _, _ = answer_pairs(inst, pool_u, pool_v)
    mismatches = 0
    for _ in range(schedules):
        k = int(rng.integers(1, 6))
        idx = rng.integers(0, 400, k)
        flip = rng.random(k) < 0.5
        us = np.where(flip, pool_v[idx], pool_u[idx])
        vs = np.where(flip, pool_u[idx], pool_v[idx])
        o = Oracle(inst, k)
        ps, rl = o.query_batch(us, vs)
        mismatches += int(np.count_nonzero((ps != ref_ps[idx]) | (rl != ref_rl[idx])))
    iu, ju = np.triu_indices(n, k=1)
    simple = Oracle(inst, len(iu), Model.SIMPLE).query_batch(iu, ju)
    _, real = Oracle(inst, len(iu)).query_batch(iu, ju)
    edges = sample_simple(inst).edge_set()
    sampled = np.array([(int(a), int(b)) in edges for a, b in zip(iu, ju)])
    agree = np.array_equal(simple, real >= 1) and np.array_equal(simple, sampled)
    ok = mismatches == 0 and agree
    return ok, f"{schedules} schedules, {mismatches} mismatches; SIMPLE == real>=1 on all {len(iu)} pairs: {agree}"


def criterion_9():
    rng = np.random.default_rng(9)
    hk_ok = 0
    for _ in range(50):
        nl = int(rng.integers(1, 13))
        nr = int(rng.integers(1, 41 - nl))
        edges = random_bipartite(rng, nl, nr, float(rng.uniform(0.05, 0.5)))
        part = np.array([0] * nl + [1] * nr)
        g = SimpleGraph(nl + nr, np.array([(a, nl + b) for a, b in edges], dtype=np.int64).reshape(-1, 2))
        res = max_matching(g, part)
        hk_ok += res.size == brute_matching(nl, nr, edges) and is_vertex_cover(g, res.cover)
    emd_ok = 0
    for _ in range(20):
        k = int(rng.integers(1, 7))
        edges = random_bipartite(rng, k, k, float(rng.uniform(0.1, 0.6)))
        dist = [[Fraction(2)] * k for _ in range(k)]
        for a, b in edges:
            dist[a][b] = Fraction(1)
        w = [Fraction(1, k)] * k
        got = emd_exact(from_fractions(w, w, [[x / 2 for x in row] for row in dist]))
        emd_ok += got == Fraction(2 * k - brute_matching(k, k, edges), 2 * k)
    return hk_ok == 50 and emd_ok == 20, f"HK = brute force on {hk_ok}/50; flow EMD = enumeration on {emd_ok}/20"


def criterion_10():
    import warnings

    res = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for delta in (1.0, 2.0):
            res[delta] = g_properties(theoretical_preset(delta))
    ok = all(all(v.values()) for v in res.values())
    return ok, "; ".join(f"delta={d:g}: " + ", ".join(f"{k}={v}" for k, v in r.items()) for d, r in res.items())


CRITERIA = {k: globals()[f"criterion_{k}"] for k in range(1, 11)}


@pytest.mark.parametrize("k", sorted(CRITERIA))
def test_acceptance(k):
    ok, msg = CRITERIA[k]()
    ACCEPTANCE[k] = (bool(ok), msg)
    print(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {msg}")
    assert ok, msg


if __name__ == "__main__":
    failed = 0
    for k, fn in CRITERIA.items():
        t0 = time.perf_counter()
        ok, msg = fn()
        failed += not ok
        print(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {msg}  [{time.perf_counter() - t0:.1f}s]", flush=True)
    sys.exit(1 if failed else 0)
