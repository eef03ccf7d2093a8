"""Query-budgeted matching-size estimators and the distinguishing harness.

Estimators only see a :class:`QueryView`: the vertex count, the budget and
a query function. They never get the instance, its labels or its case.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
from scipy.stats import binomtest

from . import _backend
from .construction import build_instance
from .oracle import BudgetExhausted, Model, Oracle, Transcript
from .params import ParamSet


class QueryView:
    """Blind handle on an oracle: ``n``, ``budget``, ``remaining`` and queries."""

    __slots__ = ("n", "budget", "_remaining", "_batch")

    def __init__(self, n: int, budget: int, remaining: Callable[[], int], batch: Callable):
        self.n = n
        self.budget = budget
        self._remaining = remaining
        self._batch = batch

    @property
    def remaining(self) -> int:
        return self._remaining()

    def query_batch(self, us, vs):
        return self._batch(us, vs)

    def query(self, u: int, v: int) -> tuple[int, int]:
        ps, rl = self._batch([u], [v])
        return int(ps[0]), int(rl[0])


def _view(oracle: Oracle) -> QueryView:
    def batch(us, vs):
        out = oracle.query_batch(us, vs)
        if oracle.model is Model.SIMPLE:
            return out.astype(np.int64), out.astype(np.int64)
        return out

    return QueryView(oracle.n, oracle.budget, lambda: oracle.remaining, batch)


@dataclass(frozen=True)
class EstimatorSpec:
    name: str
    budget: int
    params: dict = field(default_factory=dict)
    seed: int = 0


def _safe_batch(view: QueryView, us: np.ndarray, vs: np.ndarray):
    """Query as much of the batch as the budget allows."""
    k = min(len(us), view.remaining)
    if k <= 0:
        return us[:0], vs[:0], np.empty(0, dtype=np.int64)
    try:
        _, real = view.query_batch(us[:k], vs[:k])
    except BudgetExhausted:  # pragma: no cover - guarded by k
        real = np.zeros(k, dtype=np.int64)
    return us[:k], vs[:k], real


def greedy_matching(n: int, us: np.ndarray, vs: np.ndarray) -> int:
    used = np.zeros(n, dtype=bool)
    size = 0
    for a, b in zip(us.tolist(), vs.tolist()):
        if not used[a] and not used[b]:
            used[a] = used[b] = True
            size += 1
    return size


def _two_colour(n: int, us: np.ndarray, vs: np.ndarray) -> np.ndarray | None:
    adj: list[list[int]] = [[] for _ in range(n)]
    for a, b in zip(us.tolist(), vs.tolist()):
        adj[a].append(b)
        adj[b].append(a)
    col = np.full(n, -1, dtype=np.int8)
    for s in range(n):
        if col[s] >= 0:
            continue
        col[s] = 0
        stack = [s]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if col[y] < 0:
                    col[y] = 1 - col[x]
                    stack.append(y)
                elif col[y] == col[x]:
                    return None
    return col


def exact_matching_size(n: int, us: np.ndarray, vs: np.ndarray) -> int:
    """Maximum matching of a bipartite edge list (sides found by 2-colouring)."""
    if len(us) == 0:
        return 0
    col = _two_colour(n, us, vs)
    if col is None:
        raise ValueError("discovered graph is not bipartite")
    left = np.where(col[us] == 0, us, vs)
    right = np.where(col[us] == 0, vs, us)
    lid = np.nonzero(col == 0)[0]
    rid = np.nonzero(col == 1)[0]
    lpos = np.empty(n, dtype=np.int64)
    lpos[lid] = np.arange(len(lid))
    lpos[rid] = np.arange(len(rid))
    ll, rr = lpos[left], lpos[right]
    order = np.argsort(ll, kind="stable")
    indptr = np.zeros(len(lid) + 1, dtype=np.int64)
    np.add.at(indptr, ll + 1, 1)
    size, _, _ = _backend.hopcroft_karp(len(lid), len(rid), np.cumsum(indptr), rr[order])
    return int(size)


def full_scan(view: QueryView, spec: EstimatorSpec) -> float:
    """Query pairs in lexicographic order; exact when the budget covers all."""
    n = view.n
    found_u, found_v = [], []
    chunk = max(1, int(spec.params.get("chunk", 1 << 16)))
    iu, ju = np.triu_indices(n, k=1)
    for start in range(0, len(iu), chunk):
        if view.remaining <= 0:
            break
        a, b, real = _safe_batch(view, iu[start:start + chunk], ju[start:start + chunk])
        hit = real > 0
        found_u.append(a[hit])
        found_v.append(b[hit])
    us = np.concatenate(found_u) if found_u else np.empty(0, dtype=np.int64)
    vs = np.concatenate(found_v) if found_v else np.empty(0, dtype=np.int64)
    return float(exact_matching_size(n, us, vs))


def induced_subgraph(view: QueryView, spec: EstimatorSpec) -> float:
    """Greedy matching on a random induced subgraph, scaled by ``n / k``."""
    n = view.n
    k = spec.params.get("k")
    if k is None:
        k = int((1 + math.isqrt(1 + 8 * max(view.remaining, 0))) // 2)
    k = int(min(max(k, 0), n))
    if k < 2:
        return 0.0
    rng = np.random.default_rng(spec.seed)
    verts = np.sort(rng.choice(n, size=k, replace=False))
    iu, ju = np.triu_indices(k, k=1)
    a, b, real = _safe_batch(view, verts[iu], verts[ju])
    hit = real > 0
    size = greedy_matching(n, a[hit], b[hit])
    return float(min(size * n / k, n / 2))


def random_pair(view: QueryView, spec: EstimatorSpec) -> float:
    """Greedy matching over uniformly random queried pairs."""
    n = view.n
    q = view.remaining
    if q <= 0 or n < 2:
        return 0.0
    rng = np.random.default_rng(spec.seed)
    a = rng.integers(0, n, size=q)
    b = rng.integers(0, n - 1, size=q)
    b = b + (b >= a)
    a, b, real = _safe_batch(view, a, b)
    hit = real > 0
    return float(greedy_matching(n, a[hit], b[hit]))


ESTIMATORS: dict[str, Callable[[QueryView, EstimatorSpec], float]] = {
    "full-scan": full_scan,
    "induced-subgraph": induced_subgraph,
    "random-pair": random_pair,
}


def run_estimator(spec: EstimatorSpec, oracle: Oracle) -> float:
    if oracle.used:
        raise ValueError("estimators need a fresh oracle")
    if spec.name not in ESTIMATORS:
        raise KeyError(f"unknown estimator {spec.name!r}; known: {sorted(ESTIMATORS)}")
    return ESTIMATORS[spec.name](_view(oracle), spec)


def decide(p: ParamSet, estimate: float) -> bool:
    """YES iff the estimate clears the midpoint of the promised gap."""
    return estimate >= p.decision_threshold()


@dataclass
class TrialRecord:
    trial: int
    case: str
    estimate: float
    decision: str
    correct: bool
    queries_used: int


@dataclass
class ExperimentReport:
    params: str
    estimator: str
    budget: int
    model: str
    seed: int
    trials: int
    successes: int
    success_rate: float
    ci_low: float
    ci_high: float
    records: list[TrialRecord]

    def to_dict(self) -> dict:
        out = asdict(self)
        out.pop("records")
        out["schema"] = "experiment-v1"
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def records_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["trial", "case", "estimate", "decision", "correct", "queries_used"])
        for r in self.records:
            w.writerow([r.trial, r.case, repr(r.estimate), r.decision, int(r.correct), r.queries_used])
        return buf.getvalue()


def _trial_seeds(seed: int, trial: int) -> tuple[bool, int, int]:
    ss = np.random.SeedSequence([seed, trial])
    a, b, c = ss.generate_state(3, dtype=np.uint64)
    return bool(a & 1), int(b >> 1), int(c >> 1)


def _run_trial(args) -> tuple[TrialRecord, Transcript | None]:
    p, spec, model, seed, trial, keep = args
    case, inst_seed, est_seed = _trial_seeds(seed, trial)
    inst = build_instance(p, case, inst_seed)
    oracle = Oracle(inst, spec.budget, model)
    est = run_estimator(EstimatorSpec(spec.name, spec.budget, spec.params, est_seed), oracle)
    yes = decide(p, est)
    rec = TrialRecord(trial, "YES" if case else "NO", est, "YES" if yes else "NO", yes == case, oracle.used)
    return rec, oracle.transcript() if keep else None


def distinguishing_experiment(
    p: ParamSet,
    spec: EstimatorSpec,
    trials: int,
    seed: int = 0,
    *,
    model: Model | str = Model.STRENGTHENED,
    jobs: int = 1,
    keep_transcripts: bool = False,
) -> tuple[ExperimentReport, list[Transcript]]:
    """Fair-coin case per trial, fresh instance and oracle, then decide."""
    model = Model(model)
    args = [(p, spec, model, seed, t, keep_transcripts) for t in range(trials)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_run_trial, args))
    else:
        results = [_run_trial(a) for a in args]
    records = [r for r, _ in results]
    transcripts = [t for _, t in results if t is not None]
    wins = sum(r.correct for r in records)
    if trials:
        ci = binomtest(wins, trials).proportion_ci(method="wilson")
        lo, hi = float(ci.low), float(ci.high)
    else:
        lo, hi = 0.0, 1.0
    rep = ExperimentReport(
        params=p.name, estimator=spec.name, budget=spec.budget, model=model.value, seed=seed,
        trials=trials, successes=wins, success_rate=wins / trials if trials else 0.0,
        ci_low=lo, ci_high=hi, records=records,
    )
    return rep, transcripts
