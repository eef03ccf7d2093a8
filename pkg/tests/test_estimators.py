import json

import numpy as np
import pytest

from matchgap.construction import build_instance
from matchgap.estimators import (
    ESTIMATORS,
    EstimatorSpec,
    QueryView,
    decide,
    distinguishing_experiment,
    exact_matching_size,
    greedy_matching,
    run_estimator,
)
from matchgap.matching import max_matching
from matchgap.oracle import Oracle
from matchgap.sampler import sample_simple


def test_greedy_is_maximal_not_maximum():
    # path 0-1-2-3 scanned middle first
    assert greedy_matching(4, np.array([1, 0, 2]), np.array([2, 1, 3])) == 1
    assert exact_matching_size(4, np.array([1, 0, 2]), np.array([2, 1, 3])) == 2


def test_exact_rejects_odd_cycle():
    with pytest.raises(ValueError):
        exact_matching_size(3, np.array([0, 1, 0]), np.array([1, 2, 2]))


def test_full_scan_is_exact_with_full_budget(er1):
    inst = build_instance(er1, False, 3)
    n = er1.n
    oracle = Oracle(inst, n * (n - 1) // 2)
    est = run_estimator(EstimatorSpec("full-scan", oracle.budget), oracle)
    assert est == max_matching(sample_simple(inst), inst.part).size
    assert not decide(er1, est)


@pytest.mark.parametrize("name", sorted(ESTIMATORS))
def test_zero_budget_gives_zero(tiny1_no, name):
    assert run_estimator(EstimatorSpec(name, 0), Oracle(tiny1_no, 0)) == 0.0


@pytest.mark.parametrize("name", sorted(ESTIMATORS))
def test_estimators_respect_budget_and_are_deterministic(tiny1_no, name):
    outs = []
    for _ in range(2):
        o = Oracle(tiny1_no, 5000)
        outs.append(run_estimator(EstimatorSpec(name, 5000, seed=4), o))
        assert o.used <= 5000
    assert outs[0] == outs[1]
    assert 0 <= outs[0] <= tiny1_no.n / 2


def test_run_needs_fresh_oracle_and_known_name(tiny1_no):
    o = Oracle(tiny1_no, 10)
    o.query(0, 1)
    with pytest.raises(ValueError):
        run_estimator(EstimatorSpec("full-scan", 10), o)
    with pytest.raises(KeyError):
        run_estimator(EstimatorSpec("magic", 10), Oracle(tiny1_no, 10))


def test_query_view_is_blind():
    v = QueryView(5, 10, lambda: 10, lambda a, b: (np.zeros(1), np.zeros(1)))
    assert not hasattr(v, "__dict__")
    assert {s for s in dir(v) if not s.startswith("_")} == {"n", "budget", "remaining", "query", "query_batch"}


def test_decide_threshold(tiny1):
    t = tiny1.half - tiny1.N1 / 4
    assert decide(tiny1, t) and not decide(tiny1, t - 0.5)


def test_experiment_report_and_determinism(tiny1):
    spec = EstimatorSpec("random-pair", 2000)
    a, ta = distinguishing_experiment(tiny1, spec, 6, seed=9, keep_transcripts=True)
    b, _ = distinguishing_experiment(tiny1, spec, 6, seed=9)
    assert a.records_csv() == b.records_csv()
    assert len(ta) == 6 and all(len(t) == 2000 for t in ta)
    d = json.loads(a.to_json())
    assert d["schema"] == "experiment-v1" and d["trials"] == 6
    assert d["ci_low"] <= d["success_rate"] <= d["ci_high"]
    assert a.records_csv().splitlines()[0] == "trial,case,estimate,decision,correct,queries_used"


def test_experiment_with_workers_matches_serial(tiny1):
    spec = EstimatorSpec("induced-subgraph", 1000)
    a, _ = distinguishing_experiment(tiny1, spec, 4, seed=2)
    b, _ = distinguishing_experiment(tiny1, spec, 4, seed=2, jobs=2)
    assert a.records_csv() == b.records_csv()
