import numpy as np
import pytest
from scipy import stats

from matchgap.construction import build_instance
from matchgap.oracle import (
    BudgetExhausted,
    Model,
    Oracle,
    QueryAnswer,
    SelfLoop,
    Transcript,
    answer_pairs,
    pseudo_levels,
    query_budget_for,
    replay,
)


def test_budget_formula():
    assert query_budget_for(100, 1.0) == 100
    assert query_budget_for(2200, 0.5) == int(2200**1.5)


def test_single_query_and_budget(tiny1_no):
    o = Oracle(tiny1_no, 3)
    a = o.query(0, 1)
    assert isinstance(a, QueryAnswer) and a.pseudo_count >= a.real_count >= 0
    o.query(0, 1)
    assert o.used == 2 and o.remaining == 1
    o.query(1, 0)
    with pytest.raises(BudgetExhausted):
        o.query(2, 3)
    assert o.used == 3


def test_repeat_answers_identical(tiny1_no):
    o = Oracle(tiny1_no, 10)
    assert o.query(4, 9) == o.query(9, 4)


def test_self_loop_rejected(tiny1_no):
    o = Oracle(tiny1_no, 5)
    with pytest.raises(SelfLoop):
        o.query(2, 2)
    with pytest.raises(SelfLoop):
        o.query_batch([1, 2], [3, 2])
    assert o.used == 0


def test_out_of_range_rejected(tiny1_no):
    with pytest.raises(ValueError):
        Oracle(tiny1_no, 5).query_batch([0], [tiny1_no.n])


def test_batch_truncates_and_logs_prefix(tiny1_no):
    o = Oracle(tiny1_no, 4)
    with pytest.raises(BudgetExhausted):
        o.query_batch(np.arange(6), np.arange(6) + 1)
    t = o.transcript()
    assert len(t) == 4 and list(t.steps) == [0, 1, 2, 3]
    assert list(t.us) == [0, 1, 2, 3]


def test_simple_model_reports_real_edges(tiny1_no):
    rng = np.random.default_rng(0)
    us = rng.integers(0, tiny1_no.n, 2000)
    vs = (us + rng.integers(1, tiny1_no.n, 2000)) % tiny1_no.n
    s = Oracle(tiny1_no, 10**4, Model.SIMPLE).query_batch(us, vs)
    _, real = Oracle(tiny1_no, 10**4).query_batch(us, vs)
    assert s.dtype == bool and np.array_equal(s, real >= 1)
    assert Oracle(tiny1_no, 1, "simple").query(0, 1) in (True, False)


def test_transcript_roundtrip_and_replay(tiny2_no):
    o = Oracle(tiny2_no, 500, seed=3)
    rng = np.random.default_rng(1)
    us = rng.integers(0, tiny2_no.n, 500)
    vs = (us + 1 + rng.integers(0, tiny2_no.n - 1, 500)) % tiny2_no.n
    o.query_batch(us[:200], vs[:200])
    o.query_batch(us[200:], vs[200:])
    t = o.transcript()
    t2 = Transcript.from_jsonl(t.to_jsonl())
    assert t2.to_jsonl() == t.to_jsonl()
    assert replay(t2, tiny2_no, 3)
    assert not replay(t2, tiny2_no, 4)


def test_transcript_schema_checked():
    with pytest.raises(ValueError):
        Transcript.from_jsonl('{"schema": "other"}\n')


def test_empty_transcript(tiny1_no):
    t = Oracle(tiny1_no, 5).transcript()
    assert len(t) == 0
    assert Transcript.from_jsonl(t.to_jsonl()).n == tiny1_no.n


def test_pseudo_decomposition_is_consistent(tiny1_no):
    iu, ju = np.triu_indices(tiny1_no.n, k=1)
    pseudo, real, lev, (m, r, b1, b2) = answer_pairs(tiny1_no, iu, ju)
    g = tiny1_no.params.ground
    assert np.array_equal(pseudo, r + b1 + b2) and np.array_equal(real, r)
    assert np.all(r + b1 <= m) and np.all(b2 <= g - m)
    assert np.all(m[lev == 0] == 0)


def test_pseudo_count_law_is_label_blind(er1):
    # Bin(G, 1/n) on gadget and non-gadget pairs alike
    inst = build_instance(er1, False, 2)
    n, g = er1.n, er1.ground
    iu, ju = np.triu_indices(n, k=1)
    pseudo, _, lev, _ = answer_pairs(inst, iu, ju)
    for sel in (lev > 0, lev == 0):
        x = pseudo[sel]
        assert abs(x.mean() - g / n) < 4 * np.sqrt(g / n / len(x))
        obs = np.bincount(x, minlength=3)[:3]
        exp = stats.binom.pmf(np.arange(3), g, 1 / n) * len(x)
        tail = len(x) - obs.sum()
        chi = stats.chisquare(np.append(obs, tail), np.append(exp, len(x) - exp.sum()))
        assert chi.pvalue > 1e-4


def test_pseudo_levels_range(tiny2_no):
    iu = np.arange(0, 4000, 2)
    ju = iu + 1
    pseudo, real, lev, _ = answer_pairs(tiny2_no, iu, ju)
    pl = pseudo_levels(tiny2_no, iu, ju)
    assert np.all((pl == 0) == (pseudo == 0))
    assert np.all(pl[real > 0] <= lev[real > 0])
    assert pl.max() <= tiny2_no.params.L


def test_oracle_object_hides_instance(tiny1_no):
    o = Oracle(tiny1_no, 1)
    public = {k for k in dir(o) if not k.startswith("_")}
    assert "instance" not in public and "inst" not in public
    assert o.debug().instance is tiny1_no
