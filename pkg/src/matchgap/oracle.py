"""Lazy, budgeted pair-query oracle with a replayable transcript.

An answer is a pure function of ``(instance labels, sampling seed, pair)``,
so it never depends on query order. Querying a pair again returns the
same answer and still spends budget.

Per pair, with ``m`` labelled slots, real probability ``q`` and ``G``
ground slots::

    real   ~ Bin(m, q)
    pseudo = real + Bin(m - real, (1/n - q) / (1 - q)) + Bin(G - m, 1/n)

which makes ``pseudo ~ Bin(G, 1/n)`` for every pair, whatever its labels.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ._rng import (
    Stream,
    binom_from_uniform_array,
    pair_key_array,
    stream_key,
    uniform_array,
)
from .construction import Instance


class Model(str, Enum):
    SIMPLE = "simple"
    STRENGTHENED = "strengthened"


class BudgetExhausted(RuntimeError):
    pass


class SelfLoop(ValueError):
    pass


@dataclass(frozen=True)
class QueryAnswer:
    pseudo_count: int
    real_count: int


def query_budget_for(n: int, delta: float) -> int:
    return int(math.floor(n ** (2 - delta) + 1e-9))


def _grouped_binom(u: np.ndarray, trials: np.ndarray, prob: np.ndarray) -> np.ndarray:
    out = np.zeros(len(u), dtype=np.int64)
    live = (trials > 0) & (prob > 0)
    if not live.any():
        return out
    idx = np.nonzero(live)[0]
    keys = np.stack([trials[idx].astype(np.float64), prob[idx]], axis=1)
    uniq, inv = np.unique(keys, axis=0, return_inverse=True)
    inv = inv.reshape(-1)
    for g, (t, pr) in enumerate(uniq):
        sel = idx[inv == g]
        out[sel] = binom_from_uniform_array(u[sel], int(t), float(pr))
    return out


def answer_pairs(inst: Instance, us, vs, seed: int | None = None):
    """Deterministic ``(pseudo, real, level)`` arrays for a batch of pairs."""
    p = inst.params
    seed = inst.seed if seed is None else seed
    us = np.asarray(us, dtype=np.int64)
    vs = np.asarray(vs, dtype=np.int64)
    lev, den = inst.lookup(us, vs)
    n = p.n
    rho = float(p.rho)
    rl = np.array((0.0,) + tuple(p.rho_level))
    m = np.floor(den * n * rho / np.where(lev > 0, rl[lev], 1.0) + 0.5).astype(np.int64)
    m[lev == 0] = 0
    q = np.where(lev > 0, rl[lev] / (n * rho), 0.0)
    pk = pair_key_array(us, vs)
    real = _grouped_binom(uniform_array(stream_key(seed, Stream.REAL), pk), m, q)
    p1 = np.where(q < 1.0, (1.0 / n - q) / np.where(q < 1.0, 1.0 - q, 1.0), 0.0)
    p1 = np.clip(p1, 0.0, 1.0)
    b1 = _grouped_binom(uniform_array(stream_key(seed, Stream.PSEUDO_LABELLED), pk), m - real, p1)
    g = p.ground
    b2 = _grouped_binom(uniform_array(stream_key(seed, Stream.PSEUDO_GROUND), pk), g - m, np.full(len(m), 1.0 / n))
    return real + b1 + b2, real, lev, (m, real, b1, b2)


def pseudo_levels(inst: Instance, us, vs, seed: int | None = None) -> np.ndarray:
    """Lowest level reached by the pseudo-edge chains on each pair (0 if none).

    Real slots at gadget level ``l`` descend to level ``k <= l`` with
    probability ``rho_k / rho_l``; other labelled slots carrying a pseudo
    edge sit at some level above ``l``; unlabelled slots follow
    ``rho_k / rho``.
    """
    p = inst.params
    seed = inst.seed if seed is None else seed
    us = np.asarray(us, dtype=np.int64)
    vs = np.asarray(vs, dtype=np.int64)
    _, _, lev, (m, real, b1, b2) = answer_pairs(inst, us, vs, seed)
    rl = np.array(p.rho_level)
    rho = float(p.rho)
    key = stream_key(seed, Stream.LEVEL)
    pk = pair_key_array(us, vs)
    out = np.zeros(len(us), dtype=np.int64)
    L = p.L
    for k in range(len(us)):
        best = L + 1
        counts = (int(real[k]), int(b1[k]), int(b2[k]))
        idx = 0
        gl = int(lev[k])
        for cat, cnt in enumerate(counts):
            if cnt == 0:
                continue
            us_ = uniform_array(key, np.full(cnt, pk[k], dtype=np.uint64), np.arange(idx, idx + cnt, dtype=np.uint64))
            idx += cnt
            if cat == 0:
                cdf = rl[:gl] / rl[gl - 1]
                lo = 1
            elif cat == 1:
                cdf = (rl[gl:] - rl[gl - 1]) / (rho - rl[gl - 1])
                lo = gl + 1
            else:
                cdf = rl / rho
                lo = 1
            cdf = cdf.copy()
            cdf[-1] = 1.0
            lv = lo + np.searchsorted(cdf, us_, side="right")
            best = min(best, int(lv.min()))
        out[k] = 0 if best == L + 1 else best
    return out


@dataclass
class Transcript:
    model: str
    budget: int
    n: int
    steps: np.ndarray
    us: np.ndarray
    vs: np.ndarray
    pseudo: np.ndarray
    real: np.ndarray

    def __len__(self) -> int:
        return len(self.steps)

    def to_jsonl(self) -> str:
        head = {"schema": "transcript-v1", "model": self.model, "budget": self.budget, "n": self.n}
        lines = [json.dumps(head, sort_keys=True)]
        for s, a, b, ps, rl in zip(self.steps, self.us, self.vs, self.pseudo, self.real):
            lines.append(json.dumps({"step": int(s), "u": int(a), "v": int(b), "pseudo": int(ps), "real": int(rl)}))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> "Transcript":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        head = json.loads(lines[0])
        if head.get("schema") != "transcript-v1":
            raise ValueError("not a transcript-v1 file")
        rows = [json.loads(ln) for ln in lines[1:]]
        col = lambda k: np.array([r[k] for r in rows], dtype=np.int64)  # noqa: E731
        return cls(head["model"], head["budget"], head["n"], col("step"), col("u"), col("v"), col("pseudo"), col("real"))


class Oracle:
    """Answers pair queries against a fixed instance and sampling seed."""

    def __init__(self, inst: Instance, budget: int, model: Model | str = Model.STRENGTHENED, seed: int | None = None):
        self._inst = inst
        self._seed = inst.seed if seed is None else seed
        self.model = Model(model)
        self.budget = int(budget)
        self._used = 0
        self._log: list[tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]] = []

    @property
    def n(self) -> int:
        return self._inst.n

    @property
    def remaining(self) -> int:
        return self.budget - self._used

    @property
    def used(self) -> int:
        return self._used

    def _lookup(self, us: np.ndarray, vs: np.ndarray):
        # answers are a pure function of the pair, so recomputing is caching
        pseudo, real, _, _ = answer_pairs(self._inst, us, vs, self._seed)
        return pseudo, real

    def query_batch(self, us, vs):
        """Answer many queries in order.

        Returns ``(pseudo, real)`` arrays (or a boolean array in the simple
        model). If the batch exceeds the budget, the allowed prefix is
        answered and recorded, then :class:`BudgetExhausted` is raised.
        """
        us = np.atleast_1d(np.asarray(us, dtype=np.int64))
        vs = np.atleast_1d(np.asarray(vs, dtype=np.int64))
        if us.shape != vs.shape:
            raise ValueError("query arrays differ in length")
        if np.any(us == vs):
            raise SelfLoop("self-pair queries are not allowed")
        n = self.n
        if len(us) and (us.min() < 0 or vs.min() < 0 or us.max() >= n or vs.max() >= n):
            raise ValueError("vertex id out of range")
        allowed = min(len(us), self.remaining)
        short = allowed < len(us)
        us, vs = us[:allowed], vs[:allowed]
        pseudo, real = self._lookup(us, vs)
        steps = np.arange(self._used, self._used + allowed, dtype=np.int64)
        self._log.append((steps, us.copy(), vs.copy(), np.stack([pseudo, real])))
        self._used += allowed
        if short:
            raise BudgetExhausted(f"budget {self.budget} exhausted")
        if self.model is Model.SIMPLE:
            return real >= 1
        return pseudo, real

    def query(self, u: int, v: int):
        if u == v:
            raise SelfLoop("self-pair queries are not allowed")
        if self.remaining <= 0:
            raise BudgetExhausted(f"budget {self.budget} exhausted")
        out = self.query_batch([u], [v])
        if self.model is Model.SIMPLE:
            return bool(out[0])
        return QueryAnswer(int(out[0][0]), int(out[1][0]))

    def transcript(self) -> Transcript:
        if self._log:
            steps = np.concatenate([x[0] for x in self._log])
            us = np.concatenate([x[1] for x in self._log])
            vs = np.concatenate([x[2] for x in self._log])
            ans = np.concatenate([x[3] for x in self._log], axis=1)
        else:
            steps = us = vs = np.empty(0, dtype=np.int64)
            ans = np.empty((2, 0), dtype=np.int64)
        return Transcript(self.model.value, self.budget, self.n, steps, us, vs, ans[0], ans[1])

    def debug(self) -> "PrivilegedView":
        return PrivilegedView(self._inst, self._seed)


class PrivilegedView:
    """Label-aware access for analysis code; never handed to estimators."""

    def __init__(self, inst: Instance, seed: int):
        self.instance = inst
        self.seed = seed

    def levels(self, us, vs) -> tuple[np.ndarray, np.ndarray]:
        """``(gadget level, lowest pseudo-chain level)`` per pair."""
        lev, _ = self.instance.lookup(us, vs)
        return lev, pseudo_levels(self.instance, us, vs, self.seed)


def replay(t: Transcript, inst: Instance, seed: int | None = None) -> bool:
    """True when a fresh oracle reproduces every recorded answer."""
    pseudo, real, _, _ = answer_pairs(inst, t.us, t.vs, seed)
    return bool(np.array_equal(pseudo, t.pseudo) and np.array_equal(real, t.real))
