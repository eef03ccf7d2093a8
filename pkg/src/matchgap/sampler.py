"""Multigraph sampling on top of a labelled instance.

Each vertex pair carries ``ground = rho * n`` ground slots. For a pair inside
a level-``l`` gadget of density ``p``, the first ``m = round(p n rho / rho_l)``
slots are labelled, and each labelled slot is a real edge independently with
probability ``q = rho_l / (n rho)``, so the expected real multiplicity is
``p``. Pairs outside every gadget have no real edges.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from ._rng import Stream, binom_cdf, stream_key
from .construction import Instance

DEFAULT_PAIR_CAP = 10**9


class ScaleExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class PairDistribution:
    level: int
    density: float
    m: int
    q: float
    ground: int


def labelled_slots(p, level: int, density: float) -> int:
    if level == 0:
        return 0
    x = density * p.n * float(p.rho) / p.rho_level[level - 1]
    return int(math.floor(x + 0.5))


def real_prob(p, level: int) -> float:
    if level == 0:
        return 0.0
    return p.rho_level[level - 1] / (p.n * float(p.rho))


def pair_distribution(inst: Instance, u: int, v: int) -> PairDistribution:
    if u == v:
        raise ValueError("self pairs carry no edges")
    lvl, den = inst.density_lookup(u, v)
    p = inst.params
    return PairDistribution(lvl, den, labelled_slots(p, lvl, den), real_prob(p, lvl), p.ground)


@dataclass
class MultiGraph:
    """Real-edge multigraph; pairs stored with ``u < v``."""

    n: int
    seed: int
    us: np.ndarray
    vs: np.ndarray
    counts: np.ndarray
    levels: np.ndarray

    def __len__(self) -> int:
        return len(self.us)

    def as_dict(self) -> dict[tuple[int, int], tuple[int, int]]:
        return {(int(a), int(b)): (int(c), int(lv)) for a, b, c, lv in zip(self.us, self.vs, self.counts, self.levels)}

    def degree(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        np.add.at(deg, self.us, self.counts)
        np.add.at(deg, self.vs, self.counts)
        return deg

    def to_csv(self, case_hash: str = "") -> str:
        lines = ["# edges-v1 multigraph", f"# n={self.n}", f"# seed={self.seed}", f"# case_hash={case_hash}", "u,v,count,level"]
        lines += [f"{a},{b},{c},{lv}" for a, b, c, lv in zip(self.us, self.vs, self.counts, self.levels)]
        return "\n".join(lines) + "\n"


@dataclass
class SimpleGraph:
    n: int
    edges: np.ndarray  # shape (k, 2), rows sorted, u < v

    def __len__(self) -> int:
        return len(self.edges)

    def edge_set(self) -> set[tuple[int, int]]:
        return {(int(a), int(b)) for a, b in self.edges}

    def to_csv(self, seed: int | None = None, case_hash: str = "") -> str:
        lines = ["# edges-v1", f"# n={self.n}", f"# seed={seed}", f"# case_hash={case_hash}", "u,v"]
        lines += [f"{a},{b}" for a, b in self.edges]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "SimpleGraph":
        n = None
        rows = []
        for line in text.splitlines():
            if line.startswith("#"):
                if line.startswith("# n="):
                    n = int(line[4:])
                continue
            if not line or line.startswith("u,"):
                continue
            a, b = line.split(",")[:2]
            rows.append((int(a), int(b)))
        if n is None:
            raise ValueError("edges-v1 header lacks n")
        return cls(n, np.array(rows, dtype=np.int64).reshape(-1, 2))


def _total_pairs(inst: Instance) -> int:
    return sum(len(X) * len(Y) for _, X, Y in inst.gadget_blocks())


def sample_real(inst: Instance, seed: int | None = None, *, pair_cap: int = DEFAULT_PAIR_CAP) -> MultiGraph:
    """Sample every real edge of the instance.

    ``seed`` overrides the edge randomness while keeping the labels; it
    defaults to the instance seed.
    """
    seed = inst.seed if seed is None else seed
    if _total_pairs(inst) > pair_cap:
        raise ScaleExceeded(f"instance has more than {pair_cap} gadget pairs")
    p = inst.params
    key = stream_key(seed, Stream.REAL)
    us, vs, cs, ls = [], [], [], []
    for gd, X, Y in inst.gadget_blocks():
        m = labelled_slots(p, gd.level, gd.density)
        if m == 0:
            continue
        cdf = binom_cdf(m, real_prob(p, gd.level))
        a, b, c = _backend.sample_block(key, X, Y, cdf)
        if len(a):
            us.append(a)
            vs.append(b)
            cs.append(c)
            ls.append(np.full(len(a), gd.level, dtype=np.int64))
    if us:
        a, b = np.concatenate(us), np.concatenate(vs)
        c, lv = np.concatenate(cs), np.concatenate(ls)
    else:
        a = b = c = lv = np.empty(0, dtype=np.int64)
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    order = np.lexsort((hi, lo))
    return MultiGraph(p.n, seed, lo[order], hi[order], c[order], lv[order])


def project_simple(g: MultiGraph) -> SimpleGraph:
    return SimpleGraph(g.n, np.stack([g.us, g.vs], axis=1) if len(g.us) else np.empty((0, 2), dtype=np.int64))


def sample_simple(inst: Instance, seed: int | None = None) -> SimpleGraph:
    return project_simple(sample_real(inst, seed))


def multiplicity_stats(g: MultiGraph) -> dict[str, int]:
    return {
        "pairs": int(len(g.counts)),
        "pairs_ge2": int(np.count_nonzero(g.counts >= 2)),
        "max_mult": int(g.counts.max()) if len(g.counts) else 0,
    }


def real_degree(inst: Instance, v: int, seed: int, level: int | None = None) -> int:
    """Real degree of ``v`` (counting multiplicity) without sampling the rest."""
    p = inst.params
    key = stream_key(seed, Stream.REAL)
    levels = range(1, p.L + 1) if level is None else [level]
    total = 0
    single = np.array([v], dtype=np.int64)
    for lvl in levels:
        iid = int(inst.inst_of[lvl - 1, v])
        if iid < 0:
            continue
        tab = inst.tables[lvl - 1]
        case = bool(inst.inst_case[lvl - 1][iid])
        c = int(inst.code_of[lvl - 1, v])
        for other in np.nonzero(tab.has[case][c])[0]:
            den = float(tab.dens[case][c, other])
            m = labelled_slots(p, lvl, den)
            if m == 0:
                continue
            ys = inst.members[(lvl, iid, int(other))]
            _, _, cnt = _backend.sample_block(key, single, ys, binom_cdf(m, real_prob(p, lvl)))
            total += int(cnt.sum())
    return total
