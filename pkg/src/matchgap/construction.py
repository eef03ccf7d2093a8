"""Labelled YES/NO instances of the recursive gadget construction.

An instance at level ``l`` splits each side into layered sets ``A_i^j``,
``B_i^j``, dummy sets ``D_i^j`` and special sets ``S^j``. Gadgets are
random bipartite graphs between pairs of sets with a fixed edge density.
Above level 1, some set pairs are filled with independent level ``l-1``
instances instead; exactly one of those blocks (``A_r^1``-``A_r^2``)
inherits the YES/NO case, the rest are YES.

Labels are stored per level as flat arrays so density lookups for many
pairs at once stay vectorized:

* ``inst_of[l-1, v]``: id of the level-``l`` instance holding ``v`` (-1 if
  none, which only happens for padding vertices),
* ``code_of[l-1, v]``: index of ``v``'s set in :func:`set_codes`,
* ``slot_of[l-1, v]``: position of that instance inside its parent block.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .params import ParamSet, errors


class InvalidParams(ValueError):
    pass


@dataclass(frozen=True, order=True)
class SetLabel:
    kind: str
    layer: int
    side: int

    @property
    def name(self) -> str:
        if self.kind == "S":
            return f"S^{self.side}"
        return f"{self.kind}_{self.layer}^{self.side}"

    @property
    def part(self) -> int:
        """0 for the first side of the bipartition, 1 for the second."""
        if self.kind in ("A", "S"):
            return 0 if self.side == 1 else 1
        if self.kind == "B":
            return 0 if self.side == 2 else 1
        return 0 if self.side % 2 == 1 else 1


@dataclass(frozen=True)
class GadgetSpec:
    x: SetLabel
    y: SetLabel
    density: float
    origin: str = "common"

    @property
    def name(self) -> str:
        return f"{self.x.name}-{self.y.name}"


@dataclass(frozen=True)
class RecursiveBlock:
    x: SetLabel
    y: SetLabel
    copies: int
    case: bool


@dataclass(frozen=True)
class Frame:
    level: int
    kind: str
    layer: int
    side: int
    slot: int


@dataclass(frozen=True)
class VertexLabel:
    vertex: int
    part: int
    frames: tuple[Frame, ...]


def set_codes(p: ParamSet, lvl: int) -> list[SetLabel]:
    sides_d = 2 if lvl == 1 else 4
    out = [SetLabel("A", i, j) for i in range(1, p.r + 1) for j in (1, 2)]
    out += [SetLabel("B", i, j) for i in range(1, p.r + 1) for j in (1, 2)]
    out += [SetLabel("D", i, j) for i in range(1, p.r + 1) for j in range(1, sides_d + 1)]
    out += [SetLabel("S", 0, j) for j in (1, 2)]
    return out


def set_size(p: ParamSet, lvl: int, label: SetLabel) -> int:
    N = Fraction(p.N[lvl - 1])
    if label.kind == "D":
        size = p.zeta * N
    elif lvl == 1 and label.kind == "A" and label.layer == p.r:
        size = (1 - p.xi) * N
    else:
        size = N
    return int(size)


def level_template(p: ParamSet, lvl: int, case: bool, layers=None) -> list[GadgetSpec]:
    """Non-recursive gadgets of a level-``lvl`` instance in the given case.

    ``layers`` restricts the enumeration to a subset of layer indices; every
    density is linear in the layer index, so the end layers bound them all.
    """
    r = p.r
    rng_r = sorted(set(layers)) if layers is not None else list(range(1, r + 1))
    N = p.N[lvl - 1]
    d = p.d[lvl - 1]
    z, xi, g = float(p.zeta), float(p.xi), float(p.gamma)
    A = lambda i, j: SetLabel("A", i, j)  # noqa: E731
    B = lambda i, j: SetLabel("B", i, j)  # noqa: E731
    D = lambda i, j: SetLabel("D", i, j)  # noqa: E731
    out: list[GadgetSpec] = []
    add = lambda x, y, dens, origin="common": out.append(GadgetSpec(x, y, dens, origin))  # noqa: E731
    if lvl == 1:
        s = p.sparse
        dummy = g * d / (z * N)
        for j in (1, 2):
            add(SetLabel("S", 0, j), B(1, j), s / N)
            for i in (x for x in rng_r if x < r):
                add(B(i, j), A(i, j), d / N)
            for i in (x for x in rng_r if x >= 2):
                add(B(i, j), A(i - 1, j), s / N)
            for i in rng_r:
                add(A(i, j), D(i, 3 - j), (r - i + 1) * dummy)
                for k in (x for x in rng_r if x < i):
                    add(A(i, j), D(k, 3 - j), dummy)
                add(B(i, j), D(i, j), (r - i + 1) * dummy)
                for k in (x for x in rng_r if x < i):
                    add(B(i, j), D(k, j), dummy)
        for i in rng_r:
            for k in rng_r:
                if k != i:
                    add(D(i, 1), D(k, 2), dummy)
            num = d + g * d + s - (4 * r - 4 * i + 2 - xi) * g * d / z
            add(D(i, 1), D(i, 2), num / (z * N))
        if case:
            for j in (1, 2):
                add(A(r, j), B(r, j), d / N, "yes")
            add(A(r, 1), A(r, 2), s / ((1 - xi) * N), "yes")
            add(B(r, 1), B(r, 2), xi * d / N, "yes")
        else:
            for j in (1, 2):
                add(A(r, j), B(r, j), (d + s) / N, "no")
            add(B(r, 1), B(r, 2), (xi * d - (1 - xi) * s) / N, "no")
        return out
    dummy = g * d / (2 * z * N)
    for j in (1, 2):
        for i in rng_r:
            add(B(i, j), A(i, j), d / N)
            for jj in (j, j + 2):
                add(B(i, j), D(i, jj), (r - i + 1) * dummy)
                for k in (x for x in rng_r if x < i):
                    add(B(i, j), D(k, jj), dummy)
            for jj in (3 - j, 5 - j):
                add(A(i, j), D(i, jj), (r - i + 1) * dummy)
                for k in (x for x in rng_r if x < i):
                    add(A(i, j), D(k, jj), dummy)
    for i in rng_r:
        for k in rng_r:
            if k != i:
                for j in (1, 3):
                    for jj in (2, 4):
                        add(D(i, j), D(k, jj), dummy)
        num = d + g * d - (2 * r - 2 * i + 1) * g * d / z
        for j in (1, 3):
            add(D(i, j), D(i, j + 1), num / (z * N))
    return out


def recursive_template(p: ParamSet, lvl: int, case: bool) -> list[RecursiveBlock]:
    if lvl == 1:
        return []
    r = p.r
    per = int(1 / p.zeta)
    out = []
    for j in (1, 2):
        for i in range(1, r):
            out.append(RecursiveBlock(SetLabel("A", i, j), SetLabel("B", i + 1, j), per, True))
        out.append(RecursiveBlock(SetLabel("B", 1, j), SetLabel("S", 0, j), per, True))
    for i in range(1, r + 1):
        out.append(RecursiveBlock(SetLabel("D", i, 1), SetLabel("D", i, 4), 1, True))
        out.append(RecursiveBlock(SetLabel("D", i, 2), SetLabel("D", i, 3), 1, True))
    out.append(RecursiveBlock(SetLabel("A", r, 1), SetLabel("A", r, 2), per, case))
    return out


@dataclass
class _LevelTables:
    codes: list[SetLabel]
    index: dict[SetLabel, int]
    sizes: np.ndarray
    dens: dict[bool, np.ndarray]
    has: dict[bool, np.ndarray]
    templates: dict[bool, list[GadgetSpec]]


def _tables(p: ParamSet, lvl: int) -> _LevelTables:
    codes = set_codes(p, lvl)
    index = {c: k for k, c in enumerate(codes)}
    sizes = np.array([set_size(p, lvl, c) for c in codes], dtype=np.int64)
    dens, has, templates = {}, {}, {}
    for case in (True, False):
        K = len(codes)
        dm = np.zeros((K, K))
        hm = np.zeros((K, K), dtype=bool)
        tpl = level_template(p, lvl, case)
        for gs in tpl:
            a, b = index[gs.x], index[gs.y]
            if hm[a, b]:
                raise AssertionError(f"duplicate gadget {gs.name}")
            dm[a, b] = dm[b, a] = gs.density
            hm[a, b] = hm[b, a] = True
        dens[case], has[case], templates[case] = dm, hm, tpl
    return _LevelTables(codes, index, sizes, dens, has, templates)


@dataclass(frozen=True)
class Gadget:
    level: int
    inst: int
    x: int
    y: int
    density: float
    origin: str
    name: str


@dataclass
class Instance:
    params: ParamSet
    case: bool
    seed: int
    part: np.ndarray
    inst_of: np.ndarray
    code_of: np.ndarray
    slot_of: np.ndarray
    inst_case: list[np.ndarray]
    members: dict[tuple[int, int, int], np.ndarray] = field(repr=False)
    tables: list[_LevelTables] = field(repr=False)

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def case_name(self) -> str:
        return "YES" if self.case else "NO"

    def case_hash(self) -> str:
        return hashlib.sha256(f"{self.case_name}:{self.seed}".encode()).hexdigest()[:16]

    def code(self, lvl: int, label: SetLabel) -> int:
        return self.tables[lvl - 1].index[label]

    def members_of(self, lvl: int, inst: int, label: SetLabel) -> np.ndarray:
        return self.members[(lvl, inst, self.code(lvl, label))]

    def label(self, v: int) -> VertexLabel:
        frames = []
        for lvl in range(self.params.L, 0, -1):
            if self.inst_of[lvl - 1, v] < 0:
                break
            c = self.tables[lvl - 1].codes[self.code_of[lvl - 1, v]]
            frames.append(Frame(lvl, c.kind, c.layer, c.side, int(self.slot_of[lvl - 1, v])))
        return VertexLabel(int(v), int(self.part[v]), tuple(frames))

    def gadgets(self) -> list[Gadget]:
        out = []
        for lvl in range(1, self.params.L + 1):
            tab = self.tables[lvl - 1]
            for iid, case in enumerate(self.inst_case[lvl - 1]):
                for gs in tab.templates[bool(case)]:
                    out.append(Gadget(lvl, iid, tab.index[gs.x], tab.index[gs.y], gs.density, gs.origin, gs.name))
        return out

    def gadget_blocks(self):
        """Yield ``(gadget, X, Y)`` with member arrays for every gadget."""
        for gd in self.gadgets():
            yield gd, self.members[(gd.level, gd.inst, gd.x)], self.members[(gd.level, gd.inst, gd.y)]

    def lookup(self, us, vs) -> tuple[np.ndarray, np.ndarray]:
        """Gadget level (0 if none) and density for each pair."""
        us = np.asarray(us, dtype=np.int64)
        vs = np.asarray(vs, dtype=np.int64)
        lev = np.zeros(us.shape, dtype=np.int64)
        den = np.zeros(us.shape, dtype=np.float64)
        active = np.ones(us.shape, dtype=bool)
        for lvl in range(self.params.L, 0, -1):
            iu = self.inst_of[lvl - 1, us]
            iv = self.inst_of[lvl - 1, vs]
            active &= (iu == iv) & (iu >= 0)
            if not active.any():
                break
            idx = np.nonzero(active)[0]
            cu = self.code_of[lvl - 1, us[idx]]
            cv = self.code_of[lvl - 1, vs[idx]]
            cases = self.inst_case[lvl - 1][iu[idx]]
            tab = self.tables[lvl - 1]
            h = np.where(cases, tab.has[True][cu, cv], tab.has[False][cu, cv])
            dd = np.where(cases, tab.dens[True][cu, cv], tab.dens[False][cu, cv])
            hit = idx[h]
            lev[hit] = lvl
            den[hit] = dd[h]
            active[hit] = False
        return lev, den

    def density_lookup(self, u: int, v: int) -> tuple[int, float]:
        lev, den = self.lookup([u], [v])
        return int(lev[0]), float(den[0])

    def expected_degree(self, v: int, level: int | None = None) -> float:
        """Expected real-edge degree of ``v`` from gadgets at ``level`` (all if None)."""
        levels = range(1, self.params.L + 1) if level is None else [level]
        total = 0.0
        for lvl in levels:
            iid = self.inst_of[lvl - 1, v]
            if iid < 0:
                continue
            tab = self.tables[lvl - 1]
            case = bool(self.inst_case[lvl - 1][iid])
            c = self.code_of[lvl - 1, v]
            row = tab.has[case][c]
            total += float(np.sum(tab.dens[case][c][row] * tab.sizes[row]))
        return total

    def vertex_cover_witness(self) -> np.ndarray:
        """Cover of every gadget edge of a NO instance, built level by level."""
        if self.case:
            raise ValueError("a small vertex cover exists only for NO instances")
        parts = []
        for lvl in range(1, self.params.L + 1):
            tab = self.tables[lvl - 1]
            kinds = [k for k, c in enumerate(tab.codes) if c.kind in ("B", "D")]
            for iid in np.nonzero(~self.inst_case[lvl - 1])[0]:
                for k in kinds:
                    parts.append(self.members[(lvl, int(iid), k)])
        return np.sort(np.concatenate(parts))

    def header(self) -> dict:
        p = self.params
        sizes = []
        for lvl in range(1, p.L + 1):
            for c in self.tables[lvl - 1].codes:
                sizes.append({"level": lvl, "set": c.name, "size": set_size(p, lvl, c)})
        return {
            "schema": "instance-v1",
            "params": p.to_dict(),
            "case": self.case_name,
            "seed": self.seed,
            "n": p.n,
            "set_sizes": sizes,
        }

    def labels_csv(self) -> str:
        p = self.params
        cols = ["vertex", "part"]
        for lvl in range(p.L, 0, -1):
            cols += [f"inst{lvl}", f"set{lvl}", f"slot{lvl}"]
        lines = [",".join(cols)]
        names = [[c.name for c in t.codes] for t in self.tables]
        for v in range(p.n):
            row = [str(v), str(int(self.part[v]))]
            for lvl in range(p.L, 0, -1):
                iid = int(self.inst_of[lvl - 1, v])
                if iid < 0:
                    row += ["-1", "", "-1"]
                else:
                    row += [str(iid), names[lvl - 1][self.code_of[lvl - 1, v]], str(int(self.slot_of[lvl - 1, v]))]
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"

    def header_json(self) -> str:
        return json.dumps(self.header(), sort_keys=True, indent=2)


def build_instance(p: ParamSet, case: bool | str, seed: int, *, check: bool = True) -> Instance:
    """Materialise the labelled instance for ``(params, case, seed)``.

    The vertex permutation and every set split come from one generator
    seeded by ``seed``; the same seed gives identical labels for both cases.
    """
    if isinstance(case, str):
        if case.upper() not in ("YES", "NO"):
            raise ValueError(f"case must be YES or NO, got {case!r}")
        case = case.upper() == "YES"
    if check:
        errs = errors(p)
        if errs:
            raise InvalidParams("; ".join(f"{v.code}: {v.message}" for v in errs))
    L, n = p.L, p.n
    rng = np.random.default_rng(seed)
    tables = [_tables(p, lvl) for lvl in range(1, L + 1)]
    inst_of = np.full((L, n), -1, dtype=np.int32)
    code_of = np.full((L, n), -1, dtype=np.int16)
    slot_of = np.full((L, n), -1, dtype=np.int32)
    cases: list[list[bool]] = [[] for _ in range(L)]
    members: dict[tuple[int, int, int], np.ndarray] = {}

    perm = rng.permutation(n).astype(np.int64)
    half = p.n_level[-1] // 2
    part = np.empty(n, dtype=np.int8)
    part[perm[:half]] = 0
    part[perm[half:2 * half]] = 1
    pad = perm[2 * half:]
    part[pad] = np.arange(len(pad)) % 2

    def fill(lvl: int, sub_case: bool, side0: np.ndarray, side1: np.ndarray, slot: int) -> None:
        tab = tables[lvl - 1]
        iid = len(cases[lvl - 1])
        cases[lvl - 1].append(sub_case)
        sides = (rng.permutation(side0), rng.permutation(side1))
        pos = [0, 0]
        for k, c in enumerate(tab.codes):
            size = int(tab.sizes[k])
            sd = c.part
            arr = sides[sd][pos[sd]:pos[sd] + size]
            pos[sd] += size
            members[(lvl, iid, k)] = arr
            inst_of[lvl - 1, arr] = iid
            code_of[lvl - 1, arr] = k
            slot_of[lvl - 1, arr] = slot
        if pos[0] != len(side0) or pos[1] != len(side1):
            raise AssertionError("set sizes do not fill the instance")
        for blk in recursive_template(p, lvl, sub_case):
            xs = members[(lvl, iid, tab.index[blk.x])]
            ys = members[(lvl, iid, tab.index[blk.y])]
            if blk.x.part == 1:
                xs, ys = ys, xs
            w = len(xs) // blk.copies
            for k in range(blk.copies):
                fill(lvl - 1, blk.case, xs[k * w:(k + 1) * w], ys[k * w:(k + 1) * w], k)

    fill(L, bool(case), perm[:half], perm[half:2 * half], 0)
    return Instance(
        params=p, case=bool(case), seed=int(seed), part=part,
        inst_of=inst_of, code_of=code_of, slot_of=slot_of,
        inst_case=[np.array(c, dtype=bool) for c in cases],
        members=members, tables=tables,
    )
