from __future__ import annotations

from functools import lru_cache
from itertools import permutations

import numpy as np
import pytest

from matchgap.construction import build_instance
from matchgap.params import desk_preset

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, msg = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {msg}")


def brute_matching(n_left: int, n_right: int, edges) -> int:
    """Maximum matching by exhaustive search over the smaller side's subsets."""
    if n_left > n_right:
        edges = [(b, a) for a, b in edges]
        n_left, n_right = n_right, n_left
    adj = [[] for _ in range(n_right)]
    for a, b in edges:
        adj[b].append(a)
    # scan the larger side; states are used-masks of the smaller side
    states = {0: 0}
    for v in range(n_right):
        nxt = dict(states)
        for mask, size in states.items():
            for a in adj[v]:
                if not mask >> a & 1:
                    m2 = mask | 1 << a
                    if nxt.get(m2, -1) < size + 1:
                        nxt[m2] = size + 1
        states = nxt
    return max(states.values())


def brute_assignment(cost) -> int:
    """Minimum-cost perfect assignment by DP over subsets (small k)."""
    cost = [list(map(int, row)) for row in cost]
    k = len(cost)

    @lru_cache(maxsize=None)
    def go(i: int, used: int) -> int:
        if i == k:
            return 0
        best = None
        for j in range(k):
            if not used >> j & 1:
                c = cost[i][j] + go(i + 1, used | 1 << j)
                best = c if best is None or c < best else best
        return best

    return go(0, 0)


def perm_assignment(cost) -> int:
    k = len(cost)
    return min(sum(int(cost[i][p[i]]) for i in range(k)) for p in permutations(range(k)))


@pytest.fixture(scope="session")
def tiny1():
    return desk_preset("tiny-L1")


@pytest.fixture(scope="session")
def tiny2():
    return desk_preset("tiny-L2")


@pytest.fixture(scope="session")
def er1():
    return desk_preset("er-L1")


@pytest.fixture(scope="session")
def tiny1_no(tiny1):
    return build_instance(tiny1, False, 11)


@pytest.fixture(scope="session")
def tiny1_yes(tiny1):
    return build_instance(tiny1, True, 11)


@pytest.fixture(scope="session")
def tiny2_no(tiny2):
    return build_instance(tiny2, False, 5)


def random_bipartite(rng: np.random.Generator, nl: int, nr: int, p: float):
    return [(a, b) for a in range(nl) for b in range(nr) if rng.random() < p]
