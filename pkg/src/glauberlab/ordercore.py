"""Componentwise partial orders on binary and ternary configurations.

States are tuples over {0, 1} or {0, 1, STAR}.  The ternary chain order is
0 < 1 < STAR, so plain integer comparison (STAR = 2) realizes both orders.
Provides up-set enumeration and a max-flow feasibility test for stochastic
dominance, with an up-set cross-check usable on tiny posets.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from collections import deque

import numpy as np

STAR = 2

PROB_TOL = 1e-12

# integer scale for exact flow arithmetic; 1e-12 tolerance maps to 1000 units
_FLOW_SCALE = 10 ** 15

_CHARS = "01*"
_CHAR_TO_VAL = {"0": 0, "1": 1, "*": STAR}


def state_str(x) -> str:
    """Render a configuration as a string over {0,1,*}."""
    return "".join(_CHARS[v] for v in x)


def parse_state(s: str) -> tuple:
    return tuple(_CHAR_TO_VAL[c] for c in s)


def leq(x, y) -> bool:
    """Componentwise order; ternary entries follow the chain 0 < 1 < STAR."""
    if len(x) != len(y):
        raise ValueError("configurations have different lengths")
    return all(a <= b for a, b in zip(x, y))


def num_ones(x) -> int:
    return sum(1 for v in x if v == 1)


def num_stars(x) -> int:
    return sum(1 for v in x if v == STAR)


def lift(x, theta: float, rng) -> tuple:
    """Randomized lift: 0 stays 0; each 1 becomes STAR w.p. 1-theta else 1."""
    if not 0.0 < theta < 1.0:
        raise ValueError("theta must lie in (0,1)")
    out = []
    for v in x:
        if v == 0:
            out.append(0)
        else:
            out.append(1 if rng.random() < theta else STAR)
    return tuple(out)


def contract(y) -> tuple:
    """Deterministic contraction 0 -> 0, 1 -> 1, STAR -> 1."""
    return tuple(0 if v == 0 else 1 for v in y)


@dataclass(frozen=True)
class Poset:
    """An enumerated set of equal-length configurations under leq."""

    elements: tuple

    def __post_init__(self):
        if len(self.elements) == 0:
            raise ValueError("empty poset")
        n = len(self.elements[0])
        if any(len(e) != n for e in self.elements):
            raise ValueError("mixed configuration lengths")
        if len(set(self.elements)) != len(self.elements):
            raise ValueError("duplicate elements")

    @property
    def size(self) -> int:
        return len(self.elements)

    def index(self, x) -> int:
        return self.elements.index(x)

    def leq_matrix(self) -> np.ndarray:
        """Boolean matrix M[i,j] = elements[i] <= elements[j]."""
        k = self.size
        arr = np.array(self.elements)
        m = np.ones((k, k), dtype=bool)
        for c in range(arr.shape[1]):
            m &= arr[:, c][:, None] <= arr[:, c][None, :]
        return m

    def comparable_pairs(self):
        """All ordered pairs (i, j), i != j, with elements[i] < elements[j]."""
        m = self.leq_matrix()
        k = self.size
        return [(i, j) for i in range(k) for j in range(k) if i != j and m[i, j]]

    def up_closure(self, indices) -> frozenset:
        m = self.leq_matrix()
        out = set()
        for i in indices:
            out.update(np.nonzero(m[i])[0].tolist())
        return frozenset(out)


def is_up_set(poset: Poset, members: frozenset) -> bool:
    m = poset.leq_matrix()
    for i in members:
        if not all(j in members for j in np.nonzero(m[i])[0]):
            return False
    return True


def is_increasing(values, poset: Poset, tol: float = 0.0):
    """Check f(x) <= f(y) for all comparable pairs x <= y.

    values: sequence aligned with poset.elements.
    Returns (True, None) or (False, (i, j)) with a violating index pair.
    """
    m = poset.leq_matrix()
    k = poset.size
    for i in range(k):
        for j in np.nonzero(m[i])[0]:
            if i != j and values[i] > values[j] + tol:
                return False, (i, j)
    return True, None


def enumerate_up_sets(poset: Poset, max_elements: int = 32,
                      max_up_sets: int = 10 ** 6):
    """All upward-closed subsets, as frozensets of element indices.

    Processes elements along a reverse linear extension; an element may join
    a partial up-set only once all of its strict successors are present.
    """
    k = poset.size
    if k > max_elements:
        raise ValueError(
            f"poset has {k} > {max_elements} elements; "
            "use the flow-based dominance check instead")
    order = sorted(range(k), key=lambda i: poset.elements[i], reverse=True)
    m = poset.leq_matrix()
    succ = [frozenset(j for j in np.nonzero(m[i])[0] if j != i)
            for i in range(k)]
    partial = [frozenset()]
    for i in order:
        new = []
        for u in partial:
            new.append(u)
            if succ[i] <= u:
                new.append(u | {i})
        if len(new) > max_up_sets:
            raise ValueError(
                f"more than {max_up_sets} up-sets; "
                "use the flow-based dominance check instead")
        partial = new
    return partial


def _scale_to_ints(p: np.ndarray) -> list:
    ints = [int(round(x * _FLOW_SCALE)) for x in p]
    # pin the total exactly to the scale so both sides of the flow agree
    ints[int(np.argmax(p))] += _FLOW_SCALE - sum(ints)
    return ints


class _Dinic:
    """Max-flow on small graphs with exact (Python int) capacities."""

    def __init__(self, n):
        self.n = n
        self.adj = [[] for _ in range(n)]

    def add_edge(self, u, v, cap):
        self.adj[u].append([v, cap, len(self.adj[v])])
        self.adj[v].append([u, 0, len(self.adj[u]) - 1])

    def _bfs(self, s, t):
        self.level = [-1] * self.n
        self.level[s] = 0
        q = deque([s])
        while q:
            u = q.popleft()
            for e in self.adj[u]:
                if e[1] > 0 and self.level[e[0]] < 0:
                    self.level[e[0]] = self.level[u] + 1
                    q.append(e[0])
        return self.level[t] >= 0

    def _dfs(self, u, t, f):
        if u == t:
            return f
        while self.it[u] < len(self.adj[u]):
            e = self.adj[u][self.it[u]]
            if e[1] > 0 and self.level[e[0]] == self.level[u] + 1:
                d = self._dfs(e[0], t, min(f, e[1]))
                if d > 0:
                    e[1] -= d
                    self.adj[e[0]][e[2]][1] += d
                    return d
            self.it[u] += 1
        return 0

    def max_flow(self, s, t):
        total = 0
        while self._bfs(s, t):
            self.it = [0] * self.n
            while True:
                f = self._dfs(s, t, float("inf"))
                if f == 0:
                    break
                total += f
        return total

    def reachable_in_residual(self, s):
        seen = {s}
        q = deque([s])
        while q:
            u = q.popleft()
            for e in self.adj[u]:
                if e[1] > 0 and e[0] not in seen:
                    seen.add(e[0])
                    q.append(e[0])
        return seen


def _check_dist(p, k):
    p = np.asarray(p, dtype=float)
    if p.shape != (k,):
        raise ValueError("distribution length does not match the poset")
    if np.any(p < -PROB_TOL) or abs(p.sum() - 1.0) > PROB_TOL:
        raise ValueError("input is not a probability vector")
    return np.clip(p, 0.0, None)


def stochastic_dominance(nu, nu_prime, poset: Poset, tol: float = PROB_TOL):
    """Test nu <=_sd nu_prime over the poset.

    Feasibility of a monotone coupling is decided by max-flow on the bipartite
    graph with an arc x -> y whenever x <= y.  Returns (True, None) on
    success, else (False, witness) where witness is an up-set U (frozenset of
    element indices) with nu(U) > nu_prime(U).
    """
    k = poset.size
    nu = _check_dist(nu, k)
    nu_prime = _check_dist(nu_prime, k)
    left = _scale_to_ints(nu)
    right = _scale_to_ints(nu_prime)
    m = poset.leq_matrix()

    s, t = 0, 2 * k + 1
    net = _Dinic(2 * k + 2)
    for i in range(k):
        if left[i] > 0:
            net.add_edge(s, 1 + i, left[i])
        if right[i] > 0:
            net.add_edge(1 + k + i, t, right[i])
    for i in range(k):
        for j in np.nonzero(m[i])[0]:
            net.add_edge(1 + i, 1 + k + j, _FLOW_SCALE)

    flow = net.max_flow(s, t)
    slack = int(tol * _FLOW_SCALE) + k + 1
    if flow >= _FLOW_SCALE - slack:
        return True, None
    reach = net.reachable_in_residual(s)
    base = [i for i in range(k) if (1 + i) in reach]
    witness = poset.up_closure(base)
    return False, witness


def dominance_by_up_sets(nu, nu_prime, poset: Poset, tol: float = PROB_TOL,
                         **guards):
    """Cross-check: nu(U) <= nu_prime(U) + tol for every up-set U."""
    k = poset.size
    nu = _check_dist(nu, k)
    nu_prime = _check_dist(nu_prime, k)
    for u in enumerate_up_sets(poset, **guards):
        if sum(nu[i] for i in u) > sum(nu_prime[i] for i in u) + tol:
            return False, u
    return True, None
