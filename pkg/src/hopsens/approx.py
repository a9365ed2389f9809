"""Approximate hopsets for undirected graphs from a sampled vertex hierarchy.

Every vertex ``u`` gets a tree hopset on its shortest-path tree truncated to
``Cluster(u) ∪ {u}``; a vertex only lies in the trees of its bunch, which
keeps sensitivity low.  ``tz_emulator`` builds the matching emulator, used
as a test oracle for the hop bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import RetryExhausted, TruncationInvalid
from .graph import Graph
from .hopset import EXACT_HOPSET, Hopset
from .primitives import HopsetEdge, RootedTree, tree_hopset
from .routing import RoutingOracle

MAX_HIERARCHY_ATTEMPTS = 64
INF = np.iinfo(np.int64).max


@dataclass
class Hierarchy:
    """``level[v]`` is the largest i with ``v ∈ A_i``; ``A_k`` is always empty."""

    k: int
    level: list
    seed: int
    attempts: int = 1

    def members(self, i: int) -> list:
        return [v for v, lv in enumerate(self.level) if lv >= i]


@dataclass
class PivotTable:
    """``pivot[v][i] = p_i(v)`` (None when A_i is unreachable) and ``dist[v][i] = dist(v, A_i)``.

    ``dist[v][k]`` is the infinity sentinel.
    """

    pivot: list
    dist: list


@dataclass
class BunchClusterIndex:
    bunch: list
    cluster: list
    level: list

    def level_bunch(self, v: int, i: int) -> list:
        """Bunch_i(v); a member of A_{i+1} can never be strictly closer than A_{i+1}."""
        return [u for u in self.bunch[v] if self.level[u] == i]

    def max_bunch(self) -> int:
        return max((len(b) for b in self.bunch), default=0)


@dataclass
class BallIndex:
    open: list
    closed: list


def bunch_cap(n: int, k: int) -> float:
    """4k·n^{1/k}·ln n, with ln n floored at 1 so tiny graphs are not rejected."""
    return 4 * k * n ** (1.0 / k) * max(math.log(n), 1.0) if n else 0.0


def distance_matrix(g: Graph, oracle: RoutingOracle) -> np.ndarray:
    d = np.full((g.n, g.n), INF, dtype=np.int64)
    for s in range(g.n):
        row = oracle.tree(s).dist
        for t, x in enumerate(row):
            if x is not None:
                d[s, t] = x
    return d


def _draw_levels(n: int, k: int, rng) -> list:
    level = [0] * n
    p = n ** (-1.0 / k) if n else 0.0
    for i in range(1, k):
        draws = rng.random(n)
        for v in range(n):
            if level[v] == i - 1 and draws[v] < p:
                level[v] = i
    return level


def sample_hierarchy(g: Graph, k: int, seed: int = 0, oracle: RoutingOracle | None = None) -> Hierarchy:
    """Nested sampling with promotion probability n^{-1/k}.

    Redrawn until every bunch has at most ``bunch_cap(n, k)`` vertices.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if oracle is None:
        oracle = RoutingOracle(g, seed)
    dist = distance_matrix(g, oracle)
    cap = bunch_cap(g.n, k)
    rng = np.random.default_rng([int(seed), 0xA770])
    for attempt in range(1, MAX_HIERARCHY_ATTEMPTS + 1):
        h = Hierarchy(k, _draw_levels(g.n, k, rng), seed, attempt)
        piv = _pivots(dist, h)
        if _bunch_sizes(dist, h, piv).max(initial=0) <= cap:
            return h
    raise RetryExhausted(
        f"no hierarchy with bunches ≤ {cap:.1f} after {MAX_HIERARCHY_ATTEMPTS} draws"
    )


def _pivots(dist: np.ndarray, h: Hierarchy) -> PivotTable:
    n, k = len(h.level), h.k
    level = np.asarray(h.level, dtype=np.int64)
    dA = np.full((n, k + 1), INF, dtype=np.int64)
    pivot = [[None] * k for _ in range(n)]
    for i in range(k):
        cols = np.flatnonzero(level >= i)
        if cols.size:
            sub = dist[:, cols]
            dA[:, i] = sub.min(axis=1)
    for v in range(n):
        for i in range(k - 1, -1, -1):
            if dA[v, i] == INF:
                continue
            if i + 1 < k and dA[v, i] == dA[v, i + 1]:
                pivot[v][i] = pivot[v][i + 1]
                continue
            # smallest id among the closest members of A_i
            row = dist[v]
            for u in range(n):
                if h.level[u] >= i and row[u] == dA[v, i]:
                    pivot[v][i] = u
                    break
    return PivotTable(pivot, [[int(x) for x in r] for r in dA])


def _bunch_sizes(dist: np.ndarray, h: Hierarchy, piv: PivotTable) -> np.ndarray:
    mask = _cluster_matrix(dist, h, piv)
    return mask.sum(axis=1)


def _cluster_matrix(dist: np.ndarray, h: Hierarchy, piv: PivotTable) -> np.ndarray:
    """``M[v, u]`` is True iff ``u ∈ Bunch(v)`` (equivalently ``v ∈ Cluster(u)``)."""
    level = np.asarray(h.level, dtype=np.int64)
    dA = np.asarray(piv.dist, dtype=np.int64)
    # threshold for u is dist(v, A_{level(u)+1})
    thresh = dA[:, level + 1]
    return (dist < thresh) & (dist < INF)


def compute_indices(g: Graph, h: Hierarchy, oracle: RoutingOracle):
    """Pivot table, bunch/cluster index and ball index, all under exact integer distances."""
    if g.directed:
        raise ValueError("compute_indices expects an undirected graph")
    dist = distance_matrix(g, oracle)
    piv = _pivots(dist, h)
    mask = _cluster_matrix(dist, h, piv)
    bunch = [[int(u) for u in np.flatnonzero(mask[v])] for v in range(g.n)]
    cluster = [[int(v) for v in np.flatnonzero(mask[:, u])] for u in range(g.n)]
    open_balls = []
    closed_balls = []
    for v in range(g.n):
        i = h.level[v]
        # open ball = level-i bunch of v
        ball = [u for u in bunch[v] if h.level[u] >= i]
        closed = list(ball)
        if i + 1 < h.k and piv.pivot[v][i + 1] is not None and piv.pivot[v][i + 1] not in ball:
            closed.append(piv.pivot[v][i + 1])
        open_balls.append(ball)
        closed_balls.append(sorted(closed))
    return piv, BunchClusterIndex(bunch, cluster, list(h.level)), BallIndex(open_balls, closed_balls)


def truncated_tree(g: Graph, oracle: RoutingOracle, u: int, cluster) -> RootedTree:
    """Routing tree of ``u`` restricted to ``cluster ∪ {u}``; raises TruncationInvalid if not closed."""
    spt = oracle.tree(u)
    keep = set(cluster)
    keep.add(u)
    for v in keep:
        p = spt.parent[v]
        if v != u and p not in keep:
            raise TruncationInvalid(f"cluster of {u} contains {v} but not its tree parent {p}")
    return RootedTree.from_spt(spt, g, sorted(keep))


def apx_undirected_hopset(
    g: Graph,
    k: int,
    seed: int = 0,
    oracle: RoutingOracle | None = None,
    hierarchy: Hierarchy | None = None,
) -> Hopset:
    """Union of tree hopsets over every vertex's cluster-truncated shortest-path tree."""
    if g.directed:
        raise ValueError("apx_undirected_hopset expects an undirected graph")
    if oracle is None:
        oracle = RoutingOracle(g, seed)
    if hierarchy is None:
        hierarchy = sample_hierarchy(g, k, seed, oracle)
    piv, bc, _ = compute_indices(g, hierarchy, oracle)
    h = Hopset(False, EXACT_HOPSET, "apx", seed)
    for u in range(g.n):
        h.update(tree_hopset(truncated_tree(g, oracle, u, bc.cluster[u])))
    h.meta.update(
        {
            "k": k,
            "levels": [len(hierarchy.members(i)) for i in range(k)],
            "hierarchy_attempts": hierarchy.attempts,
            "max_bunch": bc.max_bunch(),
            "bunch_cap": bunch_cap(g.n, k),
        }
    )
    return h


def tz_emulator(g: Graph, h: Hierarchy, oracle: RoutingOracle) -> Hopset:
    """Edges ``(v, u)`` for ``u ∈ Ball[v]`` weighted by ``dist(v, u)``; spans are routing paths."""
    _, _, balls = compute_indices(g, h, oracle)
    out = Hopset(False, EXACT_HOPSET, "tz-emulator", h.seed)
    for v in range(g.n):
        for u in balls.closed[v]:
            if u != v:
                out.add(HopsetEdge(v, u, oracle.dist(v, u), tuple(oracle.path(v, u))))
    return out
