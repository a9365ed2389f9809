"""Consistent shortest-path routing, SCC condensation and the vertex-split transform.

Routing paths are the unique minima of the lexicographic order on
``(weight, key-sum)``, where every edge carries an independent 64-bit random
key.  Keys are summed as exact Python integers, so two distinct paths tie
only on a genuine key collision, which the searches detect and reject.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from .errors import KeyCollision, Unreachable
from .graph import SCALE, Graph

MAX_KEY_ATTEMPTS = 8


def edge_keys(m: int, seed: int, attempt: int = 0) -> list:
    rng = np.random.default_rng([int(seed), int(attempt), 0x5EED])
    return rng.integers(1, 2**64, size=m, dtype=np.uint64).tolist()


@dataclass
class ShortestPathTree:
    """Single-source result: ``parent[v] == -1`` marks the root and unreachable vertices."""

    root: int
    dist: list
    key: list
    parent: list
    hops: list
    reverse: bool = False

    def reachable(self, v: int) -> bool:
        return self.dist[v] is not None

    def children(self) -> list:
        kids = [[] for _ in self.parent]
        for v, p in enumerate(self.parent):
            if p >= 0:
                kids[p].append(v)
        return kids


def keyed_dijkstra(g: Graph, source: int, keys: list, reverse: bool = False) -> ShortestPathTree:
    """Lexicographic ``(weight, key)`` Dijkstra; raises KeyCollision on an exact tie."""
    n = g.n
    adj = g.in_adj if reverse else g.out_adj
    dist = [None] * n
    key = [None] * n
    parent = [-1] * n
    hops = [0] * n
    done = [False] * n
    dist[source] = 0
    key[source] = 0
    heap = [(0, 0, source)]
    while heap:
        d, k, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for v, w, ei in adj[u]:
            nd = d + w
            nk = k + keys[ei]
            dv = dist[v]
            if dv is None or nd < dv or (nd == dv and nk < key[v]):
                if done[v]:
                    # cannot happen with nonnegative weights and positive keys
                    raise AssertionError("label decrease on a settled vertex")
                dist[v] = nd
                key[v] = nk
                parent[v] = u
                hops[v] = hops[u] + 1
                heapq.heappush(heap, (nd, nk, v))
            elif nd == dv and nk == key[v] and parent[v] != u:
                raise KeyCollision(
                    f"paths into {v} via {parent[v]} and {u} share weight and key sum"
                )
    return ShortestPathTree(source, dist, key, parent, hops, reverse)


class RoutingOracle:
    """Per-source shortest-path trees under ``(weight, key-sum)`` order.

    Out-trees for ``sources`` (all vertices by default) and in-trees for
    ``in_sources`` are built up front; on a key collision the keys are
    redrawn, up to ``MAX_KEY_ATTEMPTS`` times.  Other trees are built on
    first use.
    """

    def __init__(self, g: Graph, seed: int = 0, sources=None, in_sources=()):
        self.graph = g
        self.seed = seed
        if sources is None:
            sources = range(g.n)
        for attempt in range(MAX_KEY_ATTEMPTS):
            self.attempt = attempt
            self.keys = edge_keys(g.m, seed, attempt)
            self._out = {}
            self._in = {}
            try:
                for s in sources:
                    self.tree(s)
                for t in in_sources:
                    self.in_tree(t)
                return
            except KeyCollision:
                continue
        raise KeyCollision(f"key collisions on {MAX_KEY_ATTEMPTS} consecutive seeds")

    def tree(self, s: int) -> ShortestPathTree:
        t = self._out.get(s)
        if t is None:
            t = self._out[s] = keyed_dijkstra(self.graph, s, self.keys)
        return t

    def in_tree(self, t: int) -> ShortestPathTree:
        """Tree of routing paths *into* ``t`` (equals ``tree`` on undirected graphs)."""
        if not self.graph.directed:
            return self.tree(t)
        tr = self._in.get(t)
        if tr is None:
            tr = self._in[t] = keyed_dijkstra(self.graph, t, self.keys, reverse=True)
        return tr

    def dist(self, s: int, t: int):
        return self.tree(s).dist[t]

    def path(self, s: int, t: int) -> list:
        tr = self.tree(s)
        if tr.dist[t] is None:
            raise Unreachable(s, t)
        out = [t]
        parent = tr.parent
        while t != s:
            t = parent[t]
            out.append(t)
        out.reverse()
        return out

    def path_key(self, path) -> int:
        idx = self.graph.edge_index
        return sum(self.keys[idx[(a, b)]] for a, b in zip(path, path[1:]))

    def pairs(self):
        """Every reachable ordered pair ``s != t`` (``s < t`` only when undirected)."""
        g = self.graph
        for s in range(g.n):
            dist = self.tree(s).dist
            lo = s + 1 if not g.directed else 0
            for t in range(lo, g.n):
                if t != s and dist[t] is not None:
                    yield s, t

    def dist_matrix(self) -> list:
        return [self.tree(s).dist for s in range(self.graph.n)]


def routing_path(oracle: RoutingOracle, s: int, t: int) -> list:
    return oracle.path(s, t)


# --- consistency -------------------------------------------------------------


@dataclass
class ConsistencyReport:
    consistent: bool
    pairs_checked: int
    paths: int
    offending: tuple | None = None
    collisions: int = 0

    def to_dict(self):
        return {
            "consistent": self.consistent,
            "pairs_checked": self.pairs_checked,
            "paths": self.paths,
            "offending": [list(p) for p in self.offending] if self.offending else None,
            "collisions": self.collisions,
        }


def _edge_set(path, directed):
    if directed:
        return set(zip(path, path[1:]))
    return {(a, b) if a < b else (b, a) for a, b in zip(path, path[1:])}


def paths_consistent(p, q, directed: bool) -> bool:
    """True when the intersection of two paths has at most one connected component.

    The intersection of two simple paths is a forest, so its component count
    is ``|common vertices| - |common edges|``.
    """
    common_v = len(set(p) & set(q))
    if common_v <= 1:
        return True
    common_e = len(_edge_set(p, directed) & _edge_set(q, directed))
    return common_v - common_e <= 1


def check_consistency(oracle: RoutingOracle, stop_at_first: bool = True) -> ConsistencyReport:
    """Exhaustive pairwise check of all routing paths.

    Meaningful for undirected graphs and DAGs; on general digraphs the
    result only describes the chosen paths (some digraphs admit no
    consistent choice at all).
    """
    directed = oracle.graph.directed
    try:
        paths = [oracle.path(s, t) for s, t in oracle.pairs()]
    except KeyCollision:
        return ConsistencyReport(False, 0, 0, None, collisions=1)
    vsets = [frozenset(p) for p in paths]
    esets = [frozenset(_edge_set(p, directed)) for p in paths]
    checked = 0
    offending = None
    for i in range(len(paths)):
        vi, ei = vsets[i], esets[i]
        for j in range(i + 1, len(paths)):
            checked += 1
            cv = len(vi & vsets[j])
            if cv > 1 and cv - len(ei & esets[j]) > 1:
                offending = (tuple(paths[i]), tuple(paths[j]))
                if stop_at_first:
                    return ConsistencyReport(False, checked, len(paths), offending)
    return ConsistencyReport(offending is None, checked, len(paths), offending)


# --- strongly connected components -----------------------------------------


@dataclass
class SccDecomposition:
    comp: list
    members: list
    rep_vertex: list
    condensation: Graph
    rep_edge: dict = field(default_factory=dict)

    def out_port(self, ci: int, cj: int) -> int:
        return self.rep_edge[(ci, cj)][0]

    def in_port(self, ci: int, cj: int) -> int:
        return self.rep_edge[(ci, cj)][1]


def strongly_connected_components(g: Graph) -> list:
    """Iterative Tarjan; returns lists of vertices."""
    n = g.n
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack = []
    comps = []
    counter = 0
    adj = g.out_adj
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            u, i = work[-1]
            if i < len(adj[u]):
                work[-1] = (u, i + 1)
                v = adj[u][i][0]
                if index[v] == -1:
                    index[v] = low[v] = counter
                    counter += 1
                    stack.append(v)
                    on_stack[v] = True
                    work.append((v, 0))
                elif on_stack[v]:
                    low[u] = min(low[u], index[v])
            else:
                work.pop()
                if work:
                    p = work[-1][0]
                    low[p] = min(low[p], low[u])
                if low[u] == index[u]:
                    comp = []
                    while True:
                        x = stack.pop()
                        on_stack[x] = False
                        comp.append(x)
                        if x == u:
                            break
                    comps.append(sorted(comp))
    return comps


def scc_condense(g: Graph) -> SccDecomposition:
    """Contract SCCs, keeping the lexicographically smallest edge per adjacent pair.

    Components are numbered by their smallest vertex, which is also the
    representative vertex.  Condensation edges have unit weight.
    """
    comps = sorted(strongly_connected_components(g), key=lambda c: c[0])
    comp = [0] * g.n
    for ci, c in enumerate(comps):
        for v in c:
            comp[v] = ci
    rep_edge = {}
    for u, v, _ in g.edges:
        cu, cv = comp[u], comp[v]
        if cu != cv:
            cur = rep_edge.get((cu, cv))
            if cur is None or (u, v) < cur:
                rep_edge[(cu, cv)] = (u, v)
    d = Graph(len(comps), [(a, b, SCALE) for a, b in sorted(rep_edge)], True)
    return SccDecomposition(comp, comps, [c[0] for c in comps], d, rep_edge)


# --- vertex-split transform --------------------------------------------------


@dataclass
class SplitTransform:
    """``G'`` with ``v_in = 2v`` and ``v_out = 2v + 1``."""

    graph: Graph
    original: Graph
    t_edges: list

    @staticmethod
    def v_in(v: int) -> int:
        return 2 * v

    @staticmethod
    def v_out(v: int) -> int:
        return 2 * v + 1

    @staticmethod
    def origin(x: int) -> int:
        return x // 2

    def t_mask(self) -> list:
        mask = [False] * self.graph.m
        for i in self.t_edges:
            mask[i] = True
        return mask

    def lift_path(self, path) -> list:
        out = []
        for v in path:
            out.extend((2 * v, 2 * v + 1))
        return out


def split_transform(g: Graph) -> SplitTransform:
    """Split every vertex into a zero-weight ``(v_in, v_out)`` edge.

    The result is always directed: an undirected edge ``{u, v}`` becomes the
    two arcs ``(u_out, v_in)`` and ``(v_out, u_in)``.
    """
    edges = []
    t_edges = []
    for v in range(g.n):
        t_edges.append(len(edges))
        edges.append((2 * v, 2 * v + 1, 0))
    for u, v, w in g.edges:
        edges.append((2 * u + 1, 2 * v, w))
        if not g.directed:
            edges.append((2 * v + 1, 2 * u, w))
    return SplitTransform(Graph(2 * g.n, edges, True), g, t_edges)
