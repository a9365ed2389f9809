"""Exact hopset and shortcut-set constructions.

``greedy_hopset`` processes routing paths in order of decreasing potential
(number of not-yet-covered vertices) and shortcuts only the uncovered
pieces of each selected path, so every vertex gains sensitivity in exactly
one iteration.
"""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import InconsistentRouting
from .graph import Graph
from .hopset import EXACT_HOPSET, SHORTCUT_SET, Hopset
from .primitives import HopsetEdge, RootedTree, path_hopset, tree_hopset
from .routing import RoutingOracle, scc_condense


def log2c(n: int) -> int:
    """⌈log₂ n⌉ for n ≥ 1 (0 for n ≤ 1)."""
    return max(0, (int(n) - 1).bit_length())


@dataclass
class GreedyTrace:
    """Bookkeeping of one greedy run.

    ``order[i]`` is the i-th selected routing path (as an endpoint pair),
    ``potential[i]`` its potential when selected, ``first_cover[v]`` the
    iteration that first covered ``v`` (-1 if never) and ``edge_iteration``
    maps every emitted hopset edge to the iteration that produced it.
    """

    oracle: RoutingOracle
    order: list = field(default_factory=list)
    potential: list = field(default_factory=list)
    first_cover: list = field(default_factory=list)
    edge_iteration: dict = field(default_factory=dict)
    pieces: list = field(default_factory=list)

    def path(self, i: int) -> list:
        return self.oracle.path(*self.order[i])

    def labels(self, i: int, path=None) -> list:
        """Per vertex of path i: the earlier iteration that first covered it, else None."""
        if path is None:
            path = self.path(i)
        fc = self.first_cover
        return [fc[v] if 0 <= fc[v] < i else None for v in path]

    def shadows(self, i: int, path=None) -> list:
        """Shadows cast onto path i as ``(start, end, caster)`` index ranges."""
        lab = self.labels(i, path)
        out = []
        start = None
        for k, x in enumerate(lab):
            if start is not None and x != lab[start]:
                out.append((start, k - 1, lab[start]))
                start = None
            if start is None and x is not None:
                start = k
        if start is not None:
            out.append((start, len(lab) - 1, lab[start]))
        return out

    def new_penumbras(self, i: int, path=None) -> dict:
        """Count, per casting iteration j, the penumbra edges of path i first cast by j."""
        lab = self.labels(i, path)
        counts = {}
        for a, b in zip(lab, lab[1:]):
            if a == b:
                continue
            j = min(x for x in (a, b) if x is not None)
            counts[j] = counts.get(j, 0) + 1
        return counts

    def potentials_weakly_decrease(self) -> bool:
        p = self.potential
        return all(p[i] >= p[i + 1] for i in range(len(p) - 1))

    def sensitivity_iterations(self, hopset: Hopset) -> dict:
        """Vertex -> set of iterations whose emitted edges have it in their span."""
        out = {}
        for k, e in hopset.edges.items():
            it = self.edge_iteration[k]
            for v in e.span:
                out.setdefault(v, set()).add(it)
        return out

    def summary(self) -> dict:
        max_shadows = 0
        max_new_pen = 0
        for i in range(len(self.order)):
            path = self.path(i)
            max_shadows = max(max_shadows, len(self.shadows(i, path)))
            pen = self.new_penumbras(i, path)
            if pen:
                max_new_pen = max(max_new_pen, max(pen.values()))
        return {
            "paths": len(self.order),
            "selections_with_positive_potential": sum(1 for p in self.potential if p > 0),
            "max_shadows": max_shadows,
            "max_new_penumbras": max_new_pen,
            "potentials_weakly_decrease": self.potentials_weakly_decrease(),
        }


def _uncovered_pieces(path, covered):
    piece = []
    for v in path:
        if covered[v]:
            if piece:
                yield piece
            piece = []
        else:
            piece.append(v)
    if piece:
        yield piece


def greedy_hopset(g: Graph, oracle: RoutingOracle | None = None, seed: int = 0):
    """Greedy exact hopset for undirected graphs and DAGs.

    Returns ``(Hopset, GreedyTrace)``.  Argmax ties go to the
    lexicographically smallest endpoint pair.
    """
    if g.directed and not g.is_acyclic():
        raise InconsistentRouting(
            "greedy_hopset needs consistent routing paths (undirected graph or DAG); "
            "use the di-shortcut construction for general digraphs"
        )
    if oracle is None:
        oracle = RoutingOracle(g, seed)
    hopset = Hopset(g.directed, EXACT_HOPSET, "greedy", oracle.seed)
    trace = GreedyTrace(oracle, first_cover=[-1] * g.n)
    covered = bytearray(g.n)
    weight = g.weight

    heap = [(-(oracle.tree(s).hops[t] + 1), s, t) for s, t in oracle.pairs()]
    heapq.heapify(heap)
    while heap and heap[0][0] < 0:
        negp, s, t = heapq.heappop(heap)
        path = oracle.path(s, t)
        pot = 0
        for v in path:
            if not covered[v]:
                pot += 1
        if pot < -negp:
            heapq.heappush(heap, (-pot, s, t))
            continue
        it = len(trace.order)
        trace.order.append((s, t))
        trace.potential.append(pot)
        for piece in _uncovered_pieces(path, covered):
            trace.pieces.append((it, tuple(piece)))
            for v in piece:
                covered[v] = 1
                trace.first_cover[v] = it
            if len(piece) >= 3:
                ws = [weight(a, b) for a, b in zip(piece, piece[1:])]
                for e in path_hopset(piece, ws):
                    if hopset.add(e):
                        trace.edge_iteration[e.key(g.directed)] = it
    # every remaining path has potential 0 and contributes no edges
    for _, s, t in sorted(heap):
        trace.order.append((s, t))
        trace.potential.append(0)
    return hopset, trace


# --- directed shortcut set ---------------------------------------------------


def _bfs_path(g: Graph, src: int, dst: int, allowed) -> list:
    """Min-hop path from src to dst inside the vertex set ``allowed``."""
    if src == dst:
        return [src]
    prev = {src: -1}
    q = deque([src])
    while q:
        u = q.popleft()
        for v, _, _ in g.out_adj[u]:
            if v in allowed and v not in prev:
                prev[v] = u
                if v == dst:
                    out = [v]
                    while out[-1] != src:
                        out.append(prev[out[-1]])
                    return out[::-1]
                q.append(v)
    raise ValueError(f"{dst} not reachable from {src} inside the component")


def greedy_di_shortcut(g: Graph, seed: int = 0):
    """Shortcut set for general digraphs via SCC condensation.

    Intra-SCC edges come from tree hopsets of the in- and out-arborescences
    at each component's smallest vertex; inter-SCC edges are greedy hopset
    edges of the condensation lifted to (out-port, in-port) pairs.
    """
    scc = scc_condense(g)
    h = Hopset(True, SHORTCUT_SET, "greedy-di-shortcut", seed)
    comp_sets = [frozenset(c) for c in scc.members]
    intra = 0
    for members in scc.members:
        if len(members) < 2:
            continue
        sub, glob = g.induced(members)
        # members are sorted, so the representative (smallest id) is local vertex 0
        sub_oracle = RoutingOracle(sub, seed, sources=[0], in_sources=[0])
        for spt in (sub_oracle.tree(0), sub_oracle.in_tree(0)):
            for e in tree_hopset(RootedTree.from_spt(spt, sub)):
                span = tuple(glob[v] for v in e.span)
                intra += h.add(HopsetEdge(span[0], span[-1], e.weight, span))

    d = scc.condensation
    d_hopset, _ = greedy_hopset(d, RoutingOracle(d, seed))
    connectors = {}
    lifted = 0
    for e in d_hopset:
        comps = e.span
        span = []
        for i in range(1, len(comps)):
            o, x = scc.rep_edge[(comps[i - 1], comps[i])]
            if span:
                key = (span[-1], o)
                if key not in connectors:
                    connectors[key] = _bfs_path(g, span[-1], o, comp_sets[comps[i - 1]])
                span.extend(connectors[key][1:])
            else:
                span.append(o)
            span.append(x)
        span = tuple(span)
        lifted += h.add(HopsetEdge(span[0], span[-1], g.path_weight(span), span))
    h.meta.update(
        {
            "sccs": len(scc.members),
            "condensation_edges": d.m,
            "intra_scc_edges": intra,
            "inter_scc_edges": lifted,
        }
    )
    return h


# --- tree-based constructions ------------------------------------------------


def _components(g: Graph) -> list:
    comp = [-1] * g.n
    roots = []
    for r in range(g.n):
        if comp[r] >= 0:
            continue
        comp[r] = r
        roots.append(r)
        stack = [r]
        while stack:
            u = stack.pop()
            for v, _, _ in g.out_adj[u]:
                if comp[v] < 0:
                    comp[v] = r
                    stack.append(v)
    return roots


def undirected_shortcut_set(g: Graph, oracle: RoutingOracle | None = None, seed: int = 0) -> Hopset:
    """Tree hopset of the routing-path tree at each component's smallest vertex."""
    if g.directed:
        raise ValueError("undirected_shortcut_set expects an undirected graph")
    roots = _components(g)
    if oracle is None:
        oracle = RoutingOracle(g, seed, sources=roots)
    h = Hopset(False, SHORTCUT_SET, "undirected-shortcut", oracle.seed)
    for r in roots:
        h.update(tree_hopset(RootedTree.from_spt(oracle.tree(r), g)))
    h.meta["components"] = len(roots)
    h.meta["roots"] = roots
    return h


def folklore_sample(n: int, seed: int) -> list:
    rng = np.random.default_rng(seed)
    p = n ** -0.5 if n else 0.0
    return [int(v) for v in np.flatnonzero(rng.random(n) < p)]


def folklore_hopset(g: Graph, oracle: RoutingOracle | None = None, seed: int = 0) -> Hopset:
    """Sample vertices with probability n^{-1/2}; tree hopsets of their arborescences.

    Both the out-arborescence and (on digraphs) the in-arborescence of every
    sampled vertex are shortcut.
    """
    sample = folklore_sample(g.n, seed)
    if oracle is None:
        oracle = RoutingOracle(g, seed, sources=sample, in_sources=sample if g.directed else ())
    h = Hopset(g.directed, EXACT_HOPSET, "folklore", seed)
    for x in sample:
        h.update(tree_hopset(RootedTree.from_spt(oracle.tree(x), g)))
        if g.directed:
            h.update(tree_hopset(RootedTree.from_spt(oracle.in_tree(x), g)))
    h.meta["sample"] = sample
    return h


def sqrt_log_bound(n: int) -> float:
    """√n·(⌈log₂ n⌉ + 1), the scale against which hop-diameters are reported."""
    return math.sqrt(n) * (log2c(n) + 1)
