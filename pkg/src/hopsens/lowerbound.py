"""Layered instances with perfect paths, their verification and the vertex-split lift.

Vertex ``(i, j)`` (layer ``i`` in 1..ℓ, offset ``j`` in 0..n_layer-1) has id
``(i - 1)·n_layer + j``.  The path of slope ``s`` from offset ``j`` visits
``(i, j + (i - 1)·s)``; an edge of slope ``s`` weighs ``s² + 1`` units.
Strict convexity of the squared slope makes each constant-slope path the
unique cheapest way to cover its total displacement in ℓ-1 steps.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ParameterViolation
from .graph import SCALE, Graph
from .routing import split_transform


@dataclass
class LayeredInstance:
    ell: int
    n_layer: int
    x: int
    paths: list
    graph: Graph
    record: dict = field(default_factory=dict)

    def vertex(self, layer: int, offset: int) -> int:
        return (layer - 1) * self.n_layer + offset

    def layer_of(self, v: int) -> int:
        return v // self.n_layer + 1


def slope_weight(s: int) -> int:
    return (s * s + 1) * SCALE


def thm2_parameters(N: int, beta: int) -> dict:
    """Parameters that turn an N-vertex budget and hop target β into an instance.

    n_layer = N/(2β), ℓ = 2β and x = N/(4β²), so that |Π|/(2·n_layer) = x/2.
    """
    return {
        "N": N,
        "beta": beta,
        "n_layer": Fraction(N, 2 * beta),
        "ell": 2 * beta,
        "x": Fraction(N, 4 * beta * beta),
    }


def _record(ell: int, n_layer: int, x: int, paths: int) -> dict:
    beta = Fraction(ell, 2)
    N = n_layer * ell
    return {
        "beta": str(beta),
        "N": N,
        "x_max": str(Fraction(n_layer, ell)),
        "x": x,
        "paths": paths,
        "edge_sensitivity_bound": str(Fraction(paths, 2 * n_layer)),
    }


def gen_perfect_paths(n_layer: int, ell: int, x: int) -> LayeredInstance:
    if ell < 2 or n_layer < 1 or x < 1:
        raise ParameterViolation(f"need ell ≥ 2, n_layer ≥ 1, x ≥ 1 (got {ell}, {n_layer}, {x})")
    if x * ell > n_layer:
        raise ParameterViolation(f"x = {x} exceeds n_layer/ell = {n_layer}/{ell}")
    paths = []
    edges = []
    for s in range(x):
        for j in range(n_layer - (ell - 1) * s):
            p = [(i - 1) * n_layer + j + (i - 1) * s for i in range(1, ell + 1)]
            paths.append(p)
            edges.extend((a, b, slope_weight(s)) for a, b in zip(p, p[1:]))
    layers = tuple(v // n_layer + 1 for v in range(n_layer * ell))
    g = Graph(n_layer * ell, sorted(edges), True, layers)
    return LayeredInstance(ell, n_layer, x, paths, g, _record(ell, n_layer, x, len(paths)))


@dataclass
class PerfectReport:
    passed: bool
    layering: list = field(default_factory=list)
    partition: list = field(default_factory=list)
    uniqueness: list = field(default_factory=list)

    def to_dict(self):
        return {
            "passed": self.passed,
            "layering_violations": self.layering,
            "partition_violations": self.partition,
            "uniqueness_violations": self.uniqueness,
        }


def _count_shortest(g: Graph, s: int):
    """Dijkstra with exact shortest-path counts (weights must be positive)."""
    dist = {s: 0}
    count = {s: 1}
    done = set()
    heap = [(0, s)]
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for v, w, _ in g.out_adj[u]:
            nd = d + w
            if v not in dist or nd < dist[v]:
                dist[v] = nd
                count[v] = count[u]
                heapq.heappush(heap, (nd, v))
            elif nd == dist[v]:
                count[v] += count[u]
    return dist, count


def verify_perfect(inst: LayeredInstance) -> PerfectReport:
    """Check layering, the edge partition and unique shortest paths, listing every violation."""
    g = inst.graph
    rep = PerfectReport(True)
    usage = {}
    for pi, p in enumerate(inst.paths):
        if len(p) != inst.ell or any(inst.layer_of(v) != k + 1 for k, v in enumerate(p)):
            rep.layering.append({"path": pi, "reason": "not one vertex per layer in order"})
        for a, b in zip(p, p[1:]):
            if (a, b) not in g.edge_index:
                rep.layering.append({"path": pi, "reason": f"missing edge ({a},{b})"})
            usage[(a, b)] = usage.get((a, b), 0) + 1
    for u, v, _ in g.edges:
        c = usage.get((u, v), 0)
        if c != 1:
            rep.partition.append({"edge": [u, v], "paths": c})
    if any(w <= 0 for _, _, w in g.edges):
        rep.uniqueness.append({"reason": "nonpositive weight, path counting undefined"})
    else:
        by_source = {}
        for pi, p in enumerate(inst.paths):
            by_source.setdefault(p[0], []).append(pi)
        for s, idx in by_source.items():
            dist, count = _count_shortest(g, s)
            for pi in idx:
                p = inst.paths[pi]
                t = p[-1]
                try:
                    w = g.path_weight(p)
                except KeyError:
                    continue
                if dist.get(t) != w or count.get(t) != 1:
                    rep.uniqueness.append(
                        {"path": pi, "weight": w, "dist": dist.get(t), "shortest_paths": count.get(t)}
                    )
    rep.passed = not (rep.layering or rep.partition or rep.uniqueness)
    return rep


@dataclass
class LiftedInstance:
    graph: Graph
    paths: list
    t_edges: list
    ell: int
    n_layer: int

    def t_mask(self) -> list:
        mask = [False] * self.graph.m
        for i in self.t_edges:
            mask[i] = True
        return mask


def lift_instance(inst: LayeredInstance) -> LiftedInstance:
    """Split every vertex into a zero-weight edge; G′ has 2ℓ layers."""
    st = split_transform(inst.graph)
    layers = tuple(2 * inst.layer_of(x // 2) - 1 + (x % 2) for x in range(st.graph.n))
    gp = Graph(st.graph.n, st.graph.edges, True, layers)
    lifted = [st.lift_path(p) for p in inst.paths]
    return LiftedInstance(gp, lifted, list(st.t_edges), inst.ell, inst.n_layer)


def sidecar_json(inst: LayeredInstance, lifted: LiftedInstance, config: dict | None = None) -> str:
    return json.dumps(
        {
            "config": config or {},
            "ell": inst.ell,
            "n_layer": inst.n_layer,
            "x": inst.x,
            "record": inst.record,
            "paths": inst.paths,
            "lifted_paths": lifted.paths,
            "t_edges": lifted.t_edges,
        },
        separators=(",", ":"),
    )


def read_sidecar(text: str) -> dict:
    data = json.loads(text)
    for key in ("ell", "n_layer", "lifted_paths", "t_edges"):
        if key not in data:
            raise ValueError(f"sidecar lacks {key!r}")
    return data
