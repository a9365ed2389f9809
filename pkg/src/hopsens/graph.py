"""Weighted graph container, edge-list I/O and small instance generators.

Weights are stored as exact fixed-point integers (``SCALE`` units per 1.0)
so that "this path has exactly the shortest distance" is a decidable test.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DuplicateEdge,
    GraphFormatError,
    NegativeWeight,
    SelfLoop,
    VertexOutOfRange,
)

SCALE = 10**6
FRACTION_DIGITS = 6


def parse_weight(text, line=None) -> int:
    """Parse a decimal literal into fixed-point units."""
    try:
        d = Decimal(str(text).strip())
    except InvalidOperation:
        raise GraphFormatError(f"malformed weight {text!r}", line) from None
    if not d.is_finite():
        raise GraphFormatError(f"non-finite weight {text!r}", line)
    scaled = d * SCALE
    if scaled != scaled.to_integral_value():
        raise GraphFormatError(
            f"weight {text!r} has more than {FRACTION_DIGITS} fractional digits", line
        )
    return int(scaled)


def format_weight(w: int) -> str:
    sign = "-" if w < 0 else ""
    q, r = divmod(abs(w), SCALE)
    if r == 0:
        return f"{sign}{q}"
    return f"{sign}{q}.{r:06d}".rstrip("0")


def weight_to_float(w: int) -> float:
    return w / SCALE


@dataclass(frozen=True)
class Graph:
    """Immutable weighted graph on vertices ``0..n-1``.

    ``edges`` holds ``(u, v, w)`` triples with ``w`` in fixed-point units.
    For undirected graphs each edge is stored once, in input orientation.
    """

    n: int
    edges: tuple
    directed: bool = False
    layers: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple((int(u), int(v), int(w)) for u, v, w in self.edges))
        seen = set()
        for i, (u, v, w) in enumerate(self.edges):
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise VertexOutOfRange(f"edge {i} ({u},{v}) outside 0..{self.n - 1}")
            if u == v:
                raise SelfLoop(f"edge {i} is a self-loop on {u}")
            if w < 0:
                raise NegativeWeight(f"edge {i} ({u},{v}) has negative weight")
            key = (u, v) if self.directed else (min(u, v), max(u, v))
            if key in seen:
                raise DuplicateEdge(f"edge {i} ({u},{v}) duplicates an earlier edge")
            seen.add(key)

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def out_adj(self) -> list:
        """``out_adj[u]`` lists ``(v, w, edge_index)`` in ascending ``v``."""
        adj = [[] for _ in range(self.n)]
        for i, (u, v, w) in enumerate(self.edges):
            adj[u].append((v, w, i))
            if not self.directed:
                adj[v].append((u, w, i))
        for lst in adj:
            lst.sort()
        return adj

    @cached_property
    def in_adj(self) -> list:
        if not self.directed:
            return self.out_adj
        adj = [[] for _ in range(self.n)]
        for i, (u, v, w) in enumerate(self.edges):
            adj[v].append((u, w, i))
        for lst in adj:
            lst.sort()
        return adj

    @cached_property
    def edge_index(self) -> dict:
        """Map an ordered vertex pair to its edge index (both orientations if undirected)."""
        idx = {}
        for i, (u, v, _) in enumerate(self.edges):
            idx[(u, v)] = i
            if not self.directed:
                idx[(v, u)] = i
        return idx

    def weight(self, u: int, v: int) -> int:
        return self.edges[self.edge_index[(u, v)]][2]

    def path_weight(self, path: Sequence[int]) -> int:
        return sum(self.weight(a, b) for a, b in zip(path, path[1:]))

    def is_acyclic(self) -> bool:
        if not self.directed:
            return False
        indeg = [0] * self.n
        for _, v, _ in self.edges:
            indeg[v] += 1
        stack = [v for v in range(self.n) if indeg[v] == 0]
        seen = 0
        while stack:
            u = stack.pop()
            seen += 1
            for v, _, _ in self.out_adj[u]:
                indeg[v] -= 1
                if indeg[v] == 0:
                    stack.append(v)
        return seen == self.n

    def induced(self, vertices: Iterable[int]) -> tuple[Graph, list]:
        """Subgraph on ``vertices``; returns it with the local-to-global id table."""
        glob = sorted(set(vertices))
        loc = {v: i for i, v in enumerate(glob)}
        edges = [(loc[u], loc[v], w) for u, v, w in self.edges if u in loc and v in loc]
        return Graph(len(glob), edges, self.directed), glob

    def reversed(self) -> Graph:
        if not self.directed:
            return self
        return Graph(self.n, [(v, u, w) for u, v, w in self.edges], True)


# --- edge-list text format -------------------------------------------------


def load_graph(text: str) -> Graph:
    """Parse ``n m directed|undirected`` followed by ``m`` lines ``u v w``.

    Blank lines and ``#`` comments are ignored.
    """
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append((lineno, line.split()))
    if not rows:
        raise GraphFormatError("empty input", 1)
    lineno, header = rows[0]
    if len(header) != 3 or header[2] not in ("directed", "undirected"):
        raise GraphFormatError("header must be 'n m directed|undirected'", lineno)
    try:
        n, m = int(header[0]), int(header[1])
    except ValueError:
        raise GraphFormatError("vertex and edge counts must be integers", lineno) from None
    if n < 0 or m < 0:
        raise GraphFormatError("counts must be nonnegative", lineno)
    directed = header[2] == "directed"
    body = rows[1:]
    if len(body) != m:
        raise GraphFormatError(f"header declares {m} edges, found {len(body)}", lineno)

    edges = []
    seen = {}
    for lineno, parts in body:
        if len(parts) != 3:
            raise GraphFormatError("edge line must be 'u v w'", lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphFormatError("vertex ids must be integers", lineno) from None
        w = parse_weight(parts[2], lineno)
        if not (0 <= u < n and 0 <= v < n):
            raise VertexOutOfRange(f"vertex id outside 0..{n - 1}", lineno)
        if u == v:
            raise SelfLoop(f"self-loop on vertex {u}", lineno)
        if w < 0:
            raise NegativeWeight(f"negative weight {parts[2]}", lineno)
        key = (u, v) if directed else (min(u, v), max(u, v))
        if key in seen:
            raise DuplicateEdge(f"edge ({u},{v}) duplicates line {seen[key]}", lineno)
        seen[key] = lineno
        edges.append((u, v, w))
    return Graph(n, edges, directed)


def dump_graph(g: Graph, header: dict | None = None) -> str:
    """Edge-list text; ``header`` is written as a leading ``# config`` JSON comment."""
    out = []
    if header is not None:
        out.append("# config " + json.dumps(header, sort_keys=True, separators=(",", ":")))
    out.append(f"{g.n} {g.m} {'directed' if g.directed else 'undirected'}")
    out.extend(f"{u} {v} {format_weight(w)}" for u, v, w in g.edges)
    return "\n".join(out) + "\n"


def read_graph(path) -> Graph:
    with open(path, encoding="utf-8") as fh:
        return load_graph(fh.read())


def write_graph(g: Graph, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dump_graph(g))


# --- generators ------------------------------------------------------------


def path_graph(n: int, weight: int = SCALE, directed: bool = False) -> Graph:
    return Graph(n, [(i, i + 1, weight) for i in range(n - 1)], directed)


def cycle_graph(n: int, weight: int = SCALE, directed: bool = True) -> Graph:
    return Graph(n, [(i, (i + 1) % n, weight) for i in range(n)], directed)


def star_graph(leaves: int, weight: int = SCALE) -> Graph:
    return Graph(leaves + 1, [(0, i, weight) for i in range(1, leaves + 1)], False)


def random_graph(
    n: int,
    m: int,
    seed: int,
    directed: bool = False,
    max_weight: int = 10,
    connected: bool = True,
) -> Graph:
    """Random simple graph with integer weights drawn from ``1..max_weight``.

    With ``connected`` an undirected graph starts from a random spanning tree
    (a directed one from a random spanning arborescence out of a random root
    plus the reverse arborescence, when ``m`` allows it).
    """
    rng = np.random.default_rng(seed)
    cap = n * (n - 1) if directed else n * (n - 1) // 2
    m = min(m, cap)
    chosen = []
    seen = set()

    def add(u, v):
        key = (u, v) if directed else (min(u, v), max(u, v))
        if u == v or key in seen:
            return False
        seen.add(key)
        chosen.append((u, v))
        return True

    if connected and n > 1 and not directed:
        order = rng.permutation(n)
        for i in range(1, n):
            add(int(order[i]), int(order[rng.integers(0, i)]))
    while len(chosen) < m:
        u, v = (int(x) for x in rng.integers(0, n, size=2))
        add(u, v)
    weights = rng.integers(1, max_weight + 1, size=len(chosen))
    return Graph(n, [(u, v, int(w) * SCALE) for (u, v), w in zip(chosen, weights)], directed)


def random_dag(n: int, m: int, seed: int, max_weight: int = 10) -> Graph:
    """Random DAG: edges oriented along a random topological order."""
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    m = min(m, n * (n - 1) // 2)
    seen = set()
    edges = []
    while len(edges) < m:
        a, b = sorted(int(x) for x in rng.integers(0, n, size=2))
        if a == b or (a, b) in seen:
            continue
        seen.add((a, b))
        edges.append((int(order[a]), int(order[b]), int(rng.integers(1, max_weight + 1)) * SCALE))
    return Graph(n, edges, True)


def random_tree_parents(n: int, seed: int) -> list:
    """Parent table of a uniformly random labelled tree rooted at 0 (Pruefer decoding)."""
    if n == 1:
        return [-1]
    rng = np.random.default_rng(seed)
    if n == 2:
        return [-1, 0]
    pruefer = [int(x) for x in rng.integers(0, n, size=n - 2)]
    degree = [1] * n
    for x in pruefer:
        degree[x] += 1
    leaves = [i for i in range(n) if degree[i] == 1]
    heapq.heapify(leaves)
    adj = [[] for _ in range(n)]
    for x in pruefer:
        leaf = heapq.heappop(leaves)
        adj[leaf].append(x)
        adj[x].append(leaf)
        degree[x] -= 1
        if degree[x] == 1:
            heapq.heappush(leaves, x)
    a, b = heapq.heappop(leaves), heapq.heappop(leaves)
    adj[a].append(b)
    adj[b].append(a)

    parent = [-1] * n
    stack = [0]
    seen = [False] * n
    seen[0] = True
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if not seen[v]:
                seen[v] = True
                parent[v] = u
                stack.append(v)
    return parent
