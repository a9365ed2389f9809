"""Path and tree shortcutting primitives."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .graph import SCALE, Graph


@dataclass(frozen=True)
class HopsetEdge:
    """An added edge ``(s, t)`` together with the routing path it bypasses."""

    s: int
    t: int
    weight: int
    span: tuple

    def __post_init__(self):
        if self.span and (self.span[0] != self.s or self.span[-1] != self.t):
            raise ValueError(f"span {self.span} does not run from {self.s} to {self.t}")

    def key(self, directed: bool) -> tuple:
        if directed or self.s < self.t:
            return (self.s, self.t)
        return (self.t, self.s)


def path_hopset(path: Sequence[int], weights: Sequence[int] | None = None) -> list:
    """Recursive-halving shortcuts over ``path`` (ℓ = len(path) - 1 edges).

    Emits ``(v0, vℓ)`` and recurses on ``v0..v⌊ℓ/2⌋`` and ``v⌊ℓ/2⌋..vℓ``
    until fewer than two edges remain.  ``weights[i]`` is the weight of the
    edge ``(path[i], path[i+1])``; unit weights when omitted.
    """
    path = tuple(path)
    ell = len(path) - 1
    if weights is None:
        weights = [SCALE] * ell
    prefix = [0]
    for w in weights:
        prefix.append(prefix[-1] + w)
    out = []
    stack = [(0, ell)]
    while stack:
        lo, hi = stack.pop()
        if hi - lo < 2:
            continue
        out.append(HopsetEdge(path[lo], path[hi], prefix[hi] - prefix[lo], path[lo : hi + 1]))
        mid = lo + (hi - lo) // 2
        stack.append((mid, hi))
        stack.append((lo, mid))
    return out


@dataclass
class RootedTree:
    """A rooted tree over a subset of a graph's vertices.

    ``parent[v]`` is -1 for the root and for vertices outside the tree;
    ``parent_weight[v]`` is the weight of the tree edge joining ``v`` and its
    parent.  With ``toward_root`` the edges are oriented child -> parent.
    """

    root: int
    parent: list
    parent_weight: list
    members: list
    toward_root: bool = False

    @classmethod
    def from_parents(cls, parent, weights=None, toward_root=False):
        root = parent.index(-1)
        n = len(parent)
        pw = list(weights) if weights is not None else [SCALE if p >= 0 else 0 for p in parent]
        return cls(root, list(parent), pw, list(range(n)), toward_root)

    @classmethod
    def from_spt(cls, spt, g: Graph, members=None):
        """Build from a ShortestPathTree, optionally truncated to ``members``."""
        if members is None:
            members = [v for v in range(g.n) if spt.dist[v] is not None]
        keep = set(members)
        keep.add(spt.root)
        parent = [-1] * g.n
        pw = [0] * g.n
        for v in keep:
            p = spt.parent[v]
            if v == spt.root or p < 0:
                continue
            parent[v] = p
            pw[v] = g.weight(v, p) if spt.reverse else g.weight(p, v)
        return cls(spt.root, parent, pw, sorted(keep), spt.reverse)

    def children(self) -> dict:
        kids = {v: [] for v in self.members}
        for v in self.members:
            p = self.parent[v]
            if p >= 0:
                kids[p].append(v)
        for lst in kids.values():
            lst.sort()
        return kids

    def depth_order(self) -> list:
        """Members in BFS order from the root."""
        kids = self.children()
        order = [self.root]
        for v in order:
            order.extend(kids[v])
        return order


@dataclass
class HeavyLightDecomposition:
    heavy_paths: list
    light_edges: list

    def path_of(self) -> dict:
        return {v: i for i, p in enumerate(self.heavy_paths) for v in p}


def heavy_light(tree: RootedTree) -> HeavyLightDecomposition:
    """Heavy child = largest subtree, ties to the smallest id.

    Heavy paths are listed top (closest to the root) to bottom; light edges
    as ``(parent, child)``.
    """
    kids = tree.children()
    order = tree.depth_order()
    size = {v: 1 for v in order}
    for v in reversed(order):
        p = tree.parent[v]
        if p >= 0 and v != tree.root:
            size[p] += size[v]
    heavy = {}
    for v in order:
        if kids[v]:
            heavy[v] = min(kids[v], key=lambda c: (-size[c], c))
    paths = []
    light = []
    heads = [tree.root]
    for v in order:
        for c in kids[v]:
            if heavy.get(v) != c:
                light.append((v, c))
                heads.append(c)
    for h in heads:
        p = [h]
        while p[-1] in heavy:
            p.append(heavy[p[-1]])
        paths.append(p)
    return HeavyLightDecomposition(paths, light)


def tree_hopset(tree: RootedTree, hld: HeavyLightDecomposition | None = None) -> list:
    """``path_hopset`` on every heavy path, oriented along the tree edges."""
    if hld is None:
        hld = heavy_light(tree)
    out = []
    pw = tree.parent_weight
    for p in hld.heavy_paths:
        if len(p) < 3:
            continue
        weights = [pw[c] for c in p[1:]]
        if tree.toward_root:
            out.extend(path_hopset(p[::-1], weights[::-1]))
        else:
            out.extend(path_hopset(p, weights))
    return out
