from __future__ import annotations

import math

import numpy as np
import pytest

from hopsens.approx import (
    Hierarchy,
    apx_undirected_hopset,
    bunch_cap,
    compute_indices,
    distance_matrix,
    sample_hierarchy,
    truncated_tree,
    tz_emulator,
)
from hopsens.audit import hop_diameter, min_hops_exact, sensitivity
from hopsens.constructions import log2c
from hopsens.errors import RetryExhausted, TruncationInvalid
from hopsens.graph import SCALE, Graph, path_graph, random_graph, star_graph
from hopsens.primitives import RootedTree, tree_hopset
from hopsens.routing import RoutingOracle


def test_k1_hierarchy_is_flat():
    g = random_graph(20, 40, 0)
    h = sample_hierarchy(g, 1, 0)
    assert h.level == [0] * 20
    assert h.members(1) == []


def test_k1_clusters_and_bunches_are_everything():
    g = random_graph(15, 30, 1)
    o = RoutingOracle(g)
    _, bc, balls = compute_indices(g, Hierarchy(1, [0] * 15, 0), o)
    assert all(c == list(range(15)) for c in bc.cluster)
    assert all(b == list(range(15)) for b in bc.bunch)
    assert all(b == list(range(15)) for b in balls.closed)


def test_bunch_on_small_path():
    g = path_graph(5)
    _, bc, _ = compute_indices(g, Hierarchy(2, [0, 0, 1, 0, 0], 0), RoutingOracle(g))
    assert bc.level_bunch(0, 0) == [0, 1]


def test_cluster_bunch_duality_and_pivots():
    n = 60
    g = random_graph(n, 140, 2, max_weight=3)
    o = RoutingOracle(g)
    hier = sample_hierarchy(g, 3, 4, o)
    piv, bc, balls = compute_indices(g, hier, o)
    for u in range(n):
        for v in range(n):
            assert (v in bc.cluster[u]) == (u in bc.bunch[v])
    d = distance_matrix(g, o)
    for v in range(n):
        assert piv.pivot[v][0] == v and piv.dist[v][0] == 0
        assert piv.dist[v][hier.k] == np.iinfo(np.int64).max
        for i in range(hier.k):
            p = piv.pivot[v][i]
            assert hier.level[p] >= i and d[v, p] == piv.dist[v][i]
            if i + 1 < hier.k and piv.dist[v][i] == piv.dist[v][i + 1]:
                assert p == piv.pivot[v][i + 1]
        # the closed ball is inside the bunch
        assert set(balls.closed[v]) <= set(bc.bunch[v])
    for u in hier.members(hier.k - 1):
        assert bc.cluster[u] == list(range(n))


def test_clusters_are_tree_closed():
    g = random_graph(80, 200, 3, max_weight=4)
    o = RoutingOracle(g)
    hier = sample_hierarchy(g, 2, 1, o)
    _, bc, _ = compute_indices(g, hier, o)
    for u in range(g.n):
        members = set(bc.cluster[u]) | {u}
        for w in bc.cluster[u]:
            assert set(o.path(u, w)) <= members


def test_truncation_rejects_open_set():
    g = path_graph(4)
    o = RoutingOracle(g)
    with pytest.raises(TruncationInvalid):
        truncated_tree(g, o, 0, [0, 2])


def test_k1_hopset_is_full_tree_hopsets():
    g = random_graph(25, 50, 5)
    o = RoutingOracle(g)
    h = apx_undirected_hopset(g, 1, 0, o)
    want = set()
    for u in range(g.n):
        for e in tree_hopset(RootedTree.from_spt(o.tree(u), g)):
            want.add((min(e.s, e.t), max(e.s, e.t)))
    assert set(h.edges) == want


def test_star_center_sensitivity():
    g = star_graph(40)
    h = apx_undirected_hopset(g, 2, 0)
    assert sensitivity(g, h).linf <= (1 + h.meta["max_bunch"]) * 2 * (log2c(g.n) + 1)


def test_random_200_stretch_and_sensitivity():
    n = 200
    g = random_graph(n, 450, 9)
    h = apx_undirected_hopset(g, 2, 0)
    hd = hop_diameter(g, h, "stretch", eps=0.5)
    assert hd.beta >= 1
    L = log2c(n)
    assert sensitivity(g, h).linf <= (1 + 4 * 2 * math.sqrt(n) * math.log(n)) * 2 * (L + 1)
    assert sensitivity(g, h).linf <= (1 + h.meta["max_bunch"]) * 2 * (L + 1)
    assert h.meta["max_bunch"] <= bunch_cap(n, 2)


def test_hopset_edges_exact():
    g = random_graph(60, 150, 4)
    o = RoutingOracle(g)
    h = apx_undirected_hopset(g, 2, 1, o)
    for e in h:
        assert e.weight == o.dist(e.s, e.t) == g.path_weight(e.span)


def test_k1_emulator_is_complete_per_component():
    edges = [(0, 1, SCALE), (1, 2, SCALE), (3, 4, SCALE)]
    g = Graph(5, edges)
    o = RoutingOracle(g)
    em = tz_emulator(g, Hierarchy(1, [0] * 5, 0), o)
    assert set(em.edges) == {(0, 1), (0, 2), (1, 2), (3, 4)}
    assert em.construction == "tz-emulator"


def test_emulator_coverage():
    n = 150
    g = random_graph(n, 350, 2)
    o = RoutingOracle(g)
    hier = sample_hierarchy(g, 2, 3, o)
    h = apx_undirected_hopset(g, 2, 3, o, hier)
    em = tz_emulator(g, hier, o)
    L = log2c(n)
    hops = min_hops_exact(g, h, [(e.s, e.t) for e in em])
    assert all(k is not None and k <= (L + 1) * (2 * L + 3) for k in hops.values())


def test_emulator_size_scaling():
    # with promotion probability n^{-1/k} the emulator has Θ(k·n^{1+1/k}) edges
    n, k = 120, 2
    sizes = []
    for seed in range(5):
        g = random_graph(n, 300, seed)
        o = RoutingOracle(g)
        sizes.append(len(tz_emulator(g, sample_hierarchy(g, k, seed, o), o)))
    assert max(sizes) <= 4 * k * n ** (1 + 1 / k)


def test_expected_first_level_size():
    g = Graph(100, [])
    sizes = [len(sample_hierarchy(g, 2, s).members(1)) for s in range(40)]
    assert 7 <= sum(sizes) / len(sizes) <= 13


def test_edgeless_graph_bunches():
    g = Graph(6, [])
    o = RoutingOracle(g)
    hier = Hierarchy(2, [0, 1, 0, 0, 1, 0], 0)
    _, bc, _ = compute_indices(g, hier, o)
    assert bc.bunch == [[v] for v in range(6)]


def test_retry_exhausted(monkeypatch):
    import hopsens.approx as approx

    monkeypatch.setattr(approx, "bunch_cap", lambda n, k: 0.0)
    with pytest.raises(RetryExhausted):
        sample_hierarchy(random_graph(30, 60, 0), 2, 0)
