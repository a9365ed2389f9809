from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hopsens.audit import (
    EDGE,
    VERTEX,
    audit_hopset,
    csv_text,
    exhaustive_beta,
    hop_diameter,
    min_hops_exact,
    reachability_equal,
    sensitivity,
    transitive_closure,
    validate_spans,
)
from hopsens.constructions import greedy_hopset, log2c
from hopsens.errors import InvalidSpan, MissingSpan
from hopsens.graph import SCALE, Graph, path_graph, random_dag, random_graph
from hopsens.hopset import SHORTCUT_SET, Hopset
from hopsens.primitives import HopsetEdge, path_hopset


def path_with_hopset(n):
    g = path_graph(n)
    h = Hopset(False)
    h.update(path_hopset(range(n)))
    return g, h


def test_empty_hopset_zero_vector():
    g = random_graph(20, 40, 0)
    h = Hopset(False)
    for target in (VERTEX, EDGE):
        sv = sensitivity(g, h, target)
        assert sv.linf == 0 and sv.l1 == 0 and set(sv.counts) == {0}


def test_path_sensitivity_counts():
    g, h = path_with_hopset(9)
    sv = sensitivity(g, h)
    assert sv.counts[4] == 5 and sv.linf == 5
    es = sensitivity(g, h, EDGE)
    assert es.linf <= sv.linf
    assert es.masked_sum([True] + [False] * 7) == es.counts[0]


def test_span_validation():
    g = path_graph(4)
    h = Hopset(False)
    h.add(HopsetEdge(0, 2, 2 * SCALE, (0, 2)))
    with pytest.raises(InvalidSpan):
        validate_spans(g, h)
    with pytest.raises(MissingSpan):
        Hopset.from_jsonl('{"s":0,"t":2,"weight":2.0,"span":[]}\n', False)


def test_hop_diameter_plain_path():
    hd = hop_diameter(path_graph(9), None)
    assert hd.beta == 8 and hd.witness == (0, 8)


def test_hop_diameter_path_with_hopset():
    g, h = path_with_hopset(9)
    hd = hop_diameter(g, h)
    assert hd.exact and hd.beta <= 2 * log2c(8) + 1


def test_complete_graph_beta_one():
    n = 7
    g = Graph(n, [(u, v, SCALE) for u in range(n) for v in range(u + 1, n)])
    assert hop_diameter(g, None).beta == 1


def test_stretch_mode_monotone_in_eps():
    g = random_graph(80, 200, 3)
    h, _ = greedy_hopset(g)
    betas = [hop_diameter(g, h, "stretch", eps=e).beta for e in (0, 0.25, 0.5, 1.0, 4.0)]
    assert betas[0] == hop_diameter(g, h, "exact").beta
    assert betas == sorted(betas, reverse=True)


def test_stretch_allows_lighter_detour():
    # direct heavy edge 0-2 of weight 2.2 versus the 2-hop path of weight 2
    g = Graph(3, [(0, 1, SCALE), (1, 2, SCALE), (0, 2, 2_200_000)])
    assert hop_diameter(g, None, "exact").beta == 2
    assert hop_diameter(g, None, "stretch", eps=0.1).beta == 1
    assert hop_diameter(g, None, "stretch", eps=0.05).beta == 2


def test_stretch_budget_exceeded():
    from hopsens.errors import BudgetExceeded

    with pytest.raises(BudgetExceeded) as info:
        hop_diameter(path_graph(40), None, "stretch", eps=0.1, max_budget=8)
    assert info.value.lower_bound > 8


def test_exact_mode_detects_shorter_fake_edge():
    g = path_graph(5)
    h = Hopset(False)
    h.add(HopsetEdge(0, 4, SCALE, (0, 1, 2, 3, 4)))
    assert not hop_diameter(g, h).exact


def test_min_hops_exact_pairs():
    g, h = path_with_hopset(9)
    got = min_hops_exact(g, h, [(0, 8), (1, 7), (3, 3)])
    assert got[(0, 8)] == 1 and got[(3, 3)] == 0


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 7), st.integers(0, 12), st.integers(0, 10**6), st.booleans(), st.booleans())
def test_lex_search_matches_enumeration(n, extra, seed, directed, with_hopset):
    m = min(n - 1 + extra, n * (n - 1) // (1 if directed else 2))
    g = random_graph(n, m, seed, directed=directed, max_weight=3, connected=not directed)
    h = None
    if with_hopset:
        if directed:
            g = random_dag(n, min(m, n * (n - 1) // 2), seed, max_weight=3)
        h, _ = greedy_hopset(g)
    beta, exact = exhaustive_beta(g, h)
    assert exact
    assert hop_diameter(g, h).beta == beta


def test_reachability_equal_controls():
    g = random_dag(30, 60, 1)
    assert reachability_equal(g, Hopset(True, SHORTCUT_SET))
    tc = transitive_closure(g)
    u, v = next((u, v) for u in range(30) for v in range(30) if u != v and not tc[u, v])
    bad = Hopset(True, SHORTCUT_SET)
    bad.add(HopsetEdge(u, v, SCALE, (u, v)))
    assert not reachability_equal(g, bad)


def test_report_json_and_csv():
    g, h = path_with_hopset(9)
    rep = audit_hopset(g, h, exact=True, stretch=(0.5,), config={"seed": 0})
    assert rep.obs5_holds and rep.exact
    text = csv_text([rep.csv_row()])
    assert text.splitlines()[0].startswith("n,m,")
    assert "beta_stretch_0.5" in text
    assert '"config"' in rep.to_json()


def test_sampled_pairs_for_large_graphs():
    g = random_graph(520, 1100, 0)
    hd = hop_diameter(g, None, "reach", max_pairs=300, seed=1)
    assert hd.pairs <= 300


def test_potential_threshold_formula():
    from hopsens.audit import potential_audit
    from hopsens.lowerbound import gen_perfect_paths, lift_instance

    inst = gen_perfect_paths(8, 8, 1)
    assert len(inst.paths) == 8
    lifted = lift_instance(inst)
    h = Hopset(True)
    for p in lifted.paths:
        h.update(path_hopset(p, [lifted.graph.weight(a, b) for a, b in zip(p, p[1:])]))
    pa = potential_audit(lifted.graph, lifted.paths, h, 8, lifted.t_mask(), 8)
    assert pa.threshold == Fraction(32)
    assert pa.passed
