from __future__ import annotations

from fractions import Fraction

import pytest

from hopsens.audit import potential_audit, sensitivity, EDGE
from hopsens.errors import HopBoundUnmet, ParameterViolation
from hopsens.graph import SCALE
from hopsens.hopset import Hopset
from hopsens.lowerbound import (
    LayeredInstance,
    gen_perfect_paths,
    lift_instance,
    read_sidecar,
    sidecar_json,
    thm2_parameters,
    verify_perfect,
)
from hopsens.primitives import HopsetEdge, path_hopset
from hopsens.routing import RoutingOracle


def test_two_layers_every_edge_is_a_path():
    inst = gen_perfect_paths(6, 2, 3)
    assert len(inst.paths) == inst.graph.m
    assert verify_perfect(inst).passed


def test_three_layers_straight_paths():
    inst = gen_perfect_paths(4, 3, 1)
    assert inst.paths == [[0, 4, 8], [1, 5, 9], [2, 6, 10], [3, 7, 11]]
    assert verify_perfect(inst).passed
    o = RoutingOracle(inst.graph)
    for p in inst.paths:
        assert o.path(p[0], p[-1]) == p


def test_reference_instance_verifies():
    inst = gen_perfect_paths(20, 8, 2)
    assert len(inst.paths) == 20 + 13
    assert verify_perfect(inst).passed


def test_parameter_violation():
    with pytest.raises(ParameterViolation):
        gen_perfect_paths(20, 8, 3)
    with pytest.raises(ParameterViolation):
        gen_perfect_paths(20, 1, 1)


def test_slope_weights():
    inst = gen_perfect_paths(20, 4, 3)
    for u, v, w in inst.graph.edges:
        s = (v % 20) - (u % 20)
        assert w == (s * s + 1) * SCALE


def test_duplicated_path_flagged():
    inst = gen_perfect_paths(6, 3, 1)
    bad = LayeredInstance(inst.ell, inst.n_layer, inst.x, inst.paths + [inst.paths[0]], inst.graph)
    rep = verify_perfect(bad)
    assert not rep.passed and rep.partition


def test_equal_weight_alternative_flagged():
    from hopsens.graph import Graph

    # two unit paths 0→3→6 and 0→4→6 in a 3-layer, 3-per-layer graph; the path list claims only one
    g = Graph(9, [(0, 3, SCALE), (3, 6, SCALE), (0, 4, SCALE), (4, 6, SCALE)], True)
    inst = LayeredInstance(3, 3, 1, [[0, 3, 6], [0, 4, 6]], g)
    rep = verify_perfect(inst)
    assert not rep.passed and rep.uniqueness


def test_layering_violation_flagged():
    inst = gen_perfect_paths(4, 3, 1)
    bad = LayeredInstance(3, 4, 1, [p[::-1] for p in inst.paths], inst.graph)
    assert verify_perfect(bad).layering


def test_lift_structure():
    inst = gen_perfect_paths(20, 8, 2)
    lifted = lift_instance(inst)
    assert len(lifted.paths) == len(inst.paths)
    assert max(lifted.graph.layers) == 2 * inst.ell
    mask = lifted.t_mask()
    for p in lifted.paths:
        flags = [mask[lifted.graph.edge_index[(a, b)]] for a, b in zip(p, p[1:])]
        assert flags == [i % 2 == 0 for i in range(len(flags))]
    o = RoutingOracle(lifted.graph)
    for p in lifted.paths:
        assert o.path(p[0], p[-1]) == p


def test_thm2_record():
    rec = thm2_parameters(N=160, beta=4)
    assert rec["n_layer"] == 20 and rec["ell"] == 8 and rec["x"] == Fraction(160, 64)
    # |Π|/(2·n_layer) = x/2 when every node lies on x paths
    assert rec["x"] == rec["n_layer"] / rec["ell"]
    inst = gen_perfect_paths(20, 8, 2)
    assert inst.record["N"] == 160 and inst.record["beta"] == "4"


def test_sidecar_roundtrip():
    inst = gen_perfect_paths(10, 4, 2)
    lifted = lift_instance(inst)
    data = read_sidecar(sidecar_json(inst, lifted, {"seed": 1}))
    assert data["lifted_paths"] == lifted.paths and data["t_edges"] == lifted.t_edges


def complete_hopset(lifted):
    o = RoutingOracle(lifted.graph)
    h = Hopset(True)
    for p in lifted.paths:
        for i in range(len(p)):
            for j in range(i + 2, len(p)):
                h.add(HopsetEdge(p[i], p[j], o.dist(p[i], p[j]), tuple(p[i : j + 1])))
    return h


def test_complete_hopset_passes_with_margin():
    inst = gen_perfect_paths(20, 8, 2)
    lifted = lift_instance(inst)
    h = complete_hopset(lifted)
    pa = potential_audit(lifted.graph, lifted.paths, h, 8, lifted.t_mask(), 20)
    assert pa.passed and pa.t_sum >= 10 * pa.threshold
    assert pa.e_linf <= pa.v_linf
    assert pa.e_linf >= pa.avg_bound


def test_per_path_hopsets_pass():
    inst = gen_perfect_paths(20, 8, 2)
    lifted = lift_instance(inst)
    g = lifted.graph
    h = Hopset(True)
    for p in lifted.paths:
        h.update(path_hopset(p, [g.weight(a, b) for a, b in zip(p, p[1:])]))
    pa = potential_audit(g, lifted.paths, h, 8, lifted.t_mask(), 20)
    assert pa.max_hops <= 8
    assert pa.passed
    assert 2 * sensitivity(g, h, EDGE).masked_sum(lifted.t_mask()) >= len(lifted.paths) * 8


def test_hop_bound_unmet():
    inst = gen_perfect_paths(20, 8, 2)
    lifted = lift_instance(inst)
    with pytest.raises(HopBoundUnmet):
        potential_audit(lifted.graph, lifted.paths, Hopset(True), 8, lifted.t_mask(), 20)
