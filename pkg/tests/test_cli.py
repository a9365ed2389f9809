from __future__ import annotations

import csv
import json

from hopsens.cli import main
from hopsens.graph import load_graph


def run(*argv):
    return main([str(a) for a in argv])


def test_gen_path(tmp_path):
    out = tmp_path / "p.txt"
    assert run("gen", "path", "--n", 9, "--out", out) == 0
    g = load_graph(out.read_text())
    assert g.n == 9 and g.m == 8


def test_gen_random_deterministic(tmp_path):
    out = tmp_path / "r.txt"
    run("gen", "random", "--n", 100, "--m", 300, "--seed", 1, "--out", out)
    first = out.read_bytes()
    run("gen", "random", "--n", 100, "--m", 300, "--seed", 1, "--out", out)
    assert out.read_bytes() == first
    assert first.startswith(b"# config ")


def test_gen_layered_writes_sidecar(tmp_path, capsys):
    out = tmp_path / "lay.txt"
    assert run("gen", "layered", "--layers", 8, "--per-layer", 20, "--x", 2, "--seed", 7, "--out", out) == 0
    assert "verify_perfect: pass" in capsys.readouterr().err
    side = json.loads((tmp_path / "lay.json").read_text())
    assert len(side["lifted_paths"]) == 33 and side["config"]["seed"] == 7
    assert load_graph((tmp_path / "lay.lifted.txt").read_text()).n == 320


def test_gen_layered_parameter_violation(tmp_path, capsys):
    code = run("gen", "layered", "--layers", 8, "--per-layer", 20, "--x", 5, "--out", tmp_path / "x.txt")
    assert code == 2
    assert "ParameterViolation" in capsys.readouterr().err


def test_build_greedy_on_digraph_hints(tmp_path, capsys):
    g = tmp_path / "d.txt"
    run("gen", "random", "--n", 30, "--m", 80, "--seed", 2, "--directed", "--out", g)
    code = run("build", "--graph", g, "--construction", "greedy", "--seed", 0, "--out", tmp_path / "h", "--report", tmp_path / "r")
    assert code == 2
    assert "use the di-shortcut" in capsys.readouterr().err


def test_build_greedy_path(tmp_path):
    g = tmp_path / "p.txt"
    run("gen", "path", "--n", 9, "--out", g)
    h, r = tmp_path / "h.jsonl", tmp_path / "r.json"
    assert run("build", "--graph", g, "--construction", "greedy", "--seed", 0, "--out", h, "--report", r) == 0
    lines = h.read_text().splitlines()
    assert len(lines) == 7
    rec = json.loads(lines[0])
    assert set(rec) == {"s", "t", "weight", "span", "construction", "seed"}
    rep = json.loads(r.read_text())
    assert rep["exact"] is True and rep["config"]["seed"] == 0


def test_build_apx_reports_beta_and_cap(tmp_path):
    g = tmp_path / "g.txt"
    run("gen", "random", "--n", 80, "--m", 200, "--seed", 3, "--out", g)
    r = tmp_path / "r.json"
    code = run("build", "--graph", g, "--construction", "apx", "--k", 2, "--eps", 0.5, "--seed", 0,
               "--out", tmp_path / "h.jsonl", "--report", r)
    assert code == 0
    rep = json.loads(r.read_text())
    assert rep["beta_stretch"]["0.5"] >= 1
    assert rep["extra"]["bunch_cap"] > 0 and "max_bunch" in rep["extra"]


def test_build_di_shortcut(tmp_path):
    g = tmp_path / "d.txt"
    run("gen", "random", "--n", 60, "--m", 150, "--seed", 4, "--directed", "--out", g)
    r = tmp_path / "r.json"
    assert run("build", "--graph", g, "--construction", "di-shortcut", "--seed", 0,
               "--out", tmp_path / "h.jsonl", "--report", r) == 0
    assert json.loads(r.read_text())["reachability_equal"] is True


def test_build_is_reproducible(tmp_path):
    g = tmp_path / "g.txt"
    run("gen", "random", "--n", 50, "--m", 120, "--seed", 5, "--out", g)
    h = tmp_path / "h.jsonl"
    outs = []
    for _ in range(2):
        run("build", "--graph", g, "--construction", "folklore", "--seed", 3, "--out", h, "--report", tmp_path / "r.json")
        outs.append(h.read_bytes())
    assert outs[0] == outs[1]


def test_audit_sensitivity_empty_hopset(tmp_path):
    g = tmp_path / "p.txt"
    run("gen", "path", "--n", 9, "--out", g)
    h = tmp_path / "empty.jsonl"
    h.write_text("")
    r = tmp_path / "r.json"
    assert run("audit", "--graph", g, "--hopset", h, "--sensitivity", "--report", r) == 0
    sens = json.loads(r.read_text())["sensitivity"]
    assert sens["v_linf"] == sens["e_linf"] == sens["v_l1"] == 0


def test_audit_hop_diameter_exact(tmp_path):
    g = tmp_path / "p.txt"
    run("gen", "path", "--n", 9, "--out", g)
    h = tmp_path / "h.jsonl"
    run("build", "--graph", g, "--construction", "greedy", "--seed", 0, "--out", h, "--report", tmp_path / "b.json")
    r, c = tmp_path / "r.json", tmp_path / "r.csv"
    assert run("audit", "--graph", g, "--hopset", h, "--hop-diameter", "exact", "--report", r, "--csv", c) == 0
    assert json.loads(r.read_text())["hop_diameter"]["exact"]["beta"] <= 7
    row = next(csv.DictReader(c.open()))
    assert int(row["beta_exact"]) <= 7


def test_audit_missing_span(tmp_path):
    g = tmp_path / "p.txt"
    run("gen", "path", "--n", 4, "--out", g)
    h = tmp_path / "h.jsonl"
    h.write_text('{"s":0,"t":2,"weight":2.0,"construction":"x","seed":0}\n')
    assert run("audit", "--graph", g, "--hopset", h, "--sensitivity") == 2


def test_audit_potential_with_qualifying_hopset(tmp_path):
    from hopsens.hopset import Hopset
    from hopsens.primitives import path_hopset

    out = tmp_path / "lay.txt"
    run("gen", "layered", "--layers", 8, "--per-layer", 20, "--x", 2, "--out", out)
    gp = load_graph((tmp_path / "lay.lifted.txt").read_text())
    side = json.loads((tmp_path / "lay.json").read_text())
    h = Hopset(True, construction="per-path")
    for p in side["lifted_paths"]:
        h.update(path_hopset(p, [gp.weight(a, b) for a, b in zip(p, p[1:])]))
    hp = tmp_path / "h.jsonl"
    hp.write_text(h.to_jsonl())
    r = tmp_path / "r.json"
    code = run("audit", "--graph", tmp_path / "lay.lifted.txt", "--hopset", hp, "--potential",
               "--sidecar", tmp_path / "lay.json", "--report", r)
    assert code == 0
    pot = json.loads(r.read_text())["potential"]
    assert pot["passed"] and pot["threshold"] == "132"


def test_dp_near_noiseless(tmp_path):
    g = tmp_path / "g.txt"
    run("gen", "random", "--n", 40, "--m", 90, "--seed", 6, "--out", g)
    a = tmp_path / "a.txt"
    run("gen", "attrs", "--graph", g, "--seed", 6, "--out", a)
    c, acc = tmp_path / "e.csv", tmp_path / "acc.json"
    assert run("dp", "--graph", g, "--attrs", a, "--eps", 1e6, "--seed", 0, "--trials", 1, "--csv", c, "--accounting", acc) == 0
    row = next(csv.DictReader(c.open()))
    assert float(row["max_additive_error"]) < 1e-3
    assert json.loads(acc.read_text())["all_certified"] is True


def test_dp_missing_attrs_is_usage_error(tmp_path):
    g = tmp_path / "g.txt"
    run("gen", "path", "--n", 5, "--out", g)
    assert run("dp", "--graph", g, "--eps", 1, "--seed", 0) == 2
    assert run("dp", "--graph", g, "--attrs", tmp_path / "nope.txt", "--eps", 1, "--seed", 0) == 2


def test_dp_scale_violation(tmp_path, capsys):
    g = tmp_path / "g.txt"
    run("gen", "random", "--n", 40, "--m", 90, "--seed", 6, "--out", g)
    a = tmp_path / "a.txt"
    run("gen", "attrs", "--graph", g, "--seed", 6, "--out", a)
    assert run("dp", "--graph", g, "--attrs", a, "--eps", 1, "--seed", 0, "--log-term", 0,
               "--csv", tmp_path / "e.csv", "--accounting", tmp_path / "acc.json") == 2
    assert "edge sensitivity" in capsys.readouterr().err
