"""``hopsens`` command line: gen, build, audit, dp.

Exit codes: 0 when every audit passed, 1 on an audit failure, 2 on usage or
precondition errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .approx import apx_undirected_hopset, bunch_cap, sample_hierarchy, tz_emulator
from .audit import (
    EDGE,
    VERTEX,
    audit_hopset,
    csv_text,
    hop_diameter,
    potential_audit,
    reachability_equal,
    sensitivity,
    validate_spans,
)
from .constructions import (
    folklore_hopset,
    greedy_di_shortcut,
    greedy_hopset,
    undirected_shortcut_set,
)
from .dp import dump_attributes, error_bound, hopset_asrq, load_attributes, random_attributes
from .errors import HopBoundUnmet, HopsensError, InconsistentRouting, ScaleViolation
from .graph import cycle_graph, dump_graph, load_graph, path_graph, random_dag, random_graph
from .hopset import EXACT_HOPSET, SHORTCUT_SET, Hopset
from .lowerbound import gen_perfect_paths, lift_instance, read_sidecar, sidecar_json, verify_perfect
from .routing import RoutingOracle

EXIT_OK = 0
EXIT_AUDIT = 1
EXIT_USAGE = 2

CONSTRUCTIONS = ("greedy", "di-shortcut", "undirected-shortcut", "folklore", "apx", "tz-emulator")


class UsageError(Exception):
    pass


def _config(args) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k != "func"}
    cfg["version"] = __version__
    return cfg


def _write(path, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _read(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


# --- gen ---------------------------------------------------------------------


def cmd_gen(args) -> int:
    cfg = _config(args)
    if args.kind == "random":
        if args.n is None or args.m is None:
            raise UsageError("gen random needs --n and --m")
        if args.dag:
            g = random_dag(args.n, args.m, args.seed, args.max_weight)
        else:
            g = random_graph(args.n, args.m, args.seed, directed=args.directed, max_weight=args.max_weight)
        _write(args.out, dump_graph(g, cfg))
    elif args.kind == "path":
        if args.n is None:
            raise UsageError("gen path needs --n")
        _write(args.out, dump_graph(path_graph(args.n, directed=args.directed), cfg))
    elif args.kind == "cycle":
        if args.n is None:
            raise UsageError("gen cycle needs --n")
        _write(args.out, dump_graph(cycle_graph(args.n), cfg))
    elif args.kind == "layered":
        if args.out in (None, "-"):
            raise UsageError("gen layered needs --out (instance, lifted graph and sidecar are written)")
        inst = gen_perfect_paths(args.per_layer, args.layers, args.x)
        rep = verify_perfect(inst)
        if not rep.passed:
            _log(json.dumps(rep.to_dict()))
            raise HopsensError("generated instance failed verification")
        _log(f"verify_perfect: pass ({len(inst.paths)} perfect paths, {inst.graph.m} edges)")
        lifted = lift_instance(inst)
        out = Path(args.out)
        lifted_out = args.lifted_out or str(out.with_suffix(".lifted" + (out.suffix or ".txt")))
        sidecar = args.sidecar or str(out.with_suffix(".json"))
        _write(args.out, dump_graph(inst.graph, cfg))
        _write(lifted_out, dump_graph(lifted.graph, cfg))
        _write(sidecar, sidecar_json(inst, lifted, cfg) + "\n")
    elif args.kind == "attrs":
        if args.graph is None:
            raise UsageError("gen attrs needs --graph")
        g = load_graph(_read(args.graph))
        _write(args.out, f"# config {json.dumps(cfg, sort_keys=True, separators=(',', ':'))}\n"
               + dump_attributes(g, random_attributes(g, args.seed, args.max_value)))
    return EXIT_OK


# --- build -------------------------------------------------------------------


def _construct(g, args):
    name = args.construction
    if name == "greedy":
        h, trace = greedy_hopset(g, RoutingOracle(g, args.seed), args.seed)
        return h, {"trace": trace.summary()}
    if name == "di-shortcut":
        if not g.directed:
            raise UsageError("di-shortcut expects a directed graph")
        return greedy_di_shortcut(g, args.seed), {}
    if name == "undirected-shortcut":
        if g.directed:
            raise UsageError("undirected-shortcut expects an undirected graph")
        return undirected_shortcut_set(g, seed=args.seed), {}
    if name == "folklore":
        return folklore_hopset(g, seed=args.seed), {}
    if g.directed:
        raise UsageError(f"{name} expects an undirected graph")
    oracle = RoutingOracle(g, args.seed)
    if name == "apx":
        return apx_undirected_hopset(g, args.k, args.seed, oracle), {}
    if name == "tz-emulator":
        hier = sample_hierarchy(g, args.k, args.seed, oracle)
        return tz_emulator(g, hier, oracle), {"k": args.k, "bunch_cap": bunch_cap(g.n, args.k)}
    raise UsageError(f"unknown construction {name!r}")


def _audit_failed(rep) -> list:
    failed = []
    if rep.exact is False:
        failed.append("exactness")
    if rep.reachability_equal is False:
        failed.append("reachability")
    if not rep.obs5_holds:
        failed.append("edge sensitivity above vertex sensitivity")
    return failed


def cmd_build(args) -> int:
    g = load_graph(_read(args.graph))
    try:
        h, extra = _construct(g, args)
    except InconsistentRouting as exc:
        _log(f"error: {exc}")
        return EXIT_USAGE
    cfg = _config(args)
    eps = tuple(args.eps or ())
    rep = audit_hopset(
        g,
        h,
        exact=h.kind == EXACT_HOPSET,
        stretch=eps,
        reach=h.kind == SHORTCUT_SET,
        max_pairs=args.max_pairs,
        seed=args.seed,
        config=cfg,
    )
    rep.extra.update(h.meta)
    rep.extra.update(extra)
    if "trace" in extra:
        rep.shadow_stats = extra["trace"]
    _write(args.out, h.to_jsonl())
    _write(args.report, rep.to_json() + "\n")
    failed = _audit_failed(rep)
    if failed:
        _log("audit failed: " + ", ".join(failed))
        return EXIT_AUDIT
    return EXIT_OK


# --- audit -------------------------------------------------------------------


def cmd_audit(args) -> int:
    g = load_graph(_read(args.graph))
    h = Hopset.from_jsonl(_read(args.hopset), g.directed, args.kind)
    validate_spans(g, h)
    cfg = _config(args)
    report = {"config": cfg, "n": g.n, "m": g.m, "hopset_size": len(h)}
    failed = []
    if args.sensitivity:
        vs = sensitivity(g, h, VERTEX)
        es = sensitivity(g, h, EDGE)
        report["sensitivity"] = {
            "v_linf": vs.linf,
            "v_l1": vs.l1,
            "e_linf": es.linf,
            "e_l1": es.l1,
            "obs5_holds": es.linf <= vs.linf,
        }
        if es.linf > vs.linf:
            failed.append("edge sensitivity above vertex sensitivity")
    if args.hop_diameter:
        modes = {}
        for mode in args.hop_diameter:
            if mode == "stretch":
                for e in args.eps or (0.5,):
                    modes[f"stretch_{e}"] = hop_diameter(
                        g, h, "stretch", eps=e, max_pairs=args.max_pairs, seed=args.seed
                    ).to_dict()
            else:
                hd = hop_diameter(g, h, mode, max_pairs=args.max_pairs, seed=args.seed)
                modes[mode] = hd.to_dict()
                if mode == "exact" and not hd.exact:
                    failed.append("exactness")
        report["hop_diameter"] = modes
    if args.reachability:
        ok = reachability_equal(g, h)
        report["reachability_equal"] = ok
        if not ok:
            failed.append("reachability")
    if args.potential:
        if args.sidecar is None:
            raise UsageError("--potential needs --sidecar")
        side = read_sidecar(_read(args.sidecar))
        t_mask = [False] * g.m
        for i in side["t_edges"]:
            t_mask[i] = True
        try:
            pa = potential_audit(g, side["lifted_paths"], h, side["ell"], t_mask, side["n_layer"])
        except HopBoundUnmet as exc:
            _log(f"error: potential audit inapplicable: {exc}")
            return EXIT_USAGE
        report["potential"] = pa.to_dict()
        if not pa.passed:
            failed.append("potential threshold")
    report["passed"] = not failed
    text = json.dumps(report, indent=2, sort_keys=True, default=str) + "\n"
    _write(args.report, text)
    if args.csv:
        row = {"n": g.n, "m": g.m, "hopset_size": len(h), "passed": not failed}
        for key, val in report.get("sensitivity", {}).items():
            row[key] = val
        for mode, hd in report.get("hop_diameter", {}).items():
            row[f"beta_{mode}"] = hd["beta"]
        if "potential" in report:
            row["potential_t_sum"] = report["potential"]["t_sum"]
            row["potential_threshold"] = report["potential"]["threshold"]
        _write(args.csv, csv_text([row]))
    if failed:
        _log("audit failed: " + ", ".join(failed))
        return EXIT_AUDIT
    return EXIT_OK


# --- dp ----------------------------------------------------------------------


def cmd_dp(args) -> int:
    if args.attrs is None:
        raise UsageError("dp needs --attrs")
    g = load_graph(_read(args.graph))
    if g.directed:
        raise UsageError("dp expects an undirected graph")
    attrs = load_attributes(_read(args.attrs), g)
    oracle = RoutingOracle(g, args.seed)
    h, _ = greedy_hopset(g, oracle, args.seed)
    rows = []
    accounts = []
    certified = True
    for trial in range(args.trials):
        noise_seed = args.seed + trial
        try:
            res = hopset_asrq(g, attrs, args.eps, noise_seed, args.log_term, oracle, h)
        except ScaleViolation as exc:
            _log(f"error: {exc}")
            return EXIT_USAGE
        certified &= res.accounting["certified"]
        rows.append(
            {
                "trial": trial,
                "seed": noise_seed,
                "epsilon": args.eps,
                "n": g.n,
                "e_sens": res.e_sens,
                "log_term": res.table.log_term,
                "max_query_hops": res.queries.max_hops(),
                "max_additive_error": repr(res.error),
                "error_bound": repr(error_bound(g.n)),
                "within_bound": res.error <= error_bound(g.n),
            }
        )
        accounts.append({"trial": trial, "seed": noise_seed, **res.accounting})
    _write(args.csv, csv_text(rows))
    _write(
        args.accounting,
        json.dumps({"config": _config(args), "trials": accounts, "all_certified": certified}, indent=2) + "\n",
    )
    return EXIT_OK if certified else EXIT_AUDIT


# --- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hopsens", description="Low-sensitivity hopsets: build, audit, release.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate an input graph")
    g.add_argument("kind", choices=("random", "path", "cycle", "layered", "attrs"))
    g.add_argument("--n", type=int)
    g.add_argument("--m", type=int)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--directed", action="store_true")
    g.add_argument("--dag", action="store_true", help="random DAG (implies directed)")
    g.add_argument("--max-weight", type=int, default=10)
    g.add_argument("--layers", type=int, default=8)
    g.add_argument("--per-layer", type=int, default=20)
    g.add_argument("--x", type=int, default=2)
    g.add_argument("--graph", help="graph file (attrs kind)")
    g.add_argument("--max-value", type=int, default=10, help="largest attribute (attrs kind)")
    g.add_argument("--out", help="output file (stdout if omitted)")
    g.add_argument("--lifted-out", help="lifted graph file (layered kind)")
    g.add_argument("--sidecar", help="sidecar JSON (layered kind)")
    g.set_defaults(func=cmd_gen)

    b = sub.add_parser("build", help="construct a hopset and audit it")
    b.add_argument("--graph", required=True)
    b.add_argument("--construction", required=True, choices=CONSTRUCTIONS)
    b.add_argument("--seed", type=int, required=True)
    b.add_argument("--k", type=int, default=2)
    b.add_argument("--eps", type=float, action="append", help="stretch audit ε (repeatable)")
    b.add_argument("--max-pairs", type=int, default=2000)
    b.add_argument("--out", help="hopset JSON-lines (stdout if omitted)")
    b.add_argument("--report", help="report JSON (stdout if omitted)")
    b.set_defaults(func=cmd_build)

    a = sub.add_parser("audit", help="audit an existing hopset")
    a.add_argument("--graph", required=True)
    a.add_argument("--hopset", required=True)
    a.add_argument("--kind", choices=(EXACT_HOPSET, SHORTCUT_SET), default=EXACT_HOPSET)
    a.add_argument("--sensitivity", action="store_true")
    a.add_argument("--hop-diameter", action="append", choices=("exact", "stretch", "reach"))
    a.add_argument("--eps", type=float, action="append")
    a.add_argument("--reachability", action="store_true")
    a.add_argument("--potential", action="store_true")
    a.add_argument("--sidecar")
    a.add_argument("--seed", type=int, default=0, help="pair-sampling seed for large graphs")
    a.add_argument("--max-pairs", type=int, default=2000)
    a.add_argument("--report", help="report JSON (stdout if omitted)")
    a.add_argument("--csv", help="also write a one-row CSV")
    a.set_defaults(func=cmd_audit)

    d = sub.add_parser("dp", help="private all-pairs range sums")
    d.add_argument("--graph", required=True)
    d.add_argument("--attrs")
    d.add_argument("--eps", type=float, required=True)
    d.add_argument("--seed", type=int, required=True)
    d.add_argument("--trials", type=int, default=1)
    d.add_argument("--log-term", type=int, help="override the hopset noise log-term (≥ measured)")
    d.add_argument("--csv", help="per-trial error CSV (stdout if omitted)")
    d.add_argument("--accounting", help="accounting JSON (stdout if omitted)")
    d.set_defaults(func=cmd_dp)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        _log(f"error: {exc}")
        return EXIT_USAGE
    except HopsensError as exc:
        _log(f"error: {type(exc).__name__}: {exc}")
        return EXIT_USAGE
    except ValueError as exc:
        _log(f"error: {exc}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
