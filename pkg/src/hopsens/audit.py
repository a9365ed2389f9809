"""Sensitivity, hop-diameter, reachability and potential audits.

Everything here is computed from the graph and the hopset edges (with their
spans) alone; nothing reads a construction's internal bookkeeping.
"""

from __future__ import annotations

import csv
import heapq
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from scipy.sparse.csgraph import dijkstra as _sp_dijkstra
from scipy.sparse.csgraph import shortest_path as _sp_shortest_path

from .errors import BudgetExceeded, HopBoundUnmet, InvalidSpan, MissingSpan
from .graph import Graph
from .hopset import Hopset

VERTEX = "vertex"
EDGE = "edge"
FULL_AUDIT_MAX_N = 500
SAMPLED_PAIRS = 2000
_F64_EXACT = 2**53


def log2c(n: int) -> int:
    return max(0, (int(n) - 1).bit_length())


# --- sensitivity -------------------------------------------------------------


@dataclass
class SensitivityVector:
    target: str
    counts: list

    @property
    def linf(self) -> int:
        return max(self.counts, default=0)

    @property
    def l1(self) -> int:
        return sum(self.counts)

    def masked_sum(self, mask) -> int:
        """Inner product with the 0/1 indicator ``mask``."""
        return sum(c for c, m in zip(self.counts, mask) if m)

    def argmax(self) -> int | None:
        if not self.counts:
            return None
        return max(range(len(self.counts)), key=lambda i: (self.counts[i], -i))


def sensitivity(g: Graph, h: Hopset, target: str = VERTEX) -> SensitivityVector:
    """Count, per vertex or per edge of ``g``, the hopset edges whose span contains it."""
    if target not in (VERTEX, EDGE):
        raise ValueError(f"unknown sensitivity target {target!r}")
    counts = [0] * (g.n if target == VERTEX else g.m)
    idx = g.edge_index
    for e in h:
        span = e.span
        if not span:
            raise MissingSpan(f"hopset edge ({e.s},{e.t}) carries no span")
        if target == VERTEX:
            for v in set(span):
                counts[v] += 1
        else:
            seen = set()
            for a, b in zip(span, span[1:]):
                i = idx.get((a, b))
                if i is None:
                    raise InvalidSpan(f"span of ({e.s},{e.t}) uses non-edge ({a},{b})")
                if i not in seen:
                    seen.add(i)
                    counts[i] += 1
    return SensitivityVector(target, counts)


def validate_spans(g: Graph, h: Hopset) -> None:
    """Every span must be a path of ``g`` between the edge's endpoints with matching weight."""
    idx = g.edge_index
    for e in h:
        if not e.span:
            raise MissingSpan(f"hopset edge ({e.s},{e.t}) carries no span")
        if e.span[0] != e.s or e.span[-1] != e.t:
            raise InvalidSpan(f"span of ({e.s},{e.t}) has wrong endpoints")
        total = 0
        for a, b in zip(e.span, e.span[1:]):
            i = idx.get((a, b))
            if i is None:
                raise InvalidSpan(f"span of ({e.s},{e.t}) uses non-edge ({a},{b})")
            total += g.edges[i][2]
        if total != e.weight:
            raise InvalidSpan(f"edge ({e.s},{e.t}) weight differs from its span weight")


# --- union graph ---------------------------------------------------------------


def union_arcs(g: Graph, h: Hopset | None) -> dict:
    """Arcs of G ∪ H as ``{(u, v): min weight}``."""
    arcs = {}

    def put(u, v, w):
        cur = arcs.get((u, v))
        if cur is None or w < cur:
            arcs[(u, v)] = w

    for u, v, w in g.edges:
        put(u, v, w)
        if not g.directed:
            put(v, u, w)
    if h is not None:
        for e in h:
            put(e.s, e.t, e.weight)
            if not h.directed:
                put(e.t, e.s, e.weight)
    return arcs


def _adjacency(n, arcs):
    adj = [[] for _ in range(n)]
    for (u, v), w in sorted(arcs.items()):
        adj[u].append((v, w))
    return adj


def lex_weight_hops(n: int, adj, source: int):
    """Dijkstra on ``(weight, hops)`` labels; returns ``(dist, hops)`` lists (None = unreachable)."""
    dist = [None] * n
    hops = [None] * n
    dist[source] = 0
    hops[source] = 0
    heap = [(0, 0, source)]
    while heap:
        d, k, u = heapq.heappop(heap)
        if d != dist[u] or k != hops[u]:
            continue
        for v, w in adj[u]:
            nd, nk = d + w, k + 1
            dv = dist[v]
            if dv is None or nd < dv or (nd == dv and nk < hops[v]):
                dist[v] = nd
                hops[v] = nk
                heapq.heappush(heap, (nd, nk, v))
    return dist, hops


def _csr(n, arcs, composite_scale):
    if not arcs:
        return csr_matrix((n, n), dtype=np.float64)
    us, vs, ws = zip(*((u, v, w) for (u, v), w in arcs.items()))
    data = np.asarray(ws, dtype=np.float64) * composite_scale + 1.0
    return csr_matrix((data, (np.asarray(us), np.asarray(vs))), shape=(n, n))


def bfs_hops(adj, sources) -> np.ndarray:
    """Unweighted hop counts from each source (float, inf = unreachable), level by level."""
    n = adj.shape[0]
    k = len(sources)
    out = np.full((k, n), np.inf)
    rows = np.arange(k)
    out[rows, sources] = 0.0
    frontier = csr_matrix((np.ones(k, dtype=bool), (rows, np.asarray(sources))), shape=(k, n))
    a = adj.astype(bool)
    level = 0
    while frontier.nnz:
        level += 1
        nxt = (frontier @ a).tocoo()
        fresh = np.isinf(out[nxt.row, nxt.col])
        r, c = nxt.row[fresh], nxt.col[fresh]
        out[r, c] = level
        frontier = csr_matrix((np.ones(len(r), dtype=bool), (r, c)), shape=(k, n))
    return out


def all_lex_weight_hops(n: int, arcs: dict, sources) -> tuple:
    """``(weight, hops)`` labels for every source as int64 matrices (-1 = unreachable).

    Encodes the pair as ``weight * (n + 1) + hops``; runs in scipy when the
    encoding stays below 2**53 and falls back to the pure-Python search
    otherwise.
    """
    sources = list(sources)
    scale = n + 1
    total = sum(arcs.values())
    dist = np.full((len(sources), n), -1, dtype=np.int64)
    hops = np.full((len(sources), n), -1, dtype=np.int64)
    if not sources:
        return dist, hops
    if (total + 1) * scale < _F64_EXACT:
        raw = _sp_dijkstra(_csr(n, arcs, scale), directed=True, indices=sources)
        finite = np.isfinite(raw)
        vals = np.rint(np.where(finite, raw, 0)).astype(np.int64)
        dist[finite] = vals[finite] // scale
        hops[finite] = vals[finite] % scale
        return dist, hops
    adj = _adjacency(n, arcs)
    for r, s in enumerate(sources):
        d, k = lex_weight_hops(n, adj, s)
        for v in range(n):
            if d[v] is not None:
                dist[r, v] = d[v]
                hops[r, v] = k[v]
    return dist, hops


def _audit_sources(n: int, max_pairs: int | None, seed: int):
    """All sources with full target rows, or a seeded sample of pairs when n is large."""
    if max_pairs is None or n <= FULL_AUDIT_MAX_N:
        return list(range(n)), None
    rng = np.random.default_rng(seed)
    s = rng.integers(0, n, size=max_pairs)
    t = rng.integers(0, n, size=max_pairs)
    keep = s != t
    pairs = sorted(set(zip(s[keep].tolist(), t[keep].tolist())))
    return sorted({p[0] for p in pairs}), pairs


@dataclass
class HopDiameter:
    beta: int
    witness: tuple | None
    mode: str
    eps: float | None = None
    exact: bool = True
    mismatches: int = 0
    pairs: int = 0
    budget: int | None = None
    per_pair: dict | None = field(default=None, repr=False)

    def to_dict(self):
        d = asdict(self)
        d.pop("per_pair")
        d["witness"] = list(self.witness) if self.witness else None
        return d


def _mask_pairs(sources, n, pairs):
    mask = np.zeros((len(sources), n), dtype=bool)
    if pairs is None:
        mask[:] = True
        for r, s in enumerate(sources):
            mask[r, s] = False
    else:
        row = {s: r for r, s in enumerate(sources)}
        for s, t in pairs:
            mask[row[s], t] = True
    return mask


def _max_witness(values, mask, sources):
    vals = np.where(mask, values, -1)
    if vals.size == 0 or vals.max() < 0:
        return 0, None
    r, t = np.unravel_index(int(np.argmax(vals)), vals.shape)
    return int(vals[r, t]), (int(sources[r]), int(t))


def hop_diameter(
    g: Graph,
    h: Hopset | None,
    mode: str = "exact",
    eps: float | None = None,
    max_pairs: int | None = SAMPLED_PAIRS,
    seed: int = 0,
    max_budget: int | None = None,
    keep_pairs: bool = False,
) -> HopDiameter:
    """Hop-diameter of ``G ∪ H``.

    ``exact``: max over reachable pairs of the fewest hops among paths of
    weight exactly dist_G.  ``stretch``: fewest hops among paths of weight at
    most (1+eps)·dist_G, by hop-layered relaxation with a doubling budget.
    ``reach``: fewest hops among any paths (shortcut sets).
    """
    n = g.n
    sources, pairs = _audit_sources(n, max_pairs, seed)
    mask = _mask_pairs(sources, n, pairs)
    g_arcs = union_arcs(g, None)
    u_arcs = union_arcs(g, h)

    if mode == "reach":
        if g.directed:
            base = _sp_shortest_path(_csr(n, g_arcs, 0.0), directed=True, unweighted=True, indices=sources)
        else:
            # undirected reachability is component membership
            _, label = connected_components(_csr(n, g_arcs, 0.0), directed=False)
            base = np.where(label[sources][:, None] == label[None, :], 0.0, np.inf)
        aug = bfs_hops(_csr(n, u_arcs, 0.0), sources)
        reach = np.isfinite(base) & mask
        same = bool(np.array_equal(np.isfinite(base), np.isfinite(aug)))
        hops = np.where(reach, np.where(np.isfinite(aug), aug, -1), -1).astype(np.int64)
        beta, wit = _max_witness(hops, reach, sources)
        return HopDiameter(beta, wit, mode, exact=same, pairs=int(reach.sum()),
                           per_pair=_per_pair(hops, reach, sources) if keep_pairs else None)

    dist_g, _ = all_lex_weight_hops(n, g_arcs, sources)
    reach = (dist_g >= 0) & mask

    if mode == "exact":
        dist_u, hops_u = all_lex_weight_hops(n, u_arcs, sources)
        mism = int(np.sum(reach & (dist_u != dist_g)))
        hops = np.where(reach, hops_u, -1)
        beta, wit = _max_witness(hops, reach, sources)
        return HopDiameter(beta, wit, mode, exact=mism == 0, mismatches=mism, pairs=int(reach.sum()),
                           per_pair=_per_pair(hops, reach, sources) if keep_pairs else None)

    if mode != "stretch":
        raise ValueError(f"unknown hop-diameter mode {mode!r}")
    if eps is None or eps < 0:
        raise ValueError("stretch mode needs eps >= 0")
    hops, budget = _stretch_hops(n, u_arcs, sources, dist_g, reach, eps, max_budget)
    beta, wit = _max_witness(hops, reach, sources)
    return HopDiameter(beta, wit, mode, eps=eps, pairs=int(reach.sum()), budget=budget,
                       per_pair=_per_pair(hops, reach, sources) if keep_pairs else None)


def _per_pair(hops, mask, sources):
    out = {}
    rows, cols = np.nonzero(mask)
    for r, t in zip(rows.tolist(), cols.tolist()):
        out[(sources[r], t)] = int(hops[r, t])
    return out


def _stretch_hops(n, arcs, sources, dist_g, reach, eps, max_budget):
    frac = Fraction(str(eps)).limit_denominator(10**6)
    num, den = frac.numerator, frac.denominator
    limit = np.where(reach, dist_g, 0) * (den + num)
    big = np.int64(2**61)
    cur = np.full(dist_g.shape, big, dtype=np.int64)
    for r, s in enumerate(sources):
        cur[r, s] = 0
    hops = np.where(reach, -1, 0).astype(np.int64)
    todo = reach & (hops < 0)
    if not arcs:
        us = vs = np.zeros(0, dtype=np.int64)
        ws = np.zeros(0, dtype=np.int64)
    else:
        items = sorted(arcs.items(), key=lambda kv: (kv[0][1], kv[0][0]))
        us = np.array([u for (u, _), _ in items], dtype=np.int64)
        vs = np.array([v for (_, v), _ in items], dtype=np.int64)
        ws = np.array([w for _, w in items], dtype=np.int64)
    heads = np.flatnonzero(np.r_[True, vs[1:] != vs[:-1]]) if len(vs) else np.zeros(0, dtype=np.int64)
    targets = vs[heads] if len(vs) else vs
    budget = 2 * max(1, log2c(n))
    cap = max_budget if max_budget is not None else max(n, 1)
    layer = 0
    while todo.any():
        if layer >= budget:
            if budget >= cap:
                raise BudgetExceeded(
                    f"{int(todo.sum())} pairs still unmet after {budget} hops", lower_bound=budget + 1
                )
            budget = min(2 * budget, cap)
            continue
        layer += 1
        if len(us):
            cand = np.minimum(cur[:, us] + ws, big)
            best = np.minimum.reduceat(cand, heads, axis=1)
            nxt = cur.copy()
            nxt[:, targets] = np.minimum(cur[:, targets], best)
            cur = nxt
        # unreached entries are masked first so the scaled product cannot overflow
        ok = todo & (cur < big) & (np.where(cur < big, cur, 0) * den <= limit)
        hops[ok] = layer
        todo &= ~ok
    return np.where(reach, hops, -1), budget


def min_hops_exact(g: Graph, h: Hopset | None, pairs) -> dict:
    """Fewest hops among exact-distance paths in G ∪ H for specific pairs."""
    pairs = list(pairs)
    sources = sorted({s for s, _ in pairs})
    dist_g, _ = all_lex_weight_hops(g.n, union_arcs(g, None), sources)
    dist_u, hops_u = all_lex_weight_hops(g.n, union_arcs(g, h), sources)
    row = {s: r for r, s in enumerate(sources)}
    out = {}
    for s, t in pairs:
        r = row[s]
        if dist_g[r, t] < 0:
            out[(s, t)] = None
        elif dist_u[r, t] != dist_g[r, t]:
            out[(s, t)] = None
        else:
            out[(s, t)] = int(hops_u[r, t])
    return out


def exhaustive_beta(g: Graph, h: Hopset | None) -> tuple:
    """Exact-mode hop-diameter by enumerating every simple path (tiny graphs only).

    Returns ``(beta, exact)`` where ``exact`` says every reachable pair has a
    path in G ∪ H whose weight equals its distance in G.
    """
    n = g.n

    def enumerate_best(arcs):
        adj = _adjacency(n, arcs)
        best_w = [[None] * n for _ in range(n)]
        best_h = [[None] * n for _ in range(n)]
        for s in range(n):
            onpath = [False] * n
            onpath[s] = True
            stack = [(s, 0, 0, iter(adj[s]))]
            while stack:
                u, w, k, it = stack[-1]
                nxt = next(it, None)
                if nxt is None:
                    stack.pop()
                    onpath[u] = False
                    continue
                v, wv = nxt
                if onpath[v]:
                    continue
                nw, nk = w + wv, k + 1
                bw = best_w[s][v]
                if bw is None or nw < bw or (nw == bw and nk < best_h[s][v]):
                    best_w[s][v] = nw
                    best_h[s][v] = nk
                onpath[v] = True
                stack.append((v, nw, nk, iter(adj[v])))
        return best_w, best_h

    gw, _ = enumerate_best(union_arcs(g, None))
    uw, uh = enumerate_best(union_arcs(g, h))
    beta = 0
    exact = True
    for s in range(n):
        for t in range(n):
            if s == t or gw[s][t] is None:
                continue
            if uw[s][t] != gw[s][t]:
                exact = False
                continue
            beta = max(beta, uh[s][t])
    return beta, exact


# --- reachability --------------------------------------------------------------


def transitive_closure(g: Graph, h: Hopset | None = None) -> np.ndarray:
    arcs = union_arcs(g, h)
    d = _sp_shortest_path(_csr(g.n, arcs, 0.0), directed=True, unweighted=True)
    return np.isfinite(d)


def reachability_equal(g: Graph, h: Hopset) -> bool:
    return bool(np.array_equal(transitive_closure(g), transitive_closure(g, h)))


# --- lower-bound potential audit -------------------------------------------


@dataclass
class PotentialAudit:
    paths: int
    ell: int
    per_layer: int
    t_sum: int
    threshold: Fraction
    passed: bool
    e_linf: int
    v_linf: int
    avg_bound: Fraction
    max_hops: int

    def to_dict(self):
        d = asdict(self)
        d["threshold"] = str(self.threshold)
        d["avg_bound"] = str(self.avg_bound)
        return d


def potential_audit(gprime: Graph, lifted_paths, h: Hopset, ell: int, t_mask, per_layer: int) -> PotentialAudit:
    """Check 1_T·e-sens ≥ |Π|·ℓ/2 for a hopset meeting the ℓ-hop bound on every lifted path.

    ``t_mask`` flags the zero-weight split edges of ``gprime``.
    """
    pairs = [(p[0], p[-1]) for p in lifted_paths]
    hops = min_hops_exact(gprime, h, pairs)
    worst = 0
    for pair, k in hops.items():
        if k is None or k > ell:
            raise HopBoundUnmet(f"endpoints {pair} need {k} hops, more than {ell}")
        worst = max(worst, k)
    es = sensitivity(gprime, h, EDGE)
    vs = sensitivity(gprime, h, VERTEX)
    t_sum = es.masked_sum(t_mask)
    threshold = Fraction(len(lifted_paths) * ell, 2)
    return PotentialAudit(
        paths=len(lifted_paths),
        ell=ell,
        per_layer=per_layer,
        t_sum=t_sum,
        threshold=threshold,
        passed=2 * t_sum >= len(lifted_paths) * ell,
        e_linf=es.linf,
        v_linf=vs.linf,
        avg_bound=Fraction(len(lifted_paths), 2 * per_layer),
        max_hops=worst,
    )


# --- combined report ---------------------------------------------------------


@dataclass
class HopsetReport:
    n: int
    m: int
    directed: bool
    hopset_size: int
    kind: str
    construction: str
    seed: int | None
    v_linf: int
    v_l1: int
    e_linf: int
    e_l1: int
    obs5_holds: bool
    beta_exact: int | None = None
    beta_exact_witness: list | None = None
    exact: bool | None = None
    beta_stretch: dict = field(default_factory=dict)
    beta_reach: int | None = None
    reachability_equal: bool | None = None
    shadow_stats: dict | None = None
    extra: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    runtime_s: float = 0.0

    def to_dict(self):
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, default=str)

    def csv_row(self) -> dict:
        row = {k: v for k, v in self.to_dict().items() if not isinstance(v, (dict, list))}
        for eps, beta in sorted(self.beta_stretch.items()):
            row[f"beta_stretch_{eps}"] = beta
        return row


def csv_text(rows) -> str:
    rows = list(rows)
    if not rows:
        return ""
    cols = []
    for r in rows:
        for k in r:
            if k not in cols:
                cols.append(k)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def audit_hopset(
    g: Graph,
    h: Hopset,
    exact: bool = False,
    stretch=(),
    reach: bool = False,
    max_pairs: int | None = SAMPLED_PAIRS,
    seed: int = 0,
    config: dict | None = None,
) -> HopsetReport:
    t0 = time.perf_counter()
    validate_spans(g, h)
    vs = sensitivity(g, h, VERTEX)
    es = sensitivity(g, h, EDGE)
    rep = HopsetReport(
        n=g.n,
        m=g.m,
        directed=g.directed,
        hopset_size=len(h),
        kind=h.kind,
        construction=h.construction,
        seed=h.seed,
        v_linf=vs.linf,
        v_l1=vs.l1,
        e_linf=es.linf,
        e_l1=es.l1,
        obs5_holds=es.linf <= vs.linf,
        config=dict(config or {}),
    )
    if exact:
        hd = hop_diameter(g, h, "exact", max_pairs=max_pairs, seed=seed)
        rep.beta_exact = hd.beta
        rep.beta_exact_witness = list(hd.witness) if hd.witness else None
        rep.exact = hd.exact
    for eps in stretch:
        rep.beta_stretch[str(eps)] = hop_diameter(g, h, "stretch", eps=eps, max_pairs=max_pairs, seed=seed).beta
    if reach:
        hd = hop_diameter(g, h, "reach", max_pairs=max_pairs, seed=seed)
        rep.beta_reach = hd.beta
        rep.reachability_equal = reachability_equal(g, h)
    if g.n > 1:
        rep.extra["sqrt_n_log_n"] = math.sqrt(g.n) * (log2c(g.n) + 1)
    rep.runtime_s = time.perf_counter() - t0
    return rep
