"""Hopset container and its JSON-lines serialization."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import Decimal

from .errors import MissingSpan
from .graph import SCALE, format_weight
from .primitives import HopsetEdge

EXACT_HOPSET = "exact-hopset"
SHORTCUT_SET = "shortcut-set"


@dataclass
class Hopset:
    """A set of augmenting edges keyed by endpoint pair.

    On undirected graphs ``(s, t)`` and ``(t, s)`` are the same edge; adding
    a duplicate keeps the first copy (its span is the same routing path).
    """

    directed: bool
    kind: str = EXACT_HOPSET
    construction: str = ""
    seed: int | None = None
    edges: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def add(self, e: HopsetEdge) -> bool:
        k = e.key(self.directed)
        if k in self.edges:
            return False
        self.edges[k] = e
        return True

    def update(self, edges) -> None:
        for e in edges:
            self.add(e)

    def __iter__(self):
        return iter(self.edges.values())

    def __len__(self):
        return len(self.edges)

    def __contains__(self, pair):
        s, t = pair
        if not self.directed and s > t:
            s, t = t, s
        return (s, t) in self.edges

    def to_jsonl(self) -> str:
        lines = []
        for e in self:
            lines.append(
                json.dumps(
                    {
                        "s": e.s,
                        "t": e.t,
                        "weight": float(Decimal(format_weight(e.weight))),
                        "span": list(e.span),
                        "construction": self.construction,
                        "seed": self.seed,
                    },
                    separators=(",", ":"),
                )
            )
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_jsonl(cls, text: str, directed: bool, kind: str = EXACT_HOPSET) -> Hopset:
        h = cls(directed, kind)
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            rec = json.loads(line)
            span = rec.get("span")
            if not span:
                raise MissingSpan(f"hopset line {lineno} has no span")
            w = int(Decimal(repr(rec["weight"])) * SCALE)
            h.construction = rec.get("construction", h.construction)
            h.seed = rec.get("seed", h.seed)
            h.add(HopsetEdge(int(rec["s"]), int(rec["t"]), w, tuple(int(v) for v in span)))
        return h
