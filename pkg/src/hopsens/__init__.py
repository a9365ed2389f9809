"""Low-sensitivity hopsets and shortcut sets with brute-force audits."""

from __future__ import annotations

__version__ = "0.1.0"

from .graph import SCALE, Graph, load_graph, dump_graph, read_graph, write_graph
from .hopset import EXACT_HOPSET, SHORTCUT_SET, Hopset
from .primitives import HopsetEdge, RootedTree, heavy_light, path_hopset, tree_hopset
from .routing import RoutingOracle, check_consistency, scc_condense, split_transform
from .constructions import (
    folklore_hopset,
    greedy_di_shortcut,
    greedy_hopset,
    undirected_shortcut_set,
)
from .approx import apx_undirected_hopset, compute_indices, sample_hierarchy, tz_emulator
from .audit import audit_hopset, hop_diameter, potential_audit, reachability_equal, sensitivity
from .lowerbound import gen_perfect_paths, lift_instance, verify_perfect
from .dp import additive_error, hopset_asrq, laplace_sample
