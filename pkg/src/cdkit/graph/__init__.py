"""Graph representation, orientation rules, metrics and serialization."""

from .core import (
    Edge,
    MixedGraph,
    SepSets,
    ancestors,
    d_separated,
    default_names,
    descendants,
    has_directed_cycle,
    is_dag,
    topological_order,
)
from .metrics import GraphMetrics, shd, skeleton_metrics
from .orient import dag_to_cpdag, meek_closure, orient_v_structures, unshielded_triples, v_structures
from .serialize import Format, parse, parse_dot, parse_edge_csv, parse_graphml, serialize

__all__ = [
    "Edge",
    "Format",
    "GraphMetrics",
    "MixedGraph",
    "SepSets",
    "ancestors",
    "d_separated",
    "dag_to_cpdag",
    "default_names",
    "descendants",
    "has_directed_cycle",
    "is_dag",
    "meek_closure",
    "orient_v_structures",
    "parse",
    "parse_dot",
    "parse_edge_csv",
    "parse_graphml",
    "serialize",
    "shd",
    "skeleton_metrics",
    "topological_order",
    "unshielded_triples",
    "v_structures",
]
