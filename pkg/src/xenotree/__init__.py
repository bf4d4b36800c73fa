"""Recognition and tree representation of uniformly non-prime 2-structures."""

from .core2s import (
    SEPARATOR,
    Digraph,
    StructureError,
    TwoStructure,
    isomorphic_2s,
    monochromatic_subgraphs,
    reversible_refinement,
)
from .editing import build_ilp, check_feasible, emit_lp, encode_assignment, exact_edit
from .hierarchy import ClusterMultiset, assemble_c1, is_hierarchy
from .moddecomp import classify_nodes, decompose, is_dicograph, one_clusters, strong_modules
from .relio import RelationSystem, encode_relations, load_2structure, load_tree, save_2structure, save_tree
from .treerep import (
    Certificate,
    EventNode,
    EventTree,
    build_tree_representation,
    evaluate_tree,
    normalize,
    recognize_unp,
    trees_isomorphic,
)

__version__ = "0.1.0"

__all__ = [
    "SEPARATOR",
    "Certificate",
    "ClusterMultiset",
    "Digraph",
    "EventNode",
    "EventTree",
    "RelationSystem",
    "StructureError",
    "TwoStructure",
    "assemble_c1",
    "build_ilp",
    "build_tree_representation",
    "check_feasible",
    "classify_nodes",
    "decompose",
    "emit_lp",
    "encode_assignment",
    "encode_relations",
    "evaluate_tree",
    "exact_edit",
    "is_dicograph",
    "is_hierarchy",
    "isomorphic_2s",
    "load_2structure",
    "load_tree",
    "monochromatic_subgraphs",
    "normalize",
    "one_clusters",
    "recognize_unp",
    "reversible_refinement",
    "save_2structure",
    "save_tree",
    "strong_modules",
    "trees_isomorphic",
]
