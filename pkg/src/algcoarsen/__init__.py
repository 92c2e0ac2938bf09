"""Multilevel graph coarsening with algebraic-distance couplings."""

from .algdist import (
    CouplingTable,
    RelaxParams,
    TestVectorSet,
    algebraic_distance_to_set,
    build_coupling_table,
    classical_coupling,
    edge_algebraic_distance,
    general_algebraic_distance,
    relax_test_vectors,
)
from .coarsen import CoarsenParams, Hierarchy, InterpolationMap, build_hierarchy, coarsen_once
from .graph import GraphError, WeightedGraph, from_arrays, from_edges, generate_mesh2d
from .io import GraphParseError, parse_graph, read_graph, serialize_graph, write_graph
from .solvers import Arrangement, Bipartition, cut_cost, psum_cost, solve_bisection, solve_ordering

__version__ = "0.1.0"

__all__ = [
    "Arrangement",
    "Bipartition",
    "CoarsenParams",
    "CouplingTable",
    "GraphError",
    "GraphParseError",
    "Hierarchy",
    "InterpolationMap",
    "RelaxParams",
    "TestVectorSet",
    "WeightedGraph",
    "algebraic_distance_to_set",
    "build_coupling_table",
    "build_hierarchy",
    "classical_coupling",
    "coarsen_once",
    "cut_cost",
    "edge_algebraic_distance",
    "from_arrays",
    "from_edges",
    "general_algebraic_distance",
    "generate_mesh2d",
    "parse_graph",
    "psum_cost",
    "read_graph",
    "relax_test_vectors",
    "serialize_graph",
    "solve_bisection",
    "solve_ordering",
    "write_graph",
]
