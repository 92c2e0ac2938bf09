"""Multilevel ordering and bisection solvers."""

from .ordering import (
    Arrangement,
    OrderingResult,
    psum_cost,
    refine_ordering,
    solve_coarsest_ordering,
    solve_ordering,
    uncoarsen_ordering,
)
from .partition import (
    Bipartition,
    BisectionResult,
    cut_cost,
    exhaustive_bisection,
    fm_pass,
    fm_refine,
    multilevel_bisection,
    solve_bisection,
)

__all__ = [
    "Arrangement",
    "OrderingResult",
    "psum_cost",
    "refine_ordering",
    "solve_coarsest_ordering",
    "solve_ordering",
    "uncoarsen_ordering",
    "Bipartition",
    "BisectionResult",
    "cut_cost",
    "exhaustive_bisection",
    "fm_pass",
    "fm_refine",
    "multilevel_bisection",
    "solve_bisection",
]
