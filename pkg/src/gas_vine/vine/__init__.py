"""
时变 Vine：结构选择、逐层估计、R-Vine 矩阵与模拟
"""

from .fitting import (
    FittedTVVine,
    conditional_series,
    edge_inputs,
    filter_paths,
    fit_sequential,
    total_loglik,
)
from .matrix import from_rvine_matrix, to_rvine_matrix
from .simulation import draw_uniforms, simulate, simulate_path
from .structure import (
    Candidate,
    Criterion,
    VineEdge,
    VineMode,
    VineStructure,
    first_tree_candidates,
    proximity_candidates,
    random_structure,
    select_tree,
    structure_from_edges,
    validate,
)

__all__ = [
    "Candidate",
    "Criterion",
    "FittedTVVine",
    "VineEdge",
    "VineMode",
    "VineStructure",
    "conditional_series",
    "draw_uniforms",
    "edge_inputs",
    "filter_paths",
    "first_tree_candidates",
    "fit_sequential",
    "from_rvine_matrix",
    "proximity_candidates",
    "random_structure",
    "select_tree",
    "simulate",
    "simulate_path",
    "structure_from_edges",
    "to_rvine_matrix",
    "total_loglik",
    "validate",
]
