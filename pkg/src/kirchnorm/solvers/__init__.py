"""Solvers for the limit problem and the three perturbed regimes."""

from .flow import FlowResult, fiber_argmax, newton_refine, projected_descent
from .ground import minimize_global, refine_critical, solve_limit_ground_state
from .linking import barycenter, linking_candidate, linking_level, surface_point
from .mountain import PATH_NODES, build_path, mountain_pass
from .solution import LEVEL_TAGS, LevelBracket, Solution, make_solution

__all__ = [
    "FlowResult", "LEVEL_TAGS", "LevelBracket", "PATH_NODES", "Solution", "barycenter", "build_path",
    "fiber_argmax", "linking_candidate", "linking_level", "make_solution", "minimize_global", "mountain_pass",
    "newton_refine", "projected_descent", "refine_critical", "solve_limit_ground_state", "surface_point",
]
