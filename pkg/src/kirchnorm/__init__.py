"""Normalized solutions of the nonautonomous Kirchhoff equation on a periodic box.

    -(a + b ||grad u||^2) Lap u + lambda u = |u|^{p-2} u + h(x) |u|^{q-2} u,   ||u||_2^2 = c
"""

from .errors import AssumptionError, ConfigError, ConvergenceError, KirchnormError
from .functionals import KirchhoffParams, energy, gradient, multiplier, pohozaev
from .grid import Field, Grid, default_grid, make_grid, scale_fiber, translate
from .landscape import gamma, gn_constant, phi_profile
from .potentials import ZERO, PotentialSpec, check_assumptions, potential_norms
from .solvers import (
    LevelBracket, Solution, barycenter, linking_candidate, linking_level, minimize_global, mountain_pass,
    refine_critical, solve_limit_ground_state,
)

__version__ = "0.1.0"

__all__ = [
    "AssumptionError", "ConfigError", "ConvergenceError", "Field", "Grid", "KirchhoffParams", "KirchnormError",
    "LevelBracket", "PotentialSpec", "Solution", "ZERO", "barycenter", "check_assumptions", "default_grid",
    "energy", "gamma", "gn_constant", "gradient", "linking_candidate", "linking_level", "make_grid",
    "minimize_global", "mountain_pass", "multiplier", "phi_profile", "pohozaev", "potential_norms",
    "refine_critical", "scale_fiber", "solve_limit_ground_state", "translate",
]
