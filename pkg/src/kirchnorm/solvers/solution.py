"""Result types returned by the solvers."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..functionals import (
    EnergyBreakdown, KirchhoffParams, el_residual, energy, multiplier, pohozaev, pohozaev_scale,
)
from ..grid import Field, grad_norm_sq, mass
from ..potentials import PotentialSpec

LEVEL_TAGS = ("global_min", "limit_ground_state", "mountain_pass", "linking_candidate")


@dataclass(frozen=True, eq=False)
class Solution:
    field: Field
    lam: float
    energy: EnergyBreakdown
    pohozaev_residual: float
    pohozaev_scale: float
    el_residual: float
    level_tag: str
    iterations: int
    converged: bool
    params: KirchhoffParams
    spec: PotentialSpec
    notes: dict = field(default_factory=dict)

    @property
    def level(self) -> float:
        return self.energy.total

    @property
    def mass(self) -> float:
        return mass(self.field)

    @property
    def grad_norm_sq(self) -> float:
        return grad_norm_sq(self.field)

    @property
    def el_relative(self) -> float:
        """EL residual over a * ||grad u||^2."""
        return self.el_residual / (self.params.a * self.grad_norm_sq)

    @property
    def pohozaev_relative(self) -> float:
        return abs(self.pohozaev_residual) / self.pohozaev_scale

    @property
    def min_to_max(self) -> float:
        s = self.field.samples
        return float(s.min() / s.max())

    def summary(self) -> dict:
        return {
            "level_tag": self.level_tag,
            "converged": self.converged,
            "iterations": self.iterations,
            "lambda": self.lam,
            "energy": self.energy.to_dict(),
            "pohozaev": self.pohozaev_residual,
            "pohozaev_relative": self.pohozaev_relative,
            "el_residual": self.el_residual,
            "el_relative": self.el_relative,
            "mass": self.mass,
            "grad_norm_sq": self.grad_norm_sq,
            "params": self.params.to_dict(),
            "spec": self.spec.to_dict(),
            "notes": {k: v for k, v in self.notes.items() if _jsonable(v)},
        }


def _jsonable(v) -> bool:
    return isinstance(v, (str, int, float, bool, type(None), list, tuple, dict))


def make_solution(u: Field, params: KirchhoffParams, spec: PotentialSpec, tag: str, iterations: int,
                  converged: bool, lam: float | None = None, **notes) -> Solution:
    if tag not in LEVEL_TAGS:
        raise ValueError(f"unknown level tag {tag!r}")
    lam = multiplier(u, params, spec) if lam is None else lam
    return Solution(
        u, lam, energy(u, params, spec), pohozaev(u, params, spec), pohozaev_scale(u, params, spec),
        el_residual(u, params, spec, lam), tag, iterations, converged, params, spec, dict(notes),
    )


@dataclass(frozen=True)
class LevelBracket:
    m_c: float
    interior_max: float
    boundary_max: float
    upper_bound_L: float
    argmax_y: tuple
    argmax_s: float
    boundary_argmax_y: tuple
    boundary_argmax_s: float
    certified_boundary: bool
    certified_upper: bool
    epsilon: float
    lattice: dict = field(default_factory=dict, repr=False)

    @property
    def links(self) -> bool:
        return self.boundary_max < self.interior_max

    @property
    def certified(self) -> bool:
        return self.certified_boundary and self.certified_upper and self.links

    def to_dict(self) -> dict:
        return {
            "m_c": self.m_c,
            "interior_max": self.interior_max,
            "boundary_max": self.boundary_max,
            "upper_bound_L": self.upper_bound_L,
            "argmax_y": list(self.argmax_y),
            "argmax_s": self.argmax_s,
            "boundary_argmax_y": list(self.boundary_argmax_y),
            "boundary_argmax_s": self.boundary_argmax_s,
            "certified_boundary": self.certified_boundary,
            "certified_upper": self.certified_upper,
            "links": self.links,
            "epsilon": self.epsilon,
        }
