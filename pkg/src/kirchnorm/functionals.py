"""Energy functionals, Pohozaev functional and Euler-Lagrange residuals.

For u on the grid with G = ||grad u||_2^2:

    I(u) = a/2 G + b/4 G^2 - 1/p int |u|^p - 1/q int h |u|^q

and the L^2 gradient is -(a + b G) Lap u - |u|^{p-2} u - h |u|^{q-2} u.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .grid import Field, grad_norm_sq, inner, integrate, lp_norm_p, mass, neg_laplacian
from .potentials import ZERO, PotentialSpec, potential_on_grid, radial_on_grid


@dataclass(frozen=True)
class KirchhoffParams:
    dim: int
    a: float = 1.0
    b: float = 1.0
    c: float = 1.0
    p: float = 3.0
    q: float = 1.5

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2 or 3, got {self.dim}")
        for name in ("a", "b", "c"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if not 1.0 <= self.q < 2.0:
            raise ValueError(f"q must satisfy 1 <= q < 2, got {self.q}")
        if not 2.0 < self.p < self.p_star:
            raise ValueError(f"p must satisfy 2 < p < {self.p_star}, got {self.p}")
        if self.regime == "intermediate":
            raise ValueError(
                f"p={self.p} lies in [2+4/N, 2+8/N] = [{2 + 4 / self.dim:g}, {self.p_bar:g}]; "
                "only p < 2+4/N or p > 2+8/N are supported"
            )

    @property
    def gamma_p(self) -> float:
        return self.dim * (self.p - 2.0) / (2.0 * self.p)

    @property
    def gamma_q(self) -> float:
        return self.dim * (self.q - 2.0) / (2.0 * self.q)

    @property
    def p_bar(self) -> float:
        return 2.0 + 8.0 / self.dim

    @property
    def p_star(self) -> float:
        return 6.0 if self.dim == 3 else math.inf

    @property
    def regime(self) -> str:
        if self.p < 2.0 + 4.0 / self.dim:
            return "subcritical"
        if self.p > self.p_bar:
            return "supercritical"
        return "intermediate"

    def with_mass(self, c: float) -> "KirchhoffParams":
        return KirchhoffParams(self.dim, self.a, self.b, c, self.p, self.q)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class EnergyBreakdown:
    kinetic: float
    nonlocal_: float
    power: float
    perturbation: float
    total: float

    @property
    def nonlocal_term(self) -> float:
        return self.nonlocal_

    def to_dict(self) -> dict:
        return {
            "kinetic": self.kinetic,
            "nonlocal": self.nonlocal_,
            "power": self.power,
            "perturbation": self.perturbation,
            "total": self.total,
        }


def signed_power(values: np.ndarray, exponent: float) -> np.ndarray:
    """|v|^(exponent-2) v, continuously extended by 0 at v = 0."""
    return np.sign(values) * np.abs(values) ** (exponent - 1.0)


def perturbation_integral(u: Field, spec: PotentialSpec, q: float) -> float:
    """int h |u|^q (signed h)."""
    if spec.is_zero:
        return 0.0
    return integrate(u.grid, potential_on_grid(spec, u.grid) * np.abs(u.samples) ** q)


def radial_integral(u: Field, spec: PotentialSpec, q: float) -> float:
    """int <grad h, x> |u|^q (signed h)."""
    if spec.is_zero:
        return 0.0
    return integrate(u.grid, radial_on_grid(spec, u.grid) * np.abs(u.samples) ** q)


def energy(u: Field, params: KirchhoffParams, spec: PotentialSpec = ZERO) -> EnergyBreakdown:
    g = grad_norm_sq(u)
    kinetic = 0.5 * params.a * g
    nonlocal_ = 0.25 * params.b * g * g
    power = lp_norm_p(u, params.p) / params.p
    pert = perturbation_integral(u, spec, params.q) / params.q
    return EnergyBreakdown(kinetic, nonlocal_, power, pert, kinetic + nonlocal_ - power - pert)


def energy_limit(u: Field, params: KirchhoffParams) -> float:
    return energy(u, params, ZERO).total


def pohozaev(u: Field, params: KirchhoffParams, spec: PotentialSpec = ZERO) -> float:
    """P(u) = d/dt I(t * u) at t = 1, with h taken as signed."""
    g = grad_norm_sq(u)
    out = params.a * g + params.b * g * g - params.gamma_p * lp_norm_p(u, params.p)
    if not spec.is_zero:
        out += (-params.gamma_q * perturbation_integral(u, spec, params.q)
                + radial_integral(u, spec, params.q) / params.q)
    return out


def pohozaev_scale(u: Field, params: KirchhoffParams, spec: PotentialSpec = ZERO) -> float:
    """Sum of magnitudes of the terms of P(u); the natural scale for |P|."""
    g = grad_norm_sq(u)
    out = params.a * g + params.b * g * g + params.gamma_p * lp_norm_p(u, params.p)
    if not spec.is_zero:
        out += (abs(params.gamma_q * perturbation_integral(u, spec, params.q))
                + abs(radial_integral(u, spec, params.q)) / params.q)
    return out


def smoothed_power(values: np.ndarray, exponent: float, smoothing: float) -> np.ndarray:
    """v (v^2 + eps^2)^((exponent-2)/2); equals signed_power at eps = 0."""
    if smoothing == 0.0:
        return signed_power(values, exponent)
    return values * (values * values + smoothing * smoothing) ** ((exponent - 2.0) / 2.0)


def gradient(u: Field, params: KirchhoffParams, spec: PotentialSpec = ZERO, *,
             smoothing: float = 0.0) -> np.ndarray:
    """Free L^2 gradient of I at u as a sample array.

    ``smoothing`` > 0 replaces |u|^{q-2} u by u (u^2 + eps^2)^{(q-2)/2}, a
    Lipschitz stand-in used by continuation in Newton's method.
    """
    g = grad_norm_sq(u)
    out = (params.a + params.b * g) * neg_laplacian(u.grid, u.samples)
    out = out - signed_power(u.samples, params.p)
    if not spec.is_zero:
        out = out - potential_on_grid(spec, u.grid) * smoothed_power(u.samples, params.q, smoothing)
    return out


def el_residual_array(u: Field, params: KirchhoffParams, spec: PotentialSpec, lam: float) -> np.ndarray:
    return gradient(u, params, spec) + lam * u.samples


def el_residual(u: Field, params: KirchhoffParams, spec: PotentialSpec = ZERO, lam: float = 0.0) -> float:
    r = el_residual_array(u, params, spec, lam)
    return math.sqrt(integrate(u.grid, r * r))


def multiplier(u: Field, params: KirchhoffParams, spec: PotentialSpec = ZERO) -> float:
    m = mass(u)
    if m <= 0:
        raise ValueError("zero-field: multiplier undefined")
    g = grad_norm_sq(u)
    num = (-params.a * g - params.b * g * g + lp_norm_p(u, params.p)
           + perturbation_integral(u, spec, params.q))
    return num / m


def constrained_gradient(u: Field, params: KirchhoffParams, spec: PotentialSpec = ZERO) -> Field:
    """Gradient of I restricted to the tangent space of S_c at u."""
    m = mass(u)
    if m <= 0:
        raise ValueError("zero-field: constrained gradient undefined")
    grad = gradient(u, params, spec)
    lam = -integrate(u.grid, grad * u.samples) / m
    return Field(u.grid, grad + lam * u.samples)


def hessian_apply(
    u: Field, params: KirchhoffParams, spec: PotentialSpec, lam: float, v: np.ndarray,
    *, floor: float = 1e-14, smoothing: float = 0.0,
) -> np.ndarray:
    """(I''(u) + lam) v, with the singular |u|^{q-2} factor floored."""
    grid = u.grid
    g = grad_norm_sq(u)
    lu = neg_laplacian(grid, u.samples)
    out = (params.a + params.b * g) * neg_laplacian(grid, v)
    out = out + 2.0 * params.b * integrate(grid, lu * v) * lu
    out = out + (lam - (params.p - 1.0) * np.abs(u.samples) ** (params.p - 2.0)) * v
    if not spec.is_zero and params.q > 1.0:
        out = out - q_term_diagonal(u, params, spec, floor=floor, smoothing=smoothing) * v
    return out


def q_term_diagonal(u: Field, params: KirchhoffParams, spec: PotentialSpec, *, floor: float = 1e-14,
                    smoothing: float = 0.0) -> np.ndarray:
    """(q-1) h |u|^{q-2}, the derivative of the sublinear term."""
    if spec.is_zero:
        return np.zeros(u.grid.shape)
    q = params.q
    if smoothing > 0.0:
        u2 = u.samples**2
        e2 = smoothing * smoothing
        return potential_on_grid(spec, u.grid) * (u2 + e2) ** ((q - 4.0) / 2.0) * ((q - 1.0) * u2 + e2)
    if q == 1.0:
        return np.zeros(u.grid.shape)
    scale = max(float(np.max(np.abs(u.samples))), 1e-300)
    mag = np.maximum(np.abs(u.samples), floor * scale)
    return (params.q - 1.0) * potential_on_grid(spec, u.grid) * mag ** (params.q - 2.0)


def gn_quotient(u: Field, p: float) -> float:
    """||u||_p / (||grad u||^gamma ||u||^(1 - gamma))."""
    dim = u.grid.dim
    gam = dim * (p - 2.0) / (2.0 * p)
    lp = lp_norm_p(u, p) ** (1.0 / p)
    return lp / (grad_norm_sq(u) ** (gam / 2.0) * mass(u) ** ((1.0 - gam) / 2.0))


def inner_product(u: Field, v: Field) -> float:
    return inner(u, v)
