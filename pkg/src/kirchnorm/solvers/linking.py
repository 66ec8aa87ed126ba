"""Linking surface levels for h <= 0 and the barycenter map.

The surface is (y, s) -> s * v_c(. - y) over Q = B_R x [s1, s2], where
s * u = e^{Ns/2} u(e^s x).  Its energy splits into I_inf(s * v_c), which
scales in closed form, plus the potential term.
"""

from __future__ import annotations

import math
import warnings

import numpy as np

from ..errors import AssumptionError
from ..functionals import KirchhoffParams
from ..grid import (
    Field, Grid, ResolutionWarning, grad_norm_sq, integrate, lp_norm_p, resample_separable, scale_fiber, translate,
)
from ..landscape import lambda_c_floor_linking
from ..potentials import PotentialSpec, check_assumptions, check_integrability, potential_norms, potential_on_points
from .ground import _require_regime, refine_critical, solve_limit_ground_state
from .solution import LevelBracket, Solution


def directions(dim: int, count: int = 16) -> np.ndarray:
    """Unit vectors: +-1 in 1D, equally spaced angles in 2D, a Fibonacci sphere in 3D."""
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        ang = 2.0 * np.pi * np.arange(count) / count
        return np.stack([np.cos(ang), np.sin(ang)], axis=1)
    k = np.arange(count) + 0.5
    z = 1.0 - 2.0 * k / count
    phi = np.pi * (3.0 - math.sqrt(5.0)) * k
    r = np.sqrt(1.0 - z * z)
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def _limit_energy_on_fiber(g: float, pw: float, params: KirchhoffParams, s: np.ndarray) -> np.ndarray:
    t2 = np.exp(2.0 * s)
    return (0.5 * params.a * g * t2 + 0.25 * params.b * g * g * t2 * t2
            - np.exp(params.p * params.gamma_p * s) * pw / params.p)


def surface_perturbation(v: Field, y, s: float, spec: PotentialSpec, q: float) -> float:
    """int h |s * v(. - y)|^q for signed h."""
    if spec.is_zero:
        return 0.0
    grid = v.grid
    n = grid.dim
    t = math.exp(s)
    y = np.broadcast_to(np.asarray(y, dtype=float), (n,))
    if t >= 0.5:
        # z = t (x - y): t^(qN/2 - N) int h(z/t + y) |v(z)|^q dz
        h, _ = potential_on_points(spec, [x / t + y[d] for d, x in enumerate(grid.coords())])
        return t ** (q * n / 2.0 - n) * integrate(grid, h * np.abs(v.samples) ** q)
    vals = resample_separable(v, [t * (grid.axis - y[d]) for d in range(n)])
    h, _ = potential_on_points(spec, grid.coords())
    return t ** (q * n / 2.0) * integrate(grid, h * np.abs(vals) ** q)


def _support_radius(v: Field, tol: float = 1e-10) -> float:
    r = np.sqrt(v.grid.radius_sq())
    big = np.abs(v.samples) > tol * np.max(np.abs(v.samples))
    return float(r[big].max())


def linking_level(params: KirchhoffParams, spec: PotentialSpec, grid: Grid, R: float, s1: float, s2: float,
                  grid_Q: tuple[int, int, int] = (17, 16, 25), *, epsilon: float | None = None,
                  refine_boundary: int = 2) -> LevelBracket:
    """Evaluate I on the linking surface and bracket the min-max level.

    ``epsilon`` defaults to 5% of m_c; the boundary certificate asks for
    boundary_max < m_c + epsilon and the upper one for interior_max < 2 m_c.
    """
    _require_regime(params, "supercritical")
    if not spec.is_zero and spec.sign != "nonpos":
        raise AssumptionError("linking surface is set up for h <= 0")
    if not (R > 0 and s1 < 0 < s2):
        raise ValueError(f"need R > 0 and s1 < 0 < s2, got R={R}, s1={s1}, s2={s2}")
    check_integrability(spec, params.q, params.dim)
    n_radii, n_angles, n_s = grid_Q
    limit = solve_limit_ground_state(params, grid)
    v, m_c = limit.field, limit.level
    eps = 0.05 * m_c if epsilon is None else epsilon

    reach = R + _support_radius(v) * math.exp(-s1)
    if reach > grid.half_width:
        warnings.warn(f"linking surface reaches {reach:g} beyond the box half-width {grid.half_width:g}",
                      ResolutionWarning)

    g, pw = grad_norm_sq(v), lp_norm_p(v, params.p)
    dirs = directions(grid.dim, n_angles)

    def points(radii):
        pts = [np.zeros(grid.dim)] if radii[0] == 0 else []
        for r in radii:
            if r > 0:
                pts.extend(r * d for d in dirs)
        return np.array(pts)

    rows = []

    def evaluate(ys, ss, boundary):
        base = _limit_energy_on_fiber(g, pw, params, np.asarray(ss))
        for y in ys:
            for s, b in zip(ss, base):
                e = b - surface_perturbation(v, y, float(s), spec, params.q) / params.q
                rows.append((*y, float(s), float(e), boundary))

    evaluate(points(np.linspace(0.0, R, n_radii)[:-1]), np.linspace(s1, s2, n_s)[1:-1], False)
    fine_s = np.linspace(s1, s2, refine_boundary * (n_s - 1) + 1)
    fine_r = np.linspace(0.0, R, refine_boundary * (n_radii - 1) + 1)
    evaluate(points(np.array([R])), fine_s, True)
    evaluate(points(fine_r[:-1]), np.array([s1, s2]), True)

    arr = np.array(rows, dtype=float)
    ys, ss, es, is_b = arr[:, :grid.dim], arr[:, grid.dim], arr[:, grid.dim + 1], arr[:, grid.dim + 2] > 0
    k_all = int(np.argmax(es))
    k_b = int(np.flatnonzero(is_b)[np.argmax(es[is_b])])
    interior_max, boundary_max = float(es[k_all]), float(es[k_b])
    return LevelBracket(
        m_c, interior_max, boundary_max, interior_max,
        tuple(float(x) for x in ys[k_all]), float(ss[k_all]),
        tuple(float(x) for x in ys[k_b]), float(ss[k_b]),
        boundary_max < m_c + eps, interior_max < 2.0 * m_c, eps,
        {"y": ys, "s": ss, "energy": es, "boundary": is_b, "R": R, "s1": s1, "s2": s2},
    )


def surface_point(v: Field, y, s: float) -> Field:
    w = translate(v, y) if np.any(y) else v
    return scale_fiber(w, math.exp(s)) if s != 0 else w


def linking_candidate(params: KirchhoffParams, spec: PotentialSpec, grid: Grid, bracket: LevelBracket, *,
                      rtol: float = 1e-10) -> Solution:
    """Refine the surface maximum into a critical point and attach the multiplier bound."""
    limit = solve_limit_ground_state(params, grid)
    start = surface_point(limit.field, bracket.argmax_y, bracket.argmax_s)
    sol = refine_critical(start, params, spec, tag="linking_candidate", rtol=rtol)
    norms = potential_norms(spec, params.q, params.p, grid)
    upsilon = norms.upsilon if norms.upsilon is not None else math.inf
    floor = lambda_c_floor_linking(params, bracket.m_c, norms.norm_2_over_2mq, upsilon) / params.c
    report = check_assumptions(spec, params, bracket.m_c, grid=grid)
    sol.notes.update(
        m_c=bracket.m_c, multiplier_floor=floor, multiplier_above_floor=sol.lam >= floor,
        assumptions=report.to_dict(),
    )
    return sol


def barycenter(u: Field) -> np.ndarray:
    """Center of the region where the local average of |u| exceeds half its peak."""
    grid = u.grid
    if not np.any(u.samples):
        raise ValueError("zero-field: barycenter undefined")
    # unit-ball indicator centered at the origin, wrapped for circular convolution
    ball = (grid.radius_sq() <= 1.0).astype(float)
    ball = np.fft.ifftshift(ball)
    count = ball.sum()
    nu = np.real(np.fft.ifftn(np.fft.fftn(np.abs(u.samples)) * np.fft.fftn(ball))) / count
    hat = np.maximum(nu - 0.5 * nu.max(), 0.0)
    total = hat.sum()
    return np.array([float(np.sum(hat * x) / total) for x in grid.coords()])
