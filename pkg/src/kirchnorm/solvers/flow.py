"""Iterations shared by every solver.

* ``projected_descent``: preconditioned gradient flow on S_c with
  Barzilai-Borwein step guesses and Armijo backtracking.  With
  ``fiber=True`` the objective is J(u) = max_t I(t * u) and every accepted
  iterate is moved to the maximum of its fiber.
* ``newton_refine``: Newton's method on the Euler-Lagrange system bordered by
  the mass constraint (and, when h = 0, by pins removing the translation
  kernel).  Dense in small grids, GMRES otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.sparse.linalg import LinearOperator, gmres

from ..functionals import KirchhoffParams, energy, gradient, hessian_apply, q_term_diagonal
from ..grid import (
    Field, Grid, _outside_mass_fraction, _wavenumbers, grad_norm_sq, integrate, mass, neg_laplacian,
    project_mass, scale_fiber,
)
from ..landscape import fiber_energy
from ..potentials import PotentialSpec

DENSE_LIMIT = 2048


@dataclass
class FlowResult:
    field: Field
    iterations: int
    residual: float
    converged: bool
    reason: str = ""
    lam: float = math.nan
    trace: list = field(default_factory=list)


def _l2(grid: Grid, values: np.ndarray) -> float:
    return math.sqrt(integrate(grid, values * values))


def _residual(u: Field, params: KirchhoffParams, spec: PotentialSpec):
    g = gradient(u, params, spec)
    lam = -integrate(u.grid, g * u.samples) / mass(u)
    r = g + lam * u.samples
    return g, lam, _l2(u.grid, r)


def _preconditioner(grid: Grid, coef: float, shift: float):
    denom = coef * grid.symbol() + shift
    return lambda arr: np.real(np.fft.ifftn(np.fft.fftn(arr) / denom))


# ---------------------------------------------------------------------------
# fiber maximization

def fiber_argmax(u: Field, params: KirchhoffParams, spec: PotentialSpec,
                 lo: float = 0.5, hi: float = 2.0, n: int = 13) -> tuple[float, float]:
    """Largest interior local maximum of t -> I(t * u); returns (t*, value)."""
    for _ in range(4):
        ts = np.geomspace(lo, hi, n)
        vals = np.array([fiber_energy(u, float(t), params, spec) for t in ts])
        inner = [i for i in range(1, n - 1) if vals[i] >= vals[i - 1] and vals[i] >= vals[i + 1]]
        if inner:
            i = max(inner, key=lambda k: vals[k])
            res = minimize_scalar(
                lambda s: -fiber_energy(u, math.exp(s), params, spec),
                bounds=(math.log(ts[i - 1]), math.log(ts[i + 1])), method="bounded",
                options={"xatol": 1e-10},
            )
            t = math.exp(res.x)
            return t, -float(res.fun)
        lo, hi, n = lo / 4.0, hi * 4.0, n + 8
    raise ValueError("fiber has no interior maximum in the scanned range")


def to_fiber_max(u: Field, params: KirchhoffParams, spec: PotentialSpec) -> Field:
    t, _ = fiber_argmax(u, params, spec)
    return u if abs(t - 1.0) < 1e-12 else project_mass(scale_fiber(u, t), params.c)


# ---------------------------------------------------------------------------
# descent

def projected_descent(
    u: Field, params: KirchhoffParams, spec: PotentialSpec, *,
    rtol: float = 1e-6, max_iter: int = 3000, fiber: bool = False, stall: int = 25,
) -> FlowResult:
    """Residuals are compared against ``rtol * a * ||grad u||^2``."""
    grid = u.grid
    c = params.c
    u = project_mass(u, c)
    if fiber:
        u = to_fiber_max(u, params, spec)
    level = energy(u, params, spec).total
    tau, prev_u, prev_d = 1.0, None, None
    trace = []
    flat = 0
    for it in range(max_iter):
        g, lam, res = _residual(u, params, spec)
        trace.append((it, level, res))
        if res <= rtol * params.a * grad_norm_sq(u):
            return FlowResult(u, it, res, True, "tolerance", lam, trace)
        apply = _preconditioner(grid, params.a + params.b * grad_norm_sq(u), max(lam, 1e-2 * params.a))
        pg, pu = apply(g), apply(u.samples)
        d = pg - integrate(grid, u.samples * pg) / integrate(grid, u.samples * pu) * pu
        slope = integrate(grid, g * d)
        if slope <= 0:
            return FlowResult(u, it, res, False, "no descent direction", lam, trace)
        if prev_u is not None:
            s = u.samples - prev_u
            y = d - prev_d
            sy = integrate(grid, s * y)
            if sy > 0:
                tau = min(max(integrate(grid, s * s) / sy, 1e-4), 1e4)
        accepted = False
        for _ in range(40):
            trial = project_mass(Field(grid, u.samples - tau * d), c)
            if fiber:
                t, val = fiber_argmax(trial, params, spec)
            else:
                val = energy(trial, params, spec).total
            if val <= level - 1e-4 * tau * slope:
                accepted = True
                break
            tau *= 0.5
        if not accepted:
            return FlowResult(u, it, res, False, "line search stalled", lam, trace)
        if fiber and abs(t - 1.0) > 1e-12:
            trial = project_mass(scale_fiber(trial, t), c)
            val = energy(trial, params, spec).total
        flat = flat + 1 if level - val < 1e-15 * max(1.0, abs(level)) else 0
        prev_u, prev_d = u.samples, d
        u, level = trial, val
        if flat >= stall:
            return FlowResult(u, it + 1, res, False, "level stagnated", lam, trace)
    g, lam, res = _residual(u, params, spec)
    return FlowResult(u, max_iter, res, res <= rtol * params.a * grad_norm_sq(u), "max iterations", lam, trace)


# ---------------------------------------------------------------------------
# Newton

@lru_cache(maxsize=4)
def _dense_neg_laplacian(grid: Grid) -> np.ndarray:
    n = grid.size
    eye = np.eye(n).reshape((n,) + grid.shape)
    axes = tuple(range(1, grid.dim + 1))
    sym = grid.symbol()
    cols = np.real(np.fft.ifftn(sym * np.fft.fftn(eye, axes=axes), axes=axes)).reshape(n, n)
    out = np.ascontiguousarray(cols.T)
    out.setflags(write=False)
    return out


def translation_modes(u: Field) -> list[np.ndarray]:
    grid = u.grid
    k = _wavenumbers(grid)
    spec = np.fft.fftn(u.samples)
    modes = []
    for d in range(grid.dim):
        shape = [1] * grid.dim
        shape[d] = grid.points_per_dim
        modes.append(np.real(np.fft.ifftn(1j * k.reshape(shape) * spec)))
    return modes


def _bordered_solve(u: Field, params, spec, lam, rhs_field, rhs_mass, pins, smoothing=0.0):
    grid = u.grid
    h = grid.cell_volume
    n = grid.size
    borders = [u.samples.ravel()] + [m.ravel() for m in pins]
    nb = len(borders)
    rhs = np.concatenate([rhs_field.ravel(), [rhs_mass], np.zeros(nb - 1)])
    if n <= DENSE_LIMIT:
        g = grad_norm_sq(u)
        lu = neg_laplacian(grid, u.samples).ravel()
        diag = lam - (params.p - 1.0) * np.abs(u.samples.ravel()) ** (params.p - 2.0)
        diag = diag - q_term_diagonal(u, params, spec, smoothing=smoothing).ravel()
        mat = np.zeros((n + nb, n + nb))
        mat[:n, :n] = (params.a + params.b * g) * _dense_neg_laplacian(grid)
        mat[:n, :n] += 2.0 * params.b * h * np.outer(lu, lu)
        mat[np.arange(n), np.arange(n)] += diag
        for j, b in enumerate(borders):
            mat[:n, n + j] = b
            mat[n + j, :n] = h * b
        sol = np.linalg.solve(mat, rhs)
    else:
        shape = grid.shape

        def matvec(x):
            v = x[:n].reshape(shape)
            top = hessian_apply(u, params, spec, lam, v, smoothing=smoothing).ravel()
            for j, b in enumerate(borders):
                top = top + x[n + j] * b
            tail = [h * float(np.dot(b, x[:n])) for b in borders]
            return np.concatenate([top, tail])

        apply = _preconditioner(grid, params.a + params.b * grad_norm_sq(u), max(abs(lam), 1e-2 * params.a))

        def precond(x):
            return np.concatenate([apply(x[:n].reshape(shape)).ravel(), x[n:]])

        op = LinearOperator((n + nb, n + nb), matvec=matvec)
        pre = LinearOperator((n + nb, n + nb), matvec=precond)
        sol, info = gmres(op, rhs, M=pre, rtol=1e-10, atol=0.0, restart=200, maxiter=20)
        if info < 0:
            raise np.linalg.LinAlgError(f"gmres breakdown ({info})")
    return sol[:n].reshape(grid.shape), float(sol[n])


def newton_refine(
    u: Field, params: KirchhoffParams, spec: PotentialSpec, *,
    lam: float | None = None, rtol: float = 1e-10, accept: float = 1e-6, max_iter: int = 40,
    pin_translations: bool | None = None, smoothing: float = 0.0,
) -> FlowResult:
    """Stops at ``rtol * a * ||grad u||^2``; once progress stalls (round-off
    floor) the result counts as converged if below ``accept`` on the same scale."""
    grid = u.grid
    c = params.c
    u = project_mass(u, c)
    if lam is None:
        lam = _residual(u, params, spec)[1]
    if pin_translations is None:
        pin_translations = spec.is_zero
    trace = []

    def merit(f: Field, lm: float) -> float:
        r = gradient(f, params, spec, smoothing=smoothing) + lm * f.samples
        return _l2(grid, r)

    res = merit(u, lam)
    slow = 0
    for it in range(max_iter):
        trace.append((it, energy(u, params, spec).total, res))
        scale = params.a * grad_norm_sq(u)
        if res <= rtol * scale:
            return FlowResult(u, it, res, True, "tolerance", lam, trace)
        if slow >= 3:
            ok = res <= accept * scale
            return FlowResult(u, it, res, ok, "round-off floor" if ok else "stagnated", lam, trace)
        rhs = -(gradient(u, params, spec, smoothing=smoothing) + lam * u.samples)
        pins = translation_modes(u) if pin_translations else []
        try:
            du, dlam = _bordered_solve(u, params, spec, lam, rhs, 0.5 * (c - mass(u)), pins, smoothing)
        except np.linalg.LinAlgError as exc:
            return FlowResult(u, it, res, False, f"singular Newton system: {exc}", lam, trace)
        step = 1.0
        for _ in range(30):
            trial = Field(grid, u.samples + step * du)
            if mass(trial) > 0:
                trial = project_mass(trial, c)
                lam_t = lam + step * dlam
                new = merit(trial, lam_t)
                if new < (1.0 - 1e-4 * step) * res or (step < 1e-6 and new < res):
                    break
            step *= 0.5
        else:
            return FlowResult(u, it, res, False, "Newton line search failed", lam, trace)
        slow = slow + 1 if new > 0.5 * res else 0
        u, lam, res = trial, lam_t, new
    ok = res <= accept * params.a * grad_norm_sq(u)
    return FlowResult(u, max_iter, res, ok, "max iterations", lam, trace)


def escaped(u: Field, fraction: float = 0.9, tol: float = 1e-6) -> bool:
    """True when the field carries mass near the box boundary."""
    return _outside_mass_fraction(u, fraction * u.grid.half_width) > tol
