"""Limit-problem ground states, global minimizers and critical-point refinement."""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache

import numpy as np

from ..errors import AssumptionError, ConvergenceError
from ..functionals import KirchhoffParams, energy, gradient, hessian_apply
from ..grid import (
    Field, Grid, ResolutionWarning, gaussian_field, grad_norm_sq, integrate, mass, project_mass, random_smooth_field, translate,
)
from ..potentials import ZERO, PotentialSpec, check_assumptions, check_integrability
from .flow import _preconditioner, escaped, newton_refine, projected_descent
from .solution import Solution, make_solution

NEWTON_RTOL = 1e-10


def _oriented(u: Field) -> Field:
    return -u if np.sum(u.samples) < 0 else u


def _require_regime(params: KirchhoffParams, *allowed: str) -> None:
    if params.regime not in allowed:
        raise ValueError(
            f"regime {params.regime!r} (p={params.p}, N={params.dim}) not supported here; "
            f"expected {' or '.join(allowed)}"
        )


def _polish(u: Field, params, spec, tag: str, iterations: int, *, rtol: float = NEWTON_RTOL,
            pin: bool | None = None, **notes) -> Solution:
    newton = newton_refine(u, params, spec, rtol=rtol, pin_translations=pin)
    field = _oriented(newton.field)
    converged = newton.converged
    reason = newton.reason
    if converged and escaped(field):
        converged, reason = False, "escape: support reaches the box boundary"
    return make_solution(field, params, spec, tag, iterations + newton.iterations, converged,
                         lam=newton.lam, newton_reason=reason, **notes)


def refine_critical(u0: Field, params: KirchhoffParams, spec: PotentialSpec = ZERO, *,
                    tag: str = "linking_candidate", rtol: float = NEWTON_RTOL, cycles: int = 3) -> Solution:
    """Newton on the bordered EL system, with descent on the residual between failed attempts.

    Failures (escape to the box boundary, a stalled line search) come back as
    a non-converged Solution carrying ``notes["failure"]`` rather than raising.
    """
    if not np.any(u0.samples):
        raise ValueError("zero-field: cannot refine the zero field")
    u = project_mass(u0, params.c)
    total = 0
    reason = ""
    for cycle in range(cycles):
        res = newton_refine(u, params, spec, rtol=rtol)
        if not res.converged and _non_lipschitz(params, spec):
            res = _smoothed_newton(res.field if cycle else u, params, spec, rtol=rtol)
        total += res.iterations
        u = res.field
        reason = res.reason
        if res.converged:
            field = _oriented(u)
            if escaped(field):
                return make_solution(field, params, spec, tag, total, False, lam=res.lam,
                                     failure="escape: support reaches the box boundary")
            return make_solution(field, params, spec, tag, total, True, lam=res.lam)
        flow = _residual_descent(u, params, spec, steps=20)
        total += 20
        u = flow
    return make_solution(_oriented(u), params, spec, tag, total, False, failure=reason)


def _non_lipschitz(params: KirchhoffParams, spec: PotentialSpec) -> bool:
    return not spec.is_zero and params.q < 2.0


def _smoothed_newton(u: Field, params, spec, *, rtol: float, stages: int = 8, accept: float = 1e-6):
    """Newton continuation in the smoothing width of |u|^{q-2} u, which is not
    Lipschitz at 0 for q < 2; convergence is judged on the unsmoothed residual."""
    peak = float(np.max(np.abs(u.samples)))
    lam = None
    total = 0
    for k in range(1, stages + 1):
        res = newton_refine(u, params, spec, lam=lam, rtol=rtol, smoothing=peak * 10.0 ** (-2 * k), max_iter=60)
        total += res.iterations
        u, lam = res.field, res.lam
    final = newton_refine(u, params, spec, lam=lam, rtol=rtol, accept=accept)
    final.iterations += total
    return final


def _residual_descent(u: Field, params, spec, steps: int) -> Field:
    """A few preconditioned steps down 1/2 ||I'(u) + lam u||^2."""
    grid = u.grid
    for _ in range(steps):
        g = gradient(u, params, spec)
        lam = -integrate(grid, g * u.samples) / mass(u)
        r = g + lam * u.samples
        hr = hessian_apply(u, params, spec, lam, r)
        apply = _preconditioner(grid, params.a + params.b * grad_norm_sq(u), max(abs(lam), 1e-2 * params.a))
        d = apply(apply(hr))
        base = integrate(grid, r * r)
        tau = 1.0
        for _ in range(30):
            trial = project_mass(Field(grid, u.samples - tau * d), params.c)
            gt = gradient(trial, params, spec)
            lt = -integrate(grid, gt * trial.samples) / mass(trial)
            rt = gt + lt * trial.samples
            if integrate(grid, rt * rt) < base:
                u = trial
                break
            tau *= 0.5
        else:
            break
    return u


@lru_cache(maxsize=16)
def solve_limit_ground_state(params: KirchhoffParams, grid: Grid, *, rtol: float = NEWTON_RTOL) -> Solution:
    """Ground state of the h = 0 problem on S_c.

    Subcritical: minimizer of I_inf on S_c (level l_inf,c < 0).
    Supercritical: minimizer of max_t I_inf(t * u), a critical point with P = 0
    (level m_c > 0).
    """
    _require_regime(params, "subcritical", "supercritical")
    if grid.dim != params.dim:
        raise ValueError(f"grid dimension {grid.dim} does not match params.dim={params.dim}")
    start = project_mass(gaussian_field(grid, 1.0, grid.half_width / 8.0), params.c)
    flow = projected_descent(start, params, ZERO, fiber=params.regime == "supercritical")
    sol = _polish(flow.field, params, ZERO, "limit_ground_state", flow.iterations, rtol=rtol, pin=True,
                  descent_reason=flow.reason)
    if not sol.converged:
        raise ConvergenceError(f"limit ground state did not converge ({sol.notes.get('newton_reason')})",
                               last=sol.field)
    if not sol.lam > 0:
        raise ConvergenceError(f"limit ground state has nonpositive multiplier {sol.lam:g}", last=sol.field)
    return sol


def _start_fields(limit: Solution, grid: Grid, starts: int, seed: int) -> list[Field]:
    rng = np.random.default_rng(seed)
    out = []
    for i in range(starts):
        if i == 0:
            out.append(limit.field)
        elif i % 2:
            y = rng.uniform(-grid.half_width / 4, grid.half_width / 4, size=grid.dim)
            with warnings.catch_warnings():
                # a periodic shift loses nothing even when the tail reaches the edge
                warnings.simplefilter("ignore", ResolutionWarning)
                out.append(translate(limit.field, y))
        else:
            rnd = random_smooth_field(grid, rng, positive=True)
            out.append(Field(grid, np.abs(rnd.samples)))
    return out


def minimize_global(params: KirchhoffParams, spec: PotentialSpec, grid: Grid, starts: int = 8, *,
                    seed: int = 0, workers: int = 1, rtol: float = NEWTON_RTOL) -> Solution:
    """Best of ``starts`` descent-plus-Newton runs for the subcritical problem."""
    _require_regime(params, "subcritical")
    check_integrability(spec, params.q, params.dim)
    if not spec.is_zero and spec.sign != "nonneg":
        raise AssumptionError("global minimization needs h >= 0")
    report = check_assumptions(spec, params, grid=grid)
    if not report.h1:
        raise AssumptionError("h does not satisfy the integrability hypothesis", report)
    limit = solve_limit_ground_state(params, grid)

    def run(u0: Field) -> Solution | None:
        flow = projected_descent(u0, params, spec)
        sol = _polish(flow.field, params, spec, "global_min", flow.iterations, rtol=rtol)
        return sol if sol.converged else None

    fields = _start_fields(limit, grid, starts, seed)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, fields))
    else:
        results = [run(f) for f in fields]
    done = [s for s in results if s is not None]
    if not done:
        raise ConvergenceError(f"none of the {starts} starts converged")
    best = min(done, key=lambda s: s.level)
    distinct = sorted({round(s.level, 8) for s in done})
    ref = energy(limit.field, params, spec).total
    best.notes.update(
        starts=starts, converged_starts=len(done), distinct_levels=distinct, seed=seed,
        limit_level=limit.level, energy_at_limit_ground_state=ref, below_limit_ground_state=best.level <= ref,
    )
    return best
