"""Mountain-pass solutions for h >= 0 in the supercritical regime.

Stage 1 relaxes a path of fiber dilations t_k * u: the path maximum is the
top of the fiber of u, so descending the max node means minimizing
J(u) = max_t I(t * u) over S_c and rebuilding the path through the new
node.  Stage 2 polishes the max node with Newton.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import AssumptionError, ConvergenceError
from ..functionals import KirchhoffParams, energy
from ..grid import Field, Grid, grad_norm_sq
from ..landscape import fiber_energy, lambda_c_floor_mountain_pass, phi_profile
from ..potentials import PotentialSpec, check_assumptions, check_integrability, potential_norms
from .flow import newton_refine, projected_descent
from .ground import _oriented, _require_regime, solve_limit_ground_state
from .solution import Solution, make_solution

PATH_NODES = 33


def path_endpoints(u: Field, params: KirchhoffParams, spec: PotentialSpec, profile) -> tuple[float, float]:
    """Dilations t_small (gradient below iota_1) and t_big (energy below phi(t1))."""
    g = math.sqrt(grad_norm_sq(u))
    iota = 0.5 * profile.r1 if profile.r1 > 0 else 0.1 * profile.r2
    t_small = iota / g
    floor = float(profile.phi(profile.t1)) if profile.t1 > 0 else 0.0
    t_big = 1.0
    while fiber_energy(u, t_big, params, spec) >= floor:
        t_big *= 1.25
        if t_big > 1e4:
            raise AssumptionError("fiber energy never drops below phi(t1): no mountain-pass geometry")
    return t_small, t_big


def build_path(u: Field, params, spec, profile, nodes: int = PATH_NODES) -> dict:
    t_small, t_big = path_endpoints(u, params, spec, profile)
    ts = np.unique(np.concatenate([np.geomspace(t_small, t_big, nodes), [1.0]]))
    values = np.array([fiber_energy(u, float(t), params, spec) for t in ts])
    k = int(np.argmax(values))
    return {"t": ts.tolist(), "energy": values.tolist(), "max_index": k, "max_value": float(values[k]),
            "interior_max": 0 < k < len(ts) - 1}


def mountain_pass(params: KirchhoffParams, spec: PotentialSpec, grid: Grid, *, nodes: int = PATH_NODES,
                  max_sweeps: int = 2000, stable_tol: float = 1e-7, rtol: float = 1e-10,
                  enforce: bool = True) -> Solution:
    _require_regime(params, "supercritical")
    if not spec.is_zero and spec.sign != "nonneg":
        raise AssumptionError("mountain-pass solver needs h >= 0")
    check_integrability(spec, params.q, params.dim)
    limit = solve_limit_ground_state(params, grid)
    m_c = limit.level
    report = check_assumptions(spec, params, m_c, grid=grid)
    if enforce and (not report.h2 or report.cond_1_12 is False or report.cond_1_13 is False):
        raise AssumptionError(f"assumptions violated: {report.failures() or ['h2']}", report)
    profile = phi_profile(params, spec, grid, m_c=m_c)
    if profile.status != "ok":
        raise AssumptionError("phi has no positive region", report)

    # stage 1: the running path max is J(u); stop once it has settled
    flow = projected_descent(limit.field, params, spec, rtol=1e-7, max_iter=max_sweeps, fiber=True)
    levels = [lv for _, lv, _ in flow.trace]
    settled = len(levels) < 2 or abs(levels[-1] - levels[-2]) <= stable_tol * max(1.0, abs(levels[-1]))
    path = build_path(flow.field, params, spec, profile, nodes)
    if not path["interior_max"]:
        raise AssumptionError("path collapse: the path maximum sits at an endpoint", report)

    # stage 2
    newton = newton_refine(flow.field, params, spec, rtol=rtol)
    u = _oriented(newton.field)
    if not newton.converged:
        raise ConvergenceError(f"mountain-pass refinement failed ({newton.reason})", last=u)
    sol = make_solution(u, params, spec, "mountain_pass", flow.iterations + newton.iterations, True,
                        lam=newton.lam)
    norms = potential_norms(spec, params.q, params.p, grid)
    floor = lambda_c_floor_mountain_pass(params, sol.level, norms.norm_radial) / params.c
    sol.notes.update(
        m_c=m_c, path=path, path_settled=settled, descent_reason=flow.reason, newton_reason=newton.reason,
        multiplier_floor=floor, multiplier_above_floor=sol.lam >= floor,
        below_limit_level=sol.level < m_c, assumptions=report.to_dict(),
        landscape={k: v for k, v in profile.to_dict().items() if k != "thresholds"},
        stage1_level=levels[-1] if levels else energy(flow.field, params, spec).total,
    )
    return sol
