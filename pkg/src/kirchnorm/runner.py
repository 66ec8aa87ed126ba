"""Execute one configured mode and write its artifacts to a run directory."""

from __future__ import annotations

import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import artifacts
from .config import RunConfig
from .errors import AssumptionError, ConvergenceError, KirchnormError
from .landscape import (
    fiber_curve, gamma, gn_constant, gn_maximizer, phi_profile, scan_profile, threshold_mountain_pass_norm,
)
from .potentials import PotentialSpec, check_assumptions, potential_norms
from .solvers import linking_candidate, linking_level, minimize_global, mountain_pass, solve_limit_ground_state

EXIT_OK, EXIT_SOLVER, EXIT_CONFIG, EXIT_ASSUMPTION = 0, 1, 2, 3


def resolve_spec(cfg: RunConfig, m_c: float | None = None) -> PotentialSpec:
    """Apply the configured h0 rule; fraction rules rescale the unit-amplitude profile."""
    pc, params, grid = cfg.potential, cfg.params, cfg.grid
    base = pc.spec
    if pc.h0_rule == "absolute" or base.family == "zero":
        return base
    if pc.h0_rule == "mountain_pass_fraction":
        if params.regime != "supercritical":
            raise AssumptionError("h0_rule mountain_pass_fraction needs a supercritical exponent")
        thr = threshold_mountain_pass_norm(params, gn_constant(params.dim, params.p, grid))
        norm = potential_norms(base, params.q, params.p, grid).norm_p_over_pmq
        return base.with_h0(base.h0 * pc.h0_fraction * thr / norm)
    if m_c is None:
        m_c = solve_limit_ground_state(params, grid).level
    norm = potential_norms(base, params.q, params.p, grid).norm_2_over_2mq
    return base.with_h0(base.h0 * pc.h0_fraction * m_c * params.q / (norm * params.c ** (params.q / 2.0)))


class Run:
    """Collects results and written paths for one invocation."""

    def __init__(self, cfg: RunConfig, out: Path):
        self.cfg = cfg
        self.out = Path(out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.results: dict = {}
        self.paths: list[Path] = []
        self.exit_code = EXIT_OK

    @property
    def formats(self):
        return self.cfg.output.formats

    def solution(self, name: str, sol) -> None:
        self.paths += artifacts.write_solution(self.out, name, sol, seed=self.cfg.solver.seed)
        if self.cfg.output.plots:
            from .plotting import plot_field

            self.paths.append(plot_field(self.out / f"{name}.png", sol.field, f"{sol.level_tag}: I = {sol.level:.6g}"))

    def scan(self, name: str, kind: str, data: dict, meta: dict | None = None, title: str = "") -> None:
        self.paths += artifacts.write_scan(self.out, name, kind, data, self.formats, meta)
        if self.cfg.output.plots:
            from .plotting import plot_scan

            self.paths.append(plot_scan(self.out / f"{name}.png", kind, data, meta, title))

    def json(self, name: str, payload) -> None:
        self.paths.append(artifacts.write_json(self.out / f"{name}.json", payload))


def _fiber_scan(run: Run, name: str, u, params, spec, meta=None) -> None:
    ts = np.geomspace(0.05, 5.0, min(run.cfg.output.scan_points, 200))
    run.scan(name, "fiber_curve", {"t": ts, "energy": fiber_curve(u, ts, params, spec)}, meta, "fiber energy")


def _limit(run: Run) -> None:
    cfg = run.cfg
    sol = solve_limit_ground_state(cfg.params, cfg.grid, rtol=cfg.solver.rtol)
    key = "l_inf_c" if cfg.params.regime == "subcritical" else "m_c"
    run.results.update({key: sol.level, "regime": cfg.params.regime, "lambda": sol.lam,
                        "el_relative": sol.el_relative, "pohozaev_relative": sol.pohozaev_relative})
    run.solution("limit_ground_state", sol)
    if cfg.params.regime == "supercritical":
        _fiber_scan(run, "limit_fiber", sol.field, cfg.params, cfg.spec, {"m_c": sol.level})


def _gn(run: Run, scan: bool) -> None:
    cfg = run.cfg
    params, grid = cfg.params, cfg.grid
    res = gn_maximizer(params.dim, params.p, grid)
    profile = {"dim": params.dim, "p": params.p, "gamma_p": gamma(params.p, params.dim),
               "constant": res.constant, "ascent_iterations": res.ascent_iterations,
               "polish_iterations": res.polish_iterations, "el_relative": res.el_residual,
               "grid": {"half_width": grid.half_width, "points_per_dim": grid.points_per_dim}}
    if params.regime == "supercritical" and (cfg.spec.is_zero or cfg.spec.sign == "nonneg"):
        spec = resolve_spec(cfg)
        land = phi_profile(params, spec, grid, c_np=res.constant)
        profile["landscape"] = land.to_dict()
        profile["h0"] = spec.h0
        if scan:
            data = scan_profile(land, n=cfg.output.scan_points)
            run.scan("phi_scan", "phi_scan", data, land.to_dict(), "phi and psi")
    run.results.update(gamma_p=profile["gamma_p"], constant=res.constant)
    run.json("gn_profile", profile)
    if grid.dim == 1:
        run.scan("gn_maximizer", "profile", {"x": grid.axis, "u": res.maximizer.samples}, title="G-N maximizer")


def _min(run: Run) -> None:
    cfg = run.cfg
    spec = resolve_spec(cfg)
    sol = minimize_global(cfg.params, spec, cfg.grid, cfg.solver.starts, seed=cfg.solver.seed,
                          workers=cfg.solver.workers, rtol=cfg.solver.rtol)
    n = sol.notes
    run.results.update(l_c=sol.level, l_inf_c=n["limit_level"], margin=n["limit_level"] - sol.level,
                       distinct_levels=n["distinct_levels"], lam=sol.lam, el_relative=sol.el_relative,
                       min_to_max=sol.min_to_max, h0=spec.h0)
    run.solution("global_min", sol)


def _mp(run: Run) -> None:
    cfg = run.cfg
    spec = resolve_spec(cfg)
    sol = mountain_pass(cfg.params, spec, cfg.grid, nodes=cfg.solver.nodes, max_sweeps=cfg.solver.max_sweeps,
                        rtol=cfg.solver.rtol)
    n = sol.notes
    land = n["landscape"]
    run.results.update(m_hc=sol.level, m_c=n["m_c"], margin=n["m_c"] - sol.level, lam=sol.lam,
                       multiplier_floor=n["multiplier_floor"], pohozaev_relative=sol.pohozaev_relative,
                       el_relative=sol.el_relative, h0=spec.h0,
                       landscape={k: land[k] for k in ("t1", "r1", "t2", "r2")})
    run.solution("mountain_pass", sol)
    path = n["path"]
    run.scan("path", "path", {"t": path["t"], "energy": path["energy"]}, {"m_c": n["m_c"]}, "mountain-pass path")
    prof = phi_profile(cfg.params, spec, cfg.grid, m_c=n["m_c"])
    run.scan("phi_scan", "phi_scan", scan_profile(prof, n=cfg.output.scan_points), prof.to_dict(), "phi and psi")


def _link(run: Run) -> None:
    cfg = run.cfg
    sv = cfg.solver
    m_c = solve_limit_ground_state(cfg.params, cfg.grid).level
    spec = resolve_spec(cfg, m_c)
    bracket = linking_level(cfg.params, spec, cfg.grid, sv.R, sv.s1, sv.s2, sv.grid_Q, epsilon=sv.epsilon)
    run.results.update(bracket=bracket.to_dict(), certified=bracket.certified, h0=spec.h0)
    cols = artifacts.lattice_columns(bracket.lattice, cfg.grid.dim)
    run.scan("lattice", "lattice", cols, {"dim": cfg.grid.dim, "m_c": m_c}, "linking surface energy")
    sol = linking_candidate(cfg.params, spec, cfg.grid, bracket, rtol=sv.rtol)
    report = check_assumptions(spec, cfg.params, m_c, grid=cfg.grid)
    run.results.update(level=sol.level, lam=sol.lam, converged=sol.converged, el_relative=sol.el_relative,
                       pohozaev_relative=sol.pohozaev_relative, multiplier_floor=sol.notes["multiplier_floor"],
                       assumptions=report.to_dict())
    run.solution("linking_candidate", sol)
    if not sol.converged:
        run.exit_code = EXIT_SOLVER
        run.results["failure"] = sol.notes.get("failure")
    elif not bracket.certified:
        run.exit_code = EXIT_ASSUMPTION


def _verify(run: Run) -> None:
    from .verify import verify

    report = verify(run.cfg)
    run.json("verification", report.to_dict())
    run.results.update(passed=report.passed, checks=len(report.checks), failed=report.failed_names())
    if not report.passed:
        run.exit_code = EXIT_SOLVER if report.any_unconverged else EXIT_ASSUMPTION


MODES = {"limit": _limit, "min": _min, "mp": _mp, "link": _link, "verify": _verify}


def run(cfg: RunConfig, out=None, *, command: str | None = None, scan: bool = False) -> tuple[int, dict]:
    """Run the configured mode; returns (exit status, manifest payload fields).

    Errors never propagate: they become an ``error.json`` and a nonzero
    status (1 non-convergence, 2 invalid input, 3 violated assumption).
    """
    out = Path(out if out is not None else cfg.output.directory)
    mode = cfg.solver.mode
    start = time.perf_counter()
    rec = Run(cfg, out)
    error = None
    try:
        if mode == "gn":
            _gn(rec, scan)
        else:
            MODES[mode](rec)
    except KirchnormError as exc:
        error, rec.exit_code = exc.to_dict(), exc.exit_code
    except ValueError as exc:
        error, rec.exit_code = {"error": "invalid-input", "message": str(exc)}, EXIT_CONFIG
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        error, rec.exit_code = {"error": "numerical", "message": f"{type(exc).__name__}: {exc}"}, EXIT_SOLVER
    if error is not None:
        rec.json("error", error)
    wall = time.perf_counter() - start
    status = "ok" if rec.exit_code == EXIT_OK else ("error" if error else "failed")
    seed = cfg.verify.seed if mode == "verify" else cfg.solver.seed
    artifacts.write_manifest(out, command=command or mode, config=cfg, seed=seed, wall_time=wall, status=status,
                             results=rec.results, artifacts=rec.paths, error=error)
    return rec.exit_code, {"status": status, "results": rec.results, "error": error, "out": str(out)}


def with_overrides(cfg: RunConfig, *, seed: int | None = None, threads: int | None = None) -> RunConfig:
    if seed is not None:
        cfg = replace(cfg, solver=replace(cfg.solver, seed=seed), verify=replace(cfg.verify, seed=seed))
    if threads is not None:
        cfg = replace(cfg, solver=replace(cfg.solver, workers=threads))
    return cfg


__all__ = ["run", "resolve_spec", "with_overrides", "EXIT_OK", "EXIT_SOLVER", "EXIT_CONFIG", "EXIT_ASSUMPTION"]
