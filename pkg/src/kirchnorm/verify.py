"""Replay the checkable inequalities and identities as a pass/fail report.

Each check compares ``lhs`` against ``rhs`` under a relation:

* ``<``   strict, with ``rhs - lhs > tolerance``
* ``<=``  ``lhs <= rhs + tolerance``
* ``>``   strict, with ``lhs - rhs > tolerance``
* ``==``  ``|lhs - rhs| <= tolerance``

A check that depends on a solver result fails whenever that solver did not
converge, and a solver error becomes a failed check instead of aborting the
suite.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .config import RunConfig, group_config
from .functionals import gn_quotient, pohozaev
from .grid import ResolutionWarning, grad_norm_sq, lp_norm_p, mass, random_smooth_field, scale_fiber
from .landscape import fiber_energy, gn_constant, phi_profile
from .potentials import check_assumptions
from .runner import resolve_spec
from .solvers import (
    linking_candidate, linking_level, minimize_global, mountain_pass, solve_limit_ground_state,
)

RELATIONS = ("<", "<=", ">", "==")


@dataclass
class Check:
    name: str
    lhs: float
    rhs: float
    relation: str
    passed: bool
    tolerance: float
    anchor: str
    group: str = ""
    note: str = ""

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Check":
        d = dict(d)
        d["passed"] = d.pop("pass")
        return cls(**d)


def holds(lhs: float, rhs: float, relation: str, tolerance: float = 0.0) -> bool:
    if not math.isfinite(lhs) or math.isnan(rhs):
        return False
    if relation == "<":
        return rhs - lhs > tolerance
    if relation == "<=":
        return lhs <= rhs + tolerance
    if relation == ">":
        return lhs - rhs > tolerance
    if relation == "==":
        return abs(lhs - rhs) <= tolerance
    raise ValueError(f"unknown relation {relation!r}")


@dataclass
class VerificationReport:
    checks: list[Check] = field(default_factory=list)
    groups: list[str] = field(default_factory=list)
    unconverged: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    @property
    def any_unconverged(self) -> bool:
        return bool(self.unconverged)

    def failed_names(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def by_name(self, name: str) -> Check:
        return next(c for c in self.checks if c.name == name)

    def to_dict(self) -> dict:
        return {"pass": self.passed, "groups": self.groups, "unconverged": self.unconverged,
                "checks": [c.to_dict() for c in self.checks]}

    @classmethod
    def from_dict(cls, d: dict) -> "VerificationReport":
        return cls([Check.from_dict(c) for c in d["checks"]], list(d["groups"]), list(d["unconverged"]))


class _Group:
    """Check recorder for one group, aware of which solvers converged."""

    def __init__(self, report: VerificationReport, name: str):
        self.report = report
        self.name = name
        self.failed_solvers: set[str] = set()

    def solve(self, label: str, fn):
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", ResolutionWarning)
                out = fn()
        except Exception as exc:  # recorded, never raised
            self.failed_solvers.add(label)
            self.report.unconverged.append(f"{self.name}/{label}")
            self.add(f"{label}_runs", math.nan, math.nan, "==", 0.0, f"{label} completes",
                     note=f"{type(exc).__name__}: {exc}")
            return None
        if getattr(out, "converged", True) is False:
            self.failed_solvers.add(label)
            self.report.unconverged.append(f"{self.name}/{label}")
        return out

    def add(self, name, lhs, rhs, relation, tolerance, anchor, *, needs=(), note=""):
        missing = [s for s in needs if s in self.failed_solvers]
        try:
            lhs_v, rhs_v = float(lhs() if callable(lhs) else lhs), float(rhs() if callable(rhs) else rhs)
        except Exception as exc:
            lhs_v = rhs_v = math.nan
            note = note or f"{type(exc).__name__}: {exc}"
        ok = holds(lhs_v, rhs_v, relation, tolerance) and not missing
        if missing:
            note = f"gated: {', '.join(missing)} did not converge"
        self.report.checks.append(Check(name, lhs_v, rhs_v, relation, bool(ok), tolerance, anchor, self.name, note))


# ---------------------------------------------------------------------------
# groups

def _identities(cfg: RunConfig, rec: _Group, samples: int, seed: int) -> None:
    params, grid, spec = cfg.params, cfg.grid, resolve_spec(cfg)
    rng = np.random.default_rng(seed)
    fields = [random_smooth_field(grid, rng) for _ in range(samples)]
    ts = (0.5, 2.0, 4.0)
    pg = params.p * params.gamma_p
    worst = {"mass": 0.0, "grad": 0.0, "lp": 0.0}
    for u in fields:
        m, g, pw = mass(u), grad_norm_sq(u), lp_norm_p(u, params.p)
        for t in ts:
            v = scale_fiber(u, t)
            worst["mass"] = max(worst["mass"], abs(mass(v) / m - 1.0))
            worst["grad"] = max(worst["grad"], abs(grad_norm_sq(v) / (t * t * g) - 1.0))
            worst["lp"] = max(worst["lp"], abs(lp_norm_p(v, params.p) / (t**pg * pw) - 1.0))
    rec.add("fiber_mass_invariance", worst["mass"], 0.0, "<=", 1e-6, "dilation t * u keeps the L2 mass")
    rec.add("fiber_gradient_scaling", worst["grad"], 0.0, "<=", 1e-4, "||grad(t * u)||^2 = t^2 ||grad u||^2")
    rec.add("fiber_power_scaling", worst["lp"], 0.0, "<=", 1e-4, "int |t * u|^p = t^(p gamma_p) int |u|^p")

    const = rec.solve("gn_constant", lambda: gn_constant(params.dim, params.p, grid))
    rec.add("gn_inequality", lambda: max(gn_quotient(u, params.p) for u in fields), lambda: const, "<=", 1e-8,
            "Gagliardo-Nirenberg inequality with the computed best constant", needs=("gn_constant",))

    h = 1e-4
    for sign in ("nonneg", "nonpos"):
        s = spec if spec.is_zero else type(spec)(spec.family, sign, spec.h0, spec.width, spec.decay_s, spec.bumps)
        err = 0.0
        for u in fields:
            d = (fiber_energy(u, 1.0 + h, params, s) - fiber_energy(u, 1.0 - h, params, s)) / (2.0 * h)
            err = max(err, abs(pohozaev(u, params, s) - d) / max(abs(d), 1e-12))
        rec.add(f"pohozaev_fiber_derivative_{sign}", err, 0.0, "<=", 2e-3,
                "P(u) equals the t-derivative of I(t * u) at t = 1")


def _subcritical(cfg: RunConfig, rec: _Group, seed: int) -> None:
    params, grid, sv = cfg.params, cfg.grid, cfg.solver
    spec = resolve_spec(cfg)
    limit = rec.solve("limit_ground_state", lambda: solve_limit_ground_state(params, grid, rtol=sv.rtol))
    half = rec.solve("limit_half_mass",
                     lambda: solve_limit_ground_state(params.with_mass(params.c / 2.0), grid, rtol=sv.rtol))
    glob = rec.solve("global_min", lambda: minimize_global(params, spec, grid, sv.starts, seed=seed,
                                                            workers=sv.workers, rtol=sv.rtol))
    lim = lambda: limit.level  # noqa: E731
    rec.add("l_c_below_l_inf_c", lambda: glob.level, lim, "<", 1e-4,
            "a nonnegative nontrivial h lowers the minimum below the limit level",
            needs=("global_min", "limit_ground_state"))
    rec.add("l_inf_c_negative", lim, 0.0, "<", 0.0, "the limit minimum is negative",
            needs=("limit_ground_state",))
    rec.add("l_c_finite", lambda: glob.level, -math.inf, ">", 0.0, "the minimum is bounded below",
            needs=("global_min",))
    rec.add("strict_subadditivity", lim, lambda: 2.0 * half.level, "<", 1e-4,
            "strict sub-additivity of the limit level in the mass",
            needs=("limit_ground_state", "limit_half_mass"))
    rec.add("global_min_el_residual", lambda: glob.el_relative, 0.0, "<=", 1e-6,
            "converged minimizer solves the equation", needs=("global_min",))
    rec.add("global_min_nonnegative", lambda: glob.min_to_max, 0.0, ">", -1e-6, "minimizer keeps one sign",
            needs=("global_min",))


def _supercritical_positive(cfg: RunConfig, rec: _Group) -> None:
    params, grid, sv = cfg.params, cfg.grid, cfg.solver
    limit = rec.solve("limit_ground_state", lambda: solve_limit_ground_state(params, grid, rtol=sv.rtol))
    m_c = limit.level if limit is not None else None
    spec = resolve_spec(cfg)
    prof = rec.solve("phi_profile", lambda: phi_profile(params, spec, grid, m_c=m_c))
    report = rec.solve("assumptions", lambda: check_assumptions(spec, params, m_c, grid=grid))
    if report is not None:
        for name in ("cond_1_12", "cond_1_13"):
            chk = report.conditions[name]
            anchor = ("norm of h below the mountain-pass threshold" if name == "cond_1_12"
                      else "norm of <grad h, x> below its threshold")
            rec.add(name, chk.value, chk.threshold, "<", 0.0, anchor)
    order = ("t1", "r1", "t2", "r2")
    rec.add("landscape_t1_positive", lambda: prof.t1, 0.0, ">", 0.0, "phi decreases first near 0",
            needs=("phi_profile",))
    for lo, hi in zip(order, order[1:]):
        rec.add(f"landscape_{lo}_below_{hi}", lambda lo=lo: getattr(prof, lo), lambda hi=hi: getattr(prof, hi),
                "<", 0.0, "ordering of the critical points and zeros of phi", needs=("phi_profile",))
    rec.add("landscape_phi_t1_negative", lambda: float(prof.phi(prof.t1)), 0.0, "<", 0.0,
            "phi has a strict local minimum at a negative level", needs=("phi_profile",))
    for r in ("r1", "r2"):
        rec.add(f"landscape_phi_{r}_zero", lambda r=r: float(prof.phi(getattr(prof, r))), 0.0, "==", 1e-8,
                "phi vanishes at its two zeros", needs=("phi_profile",))
    sol = rec.solve("mountain_pass", lambda: mountain_pass(params, spec, grid, nodes=sv.nodes,
                                                            max_sweeps=sv.max_sweeps, rtol=sv.rtol, enforce=False))
    need = ("mountain_pass", "limit_ground_state")
    rec.add("m_hc_below_m_c", lambda: sol.level, lambda: m_c, "<", 1e-5,
            "a nonnegative h lowers the mountain-pass level below the limit one", needs=need)
    rec.add("mountain_pass_lambda_positive", lambda: sol.lam, 0.0, ">", 0.0, "the multiplier is positive",
            needs=need)
    rec.add("mountain_pass_lambda_floor", lambda: sol.lam, lambda: sol.notes["multiplier_floor"], ">", -1e-6,
            "lower bound on the multiplier from the energy level and the radial norm", needs=need)
    rec.add("mountain_pass_pohozaev", lambda: sol.pohozaev_relative, 0.0, "<=", 1e-4,
            "critical points satisfy the Pohozaev identity", needs=need)
    rec.add("mountain_pass_el_residual", lambda: sol.el_relative, 0.0, "<=", 1e-6,
            "converged solution solves the equation", needs=need)
    rec.add("mountain_pass_path_interior_max", lambda: float(sol.notes["path"]["interior_max"]), 1.0, "==", 0.0,
            "the path maximum lies strictly inside the path", needs=need)


def _supercritical_negative(cfg: RunConfig, rec: _Group) -> None:
    params, grid, sv = cfg.params, cfg.grid, cfg.solver
    limit = rec.solve("limit_ground_state", lambda: solve_limit_ground_state(params, grid, rtol=sv.rtol))
    if limit is None:
        return
    m_c = limit.level
    spec = resolve_spec(cfg, m_c)
    report = rec.solve("assumptions", lambda: check_assumptions(spec, params, m_c, grid=grid))
    if report is not None:
        chk = report.conditions["cond_1_14"]
        rec.add("cond_1_14", chk.value, chk.threshold, "<", 0.0, "norm of h below the linking threshold")
    br = rec.solve("linking_level", lambda: linking_level(params, spec, grid, sv.R, sv.s1, sv.s2, sv.grid_Q,
                                                          epsilon=sv.epsilon))
    need = ("linking_level",)
    rec.add("linking_boundary_below_interior", lambda: br.boundary_max, lambda: br.interior_max, "<", 0.0,
            "the surface links: its boundary stays below its maximum", needs=need)
    rec.add("linking_boundary_near_m_c", lambda: br.boundary_max, lambda: br.m_c + br.epsilon, "<", 0.0,
            "boundary energies stay below m_c + epsilon", needs=need)
    rec.add("linking_level_above_m_c", lambda: br.m_c, lambda: br.interior_max, "<", 0.0,
            "the linking level exceeds m_c", needs=need)
    rec.add("linking_level_below_2m_c", lambda: br.interior_max, lambda: 2.0 * br.m_c, "<", 0.0,
            "the linking level stays below 2 m_c", needs=need)
    sol = None
    if br is not None:
        sol = rec.solve("linking_candidate", lambda: linking_candidate(params, spec, grid, br, rtol=sv.rtol))
    need = ("linking_level", "linking_candidate")
    rec.add("linking_lambda_positive", lambda: sol.lam, 0.0, ">", 0.0, "the multiplier is positive", needs=need)
    rec.add("linking_lambda_floor", lambda: sol.lam, lambda: sol.notes["multiplier_floor"], ">", -1e-6,
            "lower bound on the multiplier from m_c and the norms of h", needs=need)
    rec.add("linking_pohozaev", lambda: sol.pohozaev_relative, 0.0, "<=", 1e-4,
            "critical points satisfy the Pohozaev identity", needs=need)
    rec.add("linking_el_residual", lambda: sol.el_relative, 0.0, "<=", 1e-6,
            "converged solution solves the equation", needs=need)


def verify(cfg: RunConfig) -> VerificationReport:
    """Run the configured groups in order; deterministic given ``cfg.verify.seed``."""
    report = VerificationReport(groups=list(cfg.verify.groups))
    for group in cfg.verify.groups:
        rec = _Group(report, group)
        try:
            gcfg = group_config(cfg, group)
        except Exception as exc:
            rec.add("group_config", math.nan, math.nan, "==", 0.0, "group configuration is valid",
                    note=f"{type(exc).__name__}: {exc}")
            continue
        try:
            if group == "identities":
                _identities(gcfg, rec, cfg.verify.samples, cfg.verify.seed)
            elif group == "subcritical":
                _subcritical(gcfg, rec, cfg.verify.seed)
            elif group == "supercritical-positive":
                _supercritical_positive(gcfg, rec)
            else:
                _supercritical_negative(gcfg, rec)
        except Exception as exc:  # a group never aborts the suite
            rec.add(f"{group}_completes", math.nan, math.nan, "==", 0.0, "group runs to completion",
                    note=f"{type(exc).__name__}: {exc}")
    return report
