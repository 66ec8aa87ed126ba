"""Analytic perturbation potentials h(x) and their integral norms.

Three families are provided: a Gaussian ``h0 exp(-|x|^2/w^2)``, a rational
decay ``h0 (1 + |x|^2)^(-s)`` and a sum of compactly supported smooth bumps.
``sign="nonpos"`` flips the sign, so the stored family describes
``hbar = -h >= 0``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .grid import Grid, integrate

FAMILIES = ("zero", "gaussian", "rational_decay", "multibump")
SIGNS = ("nonneg", "nonpos")


@dataclass(frozen=True)
class Bump:
    center: tuple[float, ...]
    radius: float
    height: float


@dataclass(frozen=True)
class PotentialSpec:
    family: str = "zero"
    sign: str = "nonneg"
    h0: float = 0.0
    width: float = 1.0
    decay_s: float = 1.0
    bumps: tuple[Bump, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown potential family {self.family!r}")
        if self.sign not in SIGNS:
            raise ValueError(f"unknown sign {self.sign!r}, expected nonneg or nonpos")
        if self.h0 < 0:
            raise ValueError(f"h0 must be >= 0, got {self.h0}")
        if self.family == "gaussian" and not self.width > 0:
            raise ValueError("gaussian width must be positive")
        if self.family == "rational_decay" and not self.decay_s > 0:
            raise ValueError("rational decay exponent must be positive")
        bumps = tuple(b if isinstance(b, Bump) else Bump(**b) for b in self.bumps)
        for b in bumps:
            if b.radius <= 0 or b.height < 0:
                raise ValueError("bumps need positive radius and nonnegative height")
        object.__setattr__(self, "bumps", tuple(
            Bump(tuple(float(c) for c in np.atleast_1d(b.center)), float(b.radius), float(b.height))
            for b in bumps
        ))

    @property
    def signum(self) -> float:
        return 1.0 if self.sign == "nonneg" else -1.0

    @property
    def is_zero(self) -> bool:
        return self.family == "zero" or self.h0 == 0 or (
            self.family == "multibump" and not any(b.height for b in self.bumps)
        )

    def with_h0(self, h0: float) -> "PotentialSpec":
        return PotentialSpec(self.family, self.sign, h0, self.width, self.decay_s, self.bumps)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["bumps"] = [asdict(b) for b in self.bumps]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PotentialSpec":
        d = dict(d)
        d["bumps"] = tuple(Bump(tuple(b["center"]), b["radius"], b["height"]) for b in d.get("bumps", ()))
        return cls(**d)


ZERO = PotentialSpec()


def _profile_and_radial(spec: PotentialSpec, coords) -> tuple[np.ndarray, np.ndarray]:
    """Unsigned profile hbar(x) and x . grad hbar(x), both scaled by h0."""
    r2 = sum(x**2 for x in coords)
    if spec.is_zero:
        z = np.zeros_like(r2, dtype=float)
        return z, z
    if spec.family == "gaussian":
        w2 = spec.width**2
        val = spec.h0 * np.exp(-r2 / w2)
        return val, -2.0 * r2 / w2 * val
    if spec.family == "rational_decay":
        s = spec.decay_s
        val = spec.h0 * (1.0 + r2) ** (-s)
        return val, -2.0 * s * r2 / (1.0 + r2) * val
    val = np.zeros_like(r2, dtype=float)
    rad = np.zeros_like(r2, dtype=float)
    for b in spec.bumps:
        if len(b.center) != len(coords):
            raise ValueError(f"bump center {b.center} does not match dimension {len(coords)}")
        rho2 = sum((x - c) ** 2 for x, c in zip(coords, b.center)) / b.radius**2
        inside = rho2 < 1.0
        safe = np.where(inside, rho2, 0.0)
        bump = np.where(inside, b.height * np.exp(1.0 - 1.0 / (1.0 - safe)), 0.0)
        # x . grad exp(1 - 1/(1 - rho^2)) = -bump / (1 - rho^2)^2 * 2 (x - c).x / r^2
        xdot = sum((x - c) * x for x, c in zip(coords, b.center)) / b.radius**2
        val = val + bump
        rad = rad + np.where(inside, -bump * 2.0 * xdot / (1.0 - safe) ** 2, 0.0)
    return spec.h0 * val, spec.h0 * rad


def _as_coords(x) -> list:
    x = np.asarray(x, dtype=float)
    return [x] if x.ndim == 0 else [x[..., d] for d in range(x.shape[-1])]


def eval_potential(spec: PotentialSpec, x) -> float | np.ndarray:
    """Signed h at point(s) ``x`` (last axis = coordinates)."""
    val, _ = _profile_and_radial(spec, _as_coords(x))
    return spec.signum * val


def eval_radial_derivative(spec: PotentialSpec, x) -> float | np.ndarray:
    """Signed x . grad h(x), from the closed-form derivative."""
    _, rad = _profile_and_radial(spec, _as_coords(x))
    return spec.signum * rad


@lru_cache(maxsize=64)
def _on_grid(spec: PotentialSpec, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    val, rad = _profile_and_radial(spec, grid.coords())
    val = np.broadcast_to(spec.signum * val, grid.shape).copy()
    rad = np.broadcast_to(spec.signum * rad, grid.shape).copy()
    val.setflags(write=False)
    rad.setflags(write=False)
    return val, rad


def potential_on_grid(spec: PotentialSpec, grid: Grid) -> np.ndarray:
    return _on_grid(spec, grid)[0]


def radial_on_grid(spec: PotentialSpec, grid: Grid) -> np.ndarray:
    return _on_grid(spec, grid)[1]


def potential_on_points(spec: PotentialSpec, coords) -> tuple[np.ndarray, np.ndarray]:
    """Signed (h, x.grad h) on arbitrary broadcastable coordinate arrays."""
    val, rad = _profile_and_radial(spec, coords)
    return spec.signum * val, spec.signum * rad


@dataclass(frozen=True)
class PotentialNorms:
    norm_2_over_2mq: float
    norm_p_over_pmq: float
    norm_radial: float
    upsilon: float | None
    divergent: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return asdict(self)


def _log_sphere_integral(dim: int, a: float, b: float) -> float:
    """log of int_{R^N} |x|^(2a) (1 + |x|^2)^(-b) dx  (finite iff b > a + N/2)."""
    # |S^{N-1}| * 1/2 * B(a + N/2, b - a - N/2)
    half_n = dim / 2.0
    return (
        half_n * math.log(math.pi) - gammaln(half_n)
        + gammaln(a + half_n) + gammaln(b - a - half_n) - gammaln(b)
    )


def _closed_norm(spec: PotentialSpec, r: float, dim: int, radial: bool) -> float:
    """||h||_r or ||x.grad h||_r from closed forms, inf if divergent."""
    h0 = spec.h0
    if spec.family == "gaussian":
        alpha = r / spec.width**2
        if not radial:
            log_int = dim / 2.0 * math.log(math.pi / alpha)
        else:
            # int |x|^(2r) e^{-alpha |x|^2} = pi^{N/2} Gamma(r + N/2) / (Gamma(N/2) alpha^{r + N/2})
            half_n = dim / 2.0
            log_int = (
                half_n * math.log(math.pi) + gammaln(r + half_n) - gammaln(half_n)
                - (r + half_n) * math.log(alpha) - 2 * r * math.log(spec.width)
            )
            h0 = 2.0 * h0
        return h0 * math.exp(log_int / r)
    s = spec.decay_s
    if not radial:
        if s * r <= dim / 2.0:
            return math.inf
        log_int = _log_sphere_integral(dim, 0.0, s * r)
    else:
        if s * r <= dim / 2.0:
            return math.inf
        log_int = _log_sphere_integral(dim, r, (s + 1.0) * r)
        h0 = 2.0 * s * h0
    return h0 * math.exp(log_int / r)


def _quadrature_norm(values: np.ndarray, grid: Grid, r: float) -> float:
    return integrate(grid, np.abs(values) ** r) ** (1.0 / r)


def quadrature_norms(spec: PotentialSpec, q: float, p: float, grid: Grid) -> PotentialNorms:
    """Same norms by grid quadrature (the cross-check route)."""
    h, rad = _on_grid(spec, grid)
    return PotentialNorms(
        _quadrature_norm(h, grid, 2.0 / (2.0 - q)),
        _quadrature_norm(h, grid, p / (p - q)),
        _quadrature_norm(rad, grid, 2.0 / (2.0 - q)),
        None,
    )


def potential_norms(spec: PotentialSpec, q: float, p: float, grid: Grid) -> PotentialNorms:
    if not (1.0 <= q < 2.0 < p):
        raise ValueError(f"need 1 <= q < 2 < p, got q={q}, p={p}")
    r_sub, r_pow = 2.0 / (2.0 - q), p / (p - q)
    if spec.is_zero:
        return PotentialNorms(0.0, 0.0, 0.0, 0.0)
    if spec.family == "multibump":
        quad = quadrature_norms(spec, q, p, grid)
        return PotentialNorms(quad.norm_2_over_2mq, quad.norm_p_over_pmq, quad.norm_radial, None)
    dim = grid.dim
    values = {
        "norm_2_over_2mq": _closed_norm(spec, r_sub, dim, False),
        "norm_p_over_pmq": _closed_norm(spec, r_pow, dim, False),
        "norm_radial": _closed_norm(spec, r_sub, dim, True),
    }
    divergent = tuple(k for k, v in values.items() if math.isinf(v))
    upsilon = 2.0 * spec.decay_s if spec.family == "rational_decay" else None
    return PotentialNorms(**values, upsilon=upsilon, divergent=divergent)


def check_integrability(spec: PotentialSpec, q: float, dim: int) -> None:
    """Hard guard: rational decay must lie in L^{2/(2-q)}."""
    if spec.family == "rational_decay" and not spec.is_zero:
        bound = dim * (2.0 - q) / 4.0
        if spec.decay_s <= bound:
            raise ValueError(
                f"decay_s={spec.decay_s} must exceed N(2-q)/4={bound:g} "
                "for h to lie in L^{2/(2-q)}"
            )


@dataclass(frozen=True)
class ConditionCheck:
    name: str
    value: float
    threshold: float
    status: str

    @property
    def margin(self) -> float:
        return self.threshold - self.value

    @property
    def ok(self) -> bool:
        return self.status != "fail"

    def to_dict(self) -> dict:
        return {**asdict(self), "margin": self.margin}


@dataclass(frozen=True)
class AssumptionReport:
    h1: bool
    h2: bool
    h3: bool
    nontrivial: bool
    conditions: dict

    def condition(self, name: str) -> bool | None:
        chk = self.conditions[name]
        return None if chk.status == "not-applicable" else chk.status == "pass"

    @property
    def cond_1_12(self):
        return self.condition("cond_1_12")

    @property
    def cond_1_13(self):
        return self.condition("cond_1_13")

    @property
    def cond_1_14(self):
        return self.condition("cond_1_14")

    @property
    def all_pass(self) -> bool:
        return all(c.ok for c in self.conditions.values())

    def failures(self) -> list[str]:
        return [name for name, c in self.conditions.items() if not c.ok]

    def to_dict(self) -> dict:
        return {
            "h1": self.h1, "h2": self.h2, "h3": self.h3, "nontrivial": self.nontrivial,
            "conditions": {k: v.to_dict() for k, v in self.conditions.items()},
            "all_pass": self.all_pass,
        }


def check_assumptions(
    spec: PotentialSpec,
    params,
    m_c: float | None = None,
    *,
    grid: Grid,
    c_np: float | None = None,
) -> AssumptionReport:
    """Membership conditions on h and the smallness thresholds on its norms.

    The h-conditions report integrability/regularity; ``nontrivial`` records
    whether h vanishes identically.  Threshold conditions whose sign regime does
    not match the potential are ``not-applicable``; those needing ``m_c`` are
    ``not-applicable`` when it is not supplied.
    """
    from . import landscape

    q, p, c = params.q, params.p, params.c
    norms = potential_norms(spec, q, p, grid)
    zero = spec.is_zero
    nonneg = zero or spec.sign == "nonneg"
    nonpos = zero or spec.sign == "nonpos"
    finite = lambda *xs: all(math.isfinite(x) for x in xs)  # noqa: E731

    h1 = nonneg and finite(norms.norm_2_over_2mq)
    h2 = nonneg and finite(norms.norm_p_over_pmq, norms.norm_radial)
    h3 = nonpos and finite(norms.norm_2_over_2mq, norms.norm_radial) and norms.upsilon is not None

    conditions = {}
    supercritical = params.regime == "supercritical"

    def add(name, applicable, value, threshold):
        if not applicable or threshold is None:
            conditions[name] = ConditionCheck(name, value, math.nan if threshold is None else threshold,
                                              "not-applicable")
        else:
            conditions[name] = ConditionCheck(name, value, threshold,
                                              "pass" if value < threshold else "fail")

    if supercritical and c_np is None:
        c_np = landscape.gn_constant(grid.dim, p, grid)
    thr12 = landscape.threshold_mountain_pass_norm(params, c_np) if supercritical else None
    thr13 = landscape.threshold_radial_norm(params, m_c) if supercritical and m_c is not None else None
    thr14 = None
    if supercritical and m_c is not None:
        thr14 = landscape.threshold_negative_norm(params, m_c, norms.upsilon if norms.upsilon is not None else 0.0)
        if norms.upsilon is None and not zero:
            thr14 = None
    add("cond_1_12", nonneg and supercritical, norms.norm_p_over_pmq, thr12)
    add("cond_1_13", nonneg and supercritical, norms.norm_radial, thr13)
    add("cond_1_14", nonpos and supercritical, norms.norm_2_over_2mq, thr14)
    return AssumptionReport(h1, h2, h3, not zero, conditions)
