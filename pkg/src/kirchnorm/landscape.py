"""Fiber landscape: G-N constant, the profiles phi and psi, and t -> I(t * u).

With t = ||grad u||_2 and u on S_c, the G-N and Hoelder inequalities give
I(u) >= phi(t), where

    phi(t) = a/2 t^2 - K/p t^(p gamma) - B/q t^(q gamma)
    K = C^p c^((p - p gamma)/2),   B = C^q c^(q (1 - gamma)/2) ||h||_{p/(p-q)}

and phi(t) = t^(q gamma) (psi(t) - B/q).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .errors import ConvergenceError
from .functionals import KirchhoffParams, energy
from .grid import Field, Grid, _outside_mass_fraction, gaussian_field, grad_norm_sq, integrate, lp_norm_p, resample_separable
from .potentials import PotentialSpec, potential_norms, potential_on_points

T_MIN, T_MAX = 1e-6, 1e6


def gamma(p: float, dim: int) -> float:
    if not p > 2:
        raise ValueError(f"p must exceed 2, got {p}")
    if dim not in (1, 2, 3):
        raise ValueError(f"dim must be 1, 2 or 3, got {dim}")
    return dim * (p - 2.0) / (2.0 * p)


# ---------------------------------------------------------------------------
# Gagliardo-Nirenberg constant

@dataclass(frozen=True)
class GNResult:
    constant: float
    maximizer: Field = field(repr=False)
    ascent_iterations: int
    polish_iterations: int
    alpha: float
    beta: float
    el_residual: float


def _gn_parts(u: np.ndarray, grid: Grid, p: float):
    lu = np.real(np.fft.ifftn(grid.symbol() * np.fft.fftn(u)))
    h = grid.cell_volume
    return lu, float(np.sum(u * lu) * h), float(np.sum(np.abs(u) ** p) * h), float(np.sum(u * u) * h)


def _log_quotient(u: np.ndarray, grid: Grid, p: float, gam: float) -> float:
    _, g, pw, m = _gn_parts(u, grid, p)
    if not (g > 0 and pw > 0 and m > 0 and math.isfinite(pw)):
        return -math.inf
    return math.log(pw) / p - 0.5 * gam * math.log(g) - 0.5 * (1.0 - gam) * math.log(m)


def _ascend(u: np.ndarray, grid: Grid, p: float, gam: float, iters: int) -> tuple[np.ndarray, int]:
    """Preconditioned ascent on log W, renormalized to unit mass each step."""
    h = grid.cell_volume
    sym = grid.symbol()
    tau = 1.0
    val = _log_quotient(u, grid, p, gam)
    for it in range(iters):
        lu, g, pw, m = _gn_parts(u, grid, p)
        d = np.sign(u) * np.abs(u) ** (p - 1.0) / pw - gam * lu / g - (1.0 - gam) * u / m
        step = np.real(np.fft.ifftn(np.fft.fftn(d) / (gam * sym / g + (1.0 - gam) / m)))
        slope = float(np.sum(d * step) * h)
        if slope < 1e-15:
            return u, it
        for _ in range(60):
            trial = u + tau * step
            new = _log_quotient(trial, grid, p, gam)
            if new >= val + 1e-4 * tau * slope:
                break
            tau *= 0.5
        else:
            return u, it
        trial = trial / math.sqrt(float(np.sum(trial * trial) * h))
        # the torus admits constants, where W is unbounded: stay localized
        if _outside_mass_fraction(Field(grid, trial), 0.75 * grid.half_width) > 1e-8:
            return u, it
        u = trial
        val = new
        tau = min(2.0 * tau, 1e3)
    return u, iters


def _decay_length(grid: Grid) -> float:
    # balances the tail e^{-2L/l} against the spectral error e^{-pi^2 l/(2h)}
    return 2.0 / math.pi * math.sqrt(grid.half_width * grid.spacing)


def _polish(u: np.ndarray, grid: Grid, p: float, tol: float, max_iter: int) -> tuple[np.ndarray, int]:
    """Petviashvili fixed point for -Lap w + w / l^2 = |w|^(p-2) w."""
    shifted = grid.symbol() + _decay_length(grid) ** -2
    for it in range(1, max_iter + 1):
        nl = np.sign(u) * np.abs(u) ** (p - 1.0)
        lu = np.real(np.fft.ifftn(shifted * np.fft.fftn(u)))
        ratio = float(np.sum(u * lu) / np.sum(u * nl))
        new = ratio ** ((p - 1.0) / (p - 2.0)) * np.real(np.fft.ifftn(np.fft.fftn(nl) / shifted))
        change = float(np.max(np.abs(new - u)) / np.max(np.abs(new)))
        u = new
        if change < tol:
            return u, it
    raise ConvergenceError(f"G-N polish did not reach {tol:g} in {max_iter} steps", last=Field(grid, u))


@lru_cache(maxsize=16)
def gn_maximizer(dim: int, p: float, grid: Grid, *, ascent_iters: int = 40,
                 tol: float = 1e-13, max_iter: int = 5000) -> GNResult:
    """Maximize the Weinstein quotient on ``grid``.

    A bounded preconditioned ascent from a Gaussian finds the basin; the
    fixed-point polish then removes the slow drift along dilations.  On the
    periodic box W is unbounded (constants have zero gradient), so the result
    is the localized maximizer and the ascent stops if mass reaches the edge.
    """
    if grid.dim != dim:
        raise ValueError(f"grid dimension {grid.dim} does not match dim={dim}")
    if dim == 3 and p >= 6.0:
        raise ValueError(f"p must be below 6 in dimension 3, got {p}")
    gam = gamma(p, dim)
    start = gaussian_field(grid, 1.0, _decay_length(grid)).samples
    u, n_ascent = _ascend(start / math.sqrt(float(np.sum(start**2) * grid.cell_volume)), grid, p, gam, ascent_iters)
    u, n_polish = _polish(u, grid, p, tol, max_iter)
    w = Field(grid, u)
    lu, g, pw, m = _gn_parts(u, grid, p)
    alpha = (1.0 - gam) * g / (gam * m)
    beta = g / (gam * pw)
    res = lu + alpha * u - beta * np.sign(u) * np.abs(u) ** (p - 1.0)
    rel = math.sqrt(integrate(grid, res**2) / integrate(grid, lu**2))
    const = math.exp(_log_quotient(u, grid, p, gam))
    return GNResult(const, w, n_ascent, n_polish, alpha, beta, rel)


def gn_constant(dim: int, p: float, grid: Grid) -> float:
    """Best constant C in ||u||_p <= C ||grad u||^gamma ||u||^(1 - gamma) on ``grid``."""
    return gn_maximizer(dim, float(p), grid).constant


# ---------------------------------------------------------------------------
# phi, psi and thresholds

@dataclass(frozen=True)
class Coefficients:
    a: float
    p: float
    q: float
    gamma: float
    K: float
    B: float

    def phi(self, t):
        t = np.asarray(t, dtype=float)
        return (0.5 * self.a * t**2 - self.K / self.p * t ** (self.p * self.gamma)
                - self.B / self.q * t ** (self.q * self.gamma))

    def dphi(self, t):
        t = np.asarray(t, dtype=float)
        g = self.gamma
        return self.a * t - self.K * g * t ** (self.p * g - 1.0) - self.B * g * t ** (self.q * g - 1.0)

    def psi(self, t):
        t = np.asarray(t, dtype=float)
        qg = self.q * self.gamma
        return 0.5 * self.a * t ** (2.0 - qg) - self.K / self.p * t ** (self.p * self.gamma - qg)


def coefficients(params: KirchhoffParams, c_np: float, h_norm: float) -> Coefficients:
    g = params.gamma_p
    p, q, c = params.p, params.q, params.c
    K = c_np**p * c ** ((p - p * g) / 2.0)
    B = c_np**q * c ** (q * (1.0 - g) / 2.0) * h_norm
    return Coefficients(params.a, p, q, g, K, B)


def t_bar(params: KirchhoffParams, c_np: float) -> float:
    g, p, q, c, a = params.gamma_p, params.p, params.q, params.c, params.a
    base = a * p * (2.0 - q * g) / (2.0 * g * (p - q) * c_np**p * c ** ((p - p * g) / 2.0))
    return base ** (1.0 / (p * g - 2.0))


def psi_at_t_bar(params: KirchhoffParams, c_np: float) -> float:
    """Maximum value of psi, in closed form."""
    g, p, q, c, a = params.gamma_p, params.p, params.q, params.c, params.a
    pg, qg = p * g, q * g
    x = a * p * (2.0 - qg) / (2.0 * g * (p - q) * c_np**p)
    return (a * (pg - 2.0) / (2.0 * g * (p - q)) * x ** ((2.0 - qg) / (pg - 2.0))
            * c ** (-p * (1.0 - g) * (2.0 - qg) / (2.0 * (pg - 2.0))))


def threshold_mountain_pass_norm(params: KirchhoffParams, c_np: float) -> float:
    """Upper bound on ||h||_{p/(p-q)} that keeps phi positive somewhere."""
    g, p, q, c, a = params.gamma_p, params.p, params.q, params.c, params.a
    pg, qg = p * g, q * g
    x = a * p * (2.0 - qg) / (2.0 * g * (p - q) * c_np**p)
    return (a * q * (pg - 2.0) / (2.0 * c_np**q * g * (p - q)) * x ** ((2.0 - qg) / (pg - 2.0))
            * c ** (-(1.0 - g) * (p - q) / (pg - 2.0)))


def threshold_radial_norm(params: KirchhoffParams, m_c: float) -> float:
    """Upper bound on ||<grad h, x>||_{2/(2-q)} for the mountain-pass case."""
    p, q, n = params.p, params.q, params.dim
    return q * (2.0 * p - n * p + 2.0 * n) / (p - 2.0) * m_c * params.c ** (-q / 2.0)


def negative_norm_factor(params: KirchhoffParams, upsilon: float) -> float:
    p, q, g = params.p, params.q, params.gamma_p
    return min(1.0, 2.0 * p * (1.0 - g) / (2.0 * (p - q) + (p - 2.0) * upsilon))


def threshold_negative_norm(params: KirchhoffParams, m_c: float, upsilon: float) -> float:
    """Upper bound on ||hbar||_{2/(2-q)} for the linking case."""
    return negative_norm_factor(params, upsilon) * params.q * m_c * params.c ** (-params.q / 2.0)


def lambda_c_floor_mountain_pass(params: KirchhoffParams, level: float, radial_norm: float) -> float:
    """Lower bound on lambda * c at a mountain-pass solution of energy ``level``."""
    p, q, n, g = params.p, params.q, params.dim, params.gamma_p
    den = n * (p - 2.0) - 4.0
    return (4.0 * p * (1.0 - g) / den * level
            - (2.0 * p - 4.0) / (q * den) * radial_norm * params.c ** (q / 2.0))


def lambda_c_floor_linking(params: KirchhoffParams, m_c: float, hbar_norm: float, upsilon: float) -> float:
    """Lower bound on lambda * c at a linking solution (h <= 0)."""
    p, q, n, g = params.p, params.q, params.dim, params.gamma_p
    hc = hbar_norm * params.c ** (q / 2.0)
    return 2.0 / (n * (p - 2.0) - 4.0) * (
        2.0 * p * (1.0 - g) * m_c - 2.0 * (p - q) / q * hc - (p - 2.0) / q * upsilon * hc
    )


@dataclass(frozen=True)
class LandscapeProfile:
    status: str
    a: float
    p: float
    q: float
    gamma_p: float
    c_np: float
    h_norm: float
    K: float
    B: float
    t_bar: float
    psi_t_bar: float
    t1: float
    t2: float
    r1: float
    r2: float
    thresholds: dict

    @property
    def coeffs(self) -> Coefficients:
        return Coefficients(self.a, self.p, self.q, self.gamma_p, self.K, self.B)

    def phi(self, t):
        return self.coeffs.phi(t)

    def psi(self, t):
        return self.coeffs.psi(t)

    def to_dict(self) -> dict:
        return asdict(self)


def _sign_brackets(fn, lo: float, hi: float, n: int = 2000) -> list[tuple[float, float]]:
    ts = np.geomspace(lo, hi, n)
    vals = fn(ts)
    idx = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    return [(float(ts[i]), float(ts[i + 1])) for i in idx]


def _root(fn, bracket) -> float:
    return brentq(lambda t: float(fn(t)), *bracket, xtol=1e-300, rtol=1e-14, maxiter=500)


def phi_profile(params: KirchhoffParams, spec: PotentialSpec, grid: Grid, *,
                m_c: float | None = None, c_np: float | None = None) -> LandscapeProfile:
    if params.regime != "supercritical":
        raise ValueError(f"phi profile needs p > 2 + 8/N, got p={params.p} in dimension {params.dim}")
    if not spec.is_zero and spec.sign != "nonneg":
        raise ValueError("phi profile is defined for h >= 0")
    if c_np is None:
        c_np = gn_constant(params.dim, params.p, grid)
    norms = potential_norms(spec, params.q, params.p, grid)
    co = coefficients(params, c_np, norms.norm_p_over_pmq)
    tb, psib = t_bar(params, c_np), psi_at_t_bar(params, c_np)
    thresholds = {
        "cond_1_12": threshold_mountain_pass_norm(params, c_np),
        "cond_1_13": None if m_c is None else threshold_radial_norm(params, m_c),
        "cond_1_14": None if m_c is None else threshold_negative_norm(
            params, m_c, norms.upsilon if norms.upsilon is not None else 0.0),
    }
    nan = math.nan
    pg = params.p * co.gamma
    if co.B == 0.0:
        r2 = (params.a * params.p / (2.0 * co.K)) ** (1.0 / (pg - 2.0))
        t2 = (params.a / (co.K * co.gamma)) ** (1.0 / (pg - 2.0))
        status, t1, r1 = "ok", 0.0, 0.0
    elif psib <= co.B / params.q:
        status, t1, t2, r1, r2 = "no-positive-region", nan, nan, nan, nan
    else:
        status = "ok"
        roots = [_root(co.phi, br) for br in _sign_brackets(co.phi, T_MIN, T_MAX)]
        if len(roots) != 2:
            raise ConvergenceError(f"expected two roots of phi, found {len(roots)}")
        r1, r2 = roots
        t1 = _root(co.dphi, _sign_brackets(co.dphi, T_MIN, r1)[0])
        t2 = _root(co.dphi, _sign_brackets(co.dphi, r1, r2)[0])
    return LandscapeProfile(status, params.a, params.p, params.q, co.gamma, c_np, norms.norm_p_over_pmq,
                            co.K, co.B, tb, psib, t1, t2, r1, r2, thresholds)


def scan_profile(profile: LandscapeProfile, t_min: float = 1e-3, t_max: float | None = None,
                 n: int = 400) -> dict[str, np.ndarray]:
    """Columns t, phi, psi on a logarithmic grid."""
    if t_max is None:
        top = profile.r2 if math.isfinite(profile.r2) and profile.r2 > 0 else profile.t_bar
        t_max = 2.0 * top
    t = np.geomspace(t_min, t_max, n)
    return {"t": t, "phi": profile.phi(t), "psi": profile.psi(t)}


# ---------------------------------------------------------------------------
# fiber map

def _perturbation_on_fiber(u: Field, t: float, spec: PotentialSpec, q: float) -> float:
    """int h |t * u|^q without building the scaled field on the grid."""
    grid = u.grid
    n = grid.dim
    if t >= 0.5:
        # substitute y = t x: t^(qN/2 - N) int h(y/t) |u(y)|^q dy
        h, _ = potential_on_points(spec, [x / t for x in grid.coords()])
        return t ** (q * n / 2.0 - n) * integrate(grid, h * np.abs(u.samples) ** q)
    vals = resample_separable(u, [t * grid.axis] * n)
    h, _ = potential_on_points(spec, grid.coords())
    return t ** (q * n / 2.0) * integrate(grid, h * np.abs(vals) ** q)


def fiber_energy(u: Field, t: float, params: KirchhoffParams, spec: PotentialSpec) -> float:
    """I(t * u) from the scaling laws of each term."""
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    if t == 1.0:
        return energy(u, params, spec).total
    g = grad_norm_sq(u) * t * t
    out = 0.5 * params.a * g + 0.25 * params.b * g * g
    out -= t ** (params.p * params.gamma_p) * lp_norm_p(u, params.p) / params.p
    if not spec.is_zero:
        out -= _perturbation_on_fiber(u, t, spec, params.q) / params.q
    return out


def fiber_curve(u: Field, ts, params: KirchhoffParams, spec: PotentialSpec) -> np.ndarray:
    return np.array([fiber_energy(u, float(t), params, spec) for t in ts])


__all__ = [
    "GNResult", "Coefficients", "LandscapeProfile", "gamma", "gn_constant", "gn_maximizer",
    "coefficients", "t_bar", "psi_at_t_bar", "threshold_mountain_pass_norm", "threshold_radial_norm",
    "threshold_negative_norm", "negative_norm_factor", "lambda_c_floor_mountain_pass",
    "lambda_c_floor_linking", "phi_profile", "scan_profile", "fiber_energy", "fiber_curve",
]
