"""Truncated-box discretization of R^N and the real fields living on it.

The box [-L, L)^N is treated as periodic: derivatives are spectral, integrals
are trapezoidal (spectrally accurate for decaying periodic data).  All
operations are pure; a :class:`Field` never changes after construction.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.interpolate import RegularGridInterpolator

MAX_POINTS = 2**22
DEFAULT_SIZES = {1: (20.0, 1024), 2: (15.0, 256), 3: (10.0, 64)}


class ResolutionWarning(UserWarning):
    """Resampling lost mass at the box boundary or became ill-posed."""


@dataclass(frozen=True)
class Grid:
    dim: int
    half_width: float
    points_per_dim: int
    derivative: str = "spectral"
    interpolation: str = "spectral"

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.points_per_dim

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_dim,) * self.dim

    @property
    def size(self) -> int:
        return self.points_per_dim**self.dim

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    @property
    def axis(self) -> np.ndarray:
        return -self.half_width + self.spacing * np.arange(self.points_per_dim)

    def coords(self) -> list[np.ndarray]:
        """Broadcastable coordinate arrays, one per axis."""
        return _coords(self)

    def radius_sq(self) -> np.ndarray:
        return _radius_sq(self)

    def symbol(self) -> np.ndarray:
        """Fourier symbol of -Laplacian on this grid."""
        return _symbol(self)


def make_grid(
    dim: int,
    half_width: float,
    points_per_dim: int,
    *,
    derivative: str = "spectral",
    interpolation: str = "spectral",
    max_points: int = MAX_POINTS,
) -> Grid:
    if dim not in (1, 2, 3):
        raise ValueError(f"dim-out-of-range: dim={dim}, expected 1, 2 or 3")
    if not half_width > 0:
        raise ValueError(f"half_width must be positive, got {half_width}")
    if points_per_dim < 16 or points_per_dim % 2:
        raise ValueError(f"points_per_dim must be even and >= 16, got {points_per_dim}")
    if points_per_dim**dim > max_points:
        raise ValueError(
            f"memory budget exceeded: {points_per_dim}^{dim} points > {max_points}"
        )
    if derivative not in ("spectral", "fd2"):
        raise ValueError(f"unknown derivative operator {derivative!r}")
    if interpolation not in ("spectral", "linear"):
        raise ValueError(f"unknown interpolation {interpolation!r}")
    return Grid(dim, float(half_width), int(points_per_dim), derivative, interpolation)


def default_grid(dim: int, **kwargs) -> Grid:
    half_width, points = DEFAULT_SIZES[dim]
    return make_grid(dim, half_width, points, **kwargs)


@lru_cache(maxsize=32)
def _coords(grid: Grid) -> list[np.ndarray]:
    out = []
    for d in range(grid.dim):
        shape = [1] * grid.dim
        shape[d] = grid.points_per_dim
        out.append(grid.axis.reshape(shape))
    return out


@lru_cache(maxsize=32)
def _radius_sq(grid: Grid) -> np.ndarray:
    r2 = np.zeros(grid.shape)
    for x in _coords(grid):
        r2 = r2 + x**2
    return r2


@lru_cache(maxsize=32)
def _wavenumbers(grid: Grid) -> np.ndarray:
    return 2.0 * np.pi * np.fft.fftfreq(grid.points_per_dim, d=grid.spacing)


@lru_cache(maxsize=32)
def _symbol(grid: Grid) -> np.ndarray:
    k = _wavenumbers(grid)
    if grid.derivative == "spectral":
        k2 = k**2
    else:
        k2 = (2.0 / grid.spacing * np.sin(k * grid.spacing / 2.0)) ** 2
    sym = np.zeros(grid.shape)
    for d in range(grid.dim):
        shape = [1] * grid.dim
        shape[d] = grid.points_per_dim
        sym = sym + k2.reshape(shape)
    return sym


@dataclass(frozen=True, eq=False)
class Field:
    grid: Grid
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.array(self.samples, dtype=float).reshape(self.grid.shape)
        if not np.all(np.isfinite(arr)):
            raise ValueError("field samples must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    def with_samples(self, samples: np.ndarray) -> "Field":
        return Field(self.grid, samples)

    def __neg__(self) -> "Field":
        return Field(self.grid, -self.samples)

    def __mul__(self, k: float) -> "Field":
        return Field(self.grid, k * self.samples)

    __rmul__ = __mul__

    def __add__(self, other: "Field") -> "Field":
        return Field(self.grid, self.samples + other.samples)

    def __sub__(self, other: "Field") -> "Field":
        return Field(self.grid, self.samples - other.samples)

    def flat(self) -> np.ndarray:
        return self.samples.ravel()


def field_from_function(grid: Grid, fn) -> Field:
    """Sample ``fn(*coords)`` on the grid."""
    return Field(grid, np.broadcast_to(fn(*grid.coords()), grid.shape))


def integrate(grid: Grid, values: np.ndarray) -> float:
    return float(np.sum(values) * grid.cell_volume)


def inner(u: Field, v: Field) -> float:
    return integrate(u.grid, u.samples * v.samples)


def mass(u: Field) -> float:
    return integrate(u.grid, u.samples**2)


def neg_laplacian(grid: Grid, values: np.ndarray) -> np.ndarray:
    return np.real(np.fft.ifftn(grid.symbol() * np.fft.fftn(values)))


def grad_norm_sq(u: Field) -> float:
    # Parseval: sum_j u_j (-Lap u)_j h^N = (2L)^N / M^(2N) sum_k |k|^2 |U_k|^2
    grid = u.grid
    spec = np.fft.fftn(u.samples)
    total = np.sum(grid.symbol() * np.abs(spec) ** 2)
    return float(total * grid.cell_volume / grid.size)


def lp_norm_p(u: Field, p: float) -> float:
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    return integrate(u.grid, np.abs(u.samples) ** p)


def project_mass(u: Field, c: float) -> Field:
    if c <= 0:
        raise ValueError(f"mass c must be positive, got {c}")
    m = mass(u)
    if m <= 0:
        raise ValueError("zero-field: cannot project the zero field onto S_c")
    return Field(u.grid, np.sqrt(c / m) * u.samples)


def _spectral_eval_matrix(grid: Grid, points: np.ndarray) -> np.ndarray:
    # fiber scans reuse the same dilations across many fields
    return _cached_eval_matrix(grid, points.tobytes())


@lru_cache(maxsize=8)
def _cached_eval_matrix(grid: Grid, raw: bytes) -> np.ndarray:
    points = np.frombuffer(raw, dtype=float)
    k = _wavenumbers(grid)
    mat = np.exp(1j * np.outer(points + grid.half_width, k)) / grid.points_per_dim
    outside = np.abs(points) > grid.half_width
    mat[outside] = 0.0
    mat.setflags(write=False)
    return mat


def resample_separable(u: Field, axis_points: list[np.ndarray]) -> np.ndarray:
    """Evaluate the interpolant of ``u`` on the tensor grid ``axis_points``.

    Points outside the box evaluate to zero (the field is treated as a
    compactly supported function on R^N, not as a periodic one).
    """
    grid = u.grid
    if grid.interpolation == "linear":
        interp = RegularGridInterpolator(
            [grid.axis] * grid.dim, u.samples, bounds_error=False, fill_value=0.0
        )
        mesh = np.meshgrid(*axis_points, indexing="ij")
        return interp(np.stack(mesh, axis=-1))
    coeffs = np.fft.fftn(u.samples)
    for d, pts in enumerate(axis_points):
        mat = _spectral_eval_matrix(grid, np.asarray(pts, dtype=float))
        coeffs = np.moveaxis(np.tensordot(mat, coeffs, axes=([1], [d])), 0, d)
    return np.real(coeffs)


def _outside_mass_fraction(u: Field, bound: float) -> float:
    inside = np.ones(u.grid.shape, dtype=bool)
    for x in u.grid.coords():
        inside = inside & (np.abs(x) <= bound)
    total = np.sum(u.samples**2)
    if total == 0:
        return 0.0
    return float(np.sum(u.samples[~inside] ** 2) / total)


def scale_fiber(u: Field, t: float, *, clip_tol: float = 1e-10) -> Field:
    """Mass-preserving dilation x -> t^(N/2) u(t x)."""
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    grid = u.grid
    if t == 1.0:
        return u
    if t < grid.spacing / grid.half_width:
        warnings.warn(f"scale_fiber: t={t:g} below resolvable range", ResolutionWarning)
    if t < 1.0 and _outside_mass_fraction(u, t * grid.half_width) > clip_tol:
        warnings.warn(f"scale_fiber: t={t:g} pushes support out of the box", ResolutionWarning)
    pts = [t * grid.axis] * grid.dim
    return Field(grid, t ** (grid.dim / 2.0) * resample_separable(u, pts))


def translate(u: Field, y, *, clip_tol: float = 1e-10) -> Field:
    """x -> u(x - y)."""
    grid = u.grid
    y = np.broadcast_to(np.asarray(y, dtype=float), (grid.dim,))
    if not np.any(y):
        return u
    shift = float(np.max(np.abs(y)))
    if _outside_mass_fraction(u, grid.half_width - shift) > clip_tol:
        warnings.warn(f"translate: shift {shift:g} clips support at the boundary", ResolutionWarning)
    pts = [grid.axis - y[d] for d in range(grid.dim)]
    return Field(grid, resample_separable(u, pts))


def gaussian_field(grid: Grid, amplitude: float = 1.0, width: float = 1.0, center=None) -> Field:
    """amplitude * exp(-|x - center|^2 / (2 width^2))."""
    center = np.zeros(grid.dim) if center is None else np.asarray(center, dtype=float)
    r2 = sum((x - c) ** 2 for x, c in zip(grid.coords(), center))
    return Field(grid, np.broadcast_to(amplitude * np.exp(-r2 / (2 * width**2)), grid.shape))


def random_smooth_field(
    grid: Grid,
    rng: np.random.Generator,
    *,
    bumps: int = 3,
    center_radius: float = 2.0,
    widths: tuple[float, float] = (0.5, 1.2),
    positive: bool = False,
) -> Field:
    """Sum of a few random Gaussians, well inside the box."""
    samples = np.zeros(grid.shape)
    for _ in range(bumps):
        center = rng.uniform(-center_radius, center_radius, size=grid.dim)
        width = rng.uniform(*widths)
        amp = rng.uniform(0.3, 1.0)
        if not positive and rng.random() < 0.4:
            amp = -amp
        samples = samples + gaussian_field(grid, amp, width, center).samples
    return Field(grid, samples)
