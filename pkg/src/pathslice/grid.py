"""Periodic grid, sampled wave functions, norms and log-log order fits."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DegenerateFitError, ShapeError

DEFAULT_HALF_WIDTH = 12.0
DEFAULT_POINTS = 1024

# mass threshold beyond which a packet is said to touch the boundary
_BOUNDARY_MASS = 1e-12


@dataclass(frozen=True)
class Grid:
    """Uniform periodic lattice on [-half_width, half_width)."""

    half_width: float
    points: int

    def __post_init__(self):
        if not self.half_width > 0:
            raise ConfigurationError(f"half_width must be positive, got {self.half_width}")
        m = int(self.points)
        if m != self.points or m < 8 or m & (m - 1):
            raise ConfigurationError(f"points must be a power of two >= 8, got {self.points}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.points

    h = spacing

    @property
    def x(self) -> np.ndarray:
        return -self.half_width + self.spacing * np.arange(self.points)

    @property
    def angular_frequencies(self) -> np.ndarray:
        """FFT-ordered wave numbers k = 2*pi*xi."""
        return 2.0 * np.pi * np.fft.fftfreq(self.points, d=self.spacing)

    @property
    def length(self) -> float:
        return 2.0 * self.half_width


def make_grid(half_width: float = DEFAULT_HALF_WIDTH, points: int = DEFAULT_POINTS) -> Grid:
    return Grid(float(half_width), points)


@dataclass(frozen=True, eq=False)
class WaveFunction:
    """Samples of a function on a :class:`Grid`.

    ``meta`` carries diagnostics such as boundary-support warnings; it never
    influences arithmetic.
    """

    grid: Grid
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.grid.points,):
            raise ShapeError(f"expected {self.grid.points} samples, got shape {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def norm(self) -> float:
        return float(np.sqrt(self.grid.spacing * np.sum(np.abs(self.values) ** 2)))

    def with_values(self, values, **meta) -> "WaveFunction":
        return WaveFunction(self.grid, values, {**self.meta, **meta} if meta else dict(self.meta))

    def __add__(self, other):
        _check_same_grid(self, other)
        return WaveFunction(self.grid, self.values + other.values)

    def __sub__(self, other):
        _check_same_grid(self, other)
        return WaveFunction(self.grid, self.values - other.values)

    def __mul__(self, c):
        return WaveFunction(self.grid, c * self.values)

    __rmul__ = __mul__

    def __neg__(self):
        return WaveFunction(self.grid, -self.values)


def _check_same_grid(f: WaveFunction, g: WaveFunction) -> None:
    if f.grid != g.grid:
        raise ShapeError(f"grid mismatch: {f.grid} vs {g.grid}")


def outside_mass(f: WaveFunction, radius: float) -> float:
    """Fraction of the squared L2 mass of ``f`` outside |x| <= radius."""
    w = np.abs(f.values) ** 2
    total = w.sum()
    if total == 0:
        return 0.0
    return float(w[np.abs(f.grid.x) > radius].sum() / total)


def gaussian_packet(grid: Grid, center: float = 0.0, momentum: float = 0.0,
                    width: float = 1.0, hbar: float = 1.0) -> WaveFunction:
    """Unit-norm Gaussian c*exp(-(x-center)^2/(2 width^2)) * exp(i momentum x / hbar)."""
    if not width > 0:
        raise ConfigurationError(f"width must be positive, got {width}")
    x = grid.x
    f = np.exp(-((x - center) ** 2) / (2.0 * width ** 2)) * np.exp(1j * momentum * x / hbar)
    f /= np.sqrt(grid.spacing * np.sum(np.abs(f) ** 2))
    meta = {}
    edge = grid.half_width - grid.spacing
    if abs(center) + 6.0 * width >= grid.half_width or outside_mass(WaveFunction(grid, f), edge) > _BOUNDARY_MASS:
        meta["support_warning"] = (
            f"packet (center={center}, width={width}) reaches the boundary of [-{grid.half_width}, {grid.half_width})"
        )
    return WaveFunction(grid, f, meta)


def random_bandlimited_state(grid: Grid, rng: np.random.Generator, max_frequency: float = 1.0,
                             envelope_width: float = 2.0) -> WaveFunction:
    """Unit-norm random state: random Fourier modes up to ``max_frequency``
    (cycles per unit length) under a Gaussian envelope centred at 0."""
    x = grid.x
    n = int(np.floor(max_frequency * grid.length))
    modes = np.arange(-n, n + 1)
    coef = rng.standard_normal(modes.size) + 1j * rng.standard_normal(modes.size)
    f = np.exp(2j * np.pi * np.outer(x, modes) / grid.length) @ coef
    f *= np.exp(-(x ** 2) / (2.0 * envelope_width ** 2))
    f /= np.sqrt(grid.spacing * np.sum(np.abs(f) ** 2))
    return WaveFunction(grid, f)


def l2_distance(f: WaveFunction, g: WaveFunction) -> float:
    _check_same_grid(f, g)
    return float(np.sqrt(f.grid.spacing * np.sum(np.abs(f.values - g.values) ** 2)))


def fit_order(meshes, errors) -> float:
    """Least-squares slope of log(errors) against log(meshes)."""
    m = np.asarray(meshes, dtype=float)
    e = np.asarray(errors, dtype=float)
    if m.shape != e.shape or m.ndim != 1:
        raise ShapeError("meshes and errors must be 1-D of equal length")
    if m.size < 3:
        raise DegenerateFitError(f"need at least 3 points for an order fit, got {m.size}")
    if np.any(np.diff(m) >= 0):
        raise ConfigurationError("meshes must be strictly decreasing")
    if np.any(~(e > 0)) or np.any(~np.isfinite(e)):
        raise DegenerateFitError("errors must be strictly positive and finite; raise the resolution")
    slope, _ = np.polyfit(np.log(m), np.log(e), 1)
    return float(slope)


@dataclass
class ConvergenceReport:
    labels: list
    meshes: list
    errors: list
    fitted_order: float
    target_order: float
    tolerance: float
    passed: bool
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_data(cls, labels, meshes, errors, target_order, tolerance, **meta):
        order = fit_order(meshes, errors)
        return cls(list(labels), [float(m) for m in meshes], [float(e) for e in errors],
                   order, float(target_order), float(tolerance),
                   bool(order >= target_order - tolerance), meta)

    def summary(self) -> dict:
        return {
            "fitted_order": self.fitted_order,
            "target_order": self.target_order,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }
