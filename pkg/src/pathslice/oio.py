"""Free propagator and the short-time parametrix E^(N)(t, s) as dense kernels.

E^(N)(t, s) f(x) = (2 pi i (t-s) hbar)^(-1/2) int exp(i S^(N)(t, s, x, y) / hbar) f(y) dy

is applied as an oscillatory integral operator with the free chirp as phase
and exp(i R^(N) / hbar) as amplitude.  On the periodic grid the free chirp is
represented by the band-limited free propagator (the circulant matrix of the
spectral free step), which is what the sampled Fresnel kernel converges to
and which stays exact when the chirp is under-resolved.  The literal sampled
kernel is available as ``method="chirp"``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .action import ActionExpansion, TwoPointField, check_time_order
from .errors import ConfigurationError, ShapeError, WindowError
from .grid import Grid, WaveFunction, outside_mass

DEFAULT_WINDOW = 1.0

# packets with more mass than this outside |x| <= L/2 may wrap around
_SUPPORT_MASS = 1e-12


def fresnel_prefactor(dt: float, hbar: float) -> complex:
    """(2 pi i dt hbar)^(-1/2) on the forward branch e^(-i pi/4) (2 pi dt hbar)^(-1/2)."""
    return np.exp(-0.25j * np.pi) / np.sqrt(2.0 * np.pi * dt * hbar)


def free_multiplier(grid: Grid, dt: float, hbar: float) -> np.ndarray:
    """exp(-i hbar dt k^2 / 2) on the FFT frequency lattice (k = 2 pi xi)."""
    k = grid.angular_frequencies
    return np.exp(-0.5j * hbar * dt * k * k)


def free_propagate(f: WaveFunction, dt: float, hbar: float = 1.0) -> WaveFunction:
    """Exact free evolution of a band-limited periodic state over time ``dt``."""
    if not dt > 0:
        check_time_order(dt, 0.0)
    if not hbar > 0:
        raise ConfigurationError(f"hbar must be positive, got {hbar}")
    out = np.fft.ifft(np.fft.fft(f.values) * free_multiplier(f.grid, dt, hbar))
    return f.with_values(out)


def free_kernel_row(grid: Grid, dt: float, hbar: float) -> np.ndarray:
    """First column p of the circulant free step: (U_0 f)_i = sum_j p[(i-j) mod M] f_j."""
    e0 = np.zeros(grid.points)
    e0[0] = 1.0
    return np.fft.ifft(np.fft.fft(e0) * free_multiplier(grid, dt, hbar))


def check_window(dt: float, hbar: float, T: float) -> None:
    if dt > T * hbar * (1.0 + 1e-12):
        raise WindowError(f"t - s = {dt} exceeds the window T*hbar = {T * hbar}")


def resolution_warnings(grid: Grid, dt: float, hbar: float, f: WaveFunction | None = None) -> list:
    """Aliasing diagnostics of one step; empty when the step is well resolved."""
    out = []
    scale = np.sqrt(2.0 * np.pi * hbar * dt)
    if scale < 3.0 * grid.spacing:
        out.append(f"chirp scale sqrt(2 pi hbar dt) = {scale:.3g} is below 3h = {3 * grid.spacing:.3g}")
    if f is not None:
        mass = outside_mass(f, grid.half_width / 2)
        if mass > _SUPPORT_MASS:
            out.append(f"state has mass fraction {mass:.2e} outside |x| <= {grid.half_width / 2}")
    return out


@dataclass(frozen=True, eq=False)
class PropagatorStep:
    """Assembled kernel of E^(N)(t, s), quadrature weight h included."""

    expansion: ActionExpansion
    t: float
    s: float
    kernel: TwoPointField
    method: str = "spectral"
    meta: dict = field(default_factory=dict)

    @property
    def grid(self) -> Grid:
        return self.kernel.grid

    def apply(self, f: WaveFunction) -> WaveFunction:
        if f.grid != self.grid:
            raise ShapeError(f"grid mismatch: {f.grid} vs {self.grid}")
        K = self.kernel.values
        known = self.meta.get("warnings", [])
        fresh = resolution_warnings(self.grid, self.t - self.s, self.expansion.hbar, f)
        warnings = known + [w for w in fresh if w not in known]
        meta = {"warnings": warnings} if warnings else {}
        return f.with_values(K @ f.values, **meta)


def build_step(exp: ActionExpansion, t: float, grid: Grid, s: float | None = None,
               T: float = DEFAULT_WINDOW, method: str = "spectral") -> PropagatorStep:
    """Kernel of E^(N)(t, s) on ``grid``; ``s`` defaults to the expansion's endpoint."""
    s = exp.s if s is None else float(s)
    if abs(s - exp.s) > 1e-14 * max(1.0, abs(s)) and exp.model.time_dependent:
        raise ConfigurationError(f"expansion built at s={exp.s} used for a step from s={s}")
    dt = check_time_order(t, s)
    check_window(dt, exp.hbar, T)
    hbar = exp.hbar
    x = grid.x
    amp = np.exp(1j * _remainder(exp, dt, grid) / hbar)
    if method == "spectral":
        K = scipy.linalg.circulant(free_kernel_row(grid, dt, hbar)) * amp
    elif method == "chirp":
        alias = 2.0 * np.pi * hbar * dt / grid.spacing
        if alias <= grid.length:
            raise ConfigurationError(
                f"sampled chirp aliases: ghost shift 2 pi hbar dt / h = {alias:.3g} is below the "
                f"domain length {grid.length}; use method='spectral'")
        diff = x[:, None] - x[None, :]
        K = fresnel_prefactor(dt, hbar) * grid.spacing * np.exp(0.5j * diff * diff / (hbar * dt)) * amp
    else:
        raise ConfigurationError(f"unknown kernel method {method!r}")
    meta = {}
    warnings = resolution_warnings(grid, dt, hbar)
    if warnings:
        meta["warnings"] = warnings
    return PropagatorStep(exp, float(t), s, TwoPointField(grid, K), method, meta)


def _remainder(exp: ActionExpansion, dt: float, grid: Grid) -> np.ndarray:
    tab = exp.tables(grid)
    return sum(tab[(k, 0)].values * dt ** k for k in range(1, exp.N + 1))


def apply_short_time_propagator(exp: ActionExpansion, f: WaveFunction, t: float, s: float | None = None,
                                T: float = DEFAULT_WINDOW, method: str = "spectral") -> WaveFunction:
    """E^(N)(t, s) f by dense quadrature over the grid."""
    return build_step(exp, t, f.grid, s, T, method).apply(f)


def operator_norm(step: PropagatorStep) -> float:
    """Largest singular value of the discrete operator (for diagnostics)."""
    return float(scipy.linalg.svdvals(step.kernel.values)[0])
