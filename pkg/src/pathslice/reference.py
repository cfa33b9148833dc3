"""Strang-split spectral reference propagator U(t, s).

Each substep is exp(-i V dt/(2 hbar)) exp(-i hbar dt k^2/2) exp(-i V dt/(2 hbar))
with V sampled at the substep midpoint, so it is unitary to rounding and
second-order accurate.  Substep counts scale with t - s; the self-error of a
run is estimated by comparing n and 2n substeps (Richardson factor 1/3).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .action import check_time_order
from .errors import ConfigurationError, OracleResolutionError
from .grid import WaveFunction, l2_distance
from .oio import free_multiplier
from .potential import PotentialModel

DEFAULT_SUBSTEPS = 4096
MIN_SUBSTEPS = 256
MAX_SUBSTEPS = 2 ** 18


@dataclass(frozen=True)
class ReferenceConfig:
    """``substeps`` per unit time; the count for an interval is ceil(substeps*(t-s))."""

    substeps: int = DEFAULT_SUBSTEPS
    hbar: float = 1.0
    max_substeps: int = MAX_SUBSTEPS

    def __post_init__(self):
        if int(self.substeps) != self.substeps or self.substeps < MIN_SUBSTEPS:
            raise ConfigurationError(f"substeps must be an integer >= {MIN_SUBSTEPS}, got {self.substeps}")
        if not 0 < self.hbar <= 1:
            raise ConfigurationError(f"hbar must lie in (0, 1], got {self.hbar}")

    def count(self, s: float, t: float) -> int:
        return max(1, math.ceil(self.substeps * (t - s) - 1e-9))

    def doubled(self) -> "ReferenceConfig":
        return replace(self, substeps=2 * self.substeps)


def strang_propagate(model: PotentialModel, f: WaveFunction, s: float, t: float, n: int,
                     hbar: float = 1.0, callback=None) -> WaveFunction:
    """``n`` Strang substeps from s to t.  ``callback(j, values)`` sees every substep."""
    check_time_order(t, s)
    grid = f.grid
    x = grid.x
    dt = (t - s) / n
    kin = free_multiplier(grid, dt, hbar)
    u = np.array(f.values)
    if model.time_dependent:
        for j in range(n):
            half = np.exp(-0.5j * dt * model(s + (j + 0.5) * dt, x) / hbar)
            u = half * np.fft.ifft(kin * np.fft.fft(half * u))
            if callback is not None:
                callback(j, u)
    else:
        half = np.exp(-0.5j * dt * model(s, x) / hbar)
        full = half * half
        u = half * u
        for j in range(n):
            u = np.fft.ifft(kin * np.fft.fft(u))
            if callback is None:
                u = (full if j < n - 1 else half) * u
            else:
                callback(j, half * u)
                u = (full if j < n - 1 else half) * u
    return f.with_values(u)


def reference_propagate(model: PotentialModel, f: WaveFunction, s: float, t: float,
                        cfg: ReferenceConfig | None = None) -> WaveFunction:
    cfg = cfg or ReferenceConfig()
    return strang_propagate(model, f, s, t, cfg.count(s, t), cfg.hbar)


@dataclass
class ReferenceRun:
    state: WaveFunction
    self_error: float
    cfg: ReferenceConfig


def resolved_reference(model: PotentialModel, f: WaveFunction, s: float, t: float,
                       cfg: ReferenceConfig | None = None, budget: float = 1e-9) -> ReferenceRun:
    """Reference state with self-error estimate below ``budget``.

    Substeps are doubled until ||u_n - u_2n|| / 3 <= budget; the returned
    state is u_2n.  Raises OracleResolutionError past ``cfg.max_substeps``.
    """
    cfg = cfg or ReferenceConfig()
    coarse = reference_propagate(model, f, s, t, cfg)
    while True:
        fine_cfg = cfg.doubled()
        fine = reference_propagate(model, f, s, t, fine_cfg)
        err = l2_distance(coarse, fine) / 3.0
        if err <= budget:
            return ReferenceRun(fine, err, fine_cfg)
        if fine_cfg.substeps * 2 > cfg.max_substeps:
            raise OracleResolutionError(
                f"reference self-error {err:.2e} above budget {budget:.2e} at "
                f"{fine_cfg.substeps} substeps per unit time")
        cfg, coarse = fine_cfg, fine


def self_refinement_ratios(model: PotentialModel, f: WaveFunction, s: float, t: float,
                           counts=(256, 512, 1024), exact_count: int = 16384, hbar: float = 1.0) -> list:
    """Error ratios e(n)/e(2n) against a much finer run; about 4 for a second-order scheme."""
    exact = strang_propagate(model, f, s, t, exact_count, hbar)
    errs = [l2_distance(strang_propagate(model, f, s, t, n, hbar), exact) for n in counts]
    return [a / b for a, b in zip(errs[:-1], errs[1:])]
