"""Residual amplitude g_N of the parametrix and its (t - s)^N scaling.

With D = t - s,

    g_N = -1/2 sum_{k=N}^{2N} sum_{j+l=k, 1<=j,l<=N} d_x W_j d_x W_l D^k
          + (i hbar / 2) d_x^2 W_N D^N
          - D^N/(N-1)! int_0^1 (1 - tau)^(N-1) d_t^N V(s + tau D, x) dtau.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .action import ActionExpansion, TwoPointField, check_time_order, gauss_legendre01
from .errors import ConfigurationError, DegenerateFitError
from .grid import ConvergenceReport, Grid

FLOOR = 1e-13


def _taylor_remainder(exp: ActionExpansion, t: float, x) -> np.ndarray:
    N, s = exp.N, exp.s
    dt = t - s
    if not exp.model.time_dependent:
        exp.model.check_budget(N, 0)
        return np.zeros(np.shape(x))
    tau, w = gauss_legendre01(exp.nodes)
    acc = sum(wi * (1.0 - ti) ** (N - 1) * exp.model.derivative(N, 0, s + ti * dt, x) for ti, wi in zip(tau, w))
    return dt ** N / math.factorial(N - 1) * acc


def _assemble(exp: ActionExpansion, dt: float, grad: dict, lap_N, remainder) -> np.ndarray:
    N = exp.N
    out = 0.5j * exp.hbar * lap_N * dt ** N - remainder
    for k in range(N, 2 * N + 1):
        acc = 0.0
        for j in range(max(1, k - N), min(N, k - 1) + 1):
            acc = acc + grad[j] * grad[k - j]
        out = out - 0.5 * acc * dt ** k
    return out


def eval_g_N(exp: ActionExpansion, t: float, x, y, s: float | None = None):
    """g_N(hbar, t, s, x, y) at arbitrary points."""
    if s is not None and abs(s - exp.s) > 1e-14 * max(1.0, abs(s)):
        raise ConfigurationError(f"expansion is anchored at s={exp.s}, not {s}")
    dt = check_time_order(t, exp.s)
    x = np.asarray(x, dtype=float)
    W, _ = exp._evaluate_pairs(x, y)
    grad = {j: W[(j, 1)] for j in range(1, exp.N + 1)}
    out = _assemble(exp, dt, grad, W[(exp.N, 2)], _taylor_remainder(exp, t, np.broadcast_to(x, W[(1, 0)].shape)))
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class ResidualField:
    expansion: ActionExpansion
    t: float
    s: float
    field: TwoPointField

    @property
    def values(self) -> np.ndarray:
        return self.field.values

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))


def residual_field(exp: ActionExpansion, t: float, grid: Grid) -> ResidualField:
    """g_N on the product grid, from the cached tables."""
    dt = check_time_order(t, exp.s)
    tab = exp.tables(grid)
    grad = {j: tab[(j, 1)].values for j in range(1, exp.N + 1)}
    rem = _taylor_remainder(exp, t, grid.x)[:, None]
    vals = _assemble(exp, dt, grad, tab[(exp.N, 2)].values, rem)
    return ResidualField(exp, float(t), exp.s, TwoPointField(grid, np.broadcast_to(vals, (grid.points,) * 2).copy()))


def parametrix_norm_scan(model, N: int, s: float, dt_list, hbar: float = 1.0, grid: Grid | None = None,
                         norm: str = "sup", tolerance: float = 0.3, expansion: ActionExpansion | None = None):
    """Norms of g_N(s + dt, s) over ``dt_list`` and their log-log slope (target N).

    ``norm`` is ``"sup"`` (grid sup-norm) or ``"modulation"`` (discrete
    M^{inf,1} norm of the two-point field on a reduced 256^2 lattice).
    """
    from .grid import make_grid

    dts = np.asarray(dt_list, dtype=float)
    if dts.size < 3 or np.any(np.diff(dts) >= 0):
        raise ConfigurationError("dt_list needs at least 3 strictly decreasing entries")
    if norm not in ("sup", "modulation"):
        raise ConfigurationError(f"unknown norm {norm!r}")
    grid = grid or make_grid()
    if norm == "modulation" and grid.points > 256:
        grid = make_grid(grid.half_width, 256)
    exp = expansion or ActionExpansion(model, N, s=s, hbar=hbar, grid=grid)
    norms = []
    for dt in dts:
        g = residual_field(exp, s + dt, grid)
        if norm == "sup":
            norms.append(g.sup_norm())
        else:
            from .timefreq import two_point_modulation_norm
            norms.append(two_point_modulation_norm(g.field))
    norms = np.array(norms)
    if np.max(norms) <= FLOOR:
        raise DegenerateFitError(
            f"g_{N} vanishes to rounding (max norm {np.max(norms):.1e}); the parametrix is exact here")
    return ConvergenceReport.from_data([f"dt={d:g}" for d in dts], dts, norms, N, tolerance,
                                       kind="parametrix", norm=norm, N=N)
