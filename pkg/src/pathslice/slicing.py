"""Subdivisions, the composed operator E^(N)(Omega, t, s) and order studies."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .action import ActionExpansion, check_time_order
from .errors import ConfigurationError, DegenerateFitError, WindowError
from .grid import ConvergenceReport, WaveFunction, l2_distance
from .oio import DEFAULT_WINDOW, build_step
from .potential import PotentialModel
from .reference import ReferenceConfig, resolved_reference

DEFAULT_TOLERANCE = 0.3
# errors below this fraction of ||f|| are treated as rounding/discretisation floor
FLOOR = 1e-9
# the reference self-error must sit below this fraction of the smallest fitted error
REFERENCE_SHARE = 0.01


@dataclass(frozen=True, eq=False)
class Subdivision:
    times: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or t.size < 2:
            raise ConfigurationError("a subdivision needs at least two time points")
        if np.any(np.diff(t) <= 0):
            raise ConfigurationError("subdivision times must be strictly increasing")
        t.setflags(write=False)
        object.__setattr__(self, "times", t)

    @property
    def L(self) -> int:
        return self.times.size - 1

    @property
    def mesh(self) -> float:
        return float(np.max(np.diff(self.times)))

    @property
    def s(self) -> float:
        return float(self.times[0])

    @property
    def t(self) -> float:
        return float(self.times[-1])


def make_subdivision(s: float, t: float, L: int, scheme: str = "uniform",
                     seed: int = 0, jitter: float = 0.2) -> Subdivision:
    """Uniform or jittered subdivision of [s, t] into L slices."""
    check_time_order(t, s)
    if int(L) != L or L < 1:
        raise ConfigurationError(f"L must be a positive integer, got {L}")
    base = s + (t - s) * np.arange(L + 1) / L
    base[-1] = t
    if scheme == "uniform":
        return Subdivision(base)
    if scheme != "random":
        raise ConfigurationError(f"unknown subdivision scheme {scheme!r}")
    if not 0 <= jitter < 0.4:
        raise ConfigurationError(f"jitter must lie in [0, 0.4), got {jitter}")
    width = (t - s) / L
    while True:
        rng = np.random.default_rng(seed)
        pts = base.copy()
        pts[1:-1] += rng.uniform(-jitter, jitter, L - 1) * width
        pts = np.sort(pts)
        if np.all(np.diff(pts) > 0):
            return Subdivision(pts)
        seed += 1


class ExpansionCache:
    """One expansion per left endpoint for time-dependent V, a single one otherwise."""

    def __init__(self, model: PotentialModel, N: int, hbar: float = 1.0, **kwargs):
        self.model, self.N, self.hbar, self.kwargs = model, N, hbar, kwargs
        self._store = {}

    def __call__(self, s: float) -> ActionExpansion:
        key = float(s) if self.model.time_dependent else None
        if key not in self._store:
            if self.model.time_dependent:
                self._store.clear()
            self._store[key] = ActionExpansion(self.model, self.N, s=0.0 if key is None else key,
                                               hbar=self.hbar, **self.kwargs)
        return self._store[key]


def apply_time_sliced(model: PotentialModel, N: int, f: WaveFunction, omega: Subdivision,
                      hbar: float = 1.0, T: float = DEFAULT_WINDOW, cache: ExpansionCache | None = None,
                      method: str = "spectral") -> WaveFunction:
    """E^(N)(t, t_{L-1}) ... E^(N)(t_1, s) f."""
    times = omega.times
    widths = np.diff(times)
    for j, w in enumerate(widths):
        if w > T * hbar * (1.0 + 1e-12):
            raise WindowError(f"slice {j} [{times[j]}, {times[j + 1]}] has width {w} > T*hbar = {T * hbar}")
    cache = cache or ExpansionCache(model, N, hbar)
    steps = {}
    u = f
    warnings = []
    for j in range(omega.L):
        s_j, t_j = float(times[j]), float(times[j + 1])
        exp = cache(s_j)
        if model.time_dependent:
            # a fresh kernel per slice; nothing to reuse, so do not keep it
            u = build_step(exp, t_j, f.grid, T=T, method=method).apply(u)
        else:
            # time-independent V: the kernel only depends on the slice width
            key = round(t_j - s_j, 15)
            if key not in steps:
                steps[key] = build_step(exp, exp.s + (t_j - s_j), f.grid, T=T, method=method)
            u = steps[key].apply(u)
        warnings += [w for w in u.meta.get("warnings", []) if w not in warnings]
    return WaveFunction(f.grid, u.values, {"warnings": warnings} if warnings else {})


def _check_ladder(values, name):
    v = np.asarray(values, dtype=float)
    if v.size < 3:
        raise ConfigurationError(f"{name} needs at least 3 entries")
    return v


def _report(labels, meshes, errors, target, tolerance, ref_error, f_norm, **meta):
    floor = FLOOR * f_norm
    if min(errors) <= floor:
        raise DegenerateFitError(
            f"errors {['%.2e' % e for e in errors]} reach the floor {floor:.1e}: the scheme is exact here "
            f"up to discretisation; shrink t - s or use a potential with nonvanishing residual")
    return ConvergenceReport.from_data(labels, meshes, errors, target, tolerance,
                                       reference_self_error=ref_error, **meta)


def convergence_study(model: PotentialModel, N: int, f: WaveFunction, s: float, t: float, L_list,
                      hbar: float = 1.0, cfg: ReferenceConfig | None = None, T: float = DEFAULT_WINDOW,
                      tolerance: float = DEFAULT_TOLERANCE, scheme: str = "uniform", seed: int = 0,
                      method: str = "spectral") -> ConvergenceReport:
    """Errors of the composed parametrix on a ladder of subdivisions; target order N."""
    L_list = [int(L) for L in _check_ladder(L_list, "L_list")]
    if any(b <= a for a, b in zip(L_list[:-1], L_list[1:])):
        raise ConfigurationError("L_list must be increasing")
    check_time_order(t, s)
    if t - s > T * hbar * (1.0 + 1e-12):
        raise WindowError(f"t - s = {t - s} exceeds T*hbar = {T * hbar}")
    cfg = cfg or ReferenceConfig(hbar=hbar)
    cache = ExpansionCache(model, N, hbar)
    omegas = [make_subdivision(s, t, L, scheme, seed) for L in L_list]
    approx = [apply_time_sliced(model, N, f, om, hbar, T, cache, method) for om in omegas]
    return _compare(model, f, s, t, approx, [om.mesh for om in omegas], [f"L={L}" for L in L_list],
                    N, cfg, tolerance, kind="composed", N=N)


def single_step_study(model: PotentialModel, N: int, f: WaveFunction, s: float, dt_list,
                      hbar: float = 1.0, cfg: ReferenceConfig | None = None, T: float = DEFAULT_WINDOW,
                      tolerance: float = DEFAULT_TOLERANCE, method: str = "spectral") -> ConvergenceReport:
    """Errors of one parametrix step over a ladder of dt; target order N + 1."""
    dts = _check_ladder(dt_list, "dt_list")
    if np.any(np.diff(dts) >= 0):
        raise ConfigurationError("dt_list must be strictly decreasing")
    cfg = cfg or ReferenceConfig(hbar=hbar)
    cache = ExpansionCache(model, N, hbar)
    errors, ref_errors = [], []
    for dt in dts:
        if dt > T * hbar * (1.0 + 1e-12):
            raise WindowError(f"dt = {dt} exceeds T*hbar = {T * hbar}")
        approx = apply_time_sliced(model, N, f, Subdivision([s, s + dt]), hbar, T, cache, method)
        err, ref_err = _error_against_reference(model, f, s, s + dt, approx, cfg)
        errors.append(err)
        ref_errors.append(ref_err)
    return _report([f"dt={dt:g}" for dt in dts], dts, errors, N + 1, tolerance, max(ref_errors),
                   f.norm(), kind="single_step", N=N)


def _error_against_reference(model, f, s, t, approx, cfg):
    """L2 error of ``approx`` with the reference refined until its own error is negligible."""
    run = resolved_reference(model, f, s, t, cfg)
    err = l2_distance(approx, run.state)
    floor = FLOOR * f.norm()
    while err > floor and run.self_error > REFERENCE_SHARE * err:
        run = resolved_reference(model, f, s, t, run.cfg, budget=REFERENCE_SHARE * err / 2)
        err = l2_distance(approx, run.state)
    return err, run.self_error


def _compare(model, f, s, t, approx, meshes, labels, target, cfg, tolerance, **meta):
    run = resolved_reference(model, f, s, t, cfg)
    errors = [l2_distance(a, run.state) for a in approx]
    floor = FLOOR * f.norm()
    if min(errors) > floor and run.self_error > REFERENCE_SHARE * min(errors):
        run = resolved_reference(model, f, s, t, run.cfg, budget=REFERENCE_SHARE * min(errors) / 2)
        errors = [l2_distance(a, run.state) for a in approx]
    return _report(labels, meshes, errors, target, tolerance, run.self_error, f.norm(), **meta)
