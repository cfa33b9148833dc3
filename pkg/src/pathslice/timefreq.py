"""Discrete short-time Fourier transform and modulation-space norms.

Conventions follow

    V_g f(x, w) = int f(y) conj(g(y - x)) exp(-2 pi i y w) dy,

with positions on the periodic grid and frequencies on a uniform lattice
w_k = k dw, |w| < Xi.  Mixed norms take the inner L^p norm in x (weight h) and
the outer L^q norm in w (weight dw); (p, q) = (inf, 1) is the Sjostrand class.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, LatticeError, ShapeError, SingularityError, SupportError
from .grid import Grid, WaveFunction, make_grid

# relative mass tolerated beyond the part of the domain a dilation keeps
_SUPPORT_MASS = 1e-12


def gaussian_window(grid: Grid, scale: float = 1.0) -> WaveFunction:
    """L2-normalised 2^(1/4) s^(-1/2) exp(-pi x^2 / s^2), periodised on the grid."""
    if not scale > 0:
        raise ConfigurationError(f"window scale must be positive, got {scale}")
    x = _wrap(grid, grid.x)
    return WaveFunction(grid, 2 ** 0.25 / np.sqrt(scale) * np.exp(-np.pi * (x / scale) ** 2))


def _wrap(grid: Grid, z):
    L = grid.half_width
    return (np.asarray(z) + L) % (2 * L) - L


@dataclass(frozen=True, eq=False)
class PhaseSpaceLattice:
    """Positions = grid points; frequencies k*dw for k = -M_w/2 .. M_w/2 - 1."""

    grid: Grid
    freq_points: int
    freq_spacing: float
    window: WaveFunction

    def __post_init__(self):
        if self.window.grid != self.grid:
            raise ShapeError("window lives on a different grid")
        if self.freq_points < 2 or self.freq_points % 2:
            raise LatticeError(f"need an even number of frequency nodes, got {self.freq_points}")
        if not self.freq_spacing > 0:
            raise LatticeError("frequency spacing must be positive")

    @classmethod
    def default(cls, grid: Grid | None = None, freq_points: int | None = None, xi: float | None = None,
                window: WaveFunction | None = None, scale: float = 1.0) -> "PhaseSpaceLattice":
        """M_w = M and Xi = half the grid Nyquist frequency unless given."""
        grid = grid or make_grid()
        mw = grid.points if freq_points is None else int(freq_points)
        xi = 0.25 / grid.spacing if xi is None else float(xi)
        return cls(grid, mw, 2.0 * xi / mw, window if window is not None else gaussian_window(grid, scale))

    @property
    def xi(self) -> float:
        return 0.5 * self.freq_points * self.freq_spacing

    @property
    def frequencies(self) -> np.ndarray:
        return self.freq_spacing * np.arange(-self.freq_points // 2, self.freq_points // 2)

    @property
    def positions(self) -> np.ndarray:
        return self.grid.x

    def with_window(self, window: WaveFunction) -> "PhaseSpaceLattice":
        return PhaseSpaceLattice(self.grid, self.freq_points, self.freq_spacing, window)


@dataclass(frozen=True, eq=False)
class STFTData:
    """V_g f on the lattice, indexed [position, frequency]."""

    lattice: PhaseSpaceLattice
    values: np.ndarray

    def __post_init__(self):
        shape = (self.lattice.grid.points, self.lattice.freq_points)
        if self.values.shape != shape:
            raise ShapeError(f"expected STFT shape {shape}, got {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ShapeError("STFT has non-finite entries")


def _local_samples(lattice: PhaseSpaceLattice, positions=None) -> np.ndarray:
    """Index [n, j] of f(x_n + (j - M/2) h) for the periodic state, window offset j."""
    M = lattice.grid.points
    n = np.arange(M) if positions is None else np.asarray(positions)
    return (n[:, None] + np.arange(M)[None, :] - M // 2) % M


def _frequency_sum(a: np.ndarray, lattice: PhaseSpaceLattice, axis: int) -> np.ndarray:
    """sum_j a_j exp(-2 pi i (j - M/2) h w_k) along ``axis`` for the lattice frequencies."""
    grid = lattice.grid
    h, L = grid.spacing, grid.half_width
    w = lattice.frequencies
    P = 1.0 / (lattice.freq_spacing * h)
    Pi = int(round(P))
    if abs(P - Pi) < 1e-9 * P and Pi >= lattice.freq_points:
        k = np.arange(-lattice.freq_points // 2, lattice.freq_points // 2) % Pi
        out = np.take(np.fft.fft(a, n=Pi, axis=axis), k, axis=axis)
    else:
        E = np.exp(-2j * np.pi * np.outer(np.arange(grid.points) * h, w))
        out = np.moveaxis(np.tensordot(np.moveaxis(a, axis, -1), E, axes=1), -1, axis)
    shape = [1] * a.ndim
    shape[axis] = w.size
    # offset (j - M/2) h = -L + j h
    return out * np.exp(2j * np.pi * L * w).reshape(shape)


def stft(f: WaveFunction, lattice: PhaseSpaceLattice) -> STFTData:
    """V_g f of the periodic state on the lattice.

    Each row sums f(x_n + y) conj(g(y)) exp(-2 pi i (x_n + y) w) over window
    offsets y, by zero-padded FFT (direct DFT when 1/(dw h) is not integral).
    """
    grid = lattice.grid
    if f.grid != grid:
        raise ShapeError(f"state grid {f.grid} differs from lattice grid {grid}")
    gbar = np.conj(lattice.window.values)  # window sample j sits at offset (j - M/2) h
    prod = f.values[_local_samples(lattice)] * gbar[None, :]
    vals = grid.spacing * _frequency_sum(prod, lattice, axis=1)
    vals *= np.exp(-2j * np.pi * np.outer(grid.x, lattice.frequencies))
    return STFTData(lattice, vals)


def _lp(a: np.ndarray, p, weight: float, axis: int):
    if p == math.inf:
        return np.max(a, axis=axis)
    return (weight * np.sum(a ** p, axis=axis)) ** (1.0 / p)


def modulation_norm(data: STFTData, p=2, q=2) -> float:
    """Discrete M^{p,q} norm: inner L^p over positions, outer L^q over frequencies."""
    for e in (p, q):
        if e not in (1, 2, math.inf):
            raise ConfigurationError(f"exponents must be 1, 2 or inf, got {e}")
    a = np.abs(data.values)
    inner = _lp(a, p, data.lattice.grid.spacing, axis=0)
    return float(_lp(inner, q, data.lattice.freq_spacing, axis=0))


def _upsample2(f: np.ndarray) -> np.ndarray:
    """Band-limited values on the half-step grid (index j <-> -L + j h/2)."""
    M = f.size
    F = np.fft.fft(f)
    G = np.zeros(2 * M, dtype=complex)
    G[: M // 2] = F[: M // 2]
    G[-M // 2:] = F[-M // 2:]
    # split the Nyquist bin symmetrically
    G[M // 2] = 0.5 * F[M // 2]
    G[-M // 2] = 0.5 * F[M // 2]
    return 2.0 * np.fft.ifft(G)


def wigner_ambiguity_check(f: WaveFunction, g: WaveFunction, lattice: PhaseSpaceLattice | None = None,
                           samples: int = 24) -> dict:
    """Residuals of A(f,g) = e^{pi i x w} V_g f and W(f,g) = 2 e^{4 pi i x w} V_{Ig} f(2x, 2w).

    A and W are computed from their own integral definitions by direct
    quadrature (half-step samples by band-limited interpolation) at
    ``samples`` x ``samples`` lattice points whose doubled arguments lie on
    the lattice.
    """
    grid = f.grid
    if g.grid != grid:
        raise ShapeError("f and g must share a grid")
    lattice = (lattice or PhaseSpaceLattice.default(grid)).with_window(g)
    M, h, L = grid.points, grid.spacing, grid.half_width
    mw = lattice.freq_points
    # x_n with 2 x_n on the grid: M/4 <= n < 3M/4; w_k with 2k inside the lattice
    n_ok = np.arange(M // 4 + 1, 3 * M // 4)
    k_ok = np.arange(-mw // 4 + 1, mw // 4)
    if n_ok.size < 2 or k_ok.size < 2:
        raise LatticeError("lattice too coarse to hold the doubled arguments (2x, 2w)")
    n_sel = np.unique(n_ok[np.linspace(0, n_ok.size - 1, min(samples, n_ok.size)).round().astype(int)])
    k_sel = np.unique(k_ok[np.linspace(0, k_ok.size - 1, min(samples, k_ok.size)).round().astype(int)])
    x = grid.x[n_sel]
    w = lattice.freq_spacing * k_sel
    t = grid.x
    m = np.arange(M)
    E = h * np.exp(-2j * np.pi * np.outer(t, w))
    f2, g2 = _upsample2(f.values), np.conj(_upsample2(g.values))

    # ambiguity: int f(t + x/2) conj g(t - x/2) e^{-2 pi i t w} dt
    jf = (2 * m[None, :] + n_sel[:, None] - M // 2) % (2 * M)
    jg = (2 * m[None, :] - n_sel[:, None] + M // 2) % (2 * M)
    amb = (f2[jf] * g2[jg]) @ E
    # Wigner: int f(x + t/2) conj g(x - t/2) e^{-2 pi i t w} dt
    jf = (2 * n_sel[:, None] - M // 2 + m[None, :]) % (2 * M)
    jg = (2 * n_sel[:, None] + M // 2 - m[None, :]) % (2 * M)
    wig = (f2[jf] * g2[jg]) @ E

    V = stft(f, lattice).values
    k0 = mw // 2
    amb_ref = np.exp(1j * np.pi * np.outer(x, w)) * V[np.ix_(n_sel, k_sel + k0)]
    Ig = g.with_values(np.roll(g.values[::-1], 1))  # Ig(x_m) = g(-x_m) = g(x_{M-m})
    VI = stft(f, lattice.with_window(Ig)).values
    n2 = 2 * n_sel - M // 2
    wig_ref = 2.0 * np.exp(4j * np.pi * np.outer(x, w)) * VI[np.ix_(n2, 2 * k_sel + k0)]
    return {
        "ambiguity_residual": float(np.max(np.abs(amb - amb_ref))),
        "wigner_residual": float(np.max(np.abs(wig - wig_ref))),
        "points": int(n_sel.size * k_sel.size),
    }


def trig_interpolate(f: WaveFunction, z) -> np.ndarray:
    """Band-limited periodic interpolant of ``f`` evaluated at points ``z``."""
    grid = f.grid
    M = grid.points
    F = np.fft.fft(f.values) / M
    k = np.fft.fftfreq(M, d=1.0 / M)
    Fs = F
    nyq = M // 2
    # cosine split of the Nyquist mode keeps real data real off the grid
    theta = 2.0 * np.pi * (np.asarray(z, dtype=float).ravel() + grid.half_width) / grid.length
    out = np.exp(1j * np.outer(theta, k[k != -nyq])) @ Fs[k != -nyq]
    out += Fs[nyq] * np.cos(nyq * theta)
    return out.reshape(np.shape(z))


def dilate(f: WaveFunction, lam: float, normalized: bool = True) -> WaveFunction:
    """U_lam f = |lam|^(1/2) f(lam x) (normalized) or D_lam f = f(lam x)."""
    lam = float(lam)
    if lam == 0:
        raise SingularityError("dilation by 0")
    grid = f.grid
    x = grid.x
    L = grid.half_width
    if abs(lam) < 1:
        keep = abs(lam) * L
        w = np.abs(f.values) ** 2
        total = w.sum()
        if total > 0 and w[np.abs(x) >= keep].sum() / total > _SUPPORT_MASS:
            raise SupportError(f"dilation by {lam} pushes mass beyond |x| <= {L}: state is not supported "
                               f"inside |x| < {keep:.3g}")
    if lam == 1:
        vals = np.array(f.values)
    else:
        z = lam * x
        inside = (z >= -L) & (z < L)
        vals = np.zeros(grid.points, dtype=complex)
        vals[inside] = trig_interpolate(f, z[inside])
    if normalized:
        vals *= np.sqrt(abs(lam))
    return f.with_values(vals)


def dilation_constant(A, p=math.inf, q=1) -> float:
    """|det A|^-(1/p - 1/q + 1) det(I + A^T A)^(1/2)."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.shape[0] != A.shape[1]:
        raise ShapeError(f"A must be square, got {A.shape}")
    det = np.linalg.det(A)
    if abs(det) < 1e-14 * max(1.0, np.max(np.abs(A))) ** A.shape[0]:
        raise SingularityError("dilation matrix is singular")
    inv = lambda e: 0.0 if e == math.inf else 1.0 / e
    expo = -(inv(p) - inv(q) + 1.0)
    gram = np.linalg.det(np.eye(A.shape[0]) + A.T @ A)
    return float(abs(det) ** expo * math.sqrt(gram))


def frozen_amplitude_norm(exp, t: float, y0: float, lattice: PhaseSpaceLattice | None = None) -> float:
    """M^{inf,1} norm of x -> exp(i R^(N)(t, s, x, y0) / hbar) on the lattice grid."""
    from .action import check_time_order

    lattice = lattice or PhaseSpaceLattice.default()
    dt = check_time_order(t, exp.s)
    x = lattice.grid.x
    y = np.full_like(x, float(y0))
    R = sum(exp.W(k, 0, x, y) * dt ** k for k in range(1, exp.N + 1))
    amp = WaveFunction(lattice.grid, np.exp(1j * R / exp.hbar))
    return modulation_norm(stft(amp, lattice), math.inf, 1)


def two_point_modulation_norm(field, stride: int = 8, freq_points: int | None = 128) -> float:
    """Discrete M^{inf,1}(R^2) norm of a two-point field with a product Gaussian window.

    Window centres use every ``stride``-th grid point in each variable and
    frequencies |w| < Xi = Nyquist/2 per variable; the sup over centres is
    accumulated one x-centre at a time.
    """
    grid = field.grid
    h = grid.spacing
    lat = PhaseSpaceLattice.default(grid, freq_points)
    mw = lat.freq_points
    centres = np.arange(0, grid.points, stride)
    idx = _local_samples(lat, centres)
    gbar = np.conj(lat.window.values)
    F = field.values
    best = np.zeros((mw, mw))
    for row in idx:
        a = _frequency_sum(F[row] * gbar[:, None], lat, axis=0)  # [w1, y]
        b = _frequency_sum(a[:, idx] * gbar, lat, axis=2)  # [w1, y-centre, w2]
        np.maximum(best, np.max(np.abs(b), axis=1), out=best)
    return float(h * h * best.sum() * lat.freq_spacing ** 2)
