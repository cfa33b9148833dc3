"""Short-time action expansion.

The coefficients W_k of

    S_N(t, s, x, y) = |x - y|^2 / (2 (t - s)) + sum_{k=1}^N W_k(x, y) (t - s)^k

are the continuous solutions of the transport equations

    k W_k + (x - y) d_x W_k = F_k,
    F_k = -1/2 sum_{j+l=k-1, j,l>=1} d_x W_j d_x W_l
          - d_t^{k-1} V(s, x) / (k-1)!  +  (i hbar / 2) d_x^2 W_{k-1},

i.e. W_k(x, y) = int_0^1 tau^{k-1} F_k(tau x + (1-tau) y, y) dtau.  Taking
alpha x-derivatives gives the same equation with k -> k + alpha and
F_k -> d_x^alpha F_k, so every d_x^alpha W_k is obtained from closed-form
derivatives of V and lower-order solutions, never by differencing.

For fixed y the transport operator mu + (x - y) d/dx maps polynomials of
degree n to polynomials of degree n.  In Chebyshev coefficients (T basis in,
U basis out) it is upper triangular with bandwidth 2, so each line x -> W_k(x, y)
is solved exactly at the polynomial level by back substitution.  This stays
accurate for oscillatory potentials where a fixed tau-rule would need hundreds
of nodes per pair, and it has no trouble at the diagonal x = y.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft
from numpy.polynomial import legendre

from .errors import ConfigurationError, DerivativeBudgetError, ShapeError, TimeOrderError
from .grid import Grid
from .potential import PotentialModel

DEFAULT_NODES = 20
DEFAULT_MAX_ORDER = 4

# complex entries per working array when solving lines block by block
_BLOCK_ENTRIES = 2 ** 21


@lru_cache(maxsize=8)
def gauss_legendre01(nodes: int):
    """Gauss-Legendre nodes and weights on [0, 1]."""
    z, w = legendre.leggauss(nodes)
    return 0.5 * (z + 1.0), 0.5 * w


def chebyshev_size(bandwidth: float, half_width: float, N: int, minimum: int = 64) -> int:
    """Power-of-two number of Chebyshev points resolving the lines of W_1..W_N.

    Products d_x W_j d_x W_l first enter at N = 3 and double the frequency.
    """
    omega = bandwidth * half_width * (2 if N >= 3 else 1)
    need = omega + 12.0 * omega ** (1.0 / 3.0) + 64.0
    return max(minimum, 1 << int(np.ceil(np.log2(need))))


def _points(n: int) -> np.ndarray:
    return np.cos(np.pi * (np.arange(n) + 0.5) / n)


def _to_coefficients(values: np.ndarray) -> np.ndarray:
    c = scipy.fft.dct(values, type=2, axis=-1) / values.shape[-1]
    c[..., 0] *= 0.5
    return c


def _to_values(coef: np.ndarray) -> np.ndarray:
    c = coef.copy()
    c[..., 0] *= 2.0
    return 0.5 * scipy.fft.dct(c, type=3, axis=-1)


def _chebyshev_matrix(t: np.ndarray, n: int) -> np.ndarray:
    return np.cos(np.outer(np.arccos(np.clip(t, -1.0, 1.0)), np.arange(n)))


def solve_transport(coef: np.ndarray, ty, mu) -> np.ndarray:
    """Chebyshev coefficients of the polynomial G with mu*G + (t - ty) G' = f.

    ``coef`` holds the T-coefficients of f along the last axis; ``ty`` and
    ``mu`` broadcast against the leading axes.  The U-basis row p reads

        (mu s_p + p/2) c_p - ty (p+1) c_{p+1} + (p + 2 - mu)/2 c_{p+2}
            = s_p a_p - a_{p+2}/2,        s_0 = 1, s_p = 1/2,

    and is solved from the top degree down.
    """
    n = coef.shape[-1]
    lead = coef.shape[:-1]
    ty = np.broadcast_to(np.asarray(ty, dtype=float), lead)
    mu = np.broadcast_to(np.asarray(mu, dtype=float), lead)
    s = np.full(n, 0.5)
    s[0] = 1.0
    shifted = np.zeros_like(coef)
    shifted[..., :-2] = coef[..., 2:]
    rhs = s * coef - 0.5 * shifted
    c = np.zeros(lead + (n + 2,), dtype=np.result_type(coef, float))
    for p in range(n - 1, -1, -1):
        c[..., p] = (rhs[..., p] + ty * (p + 1) * c[..., p + 1]
                     - 0.5 * (p + 2 - mu) * c[..., p + 2]) / (mu * s[p] + 0.5 * p)
    return c[..., :n]


@dataclass(frozen=True, eq=False)
class TwoPointField:
    """Complex samples of a function of (x, y) on the product grid, indexed [i, j] = (x_i, y_j)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        m = self.grid.points
        if self.values.shape != (m, m):
            raise ShapeError(f"expected ({m}, {m}) samples, got {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ShapeError("two-point field has non-finite entries")


class ActionExpansion:
    """The family W_1..W_N for a potential, left endpoint ``s`` and ``hbar``.

    Passing ``grid`` assembles the (x, y) tables of every d_x^a W_k with
    a <= 2(N-k+1) at construction; otherwise they are built on first use.
    Off-grid values are recomputed by solving the lines through the requested
    y values (no interpolation of the tables).

    ``nodes`` is the Gauss-Legendre rule used for time integrals (the Taylor
    remainder of the parametrix amplitude).
    """

    def __init__(self, model: PotentialModel, N: int, s: float = 0.0, hbar: float = 1.0,
                 nodes: int = DEFAULT_NODES, max_order: int = DEFAULT_MAX_ORDER,
                 grid: Grid | None = None, chebyshev_points: int | None = None):
        if not 1 <= N <= max_order:
            raise ConfigurationError(f"N must lie in 1..{max_order}, got {N}")
        if not 0 < hbar <= 1:
            raise ConfigurationError(f"hbar must lie in (0, 1], got {hbar}")
        if nodes < 2:
            raise ConfigurationError("need at least 2 quadrature nodes")
        if 2 * N > model.derivative_budget:
            raise DerivativeBudgetError(
                f"order N={N} needs derivatives with 2k+alpha <= {2 * N}; Assumption (A) grants "
                f"{model.derivative_budget} for this potential")
        self.model = model
        self.N = int(N)
        self.s = float(s)
        self.hbar = float(hbar)
        self.nodes = int(nodes)
        self.chebyshev_points = chebyshev_points
        # interval of the Chebyshev lines; widened on demand for far points
        self.half_width = float(grid.half_width) if grid is not None else 1.0
        self._tables: dict[Grid, dict] = {}
        if grid is not None:
            self.tables(grid)

    def max_alpha(self, k: int) -> int:
        return 2 * (self.N - k + 1)

    def _check(self, k: int, alpha: int) -> None:
        if not 1 <= k <= self.N:
            raise IndexError(f"W_{k} requested from an expansion of order N={self.N}")
        if not 0 <= alpha <= self.max_alpha(k):
            raise DerivativeBudgetError(
                f"d_x^{alpha} W_{k} exceeds the budget |alpha| <= 2(N-k+1) = {self.max_alpha(k)}")

    def _keys(self):
        return [(k, a) for k in range(1, self.N + 1) for a in range(self.max_alpha(k) + 1)]

    def _size(self, half_width: float) -> int:
        if self.chebyshev_points:
            return int(self.chebyshev_points)
        return chebyshev_size(self.model.bandwidth, half_width, self.N)

    # -- core recursion ---------------------------------------------------

    def _solve_lines(self, y: np.ndarray, half_width: float, n: int) -> dict:
        """T-coefficients on [-half_width, half_width] of x -> d_x^a W_k(x, y_j)."""
        r = half_width * _points(n)
        ty = y / half_width
        model, s, hb = self.model, self.s, self.hbar
        vcache = {}

        def v(kt, a):
            if (kt, a) not in vcache:
                vcache[(kt, a)] = model.derivative(kt, a, s, r) / math.factorial(kt)
            return vcache[(kt, a)]

        at_points = {}
        coefs = {}
        for k in range(1, self.N + 1):
            alphas = range(self.max_alpha(k) + 1)
            F = np.empty((len(alphas), y.size, n), dtype=complex)
            for a in alphas:
                Fa = np.broadcast_to(-v(k - 1, a), (y.size, n)).astype(complex)
                for j in range(1, k - 1):
                    ell = k - 1 - j
                    for m in range(a + 1):
                        Fa -= 0.5 * math.comb(a, m) * at_points[(j, 1 + m)] * at_points[(ell, 1 + a - m)]
                if k >= 2:
                    Fa += 0.5j * hb * at_points[(k - 1, a + 2)]
                F[a] = Fa
            mu = (k + np.arange(len(alphas), dtype=float))[:, None, None]
            c = solve_transport(_to_coefficients(F), ty, mu[..., 0])
            for a in alphas:
                coefs[(k, a)] = c[a]
                if k < self.N:
                    at_points[(k, a)] = _to_values(c[a])
        return coefs

    def _end_F(self, W: dict, x) -> dict:
        """F_k at the segment end from the W values there."""
        out = {}
        for k in range(1, self.N + 1):
            F = -self.model.derivative(k - 1, 0, self.s, x) / math.factorial(k - 1) + 0j
            for j in range(1, k - 1):
                F = F - 0.5 * W[(j, 1)] * W[(k - 1 - j, 1)]
            if k >= 2:
                F = F + 0.5j * self.hbar * W[(k - 1, 2)]
            out[k] = F
        return out

    def _evaluate_pairs(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        shape = x.shape
        xf, yf = x.ravel(), y.ravel()
        reach = max(float(np.max(np.abs(xf), initial=0.0)), float(np.max(np.abs(yf), initial=0.0)))
        half = self.half_width if reach <= self.half_width else float(np.ceil(reach))
        n = self._size(half)
        yu, inv = np.unique(yf, return_inverse=True)
        coefs = self._solve_lines(yu, half, n)
        T = _chebyshev_matrix(xf / half, n)
        W = {key: np.einsum("pn,pn->p", T, c[inv]).reshape(shape) for key, c in coefs.items()}
        F = self._end_F(W, x)
        return W, F

    # -- public access ----------------------------------------------------

    def W(self, k: int, alpha: int, x, y):
        """d_x^alpha W_k at arbitrary points."""
        self._check(k, alpha)
        W, _ = self._evaluate_pairs(x, y)
        out = W[(k, alpha)]
        return out[()] if out.ndim == 0 else out

    def F(self, k: int, x, y):
        """Transport right-hand side F_k at arbitrary points."""
        self._check(k, 0)
        _, F = self._evaluate_pairs(x, y)
        out = F[k]
        return out[()] if out.ndim == 0 else out

    def tables(self, grid: Grid) -> dict:
        """{(k, a): TwoPointField of d_x^a W_k, ('F', k): TwoPointField of F_k} on ``grid``."""
        if grid in self._tables:
            return self._tables[grid]
        x = grid.x
        m = grid.points
        half = max(grid.half_width, self.half_width)
        self.half_width = half
        n = self._size(half)
        T = _chebyshev_matrix(x / half, n)
        keys = self._keys()
        out = {key: np.empty((m, m), dtype=complex) for key in keys}
        block = max(1, _BLOCK_ENTRIES // (n * len(keys)))
        for j0 in range(0, m, block):
            coefs = self._solve_lines(x[j0:j0 + block], half, n)
            for key in keys:
                c = coefs[key]
                # contiguous real operands keep the product on BLAS
                re = T @ np.ascontiguousarray(c.real.T)
                im = T @ np.ascontiguousarray(c.imag.T)
                out[key][:, j0:j0 + block] = re + 1j * im
        xx = np.broadcast_to(x[:, None], (m, m))
        F = self._end_F(out, xx)
        tab = {key: TwoPointField(grid, v) for key, v in out.items()}
        tab.update({("F", k): TwoPointField(grid, v) for k, v in F.items()})
        tab["chebyshev_points"] = n
        self._tables[grid] = tab
        return tab

    def table(self, grid: Grid, k: int, alpha: int = 0) -> np.ndarray:
        self._check(k, alpha)
        return self.tables(grid)[(k, alpha)].values

    def remainder(self, t: float, grid: Grid) -> np.ndarray:
        """R_N(t, s, x_i, y_j) = sum_k W_k (t - s)^k on the product grid."""
        dt = check_time_order(t, self.s)
        return sum(self.table(grid, k) * dt ** k for k in range(1, self.N + 1))

    def describe(self) -> dict:
        return {"potential": self.model.describe(), "N": self.N, "s": self.s,
                "hbar": self.hbar, "nodes": self.nodes}


def check_time_order(t: float, s: float) -> float:
    dt = float(t) - float(s)
    if not dt > 0:
        raise TimeOrderError(f"need t > s, got t={t}, s={s}")
    return dt


def eval_W_derivative(exp: ActionExpansion, k: int, alpha: int, x, y):
    return exp.W(k, alpha, x, y)


def eval_S_N(exp: ActionExpansion, t: float, x, y):
    """Order-N approximate action S_N(t, s, x, y)."""
    dt = check_time_order(t, exp.s)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    W, _ = exp._evaluate_pairs(x, y)
    out = (x - y) ** 2 / (2.0 * dt) + sum(W[(k, 0)] * dt ** k for k in range(1, exp.N + 1))
    return out[()] if np.ndim(out) == 0 else out


def transport_residual(exp: ActionExpansion, k: int, grid: Grid) -> float:
    """max |k W_k + (x - y) d_x W_k - F_k| over grid points with |x|, |y| <= half_width/2."""
    exp._check(k, 0)
    tab = exp.tables(grid)
    x = grid.x
    inner = np.abs(x) <= grid.half_width / 2
    diff = x[:, None] - x[None, :]
    res = k * tab[(k, 0)].values + diff * tab[(k, 1)].values - tab[("F", k)].values
    return float(np.max(np.abs(res[np.ix_(inner, inner)])))
