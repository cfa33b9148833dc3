"""Potential models V(t, x) with closed-form mixed derivatives.

Each model carries a ``derivative_budget``: the mixed derivative
d_t^k d_x^alpha V may be requested only when 2k + alpha <= budget.  For the
smooth models the budget is a convention (their derivatives exist to all
orders); for :func:`make_low_regularity_potential` it is sharp.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigurationError, DerivativeBudgetError

DEFAULT_BUDGET = 8


def _cos_derivative(alpha: int, z):
    # d^alpha/dz^alpha cos(z) = cos(z + alpha*pi/2), reduced to exact signs
    r = alpha % 4
    if r == 0:
        return np.cos(z)
    if r == 1:
        return -np.sin(z)
    if r == 2:
        return -np.cos(z)
    return np.sin(z)


@dataclass(frozen=True)
class PotentialModel:
    derivative_budget: int = field(default=DEFAULT_BUDGET, kw_only=True)

    kind = "abstract"
    time_dependent = False

    def check_budget(self, k: int, alpha: int) -> None:
        if k < 0 or alpha < 0:
            raise ValueError("derivative orders must be nonnegative")
        if 2 * k + alpha > self.derivative_budget:
            raise DerivativeBudgetError(
                f"{self.kind}: d_t^{k} d_x^{alpha} V needs 2k+alpha = {2 * k + alpha} but "
                f"Assumption (A) grants only 2k+alpha <= {self.derivative_budget}"
            )

    def derivative(self, k: int, alpha: int, t: float, x):
        """Exact d_t^k d_x^alpha V(t, x), vectorised in ``x``."""
        self.check_budget(k, alpha)
        return self._derivative(k, alpha, t, np.asarray(x, dtype=float))

    def __call__(self, t: float, x):
        return self.derivative(0, 0, t, x)

    @property
    def bandwidth(self) -> float:
        """Largest angular frequency present in x (0 for polynomials)."""
        return 0.0

    def with_budget(self, budget: int) -> "PotentialModel":
        return replace(self, derivative_budget=int(budget))

    def _derivative(self, k, alpha, t, x):  # pragma: no cover - abstract
        raise NotImplementedError

    def describe(self) -> dict:
        d = {"kind": self.kind}
        for name, val in self.__dict__.items():
            if isinstance(val, PotentialModel):
                d[name] = val.describe()
            elif isinstance(val, np.ndarray):
                d[name] = val.tolist()
            else:
                d[name] = val
        return d


@dataclass(frozen=True)
class ZeroPotential(PotentialModel):
    kind = "zero"

    def _derivative(self, k, alpha, t, x):
        return np.zeros_like(x)


@dataclass(frozen=True)
class LinearPotential(PotentialModel):
    """V = a*x."""

    a: float = 1.0
    kind = "linear"

    def _derivative(self, k, alpha, t, x):
        if k > 0 or alpha > 1:
            return np.zeros_like(x)
        if alpha == 1:
            return np.full_like(x, self.a)
        return self.a * x


@dataclass(frozen=True)
class HarmonicPotential(PotentialModel):
    """V = kappa*x^2/2."""

    kappa: float = 1.0
    kind = "harmonic"

    def _derivative(self, k, alpha, t, x):
        if k > 0 or alpha > 2:
            return np.zeros_like(x)
        if alpha == 2:
            return np.full_like(x, self.kappa)
        if alpha == 1:
            return self.kappa * x
        return 0.5 * self.kappa * x * x


@dataclass(frozen=True)
class CosinePotential(PotentialModel):
    """V = a*cos(b*x)."""

    a: float = 1.0
    b: float = 1.0
    kind = "cosine"

    def _derivative(self, k, alpha, t, x):
        if k > 0:
            return np.zeros_like(x)
        return self.a * self.b ** alpha * _cos_derivative(alpha, self.b * x)

    @property
    def bandwidth(self) -> float:
        return abs(self.b)


@dataclass(frozen=True, eq=False)
class FourierSeriesPotential(PotentialModel):
    """V = sum_j a_j cos(b_j x), a finite cosine series."""

    coefficients: np.ndarray = field(default_factory=lambda: np.ones(1))
    frequencies: np.ndarray = field(default_factory=lambda: np.ones(1))
    kind = "fourier_series"

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.coefficients, dtype=float))
        b = np.atleast_1d(np.asarray(self.frequencies, dtype=float))
        if a.shape != b.shape or a.ndim != 1 or a.size == 0:
            raise ConfigurationError("coefficients and frequencies must be equal-length 1-D arrays")
        object.__setattr__(self, "coefficients", a)
        object.__setattr__(self, "frequencies", b)
        if not np.isfinite(self.series_weight(self.derivative_budget)):
            raise ConfigurationError("sum_j |a_j| b_j^m diverges on the truncated series")

    @property
    def count(self) -> int:
        return self.coefficients.size

    def series_weight(self, m: int) -> float:
        """sum_j |a_j| |b_j|^m, the sup bound of the m-th derivative."""
        return float(np.sum(np.abs(self.coefficients) * np.abs(self.frequencies) ** m))

    def _derivative(self, k, alpha, t, x):
        if k > 0:
            return np.zeros_like(x)
        out = np.zeros_like(x)
        for a, b in zip(self.coefficients, self.frequencies):
            out += a * b ** alpha * _cos_derivative(alpha, b * x)
        return out

    @property
    def bandwidth(self) -> float:
        return float(np.max(np.abs(self.frequencies)))

    def describe(self) -> dict:
        return {
            "kind": self.kind,
            "derivative_budget": self.derivative_budget,
            "coefficients": self.coefficients.tolist(),
            "frequencies": self.frequencies.tolist(),
        }


@dataclass(frozen=True, eq=False)
class TimeModulatedPotential(PotentialModel):
    """V(t, x) = envelope(t) * base(x) with a polynomial envelope.

    ``envelope`` holds polynomial coefficients in increasing degree; the
    default (1, 0, 1/2) is 1 + t^2/2.
    """

    base: PotentialModel = field(default_factory=CosinePotential)
    envelope: tuple = (1.0, 0.0, 0.5)
    kind = "time_modulated"
    time_dependent = True

    def __post_init__(self):
        if self.base.time_dependent:
            raise ConfigurationError("time_modulated needs a time-independent base")
        object.__setattr__(self, "envelope", tuple(float(c) for c in self.envelope))

    def envelope_derivative(self, k: int, t: float) -> float:
        p = np.polynomial.Polynomial(self.envelope).deriv(k)
        return float(p(t))

    def _derivative(self, k, alpha, t, x):
        return self.envelope_derivative(k, t) * self.base._derivative(0, alpha, t, x)

    @property
    def bandwidth(self) -> float:
        return self.base.bandwidth

    def describe(self) -> dict:
        return {
            "kind": self.kind,
            "derivative_budget": self.derivative_budget,
            "base": self.base.describe(),
            "envelope": list(self.envelope),
        }


def make_low_regularity_potential(N: int, J: int = 64) -> FourierSeriesPotential:
    """Cosine series with a_j = j^-(2N+2), b_j = j, j = 1..J and budget 2N.

    The untruncated series has sum a_j b_j^(2N) finite and sum a_j b_j^(2N+1)
    infinite, so the budget is sharp.
    """
    if N < 1 or J < 1:
        raise ConfigurationError("need N >= 1 and J >= 1")
    j = np.arange(1, J + 1, dtype=float)
    return FourierSeriesPotential(derivative_budget=2 * N, coefficients=j ** -(2 * N + 2), frequencies=j)


def tail_bound(N: int, J: int) -> float:
    """Upper bound 1/J on sum_{j>J} a_j b_j^(2N) = sum_{j>J} j^-2."""
    return 1.0 / J


def make_potential(kind: str, **params) -> PotentialModel:
    """Build a model from a kind name and keyword parameters."""
    kind = kind.strip().lower()
    budget = params.pop("budget", None)
    if kind == "zero":
        model = ZeroPotential()
    elif kind == "linear":
        model = LinearPotential(a=float(params.pop("a", 1.0)))
    elif kind == "harmonic":
        model = HarmonicPotential(kappa=float(params.pop("kappa", 1.0)))
    elif kind == "cosine":
        model = CosinePotential(a=float(params.pop("a", 1.0)), b=float(params.pop("b", 1.0)))
    elif kind == "fourier_series":
        model = FourierSeriesPotential(coefficients=params.pop("coefficients"),
                                       frequencies=params.pop("frequencies"))
    elif kind in ("low_regularity", "low-regularity"):
        model = make_low_regularity_potential(int(params.pop("N")), int(params.pop("J", 64)))
    elif kind == "time_modulated":
        base = params.pop("base")
        if not isinstance(base, PotentialModel):
            base = make_potential(**base)
        model = TimeModulatedPotential(base=base, envelope=tuple(params.pop("envelope", (1.0, 0.0, 0.5))))
    else:
        raise ConfigurationError(f"unknown potential kind {kind!r}")
    if params:
        raise ConfigurationError(f"unexpected parameters for {kind}: {sorted(params)}")
    if budget is not None:
        model = model.with_budget(int(budget))
    return model


def verify_assumption_A(model: PotentialModel, N: int, lattice=None, t: float = 0.0) -> dict:
    """Discrete M^{inf,1} norms of every d_t^k d_x^alpha V(t, .) with 2k+alpha <= 2N.

    The report is a finite-lattice witness on the periodic grid, not a proof
    of membership on the whole line.
    """
    from .timefreq import PhaseSpaceLattice, modulation_norm, stft
    from .grid import WaveFunction, make_grid

    if 2 * N > model.derivative_budget:
        raise DerivativeBudgetError(
            f"Assumption (A) with N={N} needs budget {2 * N}, model grants {model.derivative_budget}")
    if lattice is None:
        lattice = PhaseSpaceLattice.default(make_grid())
    grid = lattice.grid
    norms = {}
    for k in range(N + 1):
        for alpha in range(2 * N - 2 * k + 1):
            vals = model.derivative(k, alpha, t, grid.x)
            norms[(k, alpha)] = modulation_norm(stft(WaveFunction(grid, vals), lattice), math.inf, 1)
    finite = all(np.isfinite(v) for v in norms.values())
    return {"N": N, "t": t, "norms": norms, "finite": finite,
            "max_norm": max(norms.values())}
