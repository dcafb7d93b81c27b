"""Seeded simulators for three bivariate heavy-tailed model classes.

* ``MMA``: two neighbouring rows of a max-moving-average random field driven
  by iid Fréchet innovations with diamond-shaped weights ``phi^(|s1|+|s2|)``.
* ``ArmaCopula``: ARMA(1,1) with Fréchet innovations as ``y``; ``x`` is
  standard normal, coupled to ``y`` through a Gaussian copula.
* ``GarchCopula``: GARCH(1,1) with Gaussian noise as ``y``; ``x`` standard
  normal, coupled through a Student-t copula.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Union

import numba
import numpy as np
from scipy import signal, stats

from .core import TimeSeriesPair, TmesError
from .rng import open_uniform, substream

__all__ = [
    "GaussianCopula",
    "StudentTCopula",
    "MMA",
    "ArmaCopula",
    "GarchCopula",
    "ModelSpec",
    "MemoryBudgetError",
    "frechet_from_uniform",
    "frechet_sample",
    "effective_radius",
    "mma_from_field",
    "simulate_mma_pair",
    "arma_filter",
    "simulate_arma_frechet",
    "garch_filter",
    "simulate_garch",
    "copula_couple",
    "simulate_pair",
    "spec_to_dict",
    "spec_from_dict",
]

# Largest MMA innovation field (number of float64 cells) we agree to allocate.
MAX_FIELD_CELLS = 50_000_000


class MemoryBudgetError(TmesError):
    pass


@dataclass(frozen=True)
class GaussianCopula:
    rho: float = 0.6

    def __post_init__(self):
        if not -1.0 <= self.rho <= 1.0:
            raise TmesError(f"copula correlation must lie in [-1, 1], got {self.rho}")


@dataclass(frozen=True)
class StudentTCopula:
    rho: float = 0.7
    df: float = 3.0

    def __post_init__(self):
        if not -1.0 <= self.rho <= 1.0:
            raise TmesError(f"copula correlation must lie in [-1, 1], got {self.rho}")
        if not self.df > 0:
            raise TmesError(f"degrees of freedom must be positive, got {self.df}")


Copula = Union[GaussianCopula, StudentTCopula]


@dataclass(frozen=True)
class MMA:
    """Max-moving-average field; ``L=None`` truncates where weights drop below 1e-6."""

    xi: float = 4.0
    phi: float = 0.8
    L: int | None = None

    def __post_init__(self):
        if not self.xi > 0:
            raise TmesError(f"tail index xi must be positive, got {self.xi}")
        if not 0.0 < self.phi < 1.0:
            raise TmesError(f"phi must lie in (0, 1), got {self.phi}")
        if self.L is not None and (int(self.L) != self.L or self.L < 0):
            raise TmesError(f"truncation radius L must be a non-negative integer, got {self.L}")


@dataclass(frozen=True)
class ArmaCopula:
    phi: float = 0.2
    theta_ma: float = 0.8
    xi: float = 6.0
    copula: GaussianCopula = field(default_factory=GaussianCopula)
    burn_in: int = 500

    def __post_init__(self):
        if not self.xi > 0:
            raise TmesError(f"tail index xi must be positive, got {self.xi}")
        if not abs(self.phi) < 1.0:
            raise TmesError(f"AR coefficient must satisfy |phi| < 1, got {self.phi}")
        if self.burn_in < 0:
            raise TmesError("burn_in must be non-negative")


@dataclass(frozen=True)
class GarchCopula:
    omega: float = 0.2
    alpha: float = 0.3
    beta: float = 0.3
    copula: StudentTCopula = field(default_factory=StudentTCopula)
    burn_in: int = 500

    def __post_init__(self):
        if not self.omega > 0 or self.alpha < 0 or self.beta < 0:
            raise TmesError("GARCH needs omega > 0 and alpha, beta >= 0")
        if self.alpha + self.beta >= 1.0:
            raise TmesError(
                f"GARCH stationarity requires alpha + beta < 1, got {self.alpha + self.beta}"
            )
        if self.burn_in < 0:
            raise TmesError("burn_in must be non-negative")

    @property
    def unconditional_variance(self) -> float:
        return self.omega / (1.0 - self.alpha - self.beta)


ModelSpec = Union[MMA, ArmaCopula, GarchCopula]

_MODEL_NAMES = {MMA: "mma", ArmaCopula: "arma", GarchCopula: "garch"}


def spec_to_dict(spec: ModelSpec) -> dict:
    d = asdict(spec)
    d["model"] = _MODEL_NAMES[type(spec)]
    return d


def spec_from_dict(d: dict) -> ModelSpec:
    d = dict(d)
    model = d.pop("model")
    if model == "mma":
        return MMA(**d)
    if model == "arma":
        return ArmaCopula(copula=GaussianCopula(**d.pop("copula", {})), **d)
    if model == "garch":
        return GarchCopula(copula=StudentTCopula(**d.pop("copula", {})), **d)
    raise TmesError(f"unknown model {model!r}")


# -- Fréchet ---------------------------------------------------------------

def frechet_from_uniform(u, xi: float):
    """Inverse CDF of the Fréchet law ``exp(-x^-xi)``."""
    return (-np.log(u)) ** (-1.0 / xi)


def frechet_sample(xi: float, rng: np.random.Generator, size=None):
    if not xi > 0:
        raise TmesError(f"tail index xi must be positive, got {xi}")
    return frechet_from_uniform(open_uniform(rng, size), xi)


# -- max-moving averages ---------------------------------------------------

def effective_radius(phi: float, tol: float = 1e-6) -> int:
    """Smallest radius whose boundary weight ``phi^L`` is below ``tol``."""
    return max(0, math.ceil(math.log(tol) / math.log(phi)))


def mma_from_field(Z: np.ndarray, phi: float, L: int) -> np.ndarray:
    """Rows 0 and 1 of the max-moving average over the innovation field ``Z``.

    ``Z`` holds rows ``-L..1+L`` and columns ``1-L..n+L``, so its shape is
    ``(2L + 2, n + 2L)``; the result has shape ``(2, n)``.
    """
    Z = np.asarray(Z, dtype=float)
    n = Z.shape[1] - 2 * L
    if Z.shape[0] != 2 * L + 2 or n < 1:
        raise TmesError(f"field shape {Z.shape} does not fit radius L={L}")
    out = np.zeros((2, n))
    for i1 in (0, 1):
        acc = out[i1]
        for s1 in range(-L, L + 1):
            row = Z[i1 - s1 + L]
            rem = L - abs(s1)
            for s2 in range(-rem, rem + 1):
                w = phi ** (abs(s1) + abs(s2))
                # column of t - s2 for t = 1..n sits at offset t - s2 - 1 + L
                start = L - s2
                np.maximum(acc, w * row[start:start + n], out=acc)
    return out


def simulate_mma_pair(spec: MMA, n: int, seed: int) -> TimeSeriesPair:
    """``(x_t, y_t) = (Z~_{0,t}, Z~_{1,t})`` for ``t = 1..n``."""
    L = effective_radius(spec.phi) if spec.L is None else int(spec.L)
    rows, cols = 2 * L + 2, n + 2 * L
    if rows * cols > MAX_FIELD_CELLS:
        raise MemoryBudgetError(
            f"MMA field of {rows}x{cols} cells exceeds the budget of {MAX_FIELD_CELLS}"
        )
    Z = frechet_sample(spec.xi, substream(seed, 0), size=(rows, cols))
    x, y = mma_from_field(Z, spec.phi, L)
    return TimeSeriesPair(x, y)


# -- ARMA(1,1) -------------------------------------------------------------

def arma_filter(z: np.ndarray, phi: float, theta_ma: float) -> np.ndarray:
    """``Y_t = phi Y_{t-1} + Z_t + theta Z_{t-1}`` started from a zero state."""
    return signal.lfilter([1.0, theta_ma], [1.0, -phi], np.asarray(z, dtype=float))


def simulate_arma_frechet(spec: ArmaCopula, n: int, seed: int) -> np.ndarray:
    z = frechet_sample(spec.xi, substream(seed, 0), size=spec.burn_in + n)
    return arma_filter(z, spec.phi, spec.theta_ma)[spec.burn_in:]


# -- GARCH(1,1) ------------------------------------------------------------

@numba.njit(cache=True)
def _garch_loop(z, omega, alpha, beta, sigma2_init):
    y = np.empty(z.size)
    s2 = np.empty(z.size)
    prev_s2 = sigma2_init
    prev_y = 0.0
    for t in range(z.size):
        if t > 0:
            prev_s2 = omega + alpha * prev_y * prev_y + beta * prev_s2
        s2[t] = prev_s2
        prev_y = math.sqrt(prev_s2) * z[t]
        y[t] = prev_y
    return y, s2


def garch_filter(z: np.ndarray, omega: float, alpha: float, beta: float):
    """GARCH(1,1) driven by ``z``; ``sigma_1^2`` starts at ``omega / (1 - alpha - beta)``.

    Returns ``(y, sigma2)``.
    """
    if alpha + beta >= 1.0:
        raise TmesError(f"GARCH stationarity requires alpha + beta < 1, got {alpha + beta}")
    z = np.ascontiguousarray(z, dtype=float)
    return _garch_loop(z, float(omega), float(alpha), float(beta), omega / (1.0 - alpha - beta))


def simulate_garch(spec: GarchCopula, n: int, seed: int) -> np.ndarray:
    z = substream(seed, 0).standard_normal(spec.burn_in + n)
    y, _ = garch_filter(z, spec.omega, spec.alpha, spec.beta)
    return y[spec.burn_in:]


# -- copula coupling -------------------------------------------------------

def copula_couple(y, copula: Copula, seed: int) -> np.ndarray:
    """Standard-normal ``x`` whose copula with ``y`` is ``copula``.

    ``y`` is mapped to uniforms by ranks, ``rank / (n + 1)``; the partner
    uniform is drawn from the copula's conditional law given that rank.
    """
    y = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y)):
        raise TmesError("y contains non-finite values")
    u = stats.rankdata(y) / (y.size + 1)
    v = open_uniform(substream(seed, 1), y.size)
    rho = copula.rho
    if isinstance(copula, GaussianCopula):
        return rho * stats.norm.ppf(u) + math.sqrt(1.0 - rho * rho) * stats.norm.ppf(v)
    if isinstance(copula, StudentTCopula):
        nu = copula.df
        t1 = stats.t.ppf(u, nu)
        # t2 | t1 is Student-t with nu+1 dof, location rho*t1 and this scale
        scale = np.sqrt((nu + t1 * t1) * (1.0 - rho * rho) / (nu + 1.0))
        t2 = rho * t1 + scale * stats.t.ppf(v, nu + 1.0)
        return stats.norm.ppf(stats.t.cdf(t2, nu))
    raise TmesError(f"unsupported copula {copula!r}")


def simulate_pair(spec: ModelSpec, n: int, seed: int) -> TimeSeriesPair:
    if int(n) != n or n < 2:
        raise TmesError(f"n must be an integer >= 2, got {n}")
    n = int(n)
    if isinstance(spec, MMA):
        return simulate_mma_pair(spec, n, seed)
    if isinstance(spec, ArmaCopula):
        y = simulate_arma_frechet(spec, n, seed)
    elif isinstance(spec, GarchCopula):
        y = simulate_garch(spec, n, seed)
    else:
        raise TmesError(f"unknown model spec {spec!r}")
    return TimeSeriesPair(copula_couple(y, spec.copula, seed), y)
