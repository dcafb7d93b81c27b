"""Independent ground truth for the estimators.

Closed-form and numerically integrated values for the max-moving-average
model, the closed-form ARMA(1,1) extremogram, the copula decomposition of
the TMES, pooled Monte Carlo estimates of ``delta(0)``, and a brute-force
TMES evaluator that shares no code with :mod:`tmes.core`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal, Optional

import numpy as np

from .core import LagOutOfRangeError, TimeSeriesPair, ThresholdSpec, TmesError, select_threshold
from .models import ModelSpec, simulate_pair, spec_to_dict
from .rng import derive_seed

__all__ = [
    "OracleResult",
    "IntegrationError",
    "InsufficientSampleError",
    "mma_marginal_constant",
    "mma_marginal_cdf",
    "mma_marginal_mean",
    "mma_quantile",
    "lattice_radius",
    "mma_joint_cdf",
    "mma_tmes_oracle",
    "arma_extremogram_closed_form",
    "copula_tmes_from_extremogram",
    "monte_carlo_delta0",
    "brute_force_tmes",
]

Method = Literal["closed_form", "numeric_integral", "monte_carlo", "brute_force"]


class IntegrationError(TmesError):
    pass


class InsufficientSampleError(TmesError):
    pass


@dataclass
class OracleResult:
    value: float
    method: Method
    error_estimate: Optional[float] = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method == "monte_carlo" and not (self.error_estimate and self.error_estimate > 0):
            raise TmesError("a Monte Carlo result needs a positive error estimate")

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "method": self.method,
            "error_estimate": self.error_estimate,
            "params": self.params,
        }


# -- max-moving averages ---------------------------------------------------

def _check_mma(xi: float, phi: float) -> None:
    if not xi > 0:
        raise TmesError(f"tail index xi must be positive, got {xi}")
    if not 0.0 <= phi < 1.0:
        raise TmesError(f"phi must lie in [0, 1), got {phi}")


def mma_marginal_constant(xi: float, phi: float) -> float:
    """``1 + sum_{j>0} 4 j phi^(xi j)``, summed as ``1 + 4 q / (1 - q)^2``."""
    _check_mma(xi, phi)
    q = phi**xi
    return 1.0 + 4.0 * q / (1.0 - q) ** 2


def mma_marginal_cdf(x, xi: float, phi: float):
    """``P(X <= x) = exp(-c x^-xi)``; zero for ``x <= 0``."""
    c = mma_marginal_constant(xi, phi)
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.where(x > 0, np.exp(-c * np.where(x > 0, x, 1.0) ** -xi), 0.0)
    return float(out) if out.ndim == 0 else out


def mma_marginal_mean(xi: float, phi: float) -> float:
    """Mean of the marginal, a Fréchet law with scale ``c^(1/xi)``; needs ``xi > 1``."""
    if not xi > 1:
        raise TmesError("the marginal mean is infinite unless xi > 1")
    return mma_marginal_constant(xi, phi) ** (1.0 / xi) * math.gamma(1.0 - 1.0 / xi)


def mma_quantile(p: float, xi: float, phi: float) -> float:
    """Inverse of :func:`mma_marginal_cdf` at probability ``p``."""
    if not 0.0 < p < 1.0:
        raise TmesError(f"probability must lie in (0, 1), got {p}")
    return (mma_marginal_constant(xi, phi) / -math.log(p)) ** (1.0 / xi)


def lattice_radius(xi: float, phi: float) -> int:
    """Radius beyond which lattice rates ``phi^(xi d)`` fall below 1e-10."""
    _check_mma(xi, phi)
    if phi == 0.0:
        return 0
    return math.ceil(10.0 * math.log(10.0) / (xi * math.log(1.0 / phi)))


def _lattice(h: int, trunc: int):
    """Distances of every lattice point to the ``X_t`` and ``Y_{t-h}`` centres.

    The box ``i1 in [-trunc, trunc+1]``, ``i2 in [-trunc-h, trunc]`` contains
    both diamonds of radius ``trunc``.
    """
    i1 = np.arange(-trunc, trunc + 2)[:, None]
    i2 = np.arange(-trunc - h, trunc + 1)[None, :]
    dx = np.abs(i1) + np.abs(i2)
    dy = np.abs(i1 - 1) + np.abs(i2 + h)
    return dx.ravel(), dy.ravel()


def mma_joint_cdf(x, y, h: int, xi: float, phi: float, trunc: Optional[int] = None) -> float:
    """``P(X_t <= x, Y_{t-h} <= y)`` by summing lattice rates.

    ``exp(-sum max(x^-xi phi^(xi dX), y^-xi phi^(xi dY)))`` where ``dX`` and
    ``dY`` are L1 distances to the two centres. ``y = inf`` gives the
    marginal of ``X``.
    """
    if int(h) != h or h < 0:
        raise LagOutOfRangeError(f"lag must be a non-negative integer, got {h}")
    if not (x > 0 and y > 0):
        return 0.0
    trunc = lattice_radius(xi, phi) if trunc is None else int(trunc)
    dx, dy = _lattice(int(h), trunc)
    q = phi**xi
    rate_x = x**-xi * q**dx
    rate_y = (0.0 if math.isinf(y) else y**-xi) * q**dy
    return math.exp(-float(np.sum(np.maximum(rate_x, rate_y))))


class _GroupedJointRate:
    """Fast ``sum max(x^-xi q^dX, a^-xi q^dY)`` for a fixed ``a``, vectorised in ``x``.

    Every term depends on the lattice point only through ``k = dX - dY``:
    ``max(x^-xi q^k, a^-xi) * q^dY``. Summing ``q^dY`` per ``k`` reduces the
    lattice to ``2h + 3`` groups.
    """

    def __init__(self, a: float, h: int, xi: float, phi: float, trunc: int):
        dx, dy = _lattice(h, trunc)
        q = phi**xi
        k = dx - dy
        kmin = int(k.min())
        self.weight = np.bincount(k - kmin, weights=q**dy)
        self.qk = q ** np.arange(kmin, kmin + self.weight.size, dtype=float)
        self.total = float(np.sum(q**dy))
        self.a_rate = a**-xi
        self.xi = xi

    def excess(self, x: np.ndarray) -> np.ndarray:
        """``S(x) - S(inf)``, the part of the exponent contributed by ``x``."""
        xr = x[:, None] ** -self.xi * self.qk[None, :]
        return np.maximum(xr - self.a_rate, 0.0) @ self.weight


def _conditional_survival(x: np.ndarray, grouped: _GroupedJointRate, p_exceed: float) -> np.ndarray:
    """``P(X_{t} > x | Y_{t-h} > a)`` on ``x > 0``."""
    f_a = 1.0 - p_exceed
    surv_x = -np.expm1(-grouped.total * x**-grouped.xi)
    # F(a) - F(x, a) = F(a) (1 - exp(-excess))
    gap = -f_a * np.expm1(-grouped.excess(x))
    return (surv_x - gap) / p_exceed


def _trapezoid_from_zero(step: float, cutoff: float, integrand) -> float:
    n = int(math.ceil(cutoff / step))
    xs = np.arange(1, n + 1) * step
    vals = np.concatenate([[1.0], integrand(xs)])  # survival is 1 at x = 0
    return float(step * (vals.sum() - 0.5 * (vals[0] + vals[-1])))


def mma_tmes_oracle(
    h: int,
    xi: float = 4.0,
    phi: float = 0.8,
    m_n: int = 20,
    step: Optional[float] = None,
    cutoff: Optional[float] = None,
    tol: float = 1e-8,
) -> OracleResult:
    """``E[X_{t+h} | Y_t > a]`` for the MMA model at the level ``a`` with ``P(Y > a) = 1/m_n``.

    Trapezoidal integration of the conditional survival function on
    ``(0, cutoff]``. ``step`` defaults to ``1e-3 a``; ``cutoff`` to the
    first doubling of ``a`` where the integrand drops below ``tol``. The
    error estimate is the change under step halving plus a bound on the
    discarded tail.
    """
    if int(h) != h or h < 0:
        raise LagOutOfRangeError(f"lag must be a non-negative integer, got {h}")
    if int(m_n) != m_n or m_n < 2:
        raise TmesError(f"m_n must be an integer >= 2, got {m_n}")
    _check_mma(xi, phi)
    if not xi > 1:
        raise IntegrationError("the conditional mean diverges for xi <= 1 (integrand not integrable)")
    h, m_n = int(h), int(m_n)
    p_exceed = 1.0 / m_n
    a = mma_quantile(1.0 - p_exceed, xi, phi)
    grouped = _GroupedJointRate(a, h, xi, phi, lattice_radius(xi, phi))

    def integrand(x):
        return _conditional_survival(np.asarray(x, dtype=float), grouped, p_exceed)

    if step is None:
        step = 1e-3 * a
    if cutoff is None:
        cutoff = a
        for _ in range(200):
            if integrand(np.array([cutoff]))[0] < tol:
                break
            cutoff *= 2.0
        else:
            raise IntegrationError("integrand does not decay below tolerance")
    coarse = _trapezoid_from_zero(step, cutoff, integrand)
    fine = _trapezoid_from_zero(step / 2.0, cutoff, integrand)
    # P(X > x | Y > a) <= P(X > x) / P(Y > a) <= c x^-xi m_n
    tail = grouped.total * m_n * cutoff ** (1.0 - xi) / (xi - 1.0)
    return OracleResult(
        value=fine,
        method="numeric_integral",
        error_estimate=abs(fine - coarse) + tail,
        params={"h": h, "xi": xi, "phi": phi, "m_n": m_n, "a": a, "step": step / 2.0, "cutoff": cutoff},
    )


# -- ARMA(1,1) extremogram -------------------------------------------------

def arma_extremogram_closed_form(h: int, phi: float = 0.2, theta_ma: float = 0.8, xi: float = 6.0) -> float:
    """Limiting extremogram of ARMA(1,1) with Fréchet(xi) innovations."""
    if int(h) != h or h < 0:
        raise LagOutOfRangeError(f"lag must be a non-negative integer, got {h}")
    if not 0.0 < phi < 1.0 or phi**xi >= 1.0:
        raise TmesError(f"need 0 < phi < 1 (so phi^xi < 1), got phi={phi}")
    if h == 0:
        return 1.0
    c = (theta_ma + phi) ** xi / (1.0 - phi**xi)
    num = phi ** (xi * (h - 1)) * (theta_ma + phi) ** xi + phi ** (xi * h) * c
    return num / (1.0 + c)


def copula_tmes_from_extremogram(rho_h: float, mean_x: float, delta0: float, centered: bool = False) -> float:
    """``(1 - rho) E[X] + rho delta(0)``; with ``centered`` just ``rho delta_0(0)``."""
    if not 0.0 <= rho_h <= 1.0:
        raise TmesError(f"extremogram value must lie in [0, 1], got {rho_h}")
    if centered:
        return rho_h * delta0
    return (1.0 - rho_h) * mean_x + rho_h * delta0


# -- Monte Carlo -----------------------------------------------------------

def monte_carlo_delta0(
    model: ModelSpec,
    m_n: int = 20,
    paths: int = 100,
    path_len: int = 2000,
    seed: int = 0,
    min_exceedances: int = 1000,
) -> OracleResult:
    """Pooled ``E[X_t | Y_t > a]`` over independent paths.

    Each path uses its own ``(k+1)``-th order statistic threshold. The error
    estimate is the larger of the between-path standard error of the path
    means and the naive pooled standard error.
    """
    if int(paths) != paths or paths < 2:
        raise TmesError("Monte Carlo needs at least 2 paths")
    pooled, path_means = [], []
    for p in range(int(paths)):
        ts = simulate_pair(model, path_len, derive_seed(seed, p))
        a = select_threshold(ts.y, m_n).a
        sel = ts.x[ts.y > a]
        if sel.size:
            pooled.append(sel)
            path_means.append(sel.mean())
    values = np.concatenate(pooled) if pooled else np.empty(0)
    if values.size < min_exceedances:
        raise InsufficientSampleError(
            f"only {values.size} exceedances pooled, need at least {min_exceedances}"
        )
    path_means = np.asarray(path_means)
    se_paths = path_means.std(ddof=1) / math.sqrt(path_means.size) if path_means.size > 1 else 0.0
    se_pooled = values.std(ddof=1) / math.sqrt(values.size)
    return OracleResult(
        value=float(values.mean()),
        method="monte_carlo",
        error_estimate=float(max(se_paths, se_pooled)),
        params={"model": spec_to_dict(model), "m_n": m_n, "paths": int(paths),
                "path_len": path_len, "seed": seed, "exceedances": int(values.size)},
    )


# -- brute force -----------------------------------------------------------

def brute_force_tmes(ts: TimeSeriesPair, spec: ThresholdSpec, h: int) -> float:
    """Naive TMES: exact rational accumulation over every ``(t, s)`` with ``t - s = h``."""
    x = [float(v) for v in ts.x]
    y = [float(v) for v in ts.y]
    n = len(x)
    if h < 0 or h >= n:
        raise LagOutOfRangeError(f"lag {h} out of range for series of length {n}")
    total = Fraction(0)
    for t in range(n):
        s = t - h
        if s >= 0 and y[s] > spec.a:
            total += Fraction(x[t])
    return spec.m_n / n * float(total)
