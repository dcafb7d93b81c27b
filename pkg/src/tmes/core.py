"""Deterministic extremal estimators.

Threshold selection from order statistics, exceedance indicators, the
empirical (and centered) time-lagged marginal expected shortfall, the sample
extremogram and a plug-in estimate of the asymptotic variance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "TmesError",
    "InvalidLevelError",
    "LagOutOfRangeError",
    "UndefinedExtremogramError",
    "UndefinedVarianceError",
    "TimeSeriesPair",
    "ThresholdSpec",
    "IndicatorSeries",
    "TmesCurve",
    "select_threshold",
    "exceedance_indicators",
    "lagged_products",
    "empirical_tmes",
    "centered_empirical_tmes",
    "tmes_curve",
    "sample_extremogram",
    "plugin_variance",
]


class TmesError(ValueError):
    """Base class for all estimator and parameter errors."""


class InvalidLevelError(TmesError):
    pass


class LagOutOfRangeError(TmesError):
    pass


class UndefinedExtremogramError(TmesError):
    pass


class UndefinedVarianceError(TmesError):
    pass


def _as_series(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise TmesError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise TmesError(f"{name} contains non-finite values")
    return arr


@dataclass(frozen=True)
class TimeSeriesPair:
    """Aligned observations ``(x_t, y_t)``; ``y`` carries the systemic event."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = _as_series(self.x, "x")
        y = _as_series(self.y, "y")
        if x.shape != y.shape:
            raise TmesError(f"x and y lengths differ: {x.size} != {y.size}")
        if x.size < 2:
            raise TmesError("a series pair needs at least 2 observations")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return int(self.x.size)

    def window(self, start: int, stop: int) -> "TimeSeriesPair":
        return TimeSeriesPair(self.x[start:stop], self.y[start:stop])


@dataclass(frozen=True)
class ThresholdSpec:
    """Extremal level ``m_n`` bound to the concrete threshold ``a``.

    ``k = n // m_n`` is the nominal number of exceedances.
    """

    m_n: int
    k: int
    a: float
    n: int


@dataclass(frozen=True)
class IndicatorSeries:
    bits: np.ndarray
    threshold: ThresholdSpec

    @property
    def count(self) -> int:
        return int(self.bits.sum())


@dataclass
class TmesCurve:
    """TMES estimates over lags ``0..h_max`` with optional bootstrap bands."""

    values: np.ndarray
    centered: bool = False
    ci_lo: Optional[np.ndarray] = None
    ci_hi: Optional[np.ndarray] = None
    level: Optional[float] = None
    lags: np.ndarray = field(init=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.lags = np.arange(self.values.size)
        if (self.ci_lo is None) != (self.ci_hi is None):
            raise TmesError("ci_lo and ci_hi must be given together")
        if self.ci_lo is not None:
            self.ci_lo = np.asarray(self.ci_lo, dtype=float)
            self.ci_hi = np.asarray(self.ci_hi, dtype=float)
            if self.ci_lo.shape != self.values.shape or self.ci_hi.shape != self.values.shape:
                raise TmesError("band length must match the number of lags")
            if np.any(self.ci_lo > self.ci_hi):
                raise TmesError("ci_lo must not exceed ci_hi")
            if self.level is None or not 0.0 < self.level < 1.0:
                raise TmesError("a band needs a confidence level in (0, 1)")

    @property
    def h_max(self) -> int:
        return self.values.size - 1


def select_threshold(y: Sequence[float], m_n: int) -> ThresholdSpec:
    """Order-statistic threshold for extremal level ``m_n``.

    With ``k = floor(n / m_n)`` the threshold is the ``(k+1)``-th largest
    value of ``y``, so exactly ``k`` observations exceed it strictly when the
    values are distinct. Ties can only reduce that count. When ``k == n``
    (``m_n == 1``) every observation must exceed, and ``a = min(y) - 1``.
    """
    y = _as_series(y, "y")
    n = y.size
    if n < 2:
        raise TmesError("threshold selection needs at least 2 observations")
    if int(m_n) != m_n or not 1 <= m_n <= n:
        raise InvalidLevelError(f"extremal level m_n must be an integer in [1, {n}], got {m_n}")
    m_n = int(m_n)
    k = n // m_n
    if k + 1 <= n:
        # (k+1)-th largest == element at ascending position n-k-1
        a = float(np.partition(y, n - k - 1)[n - k - 1])
    else:
        a = float(y.min()) - 1.0
    return ThresholdSpec(m_n=m_n, k=k, a=a, n=n)


def exceedance_indicators(y: Sequence[float], spec: ThresholdSpec) -> IndicatorSeries:
    y = _as_series(y, "y")
    if y.size != spec.n:
        raise TmesError(f"series length {y.size} does not match threshold length {spec.n}")
    return IndicatorSeries(bits=(y > spec.a).astype(np.int8), threshold=spec)


def _check_lag(h: int, n: int) -> int:
    if int(h) != h or h < 0:
        raise LagOutOfRangeError(f"lag must be a non-negative integer, got {h}")
    if h >= n:
        raise LagOutOfRangeError(f"lag {h} out of range for series of length {n}")
    return int(h)


def lagged_products(ts: TimeSeriesPair, spec: ThresholdSpec, h: int) -> np.ndarray:
    """The series ``W_t = x_t * I_{t-h}`` for ``t = h+1..n`` (length ``n - h``)."""
    h = _check_lag(h, ts.n)
    bits = exceedance_indicators(ts.y, spec).bits
    return ts.x[h:] * bits[: ts.n - h]


def empirical_tmes(ts: TimeSeriesPair, spec: ThresholdSpec, h: int) -> float:
    """``(m_n / n) * sum_{t=h+1}^{n} x_t I_{t-h}``, in-sample pairs only.

    The sum is correctly rounded (``math.fsum``), so the result does not
    depend on summation order.
    """
    w = lagged_products(ts, spec, h)
    return spec.m_n / ts.n * math.fsum(w)


def centered_empirical_tmes(ts: TimeSeriesPair, spec: ThresholdSpec, h: int) -> float:
    return empirical_tmes(ts, spec, h) - float(np.mean(ts.x))


def tmes_curve(ts: TimeSeriesPair, spec: ThresholdSpec, h_max: int, centered: bool = False) -> TmesCurve:
    _check_lag(h_max, ts.n)
    est = centered_empirical_tmes if centered else empirical_tmes
    return TmesCurve(np.array([est(ts, spec, h) for h in range(h_max + 1)]), centered=centered)


def _extremogram_from_bits(bits: np.ndarray, h_max: int) -> np.ndarray:
    total = int(bits.sum())
    if total == 0:
        raise UndefinedExtremogramError("no exceedances: the sample extremogram is undefined")
    b = bits.astype(np.int64)
    n = b.size
    out = np.empty(h_max + 1)
    for h in range(h_max + 1):
        out[h] = np.dot(b[: n - h], b[h:]) / total if h < n else 0.0
    return out


def sample_extremogram(y: Sequence[float], spec: ThresholdSpec, h_max: int) -> np.ndarray:
    """Ratio estimator ``sum_t I_t I_{t+h} / sum_t I_t`` for ``h = 0..h_max``."""
    if int(h_max) != h_max or h_max < 0:
        raise LagOutOfRangeError(f"h_max must be a non-negative integer, got {h_max}")
    bits = exceedance_indicators(y, spec).bits
    return _extremogram_from_bits(bits, int(h_max))


def plugin_variance(
    ts: TimeSeriesPair,
    spec: ThresholdSpec,
    h: int,
    s_max: Optional[int] = None,
    centered: bool = True,
) -> float:
    """Plug-in estimate of ``lim (n/m_n) var(delta_hat(h))``.

    ``tau(0) + 2 * sum_{s=1}^{s_max} rho(s) tau(s)`` where ``rho`` is the
    sample extremogram of ``y`` and ``tau(s)`` is the sample mean of
    ``x_t x_{t+s}`` over joint exceedances ``I_{t-h} I_{t+s-h} = 1``. Lags
    with no joint exceedance are skipped; ``s_max`` defaults to ``2 * m_n``.

    With ``centered=True`` every retained term has ``delta_hat(h)^2 / m_n``
    subtracted. The correction vanishes as ``m_n`` grows, but at finite
    levels the uncentered products accumulate ``(2 s_max + 1) delta^2 / m_n``
    of spurious long-run variance from lags where the exceedances are
    already independent.
    """
    n = ts.n
    h = _check_lag(h, n)
    if s_max is None:
        s_max = 2 * spec.m_n
    if int(s_max) != s_max or s_max < 0:
        raise TmesError(f"s_max must be a non-negative integer, got {s_max}")
    s_max = int(s_max)
    if s_max >= (n - h) / 2:
        raise TmesError(f"s_max={s_max} must be below half the usable length {(n - h) / 2}")
    bits = exceedance_indicators(ts.y, spec).bits.astype(np.int64)
    ib = bits[: n - h]  # I_{t-h} for t = h+1..n
    xs = ts.x[h:]
    if ib.sum() == 0:
        raise UndefinedVarianceError("no exceedances at s = 0: plug-in variance undefined")
    rho = _extremogram_from_bits(bits, s_max)
    correction = empirical_tmes(ts, spec, h) ** 2 / spec.m_n if centered else 0.0

    total = float(np.dot(xs * xs, ib)) / ib.sum() - correction
    for s in range(1, s_max + 1):
        joint = ib[: ib.size - s] * ib[s:]
        count = joint.sum()
        if count == 0:
            continue
        tau = float(np.dot(xs[: xs.size - s] * xs[s:], joint)) / count
        total += 2.0 * (rho[s] * tau - correction)
    return total
