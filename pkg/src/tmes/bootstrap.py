"""Stationary bootstrap for the empirical TMES.

The threshold and indicators are fixed on the original sample; what gets
resampled is the product series ``W_t = x_t I_{t-h}``. Block starts are
uniform on the index set, block lengths geometric with success probability
``theta``, and indices past the end wrap around.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import stats

from .core import TimeSeriesPair, ThresholdSpec, TmesError, empirical_tmes, lagged_products
from .rng import substream

__all__ = [
    "BlockPlan",
    "BootstrapReplicates",
    "DegenerateDistributionError",
    "geometric_lengths",
    "make_block_plan",
    "resample_series",
    "bootstrap_tmes_replicates",
    "percentile_ci",
    "qq_against_normal",
]


class DegenerateDistributionError(TmesError):
    pass


@dataclass(frozen=True)
class BlockPlan:
    """Block starts (0-based) and lengths covering at least ``n`` positions."""

    starts: np.ndarray
    lengths: np.ndarray
    n: int
    theta: float

    @property
    def num_blocks(self) -> int:
        return int(self.starts.size)

    def indices(self) -> np.ndarray:
        """Resampled positions, wrapped modulo ``n`` and cut to length ``n``."""
        # trim so the last block stops at n; a long final block never gets expanded
        ends = np.minimum(np.cumsum(self.lengths), self.n)
        lengths = np.diff(ends, prepend=0)
        offsets = ends - lengths
        idx = np.arange(self.n, dtype=np.int64) + np.repeat(self.starts - offsets, lengths)
        return idx % self.n


@dataclass(frozen=True)
class BootstrapReplicates:
    lag: int
    values: np.ndarray
    point: float
    theta: float
    seed: int
    m_n: int
    n: int

    @property
    def B(self) -> int:
        return int(self.values.size)


def _check_theta(theta: float) -> float:
    theta = float(theta)
    if not 0.0 < theta < 1.0:
        raise TmesError(f"theta must lie in (0, 1), got {theta}")
    return theta


def geometric_lengths(theta: float, u: np.ndarray) -> np.ndarray:
    """Inverse-CDF geometric variates on {1, 2, ...}: ``ceil(log u / log(1 - theta))``.

    ``u`` must lie in (0, 1]; ``u == 1`` maps to length 1.
    """
    lengths = np.ceil(np.log(u) / np.log1p(-theta))
    return np.maximum(lengths, 1).astype(np.int64)


def make_block_plan(n: int, theta: float, rng: np.random.Generator) -> BlockPlan:
    """Draw ``(start, length)`` pairs until the lengths cover ``n`` positions."""
    if int(n) != n or n < 1:
        raise TmesError(f"n must be a positive integer, got {n}")
    n = int(n)
    theta = _check_theta(theta)
    chunk = int(np.ceil(n * theta)) + 16
    starts, lengths = [], []
    covered = 0
    while covered < n:
        lens = geometric_lengths(theta, 1.0 - rng.random(chunk))
        sts = rng.integers(0, n, size=chunk, dtype=np.int64)
        cum = covered + np.cumsum(lens)
        stop = int(np.searchsorted(cum, n)) + 1  # first block reaching n, inclusive
        stop = min(stop, chunk)
        starts.append(sts[:stop])
        lengths.append(lens[:stop])
        covered = int(cum[stop - 1])
    return BlockPlan(np.concatenate(starts), np.concatenate(lengths), n, theta)


def resample_series(w, plan: BlockPlan) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.size != plan.n:
        raise TmesError(f"series length {w.size} does not match plan length {plan.n}")
    return w[plan.indices()]


def _replicate_sums(w: np.ndarray, theta: float, seed: int, lag: int, indices) -> np.ndarray:
    out = np.empty(len(indices))
    for j, b in enumerate(indices):
        plan = make_block_plan(w.size, theta, substream(seed, lag, b))
        out[j] = w[plan.indices()].sum()
    return out


def bootstrap_tmes_replicates(
    ts: TimeSeriesPair,
    spec: ThresholdSpec,
    h: int,
    theta: float = 0.1,
    B: int = 300,
    seed: int = 0,
    threads: int = 1,
) -> BootstrapReplicates:
    """``B`` stationary-bootstrap replicates of ``delta_hat(h)``.

    Replicate ``b`` draws its block plan from the substream ``(seed, h, b)``;
    the values are therefore identical for any ``threads``.
    """
    theta = _check_theta(theta)
    if int(B) != B or B < 1:
        raise TmesError(f"B must be a positive integer, got {B}")
    B = int(B)
    w = lagged_products(ts, spec, h)
    point = empirical_tmes(ts, spec, h)
    threads = max(1, min(int(threads), B))
    if threads == 1:
        sums = _replicate_sums(w, theta, seed, h, range(B))
    else:
        chunks = np.array_split(np.arange(B), threads)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda c: _replicate_sums(w, theta, seed, h, c), chunks))
        sums = np.concatenate(parts)
    values = spec.m_n / ts.n * sums
    return BootstrapReplicates(lag=int(h), values=values, point=point, theta=theta,
                               seed=int(seed), m_n=spec.m_n, n=ts.n)


def percentile_ci(
    reps: BootstrapReplicates,
    level: float = 0.90,
    method: Literal["percentile", "basic"] = "percentile",
) -> tuple[float, float]:
    """Equal-tailed bootstrap interval at ``level``.

    Quantiles use linear interpolation between order statistics. ``basic``
    reflects the percentile interval around the point estimate.
    """
    if not 0.0 < level < 1.0:
        raise TmesError(f"level must lie in (0, 1), got {level}")
    alpha = (1.0 - level) / 2.0
    lo, hi = np.quantile(reps.values, [alpha, 1.0 - alpha])
    if method == "percentile":
        return float(lo), float(hi)
    if method == "basic":
        return float(2 * reps.point - hi), float(2 * reps.point - lo)
    raise TmesError(f"unknown interval method {method!r}")


def qq_against_normal(reps, standardize: bool = True) -> np.ndarray:
    """``(B, 2)`` array of (theoretical, sample) quantile pairs.

    Sample values are sorted and, by default, standardized by their own mean
    and standard deviation; theoretical quantiles sit at ``(i - 0.5) / B``.
    """
    values = np.asarray(getattr(reps, "values", reps), dtype=float)
    if values.size < 3:
        raise TmesError("QQ data needs at least 3 replicates")
    sample = np.sort(values)
    if standardize:
        sd = sample.std(ddof=1)
        if not sd > 0:
            raise DegenerateDistributionError("replicates have zero spread")
        sample = (sample - sample.mean()) / sd
    p = (np.arange(1, values.size + 1) - 0.5) / values.size
    return np.column_stack([stats.norm.ppf(p), sample])
