"""Dated-series ingestion, calendar alignment and moving-window centered TMES."""
from __future__ import annotations

import datetime as dt
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Literal, Optional, Sequence

import numpy as np

from .bootstrap import bootstrap_tmes_replicates, percentile_ci
from .core import TimeSeriesPair, TmesError, centered_empirical_tmes, select_threshold
from .csvio import CsvFormatError, column_index, parse_float, read_table
from .rng import derive_seed

__all__ = [
    "DatedSeries",
    "WindowResult",
    "ingest_csv",
    "align",
    "rolling_tmes",
    "window_rows",
]


@dataclass(frozen=True)
class DatedSeries:
    dates: tuple[str, ...]
    values: np.ndarray
    name: str = ""

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if len(self.dates) != values.size:
            raise TmesError("dates and values differ in length")
        if not np.all(np.isfinite(values)):
            raise TmesError(f"series {self.name!r} contains non-finite values")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise TmesError(f"dates of series {self.name!r} are not strictly increasing")
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class WindowResult:
    end: str
    lags: tuple[int, ...]
    delta0: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    window_size: int
    m_n: int
    theta: float
    B: int
    level: float


def ingest_csv(path, date_col: str = "date", value_col: str = "value", name: str | None = None) -> DatedSeries:
    """Load one dated series; rows are sorted by date and duplicates rejected."""
    header, rows = read_table(path)
    di = column_index(header, date_col, path)
    vi = column_index(header, value_col, path)
    records = []
    for lineno, fields in rows:
        if len(fields) != len(header):
            raise CsvFormatError(f"{path}:{lineno}: expected {len(header)} fields, got {len(fields)}")
        try:
            date = dt.date.fromisoformat(fields[di])
        except ValueError:
            raise CsvFormatError(f"{path}:{lineno}: cannot parse date {fields[di]!r}") from None
        records.append((date, parse_float(fields[vi], path, lineno, value_col), lineno))
    records.sort(key=lambda r: r[0])
    for prev, cur in zip(records, records[1:]):
        if prev[0] == cur[0]:
            raise CsvFormatError(f"{path}:{cur[2]}: duplicate date {cur[0].isoformat()}")
    return DatedSeries(
        dates=tuple(r[0].isoformat() for r in records),
        values=np.array([r[1] for r in records]),
        name=name if name is not None else value_col,
    )


def align(
    a: DatedSeries,
    b: DatedSeries,
    policy: Literal["intersect", "error_on_gap"] = "intersect",
) -> tuple[tuple[str, ...], TimeSeriesPair]:
    """Pair ``a`` (as ``x``) with ``b`` (as ``y``) on matching dates."""
    if len(a) == 0 or len(b) == 0:
        raise TmesError("cannot align an empty series")
    if policy == "error_on_gap":
        if a.dates != b.dates:
            missing = sorted(set(a.dates).symmetric_difference(b.dates))
            raise TmesError(f"calendars differ on {len(missing)} dates, first {missing[0]}")
        return a.dates, TimeSeriesPair(a.values, b.values)
    if policy != "intersect":
        raise TmesError(f"unknown alignment policy {policy!r}")
    b_pos = {d: i for i, d in enumerate(b.dates)}
    shared = [(i, b_pos[d]) for i, d in enumerate(a.dates) if d in b_pos]
    if not shared:
        raise TmesError("series share no dates")
    ia, ib = map(np.array, zip(*shared))
    return tuple(a.dates[i] for i in ia), TimeSeriesPair(a.values[ia], b.values[ib])


def _window_result(sub: TimeSeriesPair, label: str, lags, m_n, theta, B, level, seed) -> WindowResult:
    spec = select_threshold(sub.y, m_n)
    xbar = float(np.mean(sub.x))
    d0, lo, hi = [], [], []
    for h in lags:
        d0.append(centered_empirical_tmes(sub, spec, h))
        reps = bootstrap_tmes_replicates(sub, spec, h, theta=theta, B=B, seed=seed)
        band = percentile_ci(reps, level)
        lo.append(band[0] - xbar)
        hi.append(band[1] - xbar)
    return WindowResult(end=label, lags=tuple(lags), delta0=np.array(d0), lo=np.array(lo),
                        hi=np.array(hi), window_size=sub.n, m_n=m_n, theta=theta, B=B, level=level)


def rolling_tmes(
    ts: TimeSeriesPair,
    window: int = 200,
    lags: Sequence[int] = (0, 1, 3, 7),
    m_n: int = 20,
    theta: float = 0.1,
    B: int = 300,
    level: float = 0.90,
    seed: int = 0,
    dates: Optional[Sequence[str]] = None,
    threads: int = 1,
) -> list[WindowResult]:
    """Centered TMES with bootstrap bands on every window of ``window`` observations.

    Windows slide by one step. Each is self-contained: its threshold and
    mean of ``x`` are its own, and its bootstrap seed is derived from
    ``(seed, end)`` where ``end`` is the 1-based index of the last
    observation. Results are labelled with ``dates[end - 1]`` when dates are
    given, else with ``end``.
    """
    lags = tuple(sorted({int(h) for h in lags}))
    if not lags or lags[0] < 0:
        raise TmesError("lags must be non-negative integers")
    if int(window) != window or window < lags[-1] + 2:
        raise TmesError(f"window must be at least max(lag) + 2 = {lags[-1] + 2}, got {window}")
    window = int(window)
    if window > ts.n:
        raise TmesError(f"window {window} exceeds the series length {ts.n}")
    if dates is not None and len(dates) != ts.n:
        raise TmesError("dates must match the series length")
    ends = range(window, ts.n + 1)

    def run(end: int) -> WindowResult:
        label = dates[end - 1] if dates is not None else str(end)
        return _window_result(ts.window(end - window, end), label, lags, m_n, theta, B, level,
                              derive_seed(seed, end))

    if threads <= 1:
        return [run(end) for end in ends]
    with ThreadPoolExecutor(max_workers=int(threads)) as pool:
        return list(pool.map(run, ends))


def window_rows(results: Sequence[WindowResult]):
    """Long-format rows ``(end_date, lag, delta0, lo, hi)``."""
    for res in results:
        for j, h in enumerate(res.lags):
            yield res.end, h, res.delta0[j], res.lo[j], res.hi[j]
