"""Fixed-window aggregation of signed-volume series and length filtering."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .orders import SignedVolumeSeries

DEFAULT_WINDOW_SECONDS = 60
DEFAULT_MIN_LENGTH = 15


@dataclass(frozen=True)
class AggregationConfig:
    window_seconds: int = DEFAULT_WINDOW_SECONDS
    min_length: int = DEFAULT_MIN_LENGTH

    def __post_init__(self) -> None:
        if self.window_seconds < 1:
            raise ValueError(f"window_seconds must be >= 1, got {self.window_seconds}")
        if self.min_length < 1:
            raise ValueError(f"min_length must be >= 1, got {self.min_length}")


@dataclass(frozen=True)
class AggregatedSeries:
    """Window-indexed sums for one investor; zero windows are absent."""

    investor_id: str
    indices: tuple[int, ...]
    values: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.indices) != len(self.values):
            raise ValueError("indices and values differ in length")
        if any(b <= a for a, b in zip(self.indices, self.indices[1:])):
            raise ValueError("window indices must be strictly increasing")
        if any(v == 0 for v in self.values):
            raise ValueError("aggregated series may not hold zero values")

    @classmethod
    def from_points(cls, investor_id: str, points: Iterable[tuple[int, int]]) -> "AggregatedSeries":
        pts = list(points)
        return cls(investor_id, tuple(i for i, _ in pts), tuple(v for _, v in pts))

    @property
    def points(self) -> list[tuple[int, int]]:
        return list(zip(self.indices, self.values))

    def __len__(self) -> int:
        return len(self.indices)


def aggregate(series: SignedVolumeSeries, config: AggregationConfig | None = None) -> AggregatedSeries:
    """Sum signed volumes per window ``floor(t / window_seconds)``.

    Window 0 starts at the session anchor. Windows whose buys and sells cancel
    exactly are dropped.
    """
    width = (config or AggregationConfig()).window_seconds
    sums: dict[int, int] = {}
    for ev in series.events:
        if ev.timestamp < 0:
            raise ValueError(f"negative timestamp {ev.timestamp} for {series.investor_id}")
        w = ev.timestamp // width
        sums[w] = sums.get(w, 0) + ev.signed_volume
    kept = sorted((w, v) for w, v in sums.items() if v != 0)
    return AggregatedSeries.from_points(series.investor_id, kept)


def aggregate_all(
    all_series: Mapping[str, SignedVolumeSeries], config: AggregationConfig | None = None
) -> dict[str, AggregatedSeries]:
    return {inv: aggregate(s, config) for inv, s in all_series.items()}


def filter_eligible(
    all_series: Mapping[str, AggregatedSeries], config: AggregationConfig | None = None
) -> dict[str, AggregatedSeries]:
    """Keep series with at least ``min_length`` points."""
    min_length = (config or AggregationConfig()).min_length
    return {inv: s for inv, s in all_series.items() if len(s) >= min_length}


def length_cdf(all_series: Mapping[str, AggregatedSeries]) -> list[tuple[int, float]]:
    """Empirical ``F(L) = P(L' < L)`` over series lengths.

    Returned as the corner points of the step function: for every observed
    length ``l`` both ``(l, F(l))`` and ``(l + 1, F(l + 1))``. Between
    consecutive points F is constant at the left value.
    """
    counts = Counter(len(s) for s in all_series.values())
    if not counts:
        return []
    total = sum(counts.values())
    below = 0
    out: dict[int, Fraction] = {}
    for length in sorted(counts):
        out.setdefault(length, Fraction(below, total))
        below += counts[length]
        out[length + 1] = Fraction(below, total)
    return [(length, float(f)) for length, f in sorted(out.items())]
