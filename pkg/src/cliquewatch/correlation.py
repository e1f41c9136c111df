"""Unified aggregated series and pairwise Pearson correlation."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import IO, Mapping, Optional

import numpy as np

from .orders import id_sort_key
from .series import AggregatedSeries

# integer moments are exact in float64 below this magnitude
_EXACT_FLOAT = 2**52


@dataclass(frozen=True)
class UnifiedPair:
    indices: tuple[int, ...]
    u_a: tuple[int, ...]
    u_b: tuple[int, ...]

    def __post_init__(self) -> None:
        if not len(self.indices) == len(self.u_a) == len(self.u_b):
            raise ValueError("unified vectors differ in length")


def unify(a: AggregatedSeries, b: AggregatedSeries) -> UnifiedPair:
    """Put two series on the union of their window indices, zero-filling gaps."""
    if not len(a) or not len(b):
        raise ValueError("cannot unify an empty aggregated series")
    va = dict(zip(a.indices, a.values))
    vb = dict(zip(b.indices, b.values))
    merged = tuple(sorted(va.keys() | vb.keys()))
    return UnifiedPair(
        merged,
        tuple(va.get(k, 0) for k in merged),
        tuple(vb.get(k, 0) for k in merged),
    )


def correlate(pair: UnifiedPair) -> Optional[float]:
    """Pearson coefficient with population moments over the unified points.

    Returns ``None`` when either vector is constant (zero variance).
    """
    n = len(pair.indices)
    if n < 2:
        raise ValueError("correlation needs at least two unified points")
    mean_a = math.fsum(pair.u_a) / n
    mean_b = math.fsum(pair.u_b) / n
    da = [x - mean_a for x in pair.u_a]
    db = [y - mean_b for y in pair.u_b]
    var_a = math.fsum(x * x for x in da) / n
    var_b = math.fsum(y * y for y in db) / n
    if var_a == 0.0 or var_b == 0.0:
        return None
    cov = math.fsum(x * y for x, y in zip(da, db)) / n
    return max(-1.0, min(1.0, cov / math.sqrt(var_a * var_b)))


@dataclass(frozen=True)
class CorrelationMatrix:
    ids: tuple[str, ...]
    entries: np.ndarray

    def __post_init__(self) -> None:
        n = len(self.ids)
        if self.entries.shape != (n, n):
            raise ValueError(f"entries shape {self.entries.shape} does not match {n} ids")

    def __len__(self) -> int:
        return len(self.ids)

    def get(self, a: str, b: str) -> float:
        pos = {inv: k for k, inv in enumerate(self.ids)}
        return float(self.entries[pos[a], pos[b]])

    def write_csv(self, stream: IO[str]) -> None:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(["investor_id", *self.ids])
        for inv, row in zip(self.ids, self.entries):
            writer.writerow([inv, *(f"{x:.6f}" for x in row)])


def _dense(series: list[AggregatedSeries]) -> tuple[np.ndarray, np.ndarray]:
    columns = np.unique(np.concatenate([np.asarray(s.indices, dtype=np.int64) for s in series]))
    values = np.zeros((len(series), len(columns)), dtype=np.int64)
    for row, s in enumerate(series):
        values[row, np.searchsorted(columns, s.indices)] = s.values
    return values, values != 0


def correlation_matrix(
    eligible: Mapping[str, AggregatedSeries], block_rows: int = 1024
) -> CorrelationMatrix:
    """All pairwise correlations, ids in sorted order.

    Over the union support of a pair, the sum and sum of squares of each
    zero-filled vector equal those of the raw series, so only the union size
    ``n`` and the cross product depend on the pair. Both come from matrix
    products of the dense window table. With integer volumes every moment
    below is an exact integer, which makes the result independent of BLAS
    summation order. Zero-variance pairs are stored as 0.
    """
    if len(eligible) < 2:
        raise ValueError(f"need at least 2 eligible investors, got {len(eligible)}")
    ids = tuple(sorted(eligible, key=id_sort_key))
    series = [eligible[i] for i in ids]
    if any(not len(s) for s in series):
        raise ValueError("eligible series may not be empty")

    values, support = _dense(series)
    n_windows = values.shape[1]
    lengths = support.sum(axis=1).astype(np.int64)
    sums = values.sum(axis=1)
    squares = (values * values).sum(axis=1)

    exact = int(squares.max()) * n_windows < _EXACT_FLOAT and int(np.abs(sums).max()) ** 2 < _EXACT_FLOAT
    dtype = np.float64 if exact else object
    vals = values.astype(dtype)
    supp = support.astype(dtype)
    sums_d = sums.astype(dtype)
    squares_d = squares.astype(dtype)
    lengths_d = lengths.astype(dtype)

    size = len(ids)
    out = np.zeros((size, size), dtype=np.float64)
    for start in range(0, size, block_rows):
        stop = min(start + block_rows, size)
        # rows [start, stop) against columns [start, size): upper triangle only
        cross = vals[start:stop] @ vals[start:].T
        overlap = supp[start:stop] @ supp[start:].T
        n = lengths_d[start:stop, None] + lengths_d[None, start:] - overlap
        num = n * cross - sums_d[start:stop, None] * sums_d[None, start:]
        var_row = n * squares_d[start:stop, None] - sums_d[start:stop, None] ** 2
        var_col = n * squares_d[None, start:] - sums_d[None, start:] ** 2
        num = np.asarray(num, dtype=np.float64)
        var_row = np.asarray(var_row, dtype=np.float64)
        var_col = np.asarray(var_col, dtype=np.float64)
        defined = (var_row > 0) & (var_col > 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = num / (np.sqrt(var_row) * np.sqrt(var_col))
        out[start:stop, start:] = np.where(defined, np.clip(r, -1.0, 1.0), 0.0)

    upper = np.triu(out, k=1)
    full = upper + upper.T
    np.fill_diagonal(full, 1.0)
    return CorrelationMatrix(ids, full)
