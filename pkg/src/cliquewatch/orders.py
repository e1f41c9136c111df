"""Limit-order records, CSV ingestion and signed-volume event series."""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from enum import Enum
from typing import IO, Iterable, Union

logger = logging.getLogger(__name__)

HEADER = ("investor_id", "timestamp", "side", "price", "volume")
DEFAULT_ANCHOR = "09:00:00"


class OrderFileError(ValueError):
    """Raised when an order file cannot be parsed."""

    def __init__(self, message: str, row: int | None = None):
        self.row = row
        super().__init__(f"row {row}: {message}" if row is not None else message)


class Side(Enum):
    BUY = 1
    SELL = -1

    @classmethod
    def parse(cls, token: str) -> "Side":
        key = token.strip().lower()
        if key == "buy":
            return cls.BUY
        if key == "sell":
            return cls.SELL
        raise ValueError(f"unknown side {token!r}")

    @property
    def label(self) -> str:
        return "Buy" if self is Side.BUY else "Sell"


def parse_clock(text: str) -> int:
    """Seconds since midnight for an ``HH:MM:SS`` string."""
    parts = text.strip().split(":")
    if len(parts) != 3 or not all(p.isdigit() for p in parts):
        raise ValueError(f"bad clock time {text!r}")
    h, m, s = (int(p) for p in parts)
    if h > 23 or m > 59 or s > 59:
        raise ValueError(f"bad clock time {text!r}")
    return h * 3600 + m * 60 + s


def format_clock(seconds: int) -> str:
    if not 0 <= seconds < 86400:
        raise ValueError(f"clock seconds out of range: {seconds}")
    h, rem = divmod(seconds, 3600)
    m, s = divmod(rem, 60)
    return f"{h:02d}:{m:02d}:{s:02d}"


def id_sort_key(investor_id: str) -> tuple:
    """Numeric ids sort numerically, anything else lexically after them."""
    if investor_id.isdigit():
        return (0, int(investor_id), investor_id)
    return (1, 0, investor_id)


@dataclass(frozen=True, slots=True)
class OrderRecord:
    investor_id: str
    timestamp: int  # seconds since the session anchor
    side: Side
    price: Decimal
    volume: int

    def __post_init__(self) -> None:
        if self.volume < 1:
            raise ValueError("volume must be >= 1")
        if self.price <= 0:
            raise ValueError("price must be positive")

    @property
    def signed_volume(self) -> int:
        return self.side.value * self.volume


@dataclass(frozen=True, slots=True)
class SignedVolumeEvent:
    timestamp: int
    signed_volume: int


@dataclass(frozen=True)
class SignedVolumeSeries:
    investor_id: str
    events: tuple[SignedVolumeEvent, ...] = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.events)


@dataclass(frozen=True)
class OrderFileFormat:
    """How to read one order file.

    ``anchor`` is the clock time mapped to second 0; it is shared by every
    investor in the file so that window indices line up across investors.
    Orders stamped before the anchor (the opening call auction) are dropped
    unless ``keep_pre_anchor`` is set. Up to ``max_bad_rows`` malformed rows
    are skipped with a warning; one more raises.
    """

    anchor: str = DEFAULT_ANCHOR
    keep_pre_anchor: bool = False
    max_bad_rows: int = 0

    @property
    def anchor_seconds(self) -> int:
        return parse_clock(self.anchor)


Source = Union[bytes, str, IO[bytes], IO[str]]


def _text_stream(source: Source) -> IO[str]:
    if isinstance(source, bytes):
        return io.StringIO(source.decode("utf-8"))
    if isinstance(source, str):
        return io.StringIO(source)
    if isinstance(source, io.TextIOBase):
        return source
    return io.TextIOWrapper(source, encoding="utf-8", newline="")


def _parse_row(row: list[str], anchor: int) -> OrderRecord:
    if len(row) != len(HEADER):
        raise ValueError(f"expected {len(HEADER)} fields, got {len(row)}")
    investor, clock, side, price, volume = (c.strip() for c in row)
    if not investor:
        raise ValueError("empty investor_id")
    try:
        price_value = Decimal(price)
    except InvalidOperation:
        raise ValueError(f"bad price {price!r}") from None
    if not price_value.is_finite() or price_value <= 0:
        raise ValueError(f"price must be positive, got {price!r}")
    if not volume.isdigit() or int(volume) < 1:
        raise ValueError(f"volume must be a positive integer, got {volume!r}")
    return OrderRecord(
        investor_id=investor,
        timestamp=parse_clock(clock) - anchor,
        side=Side.parse(side),
        price=price_value,
        volume=int(volume),
    )


def parse_orders(source: Source, fmt: OrderFileFormat | None = None) -> list[OrderRecord]:
    """Parse an order CSV into records, in file order.

    Row numbers in errors count the header as row 1. Timestamps need not be
    monotone since orders from different investors interleave.
    """
    fmt = fmt or OrderFileFormat()
    anchor = fmt.anchor_seconds
    reader = csv.reader(_text_stream(source))
    header = next(reader, None)
    if header is None:
        return []
    if tuple(h.strip().lower() for h in header) != HEADER:
        raise OrderFileError(f"bad header {header!r}, expected {','.join(HEADER)}", row=1)

    records: list[OrderRecord] = []
    bad = 0
    dropped = 0
    for rownum, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        try:
            rec = _parse_row(row, anchor)
        except ValueError as exc:
            bad += 1
            if bad > fmt.max_bad_rows:
                raise OrderFileError(str(exc), row=rownum) from None
            logger.warning("skipping row %d: %s", rownum, exc)
            continue
        if rec.timestamp < 0 and not fmt.keep_pre_anchor:
            dropped += 1
            continue
        records.append(rec)
    if dropped:
        logger.warning("dropped %d orders stamped before anchor %s", dropped, fmt.anchor)
    return records


def write_orders(records: Iterable[OrderRecord], stream: IO[str], anchor: str = DEFAULT_ANCHOR) -> None:
    """Write records in the order CSV format (inverse of :func:`parse_orders`)."""
    base = parse_clock(anchor)
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(HEADER)
    for rec in records:
        writer.writerow(
            (rec.investor_id, format_clock(base + rec.timestamp), rec.side.label, rec.price, rec.volume)
        )


def to_signed_series(orders: Iterable[OrderRecord]) -> dict[str, SignedVolumeSeries]:
    """Group orders by investor into time-sorted signed-volume series.

    Orders sharing a timestamp keep their input order (the sort is stable).
    """
    grouped: dict[str, list[SignedVolumeEvent]] = {}
    for rec in orders:
        grouped.setdefault(rec.investor_id, []).append(
            SignedVolumeEvent(rec.timestamp, rec.signed_volume)
        )
    return {
        inv: SignedVolumeSeries(inv, tuple(sorted(events, key=lambda e: e.timestamp)))
        for inv, events in grouped.items()
    }
