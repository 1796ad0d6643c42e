"""Market time structure: contract windows, resolutions and resolution conversion.

Quantity conventions used everywhere in this package:

* energy in MWh, power in MW, prices in EUR/MWh, installed capacity in MW;
* timestamps are UTC throughout. Local-time handling (DST days with 23/25
  hours) is the ingestion layer's problem; a trading day is simply represented
  by its true number of day-ahead windows.

Day-ahead contracts cover coarse windows (typically 1 hour) while imbalance
settlement runs on a finer grid (15 minutes in Belgium, 1 hour in the
Nordics). The settlement resolution must divide the contract resolution, so
each contract window splits into exactly ``n`` settlement windows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone

from .errors import AlignmentError, DataError, ShapeError


@dataclass(frozen=True)
class MarketResolution:
    """Resolution pair (day-ahead contracts, imbalance settlement), in minutes.

    The settlement resolution must divide the day-ahead resolution; the
    quotient ``periods_per_contract`` is the number of settlement windows per
    contract window.
    """

    day_ahead_minutes: int = 60
    balancing_minutes: int = 15

    def __post_init__(self):
        if self.day_ahead_minutes <= 0 or self.balancing_minutes <= 0:
            raise DataError("market resolutions must be positive minute counts")
        if self.day_ahead_minutes % self.balancing_minutes != 0:
            raise DataError(
                f"balancing resolution {self.balancing_minutes} min must divide "
                f"day-ahead resolution {self.day_ahead_minutes} min"
            )

    @property
    def periods_per_contract(self) -> int:
        return self.day_ahead_minutes // self.balancing_minutes


def _utc_minute_of_day(ts: datetime) -> int:
    return ts.hour * 60 + ts.minute


@dataclass(frozen=True)
class ContractWindow:
    """Half-open delivery window ``[start, start + resolution)`` in UTC."""

    start: datetime
    resolution_minutes: int

    def __post_init__(self):
        if self.start.tzinfo is None or self.start.utcoffset() != timedelta(0):
            raise AlignmentError(f"window start must be timezone-aware UTC, got {self.start!r}")
        if self.resolution_minutes <= 0:
            raise DataError("window resolution must be positive")
        if self.start.second != 0 or self.start.microsecond != 0:
            raise AlignmentError(f"window start {self.start.isoformat()} has sub-minute offset")
        if _utc_minute_of_day(self.start) % self.resolution_minutes != 0:
            raise AlignmentError(
                f"window start {self.start.isoformat()} is not aligned to "
                f"{self.resolution_minutes}-minute boundaries"
            )

    @property
    def end(self) -> datetime:
        return self.start + timedelta(minutes=self.resolution_minutes)

    def __str__(self) -> str:
        return f"[{self.start.isoformat()}, +{self.resolution_minutes}min)"


def sub_windows(window: ContractWindow, res: MarketResolution) -> list[ContractWindow]:
    """Split a day-ahead contract window into its settlement windows.

    Returns exactly ``res.periods_per_contract`` consecutive, non-overlapping
    settlement windows that partition ``window``.
    """
    if window.resolution_minutes != res.day_ahead_minutes:
        raise AlignmentError(
            f"window {window} has resolution {window.resolution_minutes} min, "
            f"expected day-ahead resolution {res.day_ahead_minutes} min"
        )
    step = timedelta(minutes=res.balancing_minutes)
    return [
        ContractWindow(window.start + i * step, res.balancing_minutes)
        for i in range(res.periods_per_contract)
    ]


def resample_mean(quarter_values: list[float], n: int) -> float:
    """Aggregate one contract window's settlement-period prices to a single value.

    The coarse-resolution price is the arithmetic mean of the n fine-resolution
    prices, computed with exact summation and clamped into the input envelope
    so division rounding can never spill past the extremes (constant inputs
    resample to exactly that constant for any n).
    """
    if len(quarter_values) != n:
        raise ShapeError(f"expected {n} values, got {len(quarter_values)}")
    if not all(math.isfinite(v) for v in quarter_values):
        raise DataError(f"non-finite value in {quarter_values!r}")
    mean = math.fsum(quarter_values) / n
    return min(max(mean, min(quarter_values)), max(quarter_values))
