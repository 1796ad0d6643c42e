"""Merit-order curves for one-price imbalance settlement.

The balancing price of a settlement period is set by the marginal activated
reserve bid. Activation follows two rules: automatic reserves (aFRR) are
always activated before manual reserves (mFRR) regardless of price, and
within each product the cheapest volumes are used first (cheapest upward,
most expensive downward). The required balancing volume is the opposite of
the system imbalance: a short system (negative imbalance) activates the
incremental stack, a long system the decremental stack.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import DataError
from .market_model import ContractWindow

PRODUCT_AFRR = "aFRR"
PRODUCT_MFRR = "mFRR"
PRODUCTS = (PRODUCT_AFRR, PRODUCT_MFRR)  # activation order: aFRR strictly first

DIRECTION_UP = "up"  # incremental (more generation / less consumption)
DIRECTION_DOWN = "down"  # decremental
DIRECTIONS = (DIRECTION_UP, DIRECTION_DOWN)


@dataclass(frozen=True)
class BalancingEnergyBid:
    """One reserve energy bid for one settlement period."""

    product: str
    direction: str
    volume_mw: float
    price_eur_mwh: float

    def __post_init__(self):
        if self.product not in PRODUCTS:
            raise DataError(f"unknown product {self.product!r}, expected one of {PRODUCTS}")
        if self.direction not in DIRECTIONS:
            raise DataError(f"unknown direction {self.direction!r}, expected one of {DIRECTIONS}")
        if not math.isfinite(self.volume_mw) or self.volume_mw <= 0:
            raise DataError(f"bid volume must be finite and > 0, got {self.volume_mw}")
        if not math.isfinite(self.price_eur_mwh):
            raise DataError(f"bid price must be finite, got {self.price_eur_mwh}")


@dataclass(frozen=True)
class MeritOrderCurve:
    """Activation stacks for one settlement period.

    Each stack is a tuple of ``(cumulative_volume_mw, price_eur_mwh)``
    segments in activation order: all aFRR segments first, then all mFRR
    segments; within a product, prices are non-decreasing on the up stack and
    non-increasing on the down stack. Cumulative volumes increase strictly.
    """

    quarter: ContractWindow
    up_stack: tuple[tuple[float, float], ...]
    down_stack: tuple[tuple[float, float], ...]

    @property
    def up_volume_mw(self) -> float:
        return self.up_stack[-1][0] if self.up_stack else 0.0

    @property
    def down_volume_mw(self) -> float:
        return self.down_stack[-1][0] if self.down_stack else 0.0


class ClearingResult(NamedTuple):
    """Clearing price plus flags for the documented edge conventions."""

    price_eur_mwh: float
    scarcity: bool = False
    zero_imbalance: bool = False


def build_curve(bids: list[BalancingEnergyBid], quarter: ContractWindow) -> MeritOrderCurve:
    """Assemble the activation stacks of one settlement period from its bids.

    Callers are responsible for passing only the bids belonging to
    ``quarter``. Equal-price bids within one product are merged into a single
    segment (volumes summed); the clearing outcome is unaffected and curves
    stay compact. The result is independent of the input order.
    """
    up = [b for b in bids if b.direction == DIRECTION_UP]
    down = [b for b in bids if b.direction == DIRECTION_DOWN]
    return MeritOrderCurve(
        quarter=quarter,
        up_stack=_stack(up, cheapest_first=True),
        down_stack=_stack(down, cheapest_first=False),
    )


def _stack(
    bids: list[BalancingEnergyBid], cheapest_first: bool
) -> tuple[tuple[float, float], ...]:
    segments: list[tuple[float, float]] = []  # (volume, price) per merged segment
    for product in PRODUCTS:
        by_price: dict[float, list[float]] = {}
        for b in bids:
            if b.product == product:
                by_price.setdefault(b.price_eur_mwh, []).append(b.volume_mw)
        for price in sorted(by_price, reverse=not cheapest_first):
            segments.append((math.fsum(by_price[price]), price))
    # exact prefix sums keep total stack volume equal to the ingested volume sum
    volumes = [v for v, _ in segments]
    return tuple(
        (math.fsum(volumes[: i + 1]), price) for i, (_, price) in enumerate(segments)
    )


def clearing_price(curve: MeritOrderCurve, system_imbalance_mw: float) -> ClearingResult:
    """Price the settlement period for a given (average) system imbalance.

    The required balancing volume is the opposite of the system imbalance.
    A positive requirement walks the up stack, a negative one the down stack;
    the price is that of the segment covering the requirement, with a volume
    exactly on a segment boundary clearing at the segment ending there.

    Documented conventions for cases the activation rules leave open:

    * zero imbalance: the first up-stack segment's price (first down-stack
      segment if the up stack is empty, else 0.0), flagged ``zero_imbalance``;
    * requirement beyond the offered volume: the deepest segment's price
      (0.0 on an empty stack), flagged ``scarcity``, so long evaluations never
      abort mid-horizon.
    """
    if not math.isfinite(system_imbalance_mw):
        raise DataError(f"system imbalance must be finite, got {system_imbalance_mw}")
    required_mw = -system_imbalance_mw

    if required_mw == 0:
        if curve.up_stack:
            return ClearingResult(curve.up_stack[0][1], zero_imbalance=True)
        if curve.down_stack:
            return ClearingResult(curve.down_stack[0][1], zero_imbalance=True)
        return ClearingResult(0.0, zero_imbalance=True)

    stack = curve.up_stack if required_mw > 0 else curve.down_stack
    volume = abs(required_mw)
    for cumulative_mw, price in stack:
        if volume <= cumulative_mw:
            return ClearingResult(price)
    return ClearingResult(stack[-1][1] if stack else 0.0, scarcity=True)
