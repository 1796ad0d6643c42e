"""Profit accounting across the day-ahead and balancing markets.

A day-ahead bid of ``y`` MWh earns ``da_price * y`` and leaves a balancing
obligation of ``y / n`` MWh in each of the contract's n settlement periods.
The open position of a period, production minus obligation, is settled at the
period's one-price balancing price: helping positions earn, harming positions
pay, with a single price for both.

The producer's own position also moves the system imbalance: an open position
of ``x`` MWh over a period of ``r`` minutes shifts the average imbalance by
``(60 / r) * x`` MW (a factor 4 at 15-minute settlement). The two evaluation
modes differ only in the imbalance fed to the merit-order engine:
``no_impact`` prices at the historical imbalance, ``price_impact`` at the
shifted one. Both modes price through the merit-order engine (never raw
exchange-published prices) so the comparison is apples-to-apples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DataError, DomainError
from .market_model import ContractWindow, MarketResolution, sub_windows
from .merit_order import MeritOrderCurve, clearing_price

MODE_NO_IMPACT = "no_impact"
MODE_PRICE_IMPACT = "price_impact"
MODES = (MODE_NO_IMPACT, MODE_PRICE_IMPACT)


@dataclass(frozen=True)
class QuarterOutcome:
    """Realized settlement of one settlement period."""

    quarter: ContractWindow
    production_mwh: float
    obligation_mwh: float
    historical_si_mw: float
    projected_si_mw: float
    balancing_price_eur_mwh: float
    balancing_payoff_eur: float
    scarcity: bool

    @property
    def open_position_mwh(self) -> float:
        return self.production_mwh - self.obligation_mwh

    @property
    def sign_flip(self) -> bool:
        """True when the producer's position switched the imbalance direction."""
        return _sign(self.projected_si_mw) != _sign(self.historical_si_mw)


@dataclass(frozen=True)
class HourLedgerEntry:
    """Realized profit of one contract window under one evaluation mode."""

    hour: ContractWindow
    bid_mwh: float
    da_price_eur_mwh: float
    da_revenue_eur: float
    quarters: tuple[QuarterOutcome, ...]
    total_profit_eur: float
    mode: str

    @property
    def balancing_payoff_eur(self) -> float:
        return math.fsum(q.balancing_payoff_eur for q in self.quarters)

    @property
    def scarcity_quarters(self) -> int:
        return sum(1 for q in self.quarters if q.scarcity)

    @property
    def sign_flip(self) -> bool:
        return any(q.sign_flip for q in self.quarters)


def split_obligation(bid_mwh: float, n: int) -> list[float]:
    """Split a contract bid into n equal per-period balancing obligations.

    The last element absorbs the division rounding so the left-to-right sum
    reconstructs the bid exactly.
    """
    if n < 1:
        raise DomainError(f"period count must be >= 1, got {n}")
    if not math.isfinite(bid_mwh) or bid_mwh < 0:
        raise DomainError(f"bid must be finite and >= 0, got {bid_mwh}")
    if n == 1:
        return [bid_mwh]
    share = bid_mwh / n
    partial = 0.0
    for _ in range(n - 1):
        partial += share
    return [share] * (n - 1) + [bid_mwh - partial]


def project_system_imbalance(
    historical_si_mw: float, open_position_mwh: float, balancing_minutes: int
) -> float:
    """Average system imbalance after adding the producer's open position.

    Energy over a sub-hourly period converts to average power with the integer
    factor ``60 / balancing_minutes`` (4 at 15-minute settlement, 1 at hourly).
    """
    if balancing_minutes <= 0 or 60 % balancing_minutes != 0:
        raise DomainError(f"settlement resolution {balancing_minutes} min must divide 60")
    return historical_si_mw + (60 // balancing_minutes) * open_position_mwh


def settle_hour(
    hour: ContractWindow,
    bid_mwh: float,
    da_price_eur_mwh: float,
    production_mwh: list[float],
    system_imbalance_mw: list[float],
    curves: list[MeritOrderCurve],
    mode: str,
    res: MarketResolution,
) -> HourLedgerEntry:
    """Settle one contract window against its n settlement periods.

    ``production_mwh``, ``system_imbalance_mw`` and ``curves`` must each hold
    exactly one value per settlement period, in time order. The projected
    imbalance is recorded for every period regardless of mode; the mode only
    selects which imbalance the merit-order engine prices.
    """
    if mode not in MODES:
        raise DomainError(f"unknown mode {mode!r}, expected one of {MODES}")
    n = res.periods_per_contract
    for name, series in (
        ("production", production_mwh),
        ("system imbalance", system_imbalance_mw),
        ("merit-order curves", curves),
    ):
        if len(series) != n:
            raise DataError(
                f"hour {hour.start.isoformat()}: expected {n} {name} values, got {len(series)}"
            )

    quarters = []
    obligations = split_obligation(bid_mwh, n)
    for window, production, obligation, si, curve in zip(
        sub_windows(hour, res), production_mwh, obligations, system_imbalance_mw, curves
    ):
        position = production - obligation
        projected = project_system_imbalance(si, position, res.balancing_minutes)
        cleared = clearing_price(curve, si if mode == MODE_NO_IMPACT else projected)
        quarters.append(
            QuarterOutcome(
                quarter=window,
                production_mwh=production,
                obligation_mwh=obligation,
                historical_si_mw=si,
                projected_si_mw=projected,
                balancing_price_eur_mwh=cleared.price_eur_mwh,
                balancing_payoff_eur=cleared.price_eur_mwh * position,
                scarcity=cleared.scarcity,
            )
        )

    da_revenue = da_price_eur_mwh * bid_mwh
    return HourLedgerEntry(
        hour=hour,
        bid_mwh=bid_mwh,
        da_price_eur_mwh=da_price_eur_mwh,
        da_revenue_eur=da_revenue,
        quarters=tuple(quarters),
        total_profit_eur=math.fsum([da_revenue] + [q.balancing_payoff_eur for q in quarters]),
        mode=mode,
    )


def _sign(value: float) -> int:
    if value > 0:
        return 1
    if value < 0:
        return -1
    return 0
