"""Risk-constrained day-ahead bid selection for a wind producer.

Under a one-price balancing scheme the expected profit of an hourly bid ``y``
is linear in ``y`` with slope equal to the expected day-ahead/balancing price
spread, so the unconstrained optimum is all-or-nothing: bid the full installed
capacity when the expected day-ahead price exceeds the expected balancing
price, bid zero otherwise. Capping the expected squared open position at a
risk certificate ``alpha`` confines the bid to a band of half-width

    delta = sqrt(alpha - variance)

around the point-forecast, and the optimum becomes the band edge in the
profitable direction, clamped to [0, capacity]:

    bid = min(mean + delta, cap)   if E[da price] > E[balancing price]
    bid = max(mean - delta, 0)     otherwise.

``normalized_delta`` rescales the certificate so that 0 maps to point-forecast
bidding and 1 to the all-or-nothing solution in both price branches;
``brute_force_bid`` is an independent grid-search oracle used to verify the
closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError, DomainError
from .market_model import MarketResolution

DIRECTION_SHORT = "short"
DIRECTION_LONG = "long"
DIRECTION_NEUTRAL = "neutral"


@dataclass(frozen=True)
class ForecastMoments:
    """Conditional mean and variance of one contract window's energy production."""

    mean_mwh: float
    variance_mwh2: float

    def __post_init__(self):
        if not (math.isfinite(self.mean_mwh) and math.isfinite(self.variance_mwh2)):
            raise DataError(f"non-finite forecast moments: {self}")
        if self.mean_mwh < 0:
            raise DataError(f"forecast mean must be >= 0, got {self.mean_mwh}")
        if self.variance_mwh2 < 0:
            raise DataError(f"forecast variance must be >= 0, got {self.variance_mwh2}")


@dataclass(frozen=True)
class PriceExpectation:
    """Expected day-ahead price and expected balancing price for one contract window.

    The balancing expectation must already be at day-ahead resolution (mean of
    the settlement-period prices). Any expectation source is acceptable:
    forecasts, or realized prices for an upper-bound evaluation. Negative
    prices are allowed.
    """

    da_eur_mwh: float
    bal_eur_mwh: float

    def __post_init__(self):
        if not (math.isfinite(self.da_eur_mwh) and math.isfinite(self.bal_eur_mwh)):
            raise DataError(f"non-finite price expectation: {self}")


@dataclass(frozen=True)
class RiskCertificate:
    """Cap on the expected squared open position, absolute (MWh^2) or normalized.

    Exactly one of the two modes is active. The normalized form is a fraction
    in [0, 1]: 0 reproduces the point-forecast bid, 1 the all-or-nothing bid.
    """

    alpha_mwh2: float | None = None
    alpha_tilde: float | None = None

    def __post_init__(self):
        if (self.alpha_mwh2 is None) == (self.alpha_tilde is None):
            raise DomainError("exactly one of alpha_mwh2 / alpha_tilde must be set")
        if self.alpha_mwh2 is not None and not (
            math.isfinite(self.alpha_mwh2) and self.alpha_mwh2 >= 0
        ):
            raise DomainError(f"alpha_mwh2 must be finite and >= 0, got {self.alpha_mwh2}")
        if self.alpha_tilde is not None and not (0.0 <= self.alpha_tilde <= 1.0):
            raise DomainError(f"alpha_tilde must lie in [0, 1], got {self.alpha_tilde}")

    @classmethod
    def absolute(cls, alpha_mwh2: float) -> "RiskCertificate":
        return cls(alpha_mwh2=alpha_mwh2)

    @classmethod
    def normalized(cls, alpha_tilde: float) -> "RiskCertificate":
        return cls(alpha_tilde=alpha_tilde)

    def deviation_for(
        self, forecast: ForecastMoments, beta_mw: float, res: MarketResolution
    ) -> tuple[float, bool]:
        """Allowed deviation from the point-forecast, plus an infeasibility flag."""
        if self.alpha_mwh2 is not None:
            return delta_from_alpha(self.alpha_mwh2, forecast)
        return normalized_delta(self.alpha_tilde, forecast, beta_mw, res), False


@dataclass(frozen=True)
class BidDecision:
    """One contract window's optimal bid.

    ``direction`` records which side of the point-forecast the strategy takes:
    "short" sells above the expected production (day-ahead price expected to
    beat the balancing price), "long" sells below it, "neutral" means a zero
    deviation allowance. ``clamped`` is True iff the [0, capacity] bound cut
    the deviation short.
    """

    bid_mwh: float
    direction: str
    delta_mwh: float
    clamped: bool


def contract_energy_cap_mwh(beta_mw: float, res: MarketResolution) -> float:
    """Maximum energy (MWh) the installed capacity can deliver in one contract window."""
    if not math.isfinite(beta_mw) or beta_mw < 0:
        raise DomainError(f"installed capacity must be finite and >= 0, got {beta_mw}")
    return beta_mw * (res.day_ahead_minutes / 60.0)


def delta_from_alpha(alpha_mwh2: float, forecast: ForecastMoments) -> tuple[float, bool]:
    """Deviation allowance sqrt(alpha - variance) from an absolute certificate.

    Returns ``(delta, infeasible)``. When alpha is below the forecast variance
    the constraint cannot be met by any bid; the deviation is clamped to zero
    (point-forecast is the imbalance-minimizing bid) and the flag is set so
    reports can surface a per-hour warning.
    """
    if not math.isfinite(alpha_mwh2) or alpha_mwh2 < 0:
        raise DomainError(f"risk certificate must be finite and >= 0, got {alpha_mwh2}")
    if alpha_mwh2 < forecast.variance_mwh2:
        return 0.0, True
    return math.sqrt(alpha_mwh2 - forecast.variance_mwh2), False


def normalized_delta(
    alpha_tilde: float,
    forecast: ForecastMoments,
    beta_mw: float,
    res: MarketResolution,
) -> float:
    """Deviation allowance from a normalized certificate in [0, 1].

    Linear interpolation in deviation space: ``delta = alpha_tilde * d_aon``
    with the direction-independent envelope ``d_aon = max(cap - mean, mean)``.
    The envelope makes the endpoints exact in both price branches: 0 bids the
    point-forecast, 1 reaches the all-or-nothing bid (capacity when short,
    zero when long) regardless of which branch the prices select.
    """
    if not (0.0 <= alpha_tilde <= 1.0):
        raise DomainError(f"alpha_tilde must lie in [0, 1], got {alpha_tilde}")
    cap = contract_energy_cap_mwh(beta_mw, res)
    _check_mean_within_cap(forecast, cap)
    return alpha_tilde * max(cap - forecast.mean_mwh, forecast.mean_mwh)


def compute_optimal_bid(
    prices: PriceExpectation,
    forecast: ForecastMoments,
    delta_mwh: float,
    beta_mw: float,
    res: MarketResolution,
) -> BidDecision:
    """Closed-form optimal bid for one contract window.

    Bids ``mean + delta`` (clamped to capacity) when the expected day-ahead
    price strictly exceeds the expected balancing price, ``mean - delta``
    (clamped to zero) otherwise; a price tie takes the long branch.

    The clamp comparisons are written against the same float expressions used
    by ``normalized_delta`` so the alpha_tilde = 0 / 1 endpoints are bit-exact.
    """
    if not math.isfinite(delta_mwh) or delta_mwh < 0:
        raise DomainError(f"deviation allowance must be finite and >= 0, got {delta_mwh}")
    cap = contract_energy_cap_mwh(beta_mw, res)
    _check_mean_within_cap(forecast, cap)
    mean = forecast.mean_mwh

    if prices.da_eur_mwh > prices.bal_eur_mwh:
        headroom = cap - mean
        if delta_mwh >= headroom:
            bid, clamped = cap, delta_mwh > headroom
        else:
            bid, clamped = mean + delta_mwh, False
        direction = DIRECTION_SHORT if delta_mwh > 0 else DIRECTION_NEUTRAL
    else:
        if delta_mwh >= mean:
            bid, clamped = 0.0, delta_mwh > mean
        else:
            bid, clamped = mean - delta_mwh, False
        direction = DIRECTION_LONG if delta_mwh > 0 else DIRECTION_NEUTRAL

    return BidDecision(bid_mwh=bid, direction=direction, delta_mwh=delta_mwh, clamped=clamped)


def brute_force_bid(
    prices: PriceExpectation,
    forecast: ForecastMoments,
    alpha_mwh2: float,
    beta_mw: float,
    res: MarketResolution,
    grid_step_mwh: float,
) -> float:
    """Grid-search oracle for the risk-constrained bid; verification only.

    Maximizes ``(E[da] - E[bal]) * y`` over ``y in {0, step, 2*step, ..., cap}``
    subject to ``(y - mean)^2 + variance <= alpha``, breaking objective ties
    toward the feasible point closest to the forecast mean. If no grid point
    is feasible (deviation band narrower than the grid), returns the mean
    clamped to [0, cap]. Independent of the closed form by construction.
    """
    if not math.isfinite(grid_step_mwh) or grid_step_mwh <= 0:
        raise DomainError(f"grid step must be finite and > 0, got {grid_step_mwh}")
    if not math.isfinite(alpha_mwh2) or alpha_mwh2 < 0:
        raise DomainError(f"risk certificate must be finite and >= 0, got {alpha_mwh2}")
    cap = contract_energy_cap_mwh(beta_mw, res)
    mean = forecast.mean_mwh

    steps = int(math.floor(cap / grid_step_mwh + 1e-9))
    grid = np.arange(steps + 1, dtype=float) * grid_step_mwh
    if cap - grid[-1] > 1e-12 * max(cap, 1.0):
        grid = np.append(grid, cap)

    feasible = grid[(grid - mean) ** 2 + forecast.variance_mwh2 <= alpha_mwh2]
    if feasible.size == 0:
        return min(max(mean, 0.0), cap)

    objective = (prices.da_eur_mwh - prices.bal_eur_mwh) * feasible
    best = objective.max()
    ties = feasible[objective == best]
    return float(ties[np.argmin(np.abs(ties - mean))])


def _check_mean_within_cap(forecast: ForecastMoments, cap_mwh: float) -> None:
    if forecast.mean_mwh > cap_mwh:
        raise DataError(
            f"forecast mean {forecast.mean_mwh} MWh exceeds the contract "
            f"energy cap {cap_mwh} MWh of the installed capacity"
        )
