"""Seeded synthetic market datasets at desk scale.

Real balancing-bid ladders and SCADA production series are proprietary, so
evaluations run on generated data with the same shape: an autocorrelated
day-ahead price with a diurnal swing, an autocorrelated system imbalance, a
smooth wind capacity-factor process with noisy realized production, and
piecewise-constant balancing ladders per settlement period. Ladder prices
anchor to the hour's day-ahead price: incremental segments start slightly
above it, decremental segments slightly below, and successive segments step
away convexly, so small imbalances clear near the day-ahead price while deep
excursions (for instance a large producer flipping the imbalance direction)
clear far from it.

Identical scenario parameters and seed yield a byte-identical dataset.

Two presets are checked in:

* ``small_producer``: installed capacity tiny against the imbalance scale,
  so the producer's position never moves the clearing price materially;
* ``large_producer``: installed capacity comparable to the imbalance scale
  with modest price spreads and a steep ladder tail, so all-or-nothing
  positions flip the imbalance direction and settle at penal prices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from .errors import DomainError
from .io import BundleMetadata, DatasetBundle, write_bundle
from .market_model import MarketResolution
from .merit_order import (
    DIRECTION_DOWN,
    DIRECTION_UP,
    PRODUCT_AFRR,
    PRODUCT_MFRR,
    BalancingEnergyBid,
)
from .strategy import ForecastMoments


@dataclass(frozen=True)
class SyntheticScenario:
    """Full parameterization of one synthetic dataset."""

    seed: int
    hours: int
    beta_mw: float
    start: datetime = datetime(2024, 1, 1, tzinfo=timezone.utc)
    resolution: MarketResolution = MarketResolution()

    # day-ahead price process (EUR/MWh)
    da_price_mean: float = 90.0
    da_price_daily_amplitude: float = 18.0
    da_price_volatility: float = 22.0

    # balancing ladder shape, prices relative to the hour's day-ahead price
    up_offset_eur: float = 8.0
    down_offset_eur: float = 8.0
    premium_jitter_eur: float = 20.0
    price_step_eur: float = 16.0
    price_step_growth: float = 1.8
    afrr_segments: int = 3
    mfrr_segments: int = 4
    afrr_segment_mw: tuple[float, float] = (100.0, 160.0)
    mfrr_segment_mw: tuple[float, float] = (120.0, 200.0)

    # forecast and production errors
    forecast_bias_mwh: float = 0.0
    forecast_dispersion: float = 0.05  # hourly error std, relative to the energy cap

    # system imbalance process (MW, settlement resolution)
    si_sigma_mw: float = 125.0
    si_rho: float = 0.85

    def __post_init__(self):
        if self.hours < 1:
            raise DomainError(f"hours must be >= 1, got {self.hours}")
        if self.beta_mw <= 0:
            raise DomainError(f"beta_mw must be > 0, got {self.beta_mw}")
        if self.afrr_segments < 1 or self.mfrr_segments < 1:
            raise DomainError("each product needs at least one ladder segment")


_PRESETS: dict[str, dict] = {
    "small_producer": dict(
        beta_mw=0.1,
        forecast_dispersion=0.05,
        up_offset_eur=8.0,
        down_offset_eur=8.0,
        premium_jitter_eur=20.0,
        price_step_eur=10.0,
        price_step_growth=1.6,
        afrr_segments=2,
        mfrr_segments=2,
        afrr_segment_mw=(180.0, 280.0),
        mfrr_segment_mw=(280.0, 420.0),
    ),
    "large_producer": dict(
        beta_mw=300.0,
        forecast_dispersion=0.05,
        up_offset_eur=6.0,
        down_offset_eur=6.0,
        premium_jitter_eur=16.0,
        price_step_eur=18.0,
        price_step_growth=1.9,
        afrr_segments=3,
        mfrr_segments=4,
        afrr_segment_mw=(100.0, 160.0),
        mfrr_segment_mw=(120.0, 200.0),
    ),
}

PRESET_NAMES = tuple(sorted(_PRESETS))


def preset_scenario(name: str, seed: int = 0, hours: int = 2000, **overrides) -> SyntheticScenario:
    """A checked-in preset, optionally overridden field by field."""
    if name not in _PRESETS:
        raise DomainError(f"unknown preset {name!r}, expected one of {PRESET_NAMES}")
    scenario = SyntheticScenario(seed=seed, hours=hours, **_PRESETS[name])
    return replace(scenario, **overrides) if overrides else scenario


def build_bundle(scenario: SyntheticScenario) -> DatasetBundle:
    """Generate the dataset in memory."""
    res = scenario.resolution
    n = res.periods_per_contract
    hours, quarters = scenario.hours, scenario.hours * n
    cap = scenario.beta_mw * res.day_ahead_minutes / 60.0
    quarter_cap = cap / n
    rng = np.random.default_rng(scenario.seed)

    # fixed draw order; any parameter change is allowed to change the stream
    da_noise = _ar1(rng, hours, 0.95)
    wind = _ar1(rng, hours, 0.97)
    hour_error = rng.standard_normal(hours)
    quarter_noise = rng.standard_normal(quarters)
    si = scenario.si_sigma_mw * _ar1(rng, quarters, scenario.si_rho)

    ka, km = scenario.afrr_segments, scenario.mfrr_segments
    segments = ka + km
    up_jitter = rng.uniform(0.0, scenario.premium_jitter_eur, quarters)
    down_jitter = rng.uniform(0.0, scenario.premium_jitter_eur, quarters)
    up_volumes = np.hstack(
        [
            rng.uniform(*scenario.afrr_segment_mw, (quarters, ka)),
            rng.uniform(*scenario.mfrr_segment_mw, (quarters, km)),
        ]
    )
    down_volumes = np.hstack(
        [
            rng.uniform(*scenario.afrr_segment_mw, (quarters, ka)),
            rng.uniform(*scenario.mfrr_segment_mw, (quarters, km)),
        ]
    )
    up_steps = rng.uniform(0.6, 1.4, (quarters, segments - 1))
    down_steps = rng.uniform(0.6, 1.4, (quarters, segments - 1))
    # the product hand-over sometimes steps down in price: mFRR may undercut
    # the last aFRR segment, exercising the activation-order rule
    up_steps[:, ka - 1] = rng.uniform(-0.3, 1.2, quarters)
    down_steps[:, ka - 1] = rng.uniform(-0.3, 1.2, quarters)

    hour_of_day = (np.arange(hours) * res.day_ahead_minutes / 60.0) % 24
    da_prices_arr = (
        scenario.da_price_mean
        + scenario.da_price_daily_amplitude * np.sin(2 * math.pi * (hour_of_day - 9.0) / 24.0)
        + scenario.da_price_volatility * da_noise
    )

    capacity_factor = np.clip(0.5 + 0.38 * np.tanh(0.9 * wind), 0.02, 0.98)
    mean_mwh = capacity_factor * cap
    sigma_mwh = scenario.forecast_dispersion * cap * (
        0.4 + 2.4 * capacity_factor * (1.0 - capacity_factor)
    )

    step_scale = scenario.price_step_eur * scenario.price_step_growth ** np.arange(segments - 1)

    hour_step = timedelta(minutes=res.day_ahead_minutes)
    quarter_step = timedelta(minutes=res.balancing_minutes)

    forecasts, da_prices = {}, {}
    production, system_imbalance, balancing_bids = {}, {}, {}

    for h in range(hours):
        hour_ts = scenario.start + h * hour_step
        forecasts[hour_ts] = ForecastMoments(
            mean_mwh=float(mean_mwh[h]), variance_mwh2=float(sigma_mwh[h] ** 2)
        )
        da_prices[hour_ts] = float(da_prices_arr[h])
        realized_error = scenario.forecast_bias_mwh + sigma_mwh[h] * hour_error[h]

        for j in range(n):
            q = h * n + j
            quarter_ts = hour_ts + j * quarter_step
            energy = (
                mean_mwh[h] / n
                + realized_error / n
                + 0.25 * sigma_mwh[h] / n * quarter_noise[q]
            )
            production[quarter_ts] = float(np.clip(energy, 0.0, quarter_cap))
            system_imbalance[quarter_ts] = float(si[q])

            up_prices = da_prices_arr[h] + scenario.up_offset_eur + up_jitter[q] + np.concatenate(
                ([0.0], np.cumsum(step_scale * up_steps[q]))
            )
            down_prices = (
                da_prices_arr[h]
                - scenario.down_offset_eur
                - down_jitter[q]
                - np.concatenate(([0.0], np.cumsum(step_scale * down_steps[q])))
            )
            bids = []
            for k in range(segments):
                product = PRODUCT_AFRR if k < ka else PRODUCT_MFRR
                bids.append(
                    BalancingEnergyBid(
                        product=product,
                        direction=DIRECTION_UP,
                        volume_mw=float(up_volumes[q, k]),
                        price_eur_mwh=float(up_prices[k]),
                    )
                )
                bids.append(
                    BalancingEnergyBid(
                        product=product,
                        direction=DIRECTION_DOWN,
                        volume_mw=float(down_volumes[q, k]),
                        price_eur_mwh=float(down_prices[k]),
                    )
                )
            balancing_bids[quarter_ts] = bids

    return DatasetBundle(
        metadata=BundleMetadata(beta_mw=scenario.beta_mw, resolution=res),
        forecasts=forecasts,
        da_prices=da_prices,
        production=production,
        system_imbalance=system_imbalance,
        balancing_bids=balancing_bids,
    )


def generate_synthetic(scenario: SyntheticScenario, out_dir: str | Path) -> dict[str, Path]:
    """Generate the dataset and write it as a loadable dataset directory."""
    return write_bundle(build_bundle(scenario), out_dir)


def _ar1(rng: np.random.Generator, size: int, rho: float) -> np.ndarray:
    """Stationary AR(1) path with unit marginal variance."""
    shocks = rng.standard_normal(size)
    path = np.empty(size)
    path[0] = shocks[0]
    scale = math.sqrt(1.0 - rho * rho)
    for i in range(1, size):
        path[i] = rho * path[i - 1] + scale * shocks[i]
    return path
