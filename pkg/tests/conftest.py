from datetime import datetime, timedelta, timezone

import pytest

from windbid.io import BundleMetadata, DatasetBundle
from windbid.market_model import ContractWindow, MarketResolution
from windbid.merit_order import BalancingEnergyBid
from windbid.strategy import ForecastMoments

UTC = timezone.utc
T0 = datetime(2024, 1, 1, tzinfo=UTC)


def hour(i: int = 0) -> datetime:
    return T0 + timedelta(hours=i)


def hour_window(i: int = 0) -> ContractWindow:
    return ContractWindow(hour(i), 60)


def quarter_window(i: int = 0, j: int = 0) -> ContractWindow:
    return ContractWindow(hour(i) + timedelta(minutes=15 * j), 15)


def up_bid(volume, price, product="aFRR"):
    return BalancingEnergyBid(product=product, direction="up", volume_mw=volume, price_eur_mwh=price)


def down_bid(volume, price, product="aFRR"):
    return BalancingEnergyBid(
        product=product, direction="down", volume_mw=volume, price_eur_mwh=price
    )


def flat_ladder(up_price=120.0, down_price=40.0, depth_mw=1000.0):
    """One deep segment per direction: clearing price independent of depth."""
    return [up_bid(depth_mw, up_price), down_bid(depth_mw, down_price)]


def make_bundle(hours_data, beta_mw=100.0, resolution=None) -> DatasetBundle:
    """Assemble a bundle from per-hour dicts.

    Each item: ``{"mean": float, "variance": float, "da": float,
    "production": [4], "si": [4], "bids": [4 lists]}``; shorter lists are
    allowed for deliberately incomplete hours.
    """
    res = resolution or MarketResolution()
    n = res.periods_per_contract
    forecasts, da_prices, production, system_imbalance, bids = {}, {}, {}, {}, {}
    for i, data in enumerate(hours_data):
        ts = T0 + timedelta(minutes=i * res.day_ahead_minutes)
        if "mean" in data:
            forecasts[ts] = ForecastMoments(data["mean"], data.get("variance", 0.0))
        if "da" in data:
            da_prices[ts] = data["da"]
        for j, value in enumerate(data.get("production", [])):
            production[ts + timedelta(minutes=j * res.balancing_minutes)] = value
        for j, value in enumerate(data.get("si", [])):
            system_imbalance[ts + timedelta(minutes=j * res.balancing_minutes)] = value
        for j, ladder in enumerate(data.get("bids", [])):
            bids[ts + timedelta(minutes=j * res.balancing_minutes)] = list(ladder)
        assert n >= 1
    return DatasetBundle(
        metadata=BundleMetadata(beta_mw=beta_mw, resolution=res),
        forecasts=forecasts,
        da_prices=da_prices,
        production=production,
        system_imbalance=system_imbalance,
        balancing_bids=bids,
    )


@pytest.fixture
def default_resolution():
    return MarketResolution()
