import math
from datetime import datetime, timedelta, timezone

import pytest
from hypothesis import given, strategies as st

from windbid.errors import AlignmentError, DataError, ShapeError
from windbid.market_model import ContractWindow, MarketResolution, resample_mean, sub_windows

UTC = timezone.utc


def test_resolution_requires_divisibility():
    MarketResolution(60, 15)
    MarketResolution(60, 60)
    with pytest.raises(DataError):
        MarketResolution(60, 25)
    with pytest.raises(DataError):
        MarketResolution(0, 15)


def test_periods_per_contract():
    assert MarketResolution(60, 15).periods_per_contract == 4
    assert MarketResolution(60, 60).periods_per_contract == 1
    assert MarketResolution(60, 30).periods_per_contract == 2


def test_window_alignment():
    ContractWindow(datetime(2024, 1, 1, 10, tzinfo=UTC), 60)
    ContractWindow(datetime(2024, 1, 1, 10, 45, tzinfo=UTC), 15)
    with pytest.raises(AlignmentError):
        ContractWindow(datetime(2024, 1, 1, 10, 7, tzinfo=UTC), 60)
    with pytest.raises(AlignmentError):
        ContractWindow(datetime(2024, 1, 1, 10, 0, 30, tzinfo=UTC), 60)
    with pytest.raises(AlignmentError):
        ContractWindow(datetime(2024, 1, 1, 10), 60)  # naive timestamp


def test_sub_windows_quarters():
    res = MarketResolution(60, 15)
    parent = ContractWindow(datetime(2024, 1, 1, 10, tzinfo=UTC), 60)
    windows = sub_windows(parent, res)
    assert [w.start.minute for w in windows] == [0, 15, 30, 45]
    assert all(w.resolution_minutes == 15 for w in windows)


def test_sub_windows_identity():
    res = MarketResolution(60, 60)
    parent = ContractWindow(datetime(2024, 1, 1, 10, tzinfo=UTC), 60)
    assert sub_windows(parent, res) == [parent]


def test_sub_windows_rejects_wrong_resolution():
    res = MarketResolution(60, 15)
    quarter = ContractWindow(datetime(2024, 1, 1, 10, 15, tzinfo=UTC), 15)
    with pytest.raises(AlignmentError):
        sub_windows(quarter, res)


@given(
    hour=st.integers(min_value=0, max_value=24 * 365),
    balancing=st.sampled_from([5, 10, 15, 20, 30, 60]),
)
def test_sub_windows_partition_property(hour, balancing):
    res = MarketResolution(60, balancing)
    start = datetime(2024, 1, 1, tzinfo=UTC) + timedelta(hours=hour)
    parent = ContractWindow(start, 60)
    windows = sub_windows(parent, res)
    assert len(windows) == res.periods_per_contract
    assert windows[0].start == parent.start
    assert windows[-1].end == parent.end
    for a, b in zip(windows, windows[1:]):
        assert a.end == b.start  # consecutive, non-overlapping


def test_resample_mean_examples():
    assert resample_mean([10, 20, 30, 40], 4) == 25
    assert resample_mean([7.5, 7.5, 7.5, 7.5], 4) == 7.5
    assert resample_mean([-100, 300, 0, 0], 4) == 50


def test_resample_mean_errors():
    with pytest.raises(ShapeError):
        resample_mean([1, 2, 3], 4)
    with pytest.raises(DataError):
        resample_mean([1.0, float("nan"), 2.0, 3.0], 4)
    with pytest.raises(DataError):
        resample_mean([1.0, float("inf"), 2.0, 3.0], 4)


finite_prices = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)


@given(values=st.lists(finite_prices, min_size=1, max_size=12), shift=finite_prices)
def test_resample_mean_translation_equivariant(values, shift):
    n = len(values)
    base = resample_mean(values, n)
    shifted = resample_mean([v + shift for v in values], n)
    assert shifted == pytest.approx(base + shift, abs=1e-6)


@given(values=st.lists(finite_prices, min_size=1, max_size=12))
def test_resample_mean_bounded_by_inputs(values):
    mean = resample_mean(values, len(values))
    assert min(values) <= mean <= max(values)


@given(constant=finite_prices, n=st.integers(min_value=1, max_value=12))
def test_resample_mean_constant_exact(constant, n):
    assert resample_mean([constant] * n, n) == constant
