import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from windbid.errors import DataError, DomainError
from windbid.market_model import MarketResolution
from windbid.strategy import (
    BidDecision,
    ForecastMoments,
    PriceExpectation,
    RiskCertificate,
    brute_force_bid,
    compute_optimal_bid,
    contract_energy_cap_mwh,
    delta_from_alpha,
    normalized_delta,
)

RES = MarketResolution()
CAP = 100.0  # MWh per hour at beta = 100 MW
BETA = 100.0


def test_forecast_moments_validation():
    ForecastMoments(0.0, 0.0)
    with pytest.raises(DataError):
        ForecastMoments(-1.0, 4.0)
    with pytest.raises(DataError):
        ForecastMoments(10.0, -4.0)
    with pytest.raises(DataError):
        ForecastMoments(float("nan"), 4.0)


def test_contract_energy_cap_scales_with_resolution():
    assert contract_energy_cap_mwh(100.0, MarketResolution(60, 15)) == 100.0
    assert contract_energy_cap_mwh(100.0, MarketResolution(30, 15)) == 50.0


def test_delta_from_alpha_hand_values():
    assert delta_from_alpha(500.0, ForecastMoments(60.0, 100.0)) == (20.0, False)
    assert delta_from_alpha(100.0, ForecastMoments(60.0, 100.0)) == (0.0, False)
    # alpha below the variance: no bid can satisfy the constraint
    assert delta_from_alpha(50.0, ForecastMoments(60.0, 100.0)) == (0.0, True)
    with pytest.raises(DomainError):
        delta_from_alpha(-1.0, ForecastMoments(60.0, 100.0))


def test_normalized_delta_endpoints_and_midpoint():
    f = ForecastMoments(60.0, 25.0)
    assert normalized_delta(0.0, f, BETA, RES) == 0.0
    assert normalized_delta(1.0, f, BETA, RES) == 60.0  # max(100-60, 60)
    assert normalized_delta(0.5, f, BETA, RES) == 30.0
    with pytest.raises(DomainError):
        normalized_delta(1.5, f, BETA, RES)
    with pytest.raises(DomainError):
        normalized_delta(-0.1, f, BETA, RES)


def test_normalized_delta_reaches_all_or_nothing_in_both_branches():
    f = ForecastMoments(60.0, 25.0)
    delta = normalized_delta(1.0, f, BETA, RES)
    short = compute_optimal_bid(PriceExpectation(80.0, 40.0), f, delta, BETA, RES)
    long = compute_optimal_bid(PriceExpectation(40.0, 80.0), f, delta, BETA, RES)
    assert short.bid_mwh == CAP and short.clamped  # min(120, 100)
    assert long.bid_mwh == 0.0  # max(60 - 60, 0): bound touched, not cut
    assert not long.clamped


def test_compute_optimal_bid_short_unclamped():
    d = compute_optimal_bid(PriceExpectation(80, 40), ForecastMoments(60, 100), 20.0, BETA, RES)
    assert d == BidDecision(bid_mwh=80.0, direction="short", delta_mwh=20.0, clamped=False)


def test_compute_optimal_bid_short_clamped():
    d = compute_optimal_bid(PriceExpectation(80, 40), ForecastMoments(90, 100), 20.0, BETA, RES)
    assert d.bid_mwh == 100.0 and d.direction == "short" and d.clamped


def test_compute_optimal_bid_long_clamped():
    d = compute_optimal_bid(PriceExpectation(40, 80), ForecastMoments(30, 100), 50.0, BETA, RES)
    assert d.bid_mwh == 0.0 and d.direction == "long" and d.clamped


def test_compute_optimal_bid_price_tie_takes_long_branch():
    d = compute_optimal_bid(PriceExpectation(50, 50), ForecastMoments(60, 100), 20.0, BETA, RES)
    assert d.bid_mwh == 40.0 and d.direction == "long"


def test_compute_optimal_bid_rejects_bad_inputs():
    f = ForecastMoments(60, 100)
    with pytest.raises(DomainError):
        compute_optimal_bid(PriceExpectation(80, 40), f, -1.0, BETA, RES)
    with pytest.raises(DataError):
        compute_optimal_bid(PriceExpectation(80, 40), ForecastMoments(150, 0), 0.0, BETA, RES)


def test_risk_certificate_modes():
    with pytest.raises(DomainError):
        RiskCertificate()
    with pytest.raises(DomainError):
        RiskCertificate(alpha_mwh2=1.0, alpha_tilde=0.5)
    f = ForecastMoments(60.0, 100.0)
    assert RiskCertificate.absolute(500.0).deviation_for(f, BETA, RES) == (20.0, False)
    assert RiskCertificate.absolute(50.0).deviation_for(f, BETA, RES) == (0.0, True)
    delta, infeasible = RiskCertificate.normalized(0.5).deviation_for(f, BETA, RES)
    assert delta == 30.0 and not infeasible


def test_brute_force_matches_spec_examples():
    f = ForecastMoments(60.0, 100.0)
    assert brute_force_bid(PriceExpectation(80, 40), f, 500.0, BETA, RES, 0.01) == pytest.approx(
        80.0, abs=0.01
    )
    # constraint collapses to the single point y = mean
    assert brute_force_bid(PriceExpectation(80, 40), f, 100.0, BETA, RES, 0.01) == pytest.approx(
        60.0, abs=0.01
    )
    # unconstrained and balancing-favourable: bid zero
    assert brute_force_bid(PriceExpectation(40, 80), f, 1e9, BETA, RES, 0.01) == 0.0


# --- randomized properties ---------------------------------------------------

moments = st.builds(
    ForecastMoments,
    mean_mwh=st.floats(min_value=0.0, max_value=CAP),
    variance_mwh2=st.floats(min_value=0.0, max_value=CAP * CAP / 4),
)
prices = st.builds(
    PriceExpectation,
    da_eur_mwh=st.floats(min_value=-500, max_value=500),
    bal_eur_mwh=st.floats(min_value=-500, max_value=500),
)


@settings(max_examples=150, deadline=None)
@given(p=prices, f=moments, alpha_extra=st.floats(min_value=0.0, max_value=CAP * CAP))
def test_analytical_bid_matches_grid_oracle(p, f, alpha_extra):
    assume(abs(p.da_eur_mwh - p.bal_eur_mwh) > 1e-6)  # grid oracle breaks price ties differently
    alpha = f.variance_mwh2 + alpha_extra
    step = 0.05
    delta, infeasible = delta_from_alpha(alpha, f)
    assert not infeasible
    analytical = compute_optimal_bid(p, f, delta, BETA, RES).bid_mwh
    oracle = brute_force_bid(p, f, alpha, BETA, RES, step)
    assert abs(analytical - oracle) <= step + 1e-9


@given(p=prices, f=moments, alpha_extra=st.floats(min_value=0.0, max_value=CAP * CAP))
def test_feasibility_certificate(p, f, alpha_extra):
    alpha = f.variance_mwh2 + alpha_extra
    delta, infeasible = delta_from_alpha(alpha, f)
    assert not infeasible
    bid = compute_optimal_bid(p, f, delta, BETA, RES).bid_mwh
    assert (bid - f.mean_mwh) ** 2 + f.variance_mwh2 <= alpha * (1 + 1e-9) + 1e-12


@given(
    p=prices,
    f=moments,
    alpha_lo=st.floats(min_value=0.0, max_value=CAP * CAP),
    alpha_hi=st.floats(min_value=0.0, max_value=CAP * CAP),
)
def test_objective_monotone_in_certificate(p, f, alpha_lo, alpha_hi):
    lo, hi = sorted([f.variance_mwh2 + alpha_lo, f.variance_mwh2 + alpha_hi])
    spread = p.da_eur_mwh - p.bal_eur_mwh
    bid_lo = compute_optimal_bid(p, f, delta_from_alpha(lo, f)[0], BETA, RES).bid_mwh
    bid_hi = compute_optimal_bid(p, f, delta_from_alpha(hi, f)[0], BETA, RES).bid_mwh
    assert spread * bid_hi >= spread * bid_lo


@given(f=moments, delta=st.floats(min_value=0.0, max_value=CAP))
def test_branch_symmetry_when_unclamped(f, delta):
    assume(delta < CAP - f.mean_mwh and delta < f.mean_mwh)
    short = compute_optimal_bid(PriceExpectation(100.0, 10.0), f, delta, BETA, RES)
    long = compute_optimal_bid(PriceExpectation(10.0, 100.0), f, delta, BETA, RES)
    assert not short.clamped and not long.clamped
    assert short.bid_mwh == f.mean_mwh + delta
    assert long.bid_mwh == f.mean_mwh - delta


@given(
    p=prices,
    f=moments,
    a1=st.floats(min_value=0.0, max_value=1.0),
    a2=st.floats(min_value=0.0, max_value=1.0),
)
def test_deviation_monotone_in_normalized_certificate(p, f, a1, a2):
    a1, a2 = sorted([a1, a2])
    bid1 = compute_optimal_bid(p, f, normalized_delta(a1, f, BETA, RES), BETA, RES).bid_mwh
    bid2 = compute_optimal_bid(p, f, normalized_delta(a2, f, BETA, RES), BETA, RES).bid_mwh
    assert abs(bid2 - f.mean_mwh) >= abs(bid1 - f.mean_mwh)


@given(f=moments, p=prices)
def test_normalized_endpoints_are_exact(f, p):
    point = compute_optimal_bid(p, f, normalized_delta(0.0, f, BETA, RES), BETA, RES)
    assert point.bid_mwh == f.mean_mwh
    aon = compute_optimal_bid(p, f, normalized_delta(1.0, f, BETA, RES), BETA, RES)
    assert aon.bid_mwh in (0.0, CAP)


@settings(max_examples=50, deadline=None)
@given(
    f=moments,
    p=prices,
    alpha=st.floats(min_value=0.0, max_value=2 * CAP * CAP),
    step=st.sampled_from([0.01, 0.05, 0.5]),
)
def test_oracle_infeasible_fallback_stays_near_mean(f, p, alpha, step):
    bid = brute_force_bid(p, f, alpha, BETA, RES, step)
    if alpha < f.variance_mwh2:
        assert bid == min(max(f.mean_mwh, 0.0), CAP)
    else:
        band = math.sqrt(alpha - f.variance_mwh2)
        assert (bid - f.mean_mwh) ** 2 <= (band + step) ** 2 + 1e-9


def test_oracle_grid_includes_capacity_endpoint():
    f = ForecastMoments(99.99, 0.0)
    # spread favours selling; with a huge certificate the oracle must reach cap
    bid = brute_force_bid(PriceExpectation(500, -500), f, 1e8, BETA, RES, 0.07)
    assert bid == CAP


@given(
    means=st.floats(min_value=0.0, max_value=CAP),
    alpha_tilde=st.floats(min_value=0.0, max_value=1.0),
)
def test_normalized_deviation_never_negative(means, alpha_tilde):
    f = ForecastMoments(means, 0.0)
    assert normalized_delta(alpha_tilde, f, BETA, RES) >= 0.0
