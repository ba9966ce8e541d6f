"""Tests for CAPM beta and expected returns."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.common.errors import ScoringError
from app.scoring import (
    CapmParams,
    annualize_return,
    capm_expected_return,
    estimate_beta,
    estimate_capm,
)


@pytest.fixture
def market():
    return np.random.default_rng(21).normal(0.0005, 0.01, size=300)


def test_beta_of_market_is_one(market):
    assert estimate_beta(market, market, CapmParams(beta_lookback=252)) == 1.0


def test_beta_of_doubled_market_is_two(market):
    assert estimate_beta(2.0 * market, market, CapmParams(beta_lookback=252)) == 2.0


def test_beta_of_inverse_market(market):
    assert estimate_beta(-market, market, CapmParams(beta_lookback=100)) == -1.0


def test_beta_uses_trailing_lookback(market):
    stock = market.copy()
    stock[:-50] = np.random.default_rng(1).normal(size=len(market) - 50)
    assert estimate_beta(stock, market, CapmParams(beta_lookback=50)) == 1.0


def test_beta_needs_full_lookback(market):
    with pytest.raises(ScoringError):
        estimate_beta(market[:10], market[:10], CapmParams(beta_lookback=20))


def test_beta_with_flat_market():
    with pytest.raises(ScoringError):
        estimate_beta([0.01, 0.02, 0.03], [0.5, 0.5, 0.5], CapmParams(beta_lookback=3))


def test_beta_with_nan(market):
    stock = market.copy()
    stock[-1] = np.nan
    with pytest.raises(ScoringError):
        estimate_beta(stock, market, CapmParams(beta_lookback=10))


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), lookback=st.integers(2, 120))
def test_beta_matches_two_pass_covariance(seed, lookback):
    rng = np.random.default_rng(seed)
    market = rng.normal(0.0, 0.02, size=lookback + 5)
    stock = 0.3 + rng.normal(0.0, 0.03, size=lookback + 5)
    m = [float(x) for x in market[-lookback:]]
    s = [float(x) for x in stock[-lookback:]]
    m_mean = math.fsum(m) / lookback
    s_mean = math.fsum(s) / lookback
    covariance = math.fsum((a - s_mean) * (b - m_mean) for a, b in zip(s, m))
    variance = math.fsum((b - m_mean) ** 2 for b in m)

    beta = estimate_beta(stock, market, CapmParams(beta_lookback=lookback))

    assert beta == pytest.approx(covariance / variance, rel=1e-12, abs=1e-12)


def test_annualize_return():
    assert annualize_return([0.01] * 252, 252) == pytest.approx(1.01**252 - 1, rel=1e-12)
    assert annualize_return([0.01] * 126, 252) == pytest.approx(1.01**252 - 1, rel=1e-12)
    assert annualize_return([0.0] * 10) == 0.0
    with pytest.raises(ScoringError):
        annualize_return([])


def test_expected_return_formula():
    params = CapmParams(risk_free_rate=0.02)
    assert capm_expected_return(1.5, 0.10, params) == pytest.approx(0.14, abs=1e-15)
    assert capm_expected_return(0.0, 0.10, params) == 0.02
    assert capm_expected_return(1.0, 0.10, params) == pytest.approx(0.10, abs=1e-15)


@settings(max_examples=100, deadline=None)
@given(
    beta=st.floats(-3, 3),
    market_return=st.floats(-0.9, 2.0),
    risk_free=st.floats(0.0, 0.1),
)
def test_expected_return_random_triples(beta, market_return, risk_free):
    expected = capm_expected_return(beta, market_return, CapmParams(risk_free_rate=risk_free))
    assert expected == pytest.approx(risk_free + beta * (market_return - risk_free), abs=1e-12)


def test_estimate_capm(market):
    params = CapmParams(risk_free_rate=0.01, beta_lookback=200)
    estimate = estimate_capm("AAA", 2.0 * market, market, params)
    market_return = annualize_return(market[-200:], 252)
    assert estimate.ticker == "AAA"
    assert estimate.beta == 2.0
    assert estimate.expected_return == pytest.approx(0.01 + 2.0 * (market_return - 0.01))


@pytest.mark.parametrize(
    "kwargs",
    [{"beta_lookback": 1}, {"periods_per_year": 0}, {"risk_free_rate": float("nan")}],
)
def test_invalid_params(kwargs):
    with pytest.raises(ValueError):
        CapmParams(**kwargs)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
