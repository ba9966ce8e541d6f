"""CAPM beta and expected-return estimation.

Beta is ``Cov(R_i, R_m) / Var(R_m)`` over a trailing lookback; the expected
return is ``R_f + beta * (R_m - R_f)`` with ``R_m`` the market return over the
same lookback, compounded and annualized.
"""

import logging
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from app.common.errors import ScoringError

logger = logging.getLogger(__name__)

ArrayLike = Union[Sequence[float], np.ndarray]

TRADING_DAYS_PER_YEAR = 252


@dataclass(frozen=True)
class CapmParams:
    """CAPM estimation settings.

    Attributes:
        risk_free_rate: Annualized risk-free rate
        beta_lookback: Trailing trading days used for beta and market return
        periods_per_year: Trading days per year used for annualization
    """

    risk_free_rate: float = 0.02
    beta_lookback: int = TRADING_DAYS_PER_YEAR
    periods_per_year: int = TRADING_DAYS_PER_YEAR

    def __post_init__(self):
        if not math.isfinite(self.risk_free_rate):
            raise ValueError("risk_free_rate must be finite")
        if int(self.beta_lookback) != self.beta_lookback or self.beta_lookback < 2:
            raise ValueError(f"beta_lookback must be an integer >= 2, got {self.beta_lookback}")
        if int(self.periods_per_year) != self.periods_per_year or self.periods_per_year < 1:
            raise ValueError(
                f"periods_per_year must be an integer >= 1, got {self.periods_per_year}"
            )


@dataclass(frozen=True)
class CapmEstimate:
    """Estimated beta and annualized CAPM expected return of one ticker."""

    ticker: str
    beta: float
    expected_return: float


def estimate_beta(
    stock_returns: ArrayLike, market_returns: ArrayLike, params: CapmParams
) -> float:
    """Estimate beta over the trailing ``params.beta_lookback`` returns.

    Args:
        stock_returns: Daily returns of the stock
        market_returns: Daily market returns on the same dates

    Returns:
        Sample covariance divided by sample market variance

    Raises:
        ScoringError: If either series is shorter than the lookback, the
            series are not finite, or the market variance is zero
    """
    stock = np.asarray(stock_returns, dtype=float)
    market = np.asarray(market_returns, dtype=float)
    lookback = params.beta_lookback
    if len(stock) < lookback or len(market) < lookback:
        raise ScoringError(
            f"beta needs {lookback} returns, got {len(stock)} stock and {len(market)} market"
        )

    stock = stock[-lookback:]
    market = market[-lookback:]
    if not (np.all(np.isfinite(stock)) and np.all(np.isfinite(market))):
        raise ScoringError("beta inputs must be finite")

    # Two-pass form; the (n - 1) normalisation cancels in the ratio.
    market_dev = market - market.mean()
    stock_dev = stock - stock.mean()
    variance = float(np.dot(market_dev, market_dev))
    if variance == 0.0:
        raise ScoringError("market returns have zero variance over the beta lookback")
    return float(np.dot(stock_dev, market_dev)) / variance


def annualize_return(returns: ArrayLike, periods_per_year: int = TRADING_DAYS_PER_YEAR) -> float:
    """Compound daily returns and scale the growth to one year.

    Raises:
        ScoringError: If no returns are given
    """
    values = np.asarray(returns, dtype=float)
    if len(values) == 0:
        raise ScoringError("cannot annualize an empty return series")
    log_growth = float(np.sum(np.log1p(values)))
    return math.expm1(log_growth * periods_per_year / len(values))


def capm_expected_return(beta: float, market_return: float, params: CapmParams) -> float:
    """Return ``R_f + beta * (R_m - R_f)``."""
    risk_free = params.risk_free_rate
    return risk_free + beta * (market_return - risk_free)


def estimate_capm(
    ticker: str, stock_returns: ArrayLike, market_returns: ArrayLike, params: CapmParams
) -> CapmEstimate:
    """Estimate beta and the CAPM expected return for one ticker.

    The market return is annualized from the same trailing lookback the beta
    is estimated on.
    """
    beta = estimate_beta(stock_returns, market_returns, params)
    market = np.asarray(market_returns, dtype=float)[-params.beta_lookback :]
    market_return = annualize_return(market, params.periods_per_year)
    expected = capm_expected_return(beta, market_return, params)
    logger.debug(
        f"CAPM {ticker}: beta={beta:.4f}, market={market_return:.4f}, expected={expected:.4f}"
    )
    return CapmEstimate(ticker, beta, expected)
