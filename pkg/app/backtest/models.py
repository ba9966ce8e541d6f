"""Strategy parameters, portfolio state and backtest records."""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional

import pandas as pd


class StopMode(Enum):
    """Reference level the trailing stop is measured against."""
    TRAILING_MAX = "trailing-max"
    PREV_CLOSE = "prev-close"


class TradeAction(Enum):
    BUY = "buy"
    SELL = "sell"


class TradeTrigger(Enum):
    """Why a trade happened."""
    THRESHOLD = "threshold"
    STOP = "stop"
    REBALANCE_LIQUIDATION = "rebalance-liquidation"
    FINAL_LIQUIDATION = "final-liquidation"


@dataclass(frozen=True)
class StrategyParams:
    """Trading rule settings.

    Attributes:
        buy_threshold: Leader close ratio (today / previous) that triggers a buy
        trailing_stop: Leader drawdown fraction that triggers a sell
        initial_capital: Starting cash in USD
        commission_per_trade: Flat fee per buy or sell in USD
        stop_mode: Whether the stop trails the running maximum or the previous close
        fractional_shares: Allow fractional share quantities
    """

    buy_threshold: float = 1.02
    trailing_stop: float = 0.10
    initial_capital: float = 500000.0
    commission_per_trade: float = 0.0
    stop_mode: StopMode = StopMode.TRAILING_MAX
    fractional_shares: bool = True

    def __post_init__(self):
        if not math.isfinite(self.buy_threshold) or self.buy_threshold <= 0:
            raise ValueError(f"buy_threshold must be positive, got {self.buy_threshold}")
        if not 0.0 <= self.trailing_stop <= 1.0:
            raise ValueError(f"trailing_stop must be within [0, 1], got {self.trailing_stop}")
        if not math.isfinite(self.initial_capital) or self.initial_capital <= 0:
            raise ValueError(f"initial_capital must be positive, got {self.initial_capital}")
        if not math.isfinite(self.commission_per_trade) or self.commission_per_trade < 0:
            raise ValueError(
                f"commission_per_trade must be >= 0, got {self.commission_per_trade}"
            )
        if not isinstance(self.stop_mode, StopMode):
            raise ValueError(f"stop_mode must be a StopMode, got {self.stop_mode!r}")


@dataclass
class Bucket:
    """Cash and position allocated to one lagger.

    ``leader_trailing_max`` holds the highest close of each leader since the
    current position was opened.
    """

    lagger: str
    leaders: List[str]
    cash: float = 0.0
    shares: float = 0.0
    entry_price: Optional[float] = None
    entry_leader: Optional[str] = None
    leader_trailing_max: Dict[str, float] = field(default_factory=dict)

    @property
    def holding(self) -> bool:
        return self.shares > 0

    def value(self, lagger_close: float) -> float:
        return self.cash + self.shares * lagger_close


@dataclass
class PortfolioState:
    """All buckets plus cash not assigned to any lagger."""

    buckets: Dict[str, Bucket] = field(default_factory=dict)
    reserve: float = 0.0

    def total_value(self, closes: Dict[str, float]) -> float:
        parts = [self.reserve]
        for lagger, bucket in self.buckets.items():
            parts.append(bucket.cash)
            if bucket.holding:
                parts.append(bucket.shares * closes[lagger])
        return math.fsum(parts)


@dataclass(frozen=True)
class Trade:
    """One ledger line."""

    date: pd.Timestamp
    action: TradeAction
    lagger: str
    leader: str
    shares: float
    price: float
    commission: float
    trigger: TradeTrigger

    def __post_init__(self):
        if self.shares <= 0 or self.price <= 0:
            raise ValueError("trades need positive shares and price")


@dataclass(frozen=True)
class SkippedSignal:
    """A buy signal that could not be filled."""

    date: pd.Timestamp
    lagger: str
    leader: str
    cash: float
    reason: str


@dataclass(frozen=True, eq=False)
class BacktestResult:
    """Outcome of one backtest run.

    Attributes:
        daily_values: Portfolio value at each close of the span
        trades: Executed trades in order
        skipped: Buy signals that were not filled
        initial_capital: Starting cash
        portfolio_return: ``(final - initial) / initial``
        benchmark_return: Benchmark return over the span, if a benchmark is loaded
    """

    daily_values: pd.Series
    trades: List[Trade]
    skipped: List[SkippedSignal]
    initial_capital: float
    portfolio_return: float
    benchmark_return: Optional[float] = None

    @property
    def dates(self) -> pd.DatetimeIndex:
        return pd.DatetimeIndex(self.daily_values.index)

    @property
    def final_value(self) -> float:
        return float(self.daily_values.iloc[-1])

    @property
    def buy_count(self) -> int:
        return sum(1 for trade in self.trades if trade.action is TradeAction.BUY)

    @property
    def trade_count(self) -> int:
        return len(self.trades)
