"""Strategy simulation, performance reporting and backtest artifacts."""

from app.backtest.engine import max_leader_ratio, run_backtest, split_evenly
from app.backtest.models import (
    BacktestResult,
    Bucket,
    PortfolioState,
    SkippedSignal,
    StopMode,
    StrategyParams,
    Trade,
    TradeAction,
    TradeTrigger,
)
from app.backtest.performance import (
    PerformanceReport,
    evaluate_performance,
    format_summary,
    write_daily_values_csv,
    write_ledger_csv,
)
from app.backtest.rules import buy_signal, execute_buy, execute_sell, sell_signal

__all__ = [
    "BacktestResult",
    "Bucket",
    "PerformanceReport",
    "PortfolioState",
    "SkippedSignal",
    "StopMode",
    "StrategyParams",
    "Trade",
    "TradeAction",
    "TradeTrigger",
    "buy_signal",
    "evaluate_performance",
    "execute_buy",
    "execute_sell",
    "format_summary",
    "max_leader_ratio",
    "run_backtest",
    "sell_signal",
    "split_evenly",
    "write_daily_values_csv",
    "write_ledger_csv",
]
