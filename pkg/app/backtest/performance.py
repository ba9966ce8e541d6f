"""Benchmark comparison and backtest artifacts (ledger, daily values, summary)."""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import pandas as pd

from app.backtest.models import BacktestResult
from app.common.errors import BacktestError, CalendarError

logger = logging.getLogger(__name__)

LEDGER_COLUMNS = ["date", "action", "lagger", "leader", "shares", "price", "commission", "trigger"]
DAILY_VALUE_COLUMNS = [
    "date",
    "portfolio_value",
    "benchmark_value",
    "portfolio_cum_return",
    "benchmark_cum_return",
]

PathLike = Union[str, Path]


@dataclass(frozen=True, eq=False)
class PerformanceReport:
    """Portfolio against benchmark over the same dates.

    Both curves start at 1.0: the portfolio relative to its initial capital and
    the benchmark relative to its level on the first day.
    """

    portfolio_curve: pd.Series
    benchmark_curve: pd.Series
    benchmark_levels: pd.Series
    portfolio_return: float
    benchmark_return: float

    @property
    def excess_return(self) -> float:
        return self.portfolio_return - self.benchmark_return


def evaluate_performance(result: BacktestResult, benchmark: pd.Series) -> PerformanceReport:
    """Compare a backtest with a benchmark over the backtest's dates.

    Args:
        result: Finished backtest
        benchmark: Benchmark levels indexed by date

    Returns:
        Cumulative curves and final returns

    Raises:
        CalendarError: If the benchmark misses any backtest date
    """
    dates = result.dates
    missing = dates.difference(pd.DatetimeIndex(benchmark.index))
    if len(missing):
        raise CalendarError(
            f"benchmark has no level on {len(missing)} backtest dates "
            f"(first {missing[0]:%Y-%m-%d})"
        )

    levels = benchmark.loc[dates].astype(float)
    benchmark_curve = levels / levels.iloc[0]
    portfolio_curve = result.daily_values / result.initial_capital

    return PerformanceReport(
        portfolio_curve=portfolio_curve,
        benchmark_curve=benchmark_curve,
        benchmark_levels=levels,
        portfolio_return=result.portfolio_return,
        benchmark_return=float(benchmark_curve.iloc[-1]) - 1.0,
    )


def write_ledger_csv(result: BacktestResult, path: PathLike) -> Path:
    """Write the trade ledger, one row per fill."""
    rows = [
        {
            "date": trade.date.strftime("%Y-%m-%d"),
            "action": trade.action.value,
            "lagger": trade.lagger,
            "leader": trade.leader,
            "shares": trade.shares,
            "price": trade.price,
            "commission": trade.commission,
            "trigger": trade.trigger.value,
        }
        for trade in result.trades
    ]
    output = _write(pd.DataFrame(rows, columns=LEDGER_COLUMNS), path)
    logger.info(f"Wrote {len(rows)} trades to {output}")
    return output


def write_daily_values_csv(
    report: PerformanceReport, result: BacktestResult, path: PathLike
) -> Path:
    """Write the daily portfolio and benchmark values behind the cumulative chart."""
    frame = pd.DataFrame(
        {
            "date": result.dates.strftime("%Y-%m-%d"),
            "portfolio_value": result.daily_values.to_numpy(),
            "benchmark_value": report.benchmark_levels.to_numpy(),
            "portfolio_cum_return": report.portfolio_curve.to_numpy() - 1.0,
            "benchmark_cum_return": report.benchmark_curve.to_numpy() - 1.0,
        },
        columns=DAILY_VALUE_COLUMNS,
    )
    output = _write(frame, path)
    logger.info(f"Wrote {len(frame)} daily values to {output}")
    return output


def format_summary(result: BacktestResult, report: PerformanceReport) -> str:
    """Render the run summary as ``key: value`` lines."""
    lines = [
        f"span: {result.dates[0]:%Y-%m-%d}:{result.dates[-1]:%Y-%m-%d}",
        f"initial_capital: {result.initial_capital:.2f}",
        f"final_value: {result.final_value:.2f}",
        f"trades: {result.trade_count}",
        f"buys: {result.buy_count}",
        f"skipped_signals: {len(result.skipped)}",
        f"portfolio_return: {report.portfolio_return:.10f}",
        f"benchmark_return: {report.benchmark_return:.10f}",
        f"excess_return: {report.excess_return:.10f}",
    ]
    return "\n".join(lines) + "\n"


def _write(frame: pd.DataFrame, path: PathLike) -> Path:
    output = Path(path)
    try:
        output.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(output, index=False, lineterminator="\n")
    except OSError as e:
        raise BacktestError(f"cannot write {output}: {e}") from e
    return output
