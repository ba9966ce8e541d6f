"""Price and return panels shared by every stage of the engine."""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd

from app.common.errors import CalendarError, DataError, PriceValidationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GapPolicy:
    """How missing price cells are repaired or punished.

    Attributes:
        max_forward_fill: Longest run of missing days filled with the last close
        drop_ticker_above: Missing-cell fraction above which a ticker is dropped
    """

    max_forward_fill: int = 5
    drop_ticker_above: float = 0.1

    def __post_init__(self):
        if int(self.max_forward_fill) != self.max_forward_fill or self.max_forward_fill < 0:
            raise ValueError(
                f"max_forward_fill must be an integer >= 0, got {self.max_forward_fill}"
            )
        if not 0.0 <= self.drop_ticker_above <= 1.0:
            raise ValueError(
                f"drop_ticker_above must be within [0, 1], got {self.drop_ticker_above}"
            )


@dataclass(frozen=True, eq=False)
class PricePanel:
    """Date-aligned closing prices for a ticker universe.

    Attributes:
        closes: Closing prices, DatetimeIndex named ``date`` by ticker columns
        benchmark: Optional index level per date, same dates as ``closes``
        dropped: Tickers removed by the gap policy while loading
    """

    closes: pd.DataFrame
    benchmark: Optional[pd.Series] = None
    dropped: Tuple[str, ...] = ()

    def __post_init__(self):
        index = self.closes.index
        if not isinstance(index, pd.DatetimeIndex):
            raise DataError("price panel must be indexed by dates")
        if not index.is_unique or not index.is_monotonic_increasing:
            raise DataError("price panel dates must be strictly increasing")
        if not self.closes.columns.is_unique:
            raise DataError("price panel contains duplicate tickers")

        values = self.closes.to_numpy(dtype=float)
        bad = ~np.isfinite(values) | (values <= 0)
        if bad.any():
            row, col = np.argwhere(bad)[0]
            raise PriceValidationError(
                str(self.closes.columns[col]),
                index[row].strftime("%Y-%m-%d"),
                f"price {values[row, col]} is not a finite positive number",
            )

        if self.benchmark is not None:
            if not self.benchmark.index.equals(index):
                raise CalendarError("benchmark dates do not match the price panel dates")
            levels = self.benchmark.to_numpy(dtype=float)
            bad_levels = ~np.isfinite(levels) | (levels <= 0)
            if bad_levels.any():
                row = int(np.argmax(bad_levels))
                raise PriceValidationError(
                    "benchmark",
                    index[row].strftime("%Y-%m-%d"),
                    f"level {levels[row]} is not a finite positive number",
                )

    @property
    def dates(self) -> pd.DatetimeIndex:
        """Trading dates in ascending order."""
        return self.closes.index

    @property
    def tickers(self) -> List[str]:
        """Ticker symbols in column order."""
        return [str(ticker) for ticker in self.closes.columns]

    def column(self, ticker: str) -> int:
        """Get the column position of a ticker.

        Raises:
            DataError: If the ticker is not part of the universe
        """
        try:
            return self.tickers.index(ticker)
        except ValueError:
            raise DataError(f"ticker {ticker} is not in the price panel") from None

    def equals(self, other: "PricePanel") -> bool:
        """Compare closes, benchmark and tickers cell by cell."""
        if not self.closes.equals(other.closes):
            return False
        if self.benchmark is None or other.benchmark is None:
            return self.benchmark is None and other.benchmark is None
        return bool(self.benchmark.equals(other.benchmark))


@dataclass(frozen=True, eq=False)
class ReturnsPanel:
    """Simple daily returns derived from a PricePanel.

    Row ``t`` holds ``closes[t + 1] / closes[t] - 1`` and is labelled with the
    later of the two dates.
    """

    returns: pd.DataFrame
    benchmark_returns: Optional[pd.Series] = None

    @property
    def dates(self) -> pd.DatetimeIndex:
        return self.returns.index

    @property
    def tickers(self) -> List[str]:
        return [str(ticker) for ticker in self.returns.columns]

    @property
    def values(self) -> np.ndarray:
        """Returns as a dense ``[date x ticker]`` float array."""
        return self.returns.to_numpy(dtype=float)

    def __len__(self) -> int:
        return len(self.returns)


def compute_returns(panel: PricePanel) -> ReturnsPanel:
    """Compute simple daily returns for every ticker and the benchmark.

    Args:
        panel: Validated price panel with at least two dates

    Returns:
        Returns panel one row shorter than the price panel

    Raises:
        DataError: If the panel has fewer than two dates
    """
    if len(panel.dates) < 2:
        raise DataError("at least two dates are needed to compute returns")

    closes = panel.closes.to_numpy(dtype=float)
    returns = pd.DataFrame(
        closes[1:] / closes[:-1] - 1.0,
        index=panel.dates[1:],
        columns=panel.closes.columns,
    )

    benchmark_returns = None
    if panel.benchmark is not None:
        levels = panel.benchmark.to_numpy(dtype=float)
        benchmark_returns = pd.Series(
            levels[1:] / levels[:-1] - 1.0, index=panel.dates[1:], name="benchmark"
        )

    logger.debug(f"Computed {len(returns)} return rows for {returns.shape[1]} tickers")
    return ReturnsPanel(returns, benchmark_returns)


def equal_weight_index(closes: pd.DataFrame, base: float = 1000.0) -> pd.Series:
    """Index that compounds the cross-sectional mean daily return, starting at ``base``."""
    values = closes.to_numpy(dtype=float)
    growth = np.ones(len(values))
    if len(values) > 1:
        growth[1:] = 1.0 + (values[1:] / values[:-1] - 1.0).mean(axis=1)
    return pd.Series(base * np.cumprod(growth), index=closes.index, name="benchmark")
