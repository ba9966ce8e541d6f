"""Exception hierarchy shared by every stage of the engine.

Each exception carries the process exit code the CLI reports for it.
"""

from typing import Optional


class EngineError(Exception):
    """Base class for all expected engine failures."""

    exit_code = 4


class ConfigError(EngineError):
    """Invalid configuration file, flag or override."""

    exit_code = 2

    def __init__(self, message: str, key: Optional[str] = None, line: Optional[int] = None):
        self.key = key
        self.line = line
        location = ""
        if key:
            location = f"{key}: "
        suffix = f" (line {line})" if line is not None else ""
        super().__init__(f"{location}{message}{suffix}")


class DataError(EngineError):
    """Input data cannot be loaded or does not satisfy panel invariants."""

    exit_code = 3


class PriceParseError(DataError):
    """Malformed price or benchmark CSV."""

    def __init__(self, path: str, line: int, message: str):
        self.path = path
        self.line = line
        super().__init__(f"{path}, line {line}: {message}")


class PriceValidationError(DataError):
    """A retained price cell is not a finite positive number."""

    def __init__(self, ticker: str, date: str, message: str):
        self.ticker = ticker
        self.date = date
        super().__init__(f"{ticker} on {date}: {message}")


class EmptyUniverseError(DataError):
    """No tickers (or no dates) survive gap handling."""


class CalendarError(DataError):
    """Date ranges that must line up do not."""


class LeadLagError(EngineError):
    """Lead-lag detection was asked for an impossible window or matrix."""


class ScoringError(EngineError):
    """CAPM estimation or pair scoring cannot proceed."""


class BacktestError(EngineError):
    """Backtest inputs are inconsistent or an accounting invariant broke."""


class SweepError(EngineError):
    """A parameter-grid cell failed."""

    def __init__(self, trailing_stop: float, buy_threshold: float, cause: Exception):
        self.trailing_stop = trailing_stop
        self.buy_threshold = buy_threshold
        self.cause = cause
        super().__init__(
            f"sweep cell (trailing_stop={trailing_stop}, buy_threshold={buy_threshold}) "
            f"failed: {cause}"
        )
