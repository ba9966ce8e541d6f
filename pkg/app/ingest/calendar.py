"""Trading-calendar alignment and date spans."""

import datetime
import logging
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import pandas as pd

from app.common.errors import CalendarError, ConfigError
from app.ingest.panel import PricePanel

logger = logging.getLogger(__name__)

DateLike = Union[str, datetime.date, pd.Timestamp, None]

# Named evaluation windows: a falling and a rising market.
SPAN_PRESETS = {
    "bear": ("2022-03-15", "2023-03-15"),
    "bull": ("2021-04-01", "2021-09-30"),
}


@dataclass(frozen=True)
class DateSpan:
    """Inclusive range of panel rows a run trades over."""

    start: pd.Timestamp
    end: pd.Timestamp
    start_index: int
    end_index: int

    def __len__(self) -> int:
        return self.end_index - self.start_index + 1

    def indices(self) -> range:
        return range(self.start_index, self.end_index + 1)

    def __str__(self) -> str:
        return f"{self.start:%Y-%m-%d}:{self.end:%Y-%m-%d}"


def align_calendars(panel: PricePanel, benchmark_series: pd.Series) -> PricePanel:
    """Restrict a panel to the dates it shares with a benchmark and attach it.

    Args:
        panel: Price panel
        benchmark_series: Benchmark level per date

    Returns:
        Panel on the intersection of both calendars with the benchmark attached

    Raises:
        CalendarError: If either input is empty or the calendars do not overlap
    """
    if panel.closes.empty or benchmark_series.empty:
        raise CalendarError("cannot align an empty panel or benchmark")

    common = panel.dates.intersection(pd.DatetimeIndex(benchmark_series.index))
    if common.empty:
        raise CalendarError("price and benchmark calendars share no trading dates")

    removed = len(panel.dates) - len(common)
    if removed:
        logger.info(f"Calendar alignment removed {removed} dates missing from the benchmark")

    benchmark = benchmark_series.loc[common].astype(float)
    benchmark.index = common
    benchmark.name = "benchmark"
    return PricePanel(panel.closes.loc[common], benchmark, panel.dropped)


def parse_span(text: Optional[str]) -> Tuple[Optional[str], Optional[str]]:
    """Parse ``START:END`` (either side may be empty) or a preset name."""
    if not text:
        return None, None
    if text in SPAN_PRESETS:
        return SPAN_PRESETS[text]
    if ":" not in text:
        raise ConfigError(
            f"expected START:END or one of {', '.join(sorted(SPAN_PRESETS))}, got {text!r}",
            key="span",
        )
    start, end = text.split(":", 1)
    return start.strip() or None, end.strip() or None


def resolve_span(dates: pd.DatetimeIndex, start: DateLike = None, end: DateLike = None) -> DateSpan:
    """Map calendar bounds onto the first and last panel rows inside them.

    Args:
        dates: Panel trading dates
        start: First calendar date (default: first panel date)
        end: Last calendar date (default: last panel date)

    Returns:
        Span covering the panel rows within ``[start, end]``

    Raises:
        ConfigError: If the bounds fall outside the data or contain no trading day
    """
    if len(dates) == 0:
        raise ConfigError("cannot resolve a span on an empty calendar", key="span")

    first = dates[0] if start is None else _timestamp(start, "span.start")
    last = dates[-1] if end is None else _timestamp(end, "span.end")

    if first > last:
        raise ConfigError(f"span start {first:%Y-%m-%d} is after end {last:%Y-%m-%d}", key="span")
    if first < dates[0] or last > dates[-1]:
        raise ConfigError(
            f"span {first:%Y-%m-%d}:{last:%Y-%m-%d} is outside the data range "
            f"{dates[0]:%Y-%m-%d}:{dates[-1]:%Y-%m-%d}",
            key="span",
        )

    start_index = int(dates.searchsorted(first, side="left"))
    end_index = int(dates.searchsorted(last, side="right")) - 1
    if start_index > end_index:
        raise ConfigError(
            f"span {first:%Y-%m-%d}:{last:%Y-%m-%d} contains no trading days", key="span"
        )
    return DateSpan(dates[start_index], dates[end_index], start_index, end_index)


def _timestamp(value: DateLike, key: str) -> pd.Timestamp:
    try:
        return pd.Timestamp(value)
    except (TypeError, ValueError):
        raise ConfigError(f"invalid date {value!r}", key=key) from None
