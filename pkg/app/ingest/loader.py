"""CSV loading and writing for price and benchmark files.

Price files are long form (``date,ticker,close``), one row per date and
ticker; benchmark files carry ``date,close``.
"""

import logging
import re
from pathlib import Path
from typing import List, Union

import pandas as pd

from app.common.errors import DataError, EmptyUniverseError, PriceParseError
from app.ingest.panel import GapPolicy, PricePanel

logger = logging.getLogger(__name__)

PRICE_COLUMNS = ["date", "ticker", "close"]
BENCHMARK_COLUMNS = ["date", "close"]
DATE_FORMAT = "%Y-%m-%d"

PathLike = Union[str, Path]


def load_price_panel(path: PathLike, gap_policy: GapPolicy = GapPolicy()) -> PricePanel:
    """Load, repair and validate a long-form price file.

    Tickers whose share of missing cells exceeds ``gap_policy.drop_ticker_above``
    are dropped (and listed in ``PricePanel.dropped``); remaining gaps are
    forward-filled up to ``gap_policy.max_forward_fill`` days and dates that
    still have holes are removed.

    Args:
        path: Price CSV with header ``date,ticker,close``
        gap_policy: Missing data handling rules

    Returns:
        Validated, date-sorted price panel

    Raises:
        PriceParseError: If a row cannot be parsed (message carries the line)
        PriceValidationError: If a retained price is not positive
        EmptyUniverseError: If no ticker or no date survives gap handling
    """
    frame = _read_csv(path, PRICE_COLUMNS)
    logger.info(f"Loading prices from {path}")

    dates = _parse_dates(frame, path)
    closes = _parse_closes(frame, path, allow_missing=True)
    tickers = frame["ticker"].str.strip()
    for position in range(len(frame)):
        if not tickers.iloc[position]:
            raise PriceParseError(str(path), position + 2, "empty ticker")

    long = pd.DataFrame({"date": dates, "ticker": tickers, "close": closes})
    duplicated = long.duplicated(subset=["date", "ticker"])
    if duplicated.any():
        position = int(duplicated.to_numpy().argmax())
        raise PriceParseError(
            str(path),
            position + 2,
            f"duplicate row for {long['ticker'].iloc[position]} on "
            f"{long['date'].iloc[position].strftime(DATE_FORMAT)}",
        )

    wide = long.pivot(index="date", columns="ticker", values="close").sort_index()
    wide.columns.name = None
    wide = wide.astype(float)

    missing_share = wide.isna().mean()
    too_sparse = missing_share[missing_share > gap_policy.drop_ticker_above]
    dropped = sorted(str(ticker) for ticker in too_sparse.index)
    if dropped:
        logger.warning(
            f"Dropping {len(dropped)} tickers above the "
            f"{gap_policy.drop_ticker_above:.0%} missing-data limit: {', '.join(dropped)}"
        )
        wide = wide.drop(columns=dropped)
    if wide.shape[1] == 0:
        raise EmptyUniverseError(f"no tickers left in {path} after applying the gap policy")

    if gap_policy.max_forward_fill > 0:
        wide = wide.ffill(limit=int(gap_policy.max_forward_fill))

    holes = wide.isna().any(axis=1)
    if holes.any():
        logger.warning(
            f"Removing {int(holes.sum())} dates with gaps longer than "
            f"{gap_policy.max_forward_fill} days"
        )
        wide = wide.loc[~holes]
    if wide.empty:
        raise EmptyUniverseError(f"no complete dates left in {path} after gap handling")

    panel = PricePanel(wide, dropped=tuple(dropped))
    logger.info(
        f"Loaded {len(panel.tickers)} tickers over {len(panel.dates)} dates "
        f"({panel.dates[0].strftime(DATE_FORMAT)} to {panel.dates[-1].strftime(DATE_FORMAT)})"
    )
    return panel


def load_benchmark(path: PathLike) -> pd.Series:
    """Load benchmark index levels.

    Args:
        path: CSV with header ``date,close``

    Returns:
        Levels indexed by date, ascending

    Raises:
        PriceParseError: On malformed or duplicate rows
    """
    frame = _read_csv(path, BENCHMARK_COLUMNS)
    dates = _parse_dates(frame, path)
    closes = _parse_closes(frame, path, allow_missing=False)

    duplicated = dates.duplicated()
    if duplicated.any():
        position = int(duplicated.to_numpy().argmax())
        raise PriceParseError(str(path), position + 2, "duplicate benchmark date")

    series = pd.Series(closes.to_numpy(dtype=float), index=pd.DatetimeIndex(dates, name="date"))
    series.name = "benchmark"
    logger.info(f"Loaded {len(series)} benchmark levels from {path}")
    return series.sort_index()


def write_price_panel(panel: PricePanel, path: PathLike) -> Path:
    """Write a panel back to the long-form price CSV layout."""
    output = Path(path)
    output.parent.mkdir(parents=True, exist_ok=True)

    long = (
        panel.closes.rename_axis("date")
        .reset_index()
        .melt(id_vars="date", var_name="ticker", value_name="close")
        .sort_values(["date", "ticker"], kind="mergesort")
    )
    long.to_csv(output, index=False, date_format=DATE_FORMAT, lineterminator="\n")
    logger.info(f"Wrote {len(long)} price rows to {output}")
    return output


def write_benchmark(panel: PricePanel, path: PathLike) -> Path:
    """Write the panel benchmark as ``date,close``."""
    if panel.benchmark is None:
        raise DataError("panel has no benchmark to write")
    output = Path(path)
    output.parent.mkdir(parents=True, exist_ok=True)

    frame = pd.DataFrame({"date": panel.dates, "close": panel.benchmark.to_numpy(dtype=float)})
    frame.to_csv(output, index=False, date_format=DATE_FORMAT, lineterminator="\n")
    logger.info(f"Wrote {len(frame)} benchmark rows to {output}")
    return output


def _read_csv(path: PathLike, columns: List[str]) -> pd.DataFrame:
    """Read a CSV as strings and check its header."""
    if not Path(path).exists():
        raise DataError(f"input file not found: {path}")
    try:
        frame = pd.read_csv(
            path, dtype=str, keep_default_na=False, encoding="utf-8", skipinitialspace=True
        )
    except pd.errors.EmptyDataError:
        raise PriceParseError(str(path), 1, "file is empty") from None
    except pd.errors.ParserError as exc:
        match = re.search(r"line (\d+)", str(exc))
        line = int(match.group(1)) if match else 0
        raise PriceParseError(str(path), line, "wrong number of fields") from exc
    except UnicodeDecodeError as exc:
        raise PriceParseError(str(path), 0, f"not UTF-8 ({exc.reason})") from exc

    header = [str(column).strip() for column in frame.columns]
    if header != columns:
        raise PriceParseError(
            str(path), 1, f"expected header {','.join(columns)}, got {','.join(header)}"
        )
    frame.columns = columns

    # With keep_default_na=False only absent fields come back as NaN.
    short = frame.isna().any(axis=1)
    if short.any():
        position = int(short.to_numpy().argmax())
        raise PriceParseError(str(path), position + 2, "wrong number of fields")
    return frame


def _parse_dates(frame: pd.DataFrame, path: PathLike) -> pd.Series:
    dates = pd.to_datetime(frame["date"].str.strip(), format=DATE_FORMAT, errors="coerce")
    if dates.isna().any():
        position = int(dates.isna().to_numpy().argmax())
        raise PriceParseError(
            str(path), position + 2, f"invalid ISO-8601 date {frame['date'].iloc[position]!r}"
        )
    return dates


def _parse_closes(frame: pd.DataFrame, path: PathLike, allow_missing: bool) -> pd.Series:
    """Convert the close column with exact float parsing; blanks become NaN."""
    values = []
    for position, text in enumerate(frame["close"].str.strip()):
        if not text:
            if not allow_missing:
                raise PriceParseError(str(path), position + 2, "missing close")
            values.append(float("nan"))
            continue
        try:
            values.append(float(text))
        except ValueError:
            raise PriceParseError(
                str(path), position + 2, f"close {text!r} is not a number"
            ) from None
    return pd.Series(values, index=frame.index, dtype=float)
