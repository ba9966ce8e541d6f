"""Buy-threshold x trailing-stop parameter grids over the backtest."""

import dataclasses
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import product
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from app.backtest.engine import run_backtest
from app.backtest.models import StrategyParams
from app.common.errors import BacktestError, EngineError, SweepError
from app.ingest.calendar import DateSpan
from app.ingest.panel import PricePanel
from app.scoring.quarterly import QuarterlySelection

logger = logging.getLogger(__name__)

HOLD_THRESHOLD = "hold-threshold"
HOLD_STOP = "hold-stop"
CONTOUR_COLUMNS = ["trailing_stop", "buy_threshold", "portfolio_return", "trade_count"]

PathLike = Union[str, Path]


def grid_range(start: float, stop: float, step: float) -> Tuple[float, ...]:
    """Inclusive, evenly spaced grid values rounded to 10 decimals.

    Raises:
        ValueError: If the step is not positive or stop is below start
    """
    if step <= 0:
        raise ValueError(f"grid step must be positive, got {step}")
    if stop < start:
        raise ValueError(f"grid stop {stop} is below start {start}")
    count = int(round((stop - start) / step)) + 1
    values = np.round(start + step * np.arange(count), 10)
    return tuple(float(v) for v in values)


@dataclass(frozen=True)
class SweepSpec:
    """Grid axes plus the strategy settings shared by every cell."""

    buy_thresholds: Tuple[float, ...]
    trailing_stops: Tuple[float, ...]
    base: StrategyParams = StrategyParams()
    span: Optional[DateSpan] = None

    def __post_init__(self):
        for name in ("buy_thresholds", "trailing_stops"):
            values = getattr(self, name)
            if len(values) == 0:
                raise ValueError(f"{name} must not be empty")
            if any(later <= earlier for earlier, later in zip(values, values[1:])):
                raise ValueError(f"{name} must be strictly increasing")

    @classmethod
    def from_ranges(
        cls,
        thresholds: Tuple[float, float, float],
        stops: Tuple[float, float, float],
        base: StrategyParams = StrategyParams(),
        span: Optional[DateSpan] = None,
    ) -> "SweepSpec":
        """Build a spec from ``(start, stop, step)`` ranges."""
        return cls(grid_range(*thresholds), grid_range(*stops), base, span)

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.trailing_stops), len(self.buy_thresholds)

    def params_for(self, trailing_stop: float, buy_threshold: float) -> StrategyParams:
        return dataclasses.replace(
            self.base, trailing_stop=trailing_stop, buy_threshold=buy_threshold
        )


@dataclass(frozen=True, eq=False)
class SweepGrid:
    """Final returns and trade counts, rows = trailing stops, columns = buy thresholds."""

    buy_thresholds: Tuple[float, ...]
    trailing_stops: Tuple[float, ...]
    returns: np.ndarray
    trade_counts: np.ndarray

    def __post_init__(self):
        shape = (len(self.trailing_stops), len(self.buy_thresholds))
        if self.returns.shape != shape or self.trade_counts.shape != shape:
            raise ValueError(f"grid matrices must have shape {shape}")

    def threshold_index(self, value: float) -> int:
        return _axis_index(self.buy_thresholds, value, "buy threshold")

    def stop_index(self, value: float) -> int:
        return _axis_index(self.trailing_stops, value, "trailing stop")


def evaluate_cell(
    panel: PricePanel,
    selections: Sequence[QuarterlySelection],
    params: StrategyParams,
    span: Optional[DateSpan] = None,
) -> Tuple[float, int]:
    """Run one backtest and return its final return and trade count."""
    result = run_backtest(panel, selections, params, span)
    return result.portfolio_return, result.trade_count


def run_sweep(
    spec: SweepSpec,
    panel: PricePanel,
    selections: Sequence[QuarterlySelection],
    workers: int = 1,
) -> SweepGrid:
    """Evaluate the backtest on every grid cell.

    Cells are independent; with ``workers > 1`` they run in a process pool and
    are merged back in grid order.

    Args:
        spec: Grid axes and shared strategy settings
        panel: Price panel
        selections: Quarterly selections, shared by all cells
        workers: Worker processes

    Returns:
        Filled grid

    Raises:
        SweepError: If any cell fails (names the cell)
    """
    cells = list(product(spec.trailing_stops, spec.buy_thresholds))
    logger.info(
        f"Sweeping {spec.shape[0]} trailing stops x {spec.shape[1]} buy thresholds "
        f"({len(cells)} backtests, {workers} workers)"
    )

    if workers > 1 and len(cells) > 1:
        tasks = [spec.params_for(stop, threshold) for stop, threshold in cells]
        with ProcessPoolExecutor(
            max_workers=workers,
            initializer=_init_worker,
            initargs=(panel, list(selections), spec.span),
        ) as executor:
            chunksize = max(1, len(tasks) // (4 * workers))
            outcomes = list(executor.map(_evaluate_in_worker, tasks, chunksize=chunksize))
    else:
        outcomes = []
        for stop, threshold in cells:
            try:
                params = spec.params_for(stop, threshold)
                value, count = evaluate_cell(panel, selections, params, spec.span)
            except (EngineError, ValueError) as e:
                raise SweepError(stop, threshold, e) from e
            outcomes.append((value, count, None))

    returns = np.empty(spec.shape, dtype=float)
    trade_counts = np.empty(spec.shape, dtype=np.int64)
    for position, ((stop, threshold), (value, count, error)) in enumerate(zip(cells, outcomes)):
        if error is not None:
            raise SweepError(stop, threshold, BacktestError(error))
        row, col = divmod(position, spec.shape[1])
        returns[row, col] = value
        trade_counts[row, col] = count

    return SweepGrid(spec.buy_thresholds, spec.trailing_stops, returns, trade_counts)


def cross_section(grid: SweepGrid, axis: str, index: int) -> pd.Series:
    """Slice the grid along one axis.

    ``hold-threshold`` fixes ``buy_thresholds[index]`` and returns the returns
    across trailing stops; ``hold-stop`` fixes ``trailing_stops[index]`` and
    returns the returns across buy thresholds.

    Raises:
        ValueError: If the axis is unknown
        IndexError: If the index is outside the held axis
    """
    if axis == HOLD_THRESHOLD:
        _check_index(index, len(grid.buy_thresholds), "buy threshold")
        values = grid.returns[:, index]
        labels = pd.Index(grid.trailing_stops, name="trailing_stop")
    elif axis == HOLD_STOP:
        _check_index(index, len(grid.trailing_stops), "trailing stop")
        values = grid.returns[index, :]
        labels = pd.Index(grid.buy_thresholds, name="buy_threshold")
    else:
        raise ValueError(f"axis must be {HOLD_THRESHOLD!r} or {HOLD_STOP!r}, got {axis!r}")
    return pd.Series(values.copy(), index=labels, name="portfolio_return")


def best_cell(grid: SweepGrid) -> Tuple[float, float, float]:
    """Return ``(trailing_stop, buy_threshold, return)`` of the best cell.

    Ties go to the smallest trailing stop, then the smallest buy threshold.
    """
    row, col = np.unravel_index(int(np.argmax(grid.returns)), grid.returns.shape)
    return grid.trailing_stops[row], grid.buy_thresholds[col], float(grid.returns[row, col])


def write_contour_csv(grid: SweepGrid, path: PathLike) -> Path:
    """Write the grid in long form, sorted by trailing stop then buy threshold.

    The first line is a comment echoing the grid shape.
    """
    rows = [
        (stop, threshold, float(grid.returns[i, j]), int(grid.trade_counts[i, j]))
        for i, stop in enumerate(grid.trailing_stops)
        for j, threshold in enumerate(grid.buy_thresholds)
    ]
    frame = pd.DataFrame(rows, columns=CONTOUR_COLUMNS)
    header = (
        f"# grid: {len(grid.trailing_stops)} trailing stops x "
        f"{len(grid.buy_thresholds)} buy thresholds\n"
    )
    output = _write(frame, path, header)
    logger.info(f"Wrote {len(rows)} grid cells to {output}")
    return output


def write_cross_section_csv(grid: SweepGrid, axis: str, index: int, path: PathLike) -> Path:
    """Write one cross-section with the held coordinate as a leading column."""
    series = cross_section(grid, axis, index)
    if axis == HOLD_THRESHOLD:
        held_name, held_value = "buy_threshold", grid.buy_thresholds[index]
        counts = grid.trade_counts[:, index]
    else:
        held_name, held_value = "trailing_stop", grid.trailing_stops[index]
        counts = grid.trade_counts[index, :]

    frame = series.reset_index()
    frame.insert(0, held_name, held_value)
    frame["trade_count"] = counts
    output = _write(frame, path)
    logger.info(f"Wrote {axis} cross-section at {held_name}={held_value} to {output}")
    return output


def _axis_index(values: Sequence[float], value: float, name: str) -> int:
    matches = np.flatnonzero(np.isclose(values, value, rtol=0.0, atol=1e-9))
    if len(matches) == 0:
        raise ValueError(f"{name} {value} is not on the grid")
    return int(matches[0])


def _check_index(index: int, size: int, name: str) -> None:
    if not 0 <= index < size:
        raise IndexError(f"{name} index {index} is outside 0..{size - 1}")


def _write(frame: pd.DataFrame, path: PathLike, header: str = "") -> Path:
    output = Path(path)
    try:
        output.parent.mkdir(parents=True, exist_ok=True)
        with open(output, "w", encoding="utf-8", newline="") as f:
            f.write(header)
            frame.to_csv(f, index=False, lineterminator="\n")
    except OSError as e:
        raise EngineError(f"cannot write {output}: {e}") from e
    return output


# Process-pool state: the panel and selections are shipped once per worker.
_worker_inputs: List[object] = []


def _init_worker(
    panel: PricePanel, selections: List[QuarterlySelection], span: Optional[DateSpan]
) -> None:
    _worker_inputs[:] = [panel, selections, span]


def _evaluate_in_worker(params: StrategyParams) -> Tuple[float, int, Optional[str]]:
    panel, selections, span = _worker_inputs
    try:
        value, count = evaluate_cell(panel, selections, params, span)  # type: ignore[arg-type]
    except (EngineError, ValueError) as e:
        return float("nan"), 0, str(e)
    return value, count, None
