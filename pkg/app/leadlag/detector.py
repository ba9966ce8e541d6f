"""Band-based lead detection and the per-window adjacency tensor.

Ticker ``j`` leads ticker ``i`` over a window of ``k`` days when, for every
day ``t`` of the window, ``|r_i(t + lag) - r_j(t)| <= epsilon``.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np

from app.common.errors import LeadLagError
from app.ingest.panel import ReturnsPanel

logger = logging.getLogger(__name__)

ArrayLike = Union[Sequence[float], np.ndarray]


@dataclass(frozen=True)
class DetectionParams:
    """Lead detection thresholds.

    Attributes:
        lag: Trading days by which the lagger follows the leader
        epsilon: Largest tolerated absolute return difference
        window: Consecutive days the band must hold
    """

    lag: int = 1
    epsilon: float = 0.01
    window: int = 5

    def __post_init__(self):
        if int(self.lag) != self.lag or self.lag < 1:
            raise ValueError(f"lag must be an integer >= 1, got {self.lag}")
        if int(self.window) != self.window or self.window < 1:
            raise ValueError(f"window must be an integer >= 1, got {self.window}")
        if not math.isfinite(self.epsilon) or self.epsilon < 0:
            raise ValueError(f"epsilon must be a finite number >= 0, got {self.epsilon}")

    @property
    def rows_per_window(self) -> int:
        """Return rows one placement reads (window plus lag)."""
        return self.window + self.lag


@dataclass(frozen=True, eq=False)
class LeadLagTensor:
    """Stack of boolean lead matrices, one per window placement.

    ``slices[w, i, j]`` is True when ticker ``j`` leads ticker ``i`` over the
    window starting at return row ``window_starts[w]`` (row = lagger,
    column = leader).
    """

    tickers: Tuple[str, ...]
    window_starts: np.ndarray
    slices: np.ndarray
    params: DetectionParams

    def __post_init__(self):
        n = len(self.tickers)
        if self.slices.ndim != 3 or self.slices.shape[1:] != (n, n):
            raise LeadLagError(
                f"tensor slices must be square with dimension {n}, got {self.slices.shape}"
            )
        if len(self.window_starts) != len(self.slices):
            raise LeadLagError("one window start is required per slice")

    def __len__(self) -> int:
        return len(self.slices)

    @property
    def window_ends(self) -> np.ndarray:
        """Last return row read by each placement."""
        return self.window_starts + self.params.rows_per_window - 1

    def available(self, n_rows: int) -> int:
        """Count slices computed entirely from the first ``n_rows`` return rows."""
        return int(np.searchsorted(self.window_ends, n_rows - 1, side="right"))

    def truncate(self, n_slices: int) -> "LeadLagTensor":
        """Keep only the first ``n_slices`` placements."""
        return LeadLagTensor(
            self.tickers, self.window_starts[:n_slices], self.slices[:n_slices], self.params
        )


def detect_lead(
    leader_returns: ArrayLike,
    lagger_returns: ArrayLike,
    window_start: int,
    params: DetectionParams,
) -> bool:
    """Check whether the leader leads the lagger over one window.

    Args:
        leader_returns: Daily returns of the candidate leader
        lagger_returns: Daily returns of the candidate lagger
        window_start: First leader row of the window
        params: Lag, band and window length

    Returns:
        True if the lagged lagger return stays within ``epsilon`` of the
        leader return on every day of the window

    Raises:
        LeadLagError: If the window (plus lag) runs outside either series
    """
    leader = np.asarray(leader_returns, dtype=float)
    lagger = np.asarray(lagger_returns, dtype=float)
    end = window_start + params.window
    if window_start < 0 or end + params.lag > min(len(leader), len(lagger)):
        raise LeadLagError(
            f"window starting at {window_start} with length {params.window} and lag "
            f"{params.lag} does not fit series of {min(len(leader), len(lagger))} returns"
        )

    lagged = lagger[window_start + params.lag : end + params.lag]
    differences = np.abs(lagged - leader[window_start:end])
    return bool(np.all(differences <= params.epsilon))


def build_tensor(
    returns: ReturnsPanel,
    params: DetectionParams,
    stride: int = 1,
    workers: int = 1,
) -> LeadLagTensor:
    """Evaluate lead detection for every ordered ticker pair and window.

    Windows start at rows ``0, stride, 2 * stride, ...`` as long as the window
    plus lag fits the series. Slices are independent, so they may be computed
    on a thread pool; the merge keeps placement order.

    Args:
        returns: Daily returns panel
        params: Detection thresholds
        stride: Rows between consecutive window starts
        workers: Threads used to compute slices

    Returns:
        Tensor with one slice per placement

    Raises:
        LeadLagError: If not a single window fits the series
    """
    if int(stride) != stride or stride < 1:
        raise ValueError(f"stride must be an integer >= 1, got {stride}")
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")

    values = returns.values
    last_start = len(values) - params.rows_per_window
    if last_start < 0:
        raise LeadLagError(
            f"{len(values)} return rows cannot hold a single window of "
            f"{params.window} days with lag {params.lag}"
        )
    starts = np.arange(0, last_start + 1, int(stride))

    def lead_slice(start: int) -> np.ndarray:
        leaders = values[start : start + params.window]
        laggers = values[start + params.lag : start + params.lag + params.window]
        gaps = np.abs(laggers[:, :, np.newaxis] - leaders[:, np.newaxis, :])
        return np.all(gaps <= params.epsilon, axis=0)

    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            slices = list(executor.map(lead_slice, starts))
    else:
        slices = [lead_slice(start) for start in starts]

    tensor = LeadLagTensor(
        tuple(returns.tickers),
        starts,
        np.stack(slices).astype(bool),
        params,
    )
    logger.info(
        f"Built lead-lag tensor: {len(tensor)} windows x {len(tensor.tickers)} tickers "
        f"(lag={params.lag}, epsilon={params.epsilon}, window={params.window}, stride={stride})"
    )
    return tensor
