"""Buy and sell rules and fill mechanics for a single lagger bucket."""

import logging
import math
from typing import Optional, Tuple

from app.backtest.models import Bucket, StopMode, StrategyParams
from app.common.errors import BacktestError

logger = logging.getLogger(__name__)


def buy_signal(leader_close_today: float, leader_close_prev: float, buy_threshold: float) -> bool:
    """True when the leader rose by at least the buy threshold since yesterday."""
    return leader_close_today / leader_close_prev >= buy_threshold


def sell_signal(
    bucket: Bucket,
    leader: str,
    leader_close_today: float,
    params: StrategyParams,
    leader_close_prev: Optional[float] = None,
) -> bool:
    """Check the stop of one leader against today's close.

    In trailing-max mode the stop sits ``trailing_stop`` below the leader's
    highest close since entry; in prev-close mode it sits below yesterday's
    close. The close must fall strictly below the stop. The caller updates the
    trailing maximum after the check.
    """
    keep = 1.0 - params.trailing_stop
    if params.stop_mode is StopMode.PREV_CLOSE:
        if leader_close_prev is None:
            return False
        return leader_close_today < keep * leader_close_prev

    trailing_max = bucket.leader_trailing_max.get(leader)
    if trailing_max is None:
        return False
    return leader_close_today < keep * trailing_max


def execute_buy(
    bucket: Bucket, lagger_close: float, commission: float, fractional: bool
) -> Optional[float]:
    """Spend the bucket's cash on the lagger at the close.

    Args:
        bucket: Bucket to fill
        lagger_close: Fill price
        commission: Flat fee charged on the fill
        fractional: Whether fractional shares may be bought

    Returns:
        Shares bought, or None when the buy is skipped (already holding,
        cash not covering the commission, or not enough for one share)
    """
    if bucket.holding or bucket.cash <= commission:
        return None

    budget = bucket.cash - commission
    if fractional:
        shares = budget / lagger_close
        remaining = 0.0
    else:
        shares = float(math.floor(budget / lagger_close))
        if shares * lagger_close > budget:
            shares -= 1.0
        if shares <= 0:
            return None
        remaining = budget - shares * lagger_close

    bucket.shares = shares
    bucket.cash = remaining
    bucket.entry_price = lagger_close
    return shares


def execute_sell(bucket: Bucket, lagger_close: float, commission: float) -> Tuple[float, float]:
    """Sell the whole position at the close.

    The commission is capped at the cash the bucket holds after the sale.

    Returns:
        Shares sold and commission charged

    Raises:
        BacktestError: If the bucket holds no shares
    """
    if not bucket.holding:
        raise BacktestError(f"cannot sell {bucket.lagger}: no shares held")

    shares = bucket.shares
    proceeds = shares * lagger_close
    fee = min(commission, bucket.cash + proceeds)
    bucket.cash = bucket.cash + proceeds - fee
    bucket.shares = 0.0
    bucket.entry_price = None
    bucket.entry_leader = None
    bucket.leader_trailing_max.clear()
    return shares, fee
