"""Day-by-day simulation of the leader-triggered lagger strategy."""

import logging
import math
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from app.backtest.models import (
    BacktestResult,
    Bucket,
    PortfolioState,
    SkippedSignal,
    StrategyParams,
    Trade,
    TradeAction,
    TradeTrigger,
)
from app.backtest.rules import buy_signal, execute_buy, execute_sell, sell_signal
from app.common.errors import BacktestError
from app.ingest.calendar import DateSpan
from app.ingest.panel import PricePanel
from app.scoring.quarterly import QuarterlySelection

logger = logging.getLogger(__name__)

# Even splits are rounded down to this many USD so the parts add back up exactly.
CASH_QUANTUM = 2.0**-10


def split_evenly(total: float, parts: int) -> List[float]:
    """Split cash into ``parts`` shares that sum exactly to ``total``.

    Every share but the first is ``total / parts`` rounded down to
    ``CASH_QUANTUM``; the first absorbs the remainder.
    """
    if parts < 1:
        raise BacktestError("cannot split cash across zero buckets")
    share = math.floor(total / parts / CASH_QUANTUM) * CASH_QUANTUM
    first = total - share * (parts - 1)
    return [first] + [share] * (parts - 1)


def default_span(panel: PricePanel, selections: Sequence[QuarterlySelection]) -> DateSpan:
    """Span from the first rebalance to the last panel date."""
    start = selections[0].index
    end = len(panel.dates) - 1
    return DateSpan(panel.dates[start], panel.dates[end], start, end)


def run_backtest(
    panel: PricePanel,
    selections: Sequence[QuarterlySelection],
    params: StrategyParams,
    span: Optional[DateSpan] = None,
) -> BacktestResult:
    """Simulate the strategy over a span.

    Each day applies, in order: the scheduled rebalance (dropped laggers are
    liquidated and all cash is split evenly over the new laggers), stop
    checks on held laggers, buy checks on idle laggers, and, on the last
    day, liquidation of every position. Fills happen at the day's close.

    Args:
        panel: Prices of every referenced ticker
        selections: Rebalance selections in date order; the first must fall
            on the span's first day
        params: Strategy settings
        span: Trading span (default: first selection to last panel date)

    Returns:
        Daily values, ledger and returns

    Raises:
        BacktestError: If the selections do not match the span, reference
            unknown tickers, or an accounting invariant breaks
    """
    if not selections:
        raise BacktestError("backtest needs at least one selection")
    span = span or default_span(panel, selections)
    _check_selections(panel, selections, span)

    closes = panel.closes.to_numpy(dtype=float)
    column = {ticker: i for i, ticker in enumerate(panel.tickers)}
    rebalances = {selection.index: selection for selection in selections}

    state = PortfolioState(reserve=params.initial_capital)
    trades: List[Trade] = []
    skipped: List[SkippedSignal] = []
    values = []

    for day in span.indices():
        date = panel.dates[day]
        today = {ticker: closes[day, i] for ticker, i in column.items()}
        prev = {ticker: closes[day - 1, i] for ticker, i in column.items()} if day > 0 else None

        if day in rebalances:
            _rebalance(state, rebalances[day], date, today, params, trades)
        _check_stops(state, date, today, prev, params, trades)
        if prev is not None:
            _check_buys(state, date, today, prev, params, trades, skipped)
        if day == span.end_index:
            _liquidate(state, date, today, params, trades)

        _check_invariants(state, date)
        values.append(state.total_value(today))

    span_dates = panel.dates[span.start_index : span.end_index + 1]
    daily_values = pd.Series(values, index=span_dates, name="portfolio_value")
    portfolio_return = (values[-1] - params.initial_capital) / params.initial_capital

    benchmark_return = None
    if panel.benchmark is not None:
        levels = panel.benchmark.to_numpy(dtype=float)
        benchmark_return = levels[span.end_index] / levels[span.start_index] - 1.0

    logger.info(
        f"Backtest {span}: {sum(1 for t in trades if t.action is TradeAction.BUY)} buys, "
        f"{len(trades)} trades, return {portfolio_return:.4%}"
    )
    return BacktestResult(
        daily_values=daily_values,
        trades=trades,
        skipped=skipped,
        initial_capital=params.initial_capital,
        portfolio_return=portfolio_return,
        benchmark_return=benchmark_return,
    )


def max_leader_ratio(
    panel: PricePanel, selections: Sequence[QuarterlySelection], span: Optional[DateSpan] = None
) -> float:
    """Largest day-over-day leader close ratio the strategy can act on.

    Any buy threshold above this value produces no trades. Returns 0.0 when
    no leader is ever active.
    """
    if not selections:
        return 0.0
    span = span or default_span(panel, selections)
    closes = panel.closes.to_numpy(dtype=float)
    ordered = sorted(selections, key=lambda s: s.index)

    best = 0.0
    for position, selection in enumerate(ordered):
        leaders = sorted({scored.leader for scored in selection.pairs})
        if not leaders:
            continue
        first = max(selection.index, span.start_index, 1)
        last = ordered[position + 1].index - 1 if position + 1 < len(ordered) else span.end_index
        if first > last:
            continue
        columns = [panel.column(leader) for leader in leaders]
        ratios = closes[first : last + 1, columns] / closes[first - 1 : last, columns]
        best = max(best, float(np.max(ratios)))
    return best


def _rebalance(
    state: PortfolioState,
    selection: QuarterlySelection,
    date: pd.Timestamp,
    today: Dict[str, float],
    params: StrategyParams,
    trades: List[Trade],
) -> None:
    laggers = selection.laggers
    for lagger in list(state.buckets):
        if lagger in laggers:
            continue
        bucket = state.buckets[lagger]
        if bucket.holding:
            leader = bucket.entry_leader or bucket.leaders[0]
            trades.append(
                _sell(bucket, leader, date, today, params, TradeTrigger.REBALANCE_LIQUIDATION)
            )

    pool = math.fsum([state.reserve] + [bucket.cash for bucket in state.buckets.values()])
    retained = {lagger: state.buckets[lagger] for lagger in laggers if lagger in state.buckets}
    state.buckets = {}
    state.reserve = 0.0
    if not laggers:
        state.reserve = pool
        logger.debug(f"{date:%Y-%m-%d}: no pairs selected, {pool:.2f} USD held in reserve")
        return

    for lagger, cash in zip(laggers, split_evenly(pool, len(laggers))):
        leaders = [scored.leader for scored in selection.pairs if scored.lagger == lagger]
        bucket = retained.get(lagger) or Bucket(lagger=lagger, leaders=leaders)
        bucket.cash = cash
        bucket.leaders = leaders
        if bucket.holding:
            bucket.leader_trailing_max = {
                leader: bucket.leader_trailing_max.get(leader, today[leader]) for leader in leaders
            }
        state.buckets[lagger] = bucket
    logger.debug(f"{date:%Y-%m-%d}: rebalanced {pool:.2f} USD over {len(laggers)} laggers")


def _check_stops(
    state: PortfolioState,
    date: pd.Timestamp,
    today: Dict[str, float],
    prev: Optional[Dict[str, float]],
    params: StrategyParams,
    trades: List[Trade],
) -> None:
    """Sell held laggers whose leaders broke their stop, then raise trailing maxima."""
    for bucket in state.buckets.values():
        if not bucket.holding:
            continue
        triggered = None
        for leader in bucket.leaders:
            leader_prev = prev[leader] if prev is not None else None
            if sell_signal(bucket, leader, today[leader], params, leader_prev):
                triggered = leader
                break
        for leader in bucket.leaders:
            high = bucket.leader_trailing_max.get(leader, today[leader])
            bucket.leader_trailing_max[leader] = max(high, today[leader])
        if triggered is not None:
            trades.append(_sell(bucket, triggered, date, today, params, TradeTrigger.STOP))


def _check_buys(
    state: PortfolioState,
    date: pd.Timestamp,
    today: Dict[str, float],
    prev: Dict[str, float],
    params: StrategyParams,
    trades: List[Trade],
    skipped: List[SkippedSignal],
) -> None:
    """Buy idle laggers when any of their leaders crossed the threshold."""
    for bucket in state.buckets.values():
        if bucket.holding:
            continue
        leader = next(
            (
                name
                for name in bucket.leaders
                if buy_signal(today[name], prev[name], params.buy_threshold)
            ),
            None,
        )
        if leader is None:
            continue
        trade = _buy(bucket, leader, date, today, params)
        if trade is None:
            reason = _skip_reason(bucket, today, params)
            skipped.append(SkippedSignal(date, bucket.lagger, leader, bucket.cash, reason))
            logger.debug(f"{date:%Y-%m-%d}: skipped buy of {bucket.lagger}: {reason}")
        else:
            trades.append(trade)


def _liquidate(
    state: PortfolioState,
    date: pd.Timestamp,
    today: Dict[str, float],
    params: StrategyParams,
    trades: List[Trade],
) -> None:
    for bucket in state.buckets.values():
        if bucket.holding:
            leader = bucket.entry_leader or bucket.leaders[0]
            trades.append(
                _sell(bucket, leader, date, today, params, TradeTrigger.FINAL_LIQUIDATION)
            )


def _buy(
    bucket: Bucket, leader: str, date: pd.Timestamp, today: Dict[str, float], params: StrategyParams
) -> Optional[Trade]:
    price = today[bucket.lagger]
    shares = execute_buy(bucket, price, params.commission_per_trade, params.fractional_shares)
    if shares is None:
        return None
    bucket.entry_leader = leader
    bucket.leader_trailing_max = {name: today[name] for name in bucket.leaders}
    return Trade(
        date,
        TradeAction.BUY,
        bucket.lagger,
        leader,
        shares,
        price,
        params.commission_per_trade,
        TradeTrigger.THRESHOLD,
    )


def _sell(
    bucket: Bucket,
    leader: str,
    date: pd.Timestamp,
    today: Dict[str, float],
    params: StrategyParams,
    trigger: TradeTrigger,
) -> Trade:
    price = today[bucket.lagger]
    shares, fee = execute_sell(bucket, price, params.commission_per_trade)
    return Trade(date, TradeAction.SELL, bucket.lagger, leader, shares, price, fee, trigger)


def _skip_reason(bucket: Bucket, today: Dict[str, float], params: StrategyParams) -> str:
    if bucket.cash <= params.commission_per_trade:
        return "cash does not cover commission"
    return f"cash below one share at {today[bucket.lagger]}"


def _check_selections(
    panel: PricePanel, selections: Sequence[QuarterlySelection], span: DateSpan
) -> None:
    indices = [selection.index for selection in selections]
    if indices[0] != span.start_index:
        raise BacktestError(
            f"first selection ({panel.dates[indices[0]]:%Y-%m-%d}) does not start the span {span}"
        )
    if any(later <= earlier for earlier, later in zip(indices, indices[1:])):
        raise BacktestError("selections must be in strictly increasing date order")
    if indices[-1] > span.end_index:
        raise BacktestError(f"selection after the end of span {span}")

    known = set(panel.tickers)
    for selection in selections:
        for scored in selection.pairs:
            for ticker in (scored.leader, scored.lagger):
                if ticker not in known:
                    raise BacktestError(
                        f"{ticker} selected on {selection.date:%Y-%m-%d} has no prices"
                    )


def _check_invariants(state: PortfolioState, date: pd.Timestamp) -> None:
    if state.reserve < 0:
        raise BacktestError(f"negative reserve cash on {date:%Y-%m-%d}")
    for bucket in state.buckets.values():
        if bucket.cash < 0 or bucket.shares < 0:
            raise BacktestError(
                f"negative cash or shares in {bucket.lagger} bucket on {date:%Y-%m-%d}"
            )
