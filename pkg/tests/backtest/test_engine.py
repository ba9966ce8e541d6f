"""Tests for the day-by-day backtest."""

import math

import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.backtest import (
    StopMode,
    StrategyParams,
    TradeAction,
    TradeTrigger,
    max_leader_ratio,
    run_backtest,
    split_evenly,
)
from app.backtest.engine import CASH_QUANTUM
from app.common.errors import BacktestError
from app.ingest import resolve_span
from tests.builders import (
    HANDSIM_LEDGER,
    HANDSIM_VALUES,
    price_panel,
    random_walk_panel,
    selection,
)

HANDSIM_PARAMS = StrategyParams(buy_threshold=1.02, trailing_stop=0.10)


def test_handsim_daily_values(handsim):
    panel, selections = handsim
    result = run_backtest(panel, selections, HANDSIM_PARAMS)

    assert list(result.dates) == list(panel.dates)
    for value, expected in zip(result.daily_values, HANDSIM_VALUES):
        assert value == pytest.approx(expected, abs=1e-9)
    assert result.portfolio_return == pytest.approx(0.1277, abs=1e-12)
    assert result.final_value == pytest.approx(563850.0, abs=1e-9)
    assert result.benchmark_return is None


def test_handsim_ledger(handsim):
    panel, selections = handsim
    result = run_backtest(panel, selections, HANDSIM_PARAMS)
    expected = pd.read_csv(HANDSIM_LEDGER)

    assert len(result.trades) == len(expected)
    for trade, row in zip(result.trades, expected.itertuples()):
        assert trade.date == pd.Timestamp(row.date)
        assert trade.action.value == row.action
        assert (trade.lagger, trade.leader) == (row.lagger, row.leader)
        assert trade.shares == pytest.approx(row.shares, abs=1e-9)
        assert trade.price == row.price
        assert trade.trigger.value == row.trigger
        assert trade.commission == 0.0
    assert result.buy_count == 4
    assert result.trade_count == 8
    assert result.skipped == []


def test_handsim_threshold_above_every_leader_move(handsim):
    panel, selections = handsim
    ceiling = max_leader_ratio(panel, selections)
    assert ceiling == pytest.approx(110.0 / 105.0)

    result = run_backtest(panel, selections, StrategyParams(buy_threshold=1.05))
    assert result.trades == []
    assert result.portfolio_return == 0.0
    assert list(result.daily_values) == [500000.0] * 10


def test_rising_leader_never_stops_out():
    panel = price_panel({"L": [100.0 + i for i in range(20)], "G": [10.0] * 20})
    result = run_backtest(
        panel, [selection(panel, 0, [("L", "G")])], StrategyParams(buy_threshold=1.0)
    )
    assert [t.trigger for t in result.trades] == [
        TradeTrigger.THRESHOLD,
        TradeTrigger.FINAL_LIQUIDATION,
    ]


def test_prev_close_mode_stops_on_one_day_drop():
    leader = [100.0, 103.0, 110.0, 120.0, 108.0, 109.0]
    panel = price_panel({"L": leader, "G": [10.0, 10.0, 11.0, 12.0, 13.0, 13.0]})
    selections = [selection(panel, 0, [("L", "G")])]

    trailing = run_backtest(panel, selections, StrategyParams(trailing_stop=0.05))
    prev = run_backtest(
        panel, selections, StrategyParams(trailing_stop=0.05, stop_mode=StopMode.PREV_CLOSE)
    )

    assert [t.trigger for t in trailing.trades if t.action is TradeAction.SELL] == [
        TradeTrigger.STOP
    ]
    assert trailing.trades[1].date == panel.dates[4]
    assert [t.date for t in prev.trades if t.trigger is TradeTrigger.STOP] == [panel.dates[4]]


def test_empty_selection_keeps_cash_in_reserve():
    panel = price_panel({"L": [100.0, 110.0, 121.0, 133.1], "G": [10.0, 11.0, 12.0, 13.0]})
    selections = [
        selection(panel, 0, [("L", "G")]),
        selection(panel, 2, []),
    ]
    result = run_backtest(panel, selections, StrategyParams())

    assert [t.trigger for t in result.trades] == [
        TradeTrigger.THRESHOLD,
        TradeTrigger.REBALANCE_LIQUIDATION,
    ]
    assert result.daily_values.iloc[-1] == result.daily_values.iloc[2]


def test_skipped_signal_is_recorded():
    panel = price_panel({"L": [100.0, 110.0], "G": [10.0, 600000.0]})
    params = StrategyParams(fractional_shares=False)
    result = run_backtest(panel, [selection(panel, 0, [("L", "G")])], params)

    assert result.trades == []
    [skip] = result.skipped
    assert (skip.lagger, skip.leader, skip.date) == ("G", "L", panel.dates[1])


def test_commission_is_charged_per_trade():
    panel = price_panel({"L": [100.0, 110.0, 111.0], "G": [10.0, 10.0, 10.0]})
    params = StrategyParams(commission_per_trade=5.0)
    result = run_backtest(panel, [selection(panel, 0, [("L", "G")])], params)
    assert result.final_value == pytest.approx(500000.0 - 10.0)


def test_selection_must_start_the_span():
    panel = price_panel({"L": [1.0] * 5, "G": [1.0] * 5})
    span = resolve_span(panel.dates, panel.dates[0])
    with pytest.raises(BacktestError):
        run_backtest(panel, [selection(panel, 1, [("L", "G")])], StrategyParams(), span)


def test_selection_with_unknown_ticker():
    panel = price_panel({"L": [1.0] * 5, "G": [1.0] * 5})
    with pytest.raises(BacktestError):
        run_backtest(panel, [selection(panel, 0, [("L", "X")])], StrategyParams())


def test_selections_out_of_order():
    panel = price_panel({"L": [1.0] * 5, "G": [1.0] * 5})
    selections = [selection(panel, 0, [("L", "G")]), selection(panel, 0, [("L", "G")])]
    with pytest.raises(BacktestError):
        run_backtest(panel, selections, StrategyParams())


@settings(max_examples=200, deadline=None)
@given(total=st.floats(0.0, 1e7), parts=st.integers(1, 20))
def test_split_evenly_adds_up_exactly(total, parts):
    shares = split_evenly(total, parts)
    assert len(shares) == parts
    assert math.fsum(shares) == total
    assert min(shares) >= 0.0
    assert max(shares) - min(shares) <= parts * CASH_QUANTUM + 1e-6


def test_never_triggering_strategy_keeps_capital_exactly():
    panel = random_walk_panel(["A", "B", "C", "D"], days=1000, seed=4)
    selections = [selection(panel, 0, [("A", "B"), ("C", "D")])]
    result = run_backtest(panel, selections, StrategyParams(buy_threshold=2.0))
    assert result.trades == []
    assert result.final_value == 500000.0
    assert result.portfolio_return == 0.0


def test_long_random_walk_stays_solvent():
    panel = random_walk_panel(["A", "B", "C", "D", "E"], days=1000, seed=8)
    selections = [
        selection(panel, 0, [("A", "B"), ("C", "D")]),
        selection(panel, 300, [("E", "B"), ("A", "C")]),
        selection(panel, 700, [("D", "E")]),
    ]
    params = StrategyParams(buy_threshold=1.01, trailing_stop=0.03, commission_per_trade=2.5)
    result = run_backtest(panel, selections, params)

    assert result.trade_count > 0
    assert (result.daily_values > 0).all()
    assert_round_trips(result, params.initial_capital)


def assert_round_trips(result, initial_capital):
    """Every buy is closed by a sell of the same size; cash flows explain the final value."""
    open_positions = {}
    flows = [initial_capital]
    for trade in result.trades:
        notional = trade.shares * trade.price
        if trade.action is TradeAction.BUY:
            assert trade.lagger not in open_positions
            open_positions[trade.lagger] = trade.shares
            flows += [-notional, -trade.commission]
        else:
            assert open_positions.pop(trade.lagger) == trade.shares
            flows += [notional, -trade.commission]
    assert open_positions == {}
    assert result.final_value == pytest.approx(math.fsum(flows), rel=1e-9)


@settings(max_examples=60, deadline=None)
@given(
    seed=st.integers(0, 2**32 - 1),
    days=st.integers(5, 40),
    buy_threshold=st.sampled_from([1.0, 1.005, 1.01, 1.02]),
    trailing_stop=st.sampled_from([0.0, 0.02, 0.05, 1.0]),
    commission=st.sampled_from([0.0, 7.0]),
    fractional=st.booleans(),
    stop_mode=st.sampled_from(list(StopMode)),
)
def test_accounting_invariants(
    seed, days, buy_threshold, trailing_stop, commission, fractional, stop_mode
):
    panel = random_walk_panel(["A", "B", "C", "D"], days=days, seed=seed)
    selections = [
        selection(panel, 0, [("A", "B"), ("C", "D"), ("B", "D")]),
        selection(panel, days // 2, [("A", "D"), ("B", "C")]),
    ]
    params = StrategyParams(
        buy_threshold=buy_threshold,
        trailing_stop=trailing_stop,
        commission_per_trade=commission,
        fractional_shares=fractional,
        stop_mode=stop_mode,
    )
    result = run_backtest(panel, selections, params)

    assert len(result.daily_values) == days
    assert (result.daily_values >= 0).all()
    assert_round_trips(result, params.initial_capital)
    if commission == 0.0 and result.trade_count == 0:
        assert result.final_value == params.initial_capital


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), stop_mode=st.sampled_from(list(StopMode)))
def test_buy_count_does_not_grow_with_threshold(seed, stop_mode):
    panel = random_walk_panel(["A", "B", "C", "D", "E"], days=120, seed=seed, step=0.02)
    selections = [
        selection(panel, 0, [("A", "B"), ("C", "D"), ("E", "D")]),
        selection(panel, 60, [("B", "E"), ("D", "A")]),
    ]
    counts = []
    for step in range(16):
        params = StrategyParams(
            buy_threshold=1.0 + step * 0.002, trailing_stop=0.03, stop_mode=stop_mode
        )
        counts.append(run_backtest(panel, selections, params).buy_count)
    assert all(later <= earlier for earlier, later in zip(counts, counts[1:]))


def test_benchmark_return_over_span():
    panel = random_walk_panel(["A", "B"], days=30, seed=1)
    span = resolve_span(panel.dates, panel.dates[5], panel.dates[20])
    result = run_backtest(panel, [selection(panel, 5, [("A", "B")])], StrategyParams(), span)
    levels = panel.benchmark
    assert result.benchmark_return == pytest.approx(levels.iloc[20] / levels.iloc[5] - 1.0)
    assert len(result.daily_values) == 16


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
