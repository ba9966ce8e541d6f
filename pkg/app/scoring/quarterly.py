"""Quarterly pair selection over a backtest span."""

import dataclasses
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np
import pandas as pd

from app.common.errors import ScoringError
from app.ingest.calendar import DateSpan
from app.ingest.panel import PricePanel, ReturnsPanel
from app.leadlag.detector import LeadLagTensor
from app.leadlag.network import out_degrees, sum_and_mask, top_pairs
from app.scoring.capm import CapmParams, estimate_capm
from app.scoring.selection import (
    ScoredPair,
    SelectionParams,
    blend_and_select,
    normalize_out_degree,
    quarterly_schedule,
)

logger = logging.getLogger(__name__)

SELECTION_COLUMNS = [
    "quarter_start",
    "leader",
    "lagger",
    "strength",
    "beta",
    "capm",
    "odeg_norm",
    "blended",
]


@dataclass(frozen=True)
class QuarterlySelection:
    """Pairs chosen at one rebalance.

    Attributes:
        date: Rebalance trading day
        index: Row of ``date`` in the price panel
        pairs: Selected pairs, best first (may be empty)
    """

    date: pd.Timestamp
    index: int
    pairs: Tuple[ScoredPair, ...] = ()

    @property
    def laggers(self) -> List[str]:
        """Distinct laggers in selection order."""
        seen: List[str] = []
        for scored in self.pairs:
            if scored.lagger not in seen:
                seen.append(scored.lagger)
        return seen


def select_quarterly(
    panel: PricePanel,
    returns: ReturnsPanel,
    tensor: LeadLagTensor,
    span: DateSpan,
    capm_params: CapmParams,
    selection_params: SelectionParams,
) -> List[QuarterlySelection]:
    """Select pairs at every rebalance day of a span.

    At panel row ``d`` only the ``d`` return rows ending with that day's close
    are used, so no selection looks ahead. Shorter histories than the
    configured lookbacks are used with a warning; a rebalance with no usable
    history keeps its capital in cash.

    Args:
        panel: Price panel the returns and tensor were built from
        returns: Daily returns of ``panel``
        tensor: Lead-lag tensor over ``returns``
        span: Backtest span
        capm_params: Beta lookback and risk-free rate
        selection_params: Blend weights and counts

    Returns:
        One selection per rebalance day, in date order
    """
    span_dates = panel.dates[span.start_index : span.end_index + 1]
    rebalances = [span.start_index + offset for offset in quarterly_schedule(span_dates)]
    market = _market_returns(returns)

    selections = []
    for index in rebalances:
        pairs = _select_at(index, returns, market, tensor, capm_params, selection_params)
        selection = QuarterlySelection(panel.dates[index], index, tuple(pairs))
        logger.info(
            f"Rebalance {selection.date:%Y-%m-%d}: {len(pairs)} pairs, "
            f"laggers {', '.join(selection.laggers) or '-'}"
        )
        selections.append(selection)
    return selections


def _select_at(
    index: int,
    returns: ReturnsPanel,
    market: np.ndarray,
    tensor: LeadLagTensor,
    capm_params: CapmParams,
    selection_params: SelectionParams,
) -> List[ScoredPair]:
    day = returns.dates[index - 1] if index > 0 else None
    label = f"{day:%Y-%m-%d}" if day is not None else f"row {index}"

    available = tensor.available(index)
    if available == 0:
        logger.warning(f"No complete lead-lag window before {label}; holding cash")
        return []

    lookback = selection_params.lookback_slices
    if available < lookback:
        logger.warning(
            f"Only {available} of {lookback} lead-lag slices available at {label}"
        )
        lookback = available
    summed = sum_and_mask(tensor.truncate(available), lookback)

    candidates = top_pairs(summed, selection_params.candidate_count)
    if not candidates:
        logger.warning(f"No lead-lag pairs at {label}; holding cash")
        return []

    beta_lookback = min(capm_params.beta_lookback, index)
    if beta_lookback < 2:
        logger.warning(f"Not enough history for CAPM at {label}; holding cash")
        return []
    if beta_lookback < capm_params.beta_lookback:
        logger.warning(
            f"CAPM lookback shortened to {beta_lookback} of "
            f"{capm_params.beta_lookback} days at {label}"
        )
        capm_params = dataclasses.replace(capm_params, beta_lookback=beta_lookback)

    degrees = out_degrees(summed)
    odeg = normalize_out_degree([(pair, degrees[pair.lagger]) for pair in candidates])

    values = returns.values[:index]
    tickers = returns.tickers
    capm = {}
    for pair in candidates:
        if pair.lagger in capm:
            continue
        column = tickers.index(pair.lagger)
        capm[pair.lagger] = estimate_capm(
            pair.lagger, values[:, column], market[:index], capm_params
        )

    return blend_and_select(candidates, capm, odeg, selection_params)


def _market_returns(returns: ReturnsPanel) -> np.ndarray:
    if returns.benchmark_returns is not None:
        return returns.benchmark_returns.to_numpy(dtype=float)
    logger.warning("No benchmark loaded; using the equal-weighted universe as the market")
    return returns.values.mean(axis=1)


def write_selections_csv(
    selections: List[QuarterlySelection], path: Union[str, Path]
) -> Path:
    """Write every selected pair as one row, grouped by rebalance date."""
    rows = [
        {
            "quarter_start": selection.date.strftime("%Y-%m-%d"),
            "leader": scored.leader,
            "lagger": scored.lagger,
            "strength": scored.pair.strength,
            "beta": scored.beta,
            "capm": scored.capm_component,
            "odeg_norm": scored.outdeg_component,
            "blended": scored.blended,
        }
        for selection in selections
        for scored in selection.pairs
    ]
    output = Path(path)
    try:
        output.parent.mkdir(parents=True, exist_ok=True)
        pd.DataFrame(rows, columns=SELECTION_COLUMNS).to_csv(
            output, index=False, lineterminator="\n"
        )
    except OSError as e:
        raise ScoringError(f"cannot write selections to {output}: {e}") from e

    logger.info(f"Wrote {len(rows)} selected pairs over {len(selections)} rebalances to {output}")
    return output
