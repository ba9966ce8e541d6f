"""Blending CAPM and out-degree scores into ranked pair selections."""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Mapping, Sequence, Tuple

import pandas as pd

from app.common.errors import ScoringError
from app.leadlag.network import LeaderLaggerPair
from app.scoring.capm import CapmEstimate

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SelectionParams:
    """Pair selection settings.

    Attributes:
        capm_weight: Weight of the CAPM expected return in the blend
        outdeg_weight: Weight of the normalized out-degree score
        candidate_count: Pairs taken from the lead matrix before scoring
        select_count: Pairs kept after blending
        lookback_slices: Trailing tensor slices summed at each rebalance
        signed_blend: Rank by the signed blend instead of its absolute value
    """

    capm_weight: float = 0.7
    outdeg_weight: float = 0.3
    candidate_count: int = 20
    select_count: int = 6
    lookback_slices: int = 60
    signed_blend: bool = False

    def __post_init__(self):
        if self.capm_weight < 0 or self.outdeg_weight < 0:
            raise ValueError("blend weights must be non-negative")
        if not math.isclose(self.capm_weight + self.outdeg_weight, 1.0, abs_tol=1e-12):
            raise ValueError(
                f"blend weights must sum to 1, got {self.capm_weight} + {self.outdeg_weight}"
            )
        if self.candidate_count < 1 or self.select_count < 1:
            raise ValueError("candidate_count and select_count must be >= 1")
        if self.select_count > self.candidate_count:
            raise ValueError(
                f"select_count ({self.select_count}) cannot exceed "
                f"candidate_count ({self.candidate_count})"
            )
        if self.lookback_slices < 1:
            raise ValueError("lookback_slices must be >= 1")


@dataclass(frozen=True)
class ScoredPair:
    """A candidate pair with its score components."""

    pair: LeaderLaggerPair
    beta: float
    capm_component: float
    outdeg_component: float
    blended: float

    @property
    def leader(self) -> str:
        return self.pair.leader

    @property
    def lagger(self) -> str:
        return self.pair.lagger


def normalize_out_degree(
    candidates: Sequence[Tuple[LeaderLaggerPair, int]],
) -> Dict[LeaderLaggerPair, float]:
    """Map lagger out-degrees to inverted min-max scores in [0, 1].

    The lowest degree scores 1 and the highest 0. If all degrees are equal
    every pair scores 1.

    Raises:
        ScoringError: If there are no candidates
    """
    if not candidates:
        raise ScoringError("cannot normalize out-degrees of an empty candidate list")

    degrees = [degree for _, degree in candidates]
    low, high = min(degrees), max(degrees)
    if high == low:
        return {pair: 1.0 for pair, _ in candidates}
    span = float(high - low)
    return {pair: 1.0 - (degree - low) / span for pair, degree in candidates}


def blend_and_select(
    candidates: Sequence[LeaderLaggerPair],
    capm: Mapping[str, CapmEstimate],
    odeg: Mapping[LeaderLaggerPair, float],
    params: SelectionParams,
) -> List[ScoredPair]:
    """Score candidates and keep the best ``params.select_count``.

    The blend is ``|w_capm * expected_return + w_outdeg * odeg_score|``
    (signed when ``params.signed_blend``). Ties are broken by lagger then
    leader ticker, so the result does not depend on input order.

    Args:
        candidates: Pairs from the lead matrix
        capm: CAPM estimate per lagger ticker
        odeg: Normalized out-degree score per pair
        params: Weights and counts

    Returns:
        Selected pairs, best first; a lagger may appear more than once

    Raises:
        ScoringError: If a candidate has no CAPM estimate or out-degree score
    """
    scored = []
    for pair in candidates:
        if pair.lagger not in capm:
            raise ScoringError(f"no CAPM estimate for lagger {pair.lagger}")
        if pair not in odeg:
            raise ScoringError(f"no out-degree score for pair {pair.leader}->{pair.lagger}")

        estimate = capm[pair.lagger]
        blend = params.capm_weight * estimate.expected_return + params.outdeg_weight * odeg[pair]
        scored.append(
            ScoredPair(
                pair=pair,
                beta=estimate.beta,
                capm_component=estimate.expected_return,
                outdeg_component=odeg[pair],
                blended=blend if params.signed_blend else abs(blend),
            )
        )

    scored.sort(key=lambda s: (-s.blended, s.lagger, s.leader))
    return scored[: params.select_count]


def quarterly_schedule(dates: pd.DatetimeIndex) -> List[int]:
    """Positions of the rebalance days within ``dates``.

    The first date always rebalances; after that, the first trading day of
    each calendar quarter does.
    """
    if len(dates) == 0:
        return []
    quarters = pd.DatetimeIndex(dates).to_period("Q")
    changed = quarters[1:] != quarters[:-1]
    return [0] + [int(i) + 1 for i in changed.nonzero()[0]]
