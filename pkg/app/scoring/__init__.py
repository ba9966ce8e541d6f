"""Pair scoring: CAPM estimation, out-degree normalization and quarterly selection."""

from app.scoring.capm import (
    CapmEstimate,
    CapmParams,
    annualize_return,
    capm_expected_return,
    estimate_beta,
    estimate_capm,
)
from app.scoring.quarterly import QuarterlySelection, select_quarterly, write_selections_csv
from app.scoring.selection import (
    ScoredPair,
    SelectionParams,
    blend_and_select,
    normalize_out_degree,
    quarterly_schedule,
)

__all__ = [
    "CapmEstimate",
    "CapmParams",
    "QuarterlySelection",
    "ScoredPair",
    "SelectionParams",
    "annualize_return",
    "blend_and_select",
    "capm_expected_return",
    "estimate_beta",
    "estimate_capm",
    "normalize_out_degree",
    "quarterly_schedule",
    "select_quarterly",
    "write_selections_csv",
]
