"""Shared fixtures."""

import pytest

from app.ingest import SyntheticSpec, generate_synthetic_panel
from tests.builders import handsim_panel, handsim_selections

# Tickers 0 -> 1 and 2 -> 3 are coupled with a one-day lag.
COUPLED_SPEC = SyntheticSpec(
    n_tickers=6,
    n_days=320,
    volatility=0.012,
    seed=7,
    couplings=((0, 1), (2, 3)),
)


@pytest.fixture
def handsim():
    """Hand-simulated ten-day panel and its two selections."""
    panel = handsim_panel()
    return panel, handsim_selections(panel)


@pytest.fixture(scope="session")
def coupled_panel():
    return generate_synthetic_panel(COUPLED_SPEC)
