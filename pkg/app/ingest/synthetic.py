"""Seeded synthetic price panels for tests and dry runs."""

import logging
from dataclasses import dataclass, field
from typing import Sequence, Tuple, Union

import numpy as np
import pandas as pd

from app.ingest.panel import PricePanel, equal_weight_index

logger = logging.getLogger(__name__)

BENCHMARK_BASE = 1000.0

FloatOrSeq = Union[float, Sequence[float]]


@dataclass(frozen=True)
class SyntheticSpec:
    """Shape and dynamics of a generated universe.

    Attributes:
        n_tickers: Universe size
        n_days: Number of trading days (price rows)
        drift: Mean daily simple return, scalar or one value per ticker
        volatility: Daily return volatility, scalar or one value per ticker
        seed: Random generator seed
        start: First business day of the calendar
        initial_price: Close of every ticker on the first day
        couplings: ``(leader, lagger)`` ticker indices; the lagger copies the
            leader's return from ``lag`` days earlier
        lag: Delay applied by couplings
        coupling_noise: Standard deviation of noise added to copied returns
    """

    n_tickers: int
    n_days: int
    drift: FloatOrSeq = 0.0003
    volatility: FloatOrSeq = 0.015
    seed: int = 1
    start: str = "2020-01-01"
    initial_price: float = 100.0
    couplings: Tuple[Tuple[int, int], ...] = field(default_factory=tuple)
    lag: int = 1
    coupling_noise: float = 0.0

    def __post_init__(self):
        if self.n_tickers < 1 or self.n_days < 1:
            raise ValueError("synthetic universe needs at least one ticker and one day")
        if self.initial_price <= 0:
            raise ValueError("initial_price must be positive")
        if np.any(np.asarray(self.volatility, dtype=float) < 0):
            raise ValueError("volatility must be >= 0")
        if np.any(np.asarray(self.drift, dtype=float) <= -1):
            raise ValueError("drift must be greater than -1")
        if self.lag < 1:
            raise ValueError("lag must be >= 1")
        if self.coupling_noise < 0:
            raise ValueError("coupling_noise must be >= 0")
        for leader, lagger in self.couplings:
            if not (0 <= leader < self.n_tickers and 0 <= lagger < self.n_tickers):
                raise ValueError(f"coupling ({leader}, {lagger}) references an unknown ticker")
            if leader == lagger:
                raise ValueError("a coupling needs two different tickers")

    @property
    def tickers(self) -> Tuple[str, ...]:
        return tuple(f"SYN{i:03d}" for i in range(self.n_tickers))


def generate_synthetic_panel(spec: SyntheticSpec) -> PricePanel:
    """Generate a geometric random walk panel with an equal-weight benchmark.

    Daily gross returns are ``exp(log(1 + drift) - vol**2 / 2 + vol * z)``, so
    a zero-volatility walk grows by ``drift`` per day and every price
    stays positive. The same seed always yields the same panel.

    Args:
        spec: Universe shape, dynamics and seed

    Returns:
        Price panel with an equal-weighted benchmark index
    """
    rng = np.random.default_rng(spec.seed)
    n, days = spec.n_tickers, spec.n_days

    drift = np.broadcast_to(np.asarray(spec.drift, dtype=float), (n,))
    volatility = np.broadcast_to(np.asarray(spec.volatility, dtype=float), (n,))

    shocks = rng.standard_normal((days - 1, n))
    simple = np.expm1(np.log1p(drift) - 0.5 * volatility**2 + volatility * shocks)
    # Deterministic tickers grow by exactly 1 + drift.
    simple = np.where(volatility == 0.0, drift, simple)

    for leader, lagger in spec.couplings:
        if days - 1 <= spec.lag:
            break
        copied = simple[: -spec.lag, leader].copy()
        if spec.coupling_noise > 0:
            copied += spec.coupling_noise * rng.standard_normal(len(copied))
        simple[spec.lag :, lagger] = np.clip(copied, -0.95, None)

    growth = np.vstack([np.ones((1, n)), 1.0 + simple])
    closes = spec.initial_price * np.cumprod(growth, axis=0)

    dates = pd.bdate_range(spec.start, periods=days, name="date")
    frame = pd.DataFrame(closes, index=dates, columns=list(spec.tickers))
    benchmark = equal_weight_index(frame, BENCHMARK_BASE)

    logger.info(
        f"Generated synthetic panel: {n} tickers x {days} days, seed {spec.seed}, "
        f"{len(spec.couplings)} couplings"
    )
    return PricePanel(frame, benchmark)
