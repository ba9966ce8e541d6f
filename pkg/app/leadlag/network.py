"""Summed lead matrices, leader-lagger pair extraction and out-degrees."""

import logging
from dataclasses import dataclass
from typing import Dict, List, Tuple

import networkx as nx
import numpy as np

from app.common.errors import LeadLagError
from app.leadlag.detector import LeadLagTensor

logger = logging.getLogger(__name__)

DEFAULT_PAIR_COUNT = 20


@dataclass(frozen=True)
class LeaderLaggerPair:
    """Directed lead-lag edge.

    Attributes:
        leader: Ticker whose returns come first
        lagger: Ticker that follows ``lag`` days later
        strength: Number of summed windows in which the lead held
    """

    leader: str
    lagger: str
    strength: int

    def __post_init__(self):
        if self.leader == self.lagger:
            raise LeadLagError(f"{self.leader} cannot lead itself")
        if self.strength < 1:
            raise LeadLagError(
                f"pair {self.leader}->{self.lagger} needs strength >= 1, got {self.strength}"
            )

    def __str__(self) -> str:
        return f"{self.leader}->{self.lagger} ({self.strength})"


@dataclass(frozen=True, eq=False)
class SummedLeadMatrix:
    """Integer lead counts; ``counts[i, j]`` counts windows where ``j`` led ``i``."""

    tickers: Tuple[str, ...]
    counts: np.ndarray
    diagonal_masked: bool = True

    def __post_init__(self):
        n = len(self.tickers)
        if self.counts.shape != (n, n):
            raise LeadLagError(f"lead matrix must be {n}x{n}, got {self.counts.shape}")
        if np.any(self.counts < 0):
            raise LeadLagError("lead counts must be non-negative")

    def index_of(self, ticker: str) -> int:
        try:
            return self.tickers.index(ticker)
        except ValueError:
            raise LeadLagError(f"ticker {ticker} is not part of the lead matrix") from None

    def off_diagonal(self) -> np.ndarray:
        """Counts with the diagonal zeroed."""
        counts = self.counts.copy()
        np.fill_diagonal(counts, 0)
        return counts


def sum_and_mask(tensor: LeadLagTensor, lookback_slices: int) -> SummedLeadMatrix:
    """Sum the most recent slices of a tensor and mask self-pairs.

    Args:
        tensor: Per-window lead matrices
        lookback_slices: Number of trailing slices to add up

    Returns:
        Diagonal-masked count matrix

    Raises:
        LeadLagError: If the lookback is below 1 or exceeds the slice count
    """
    if lookback_slices < 1 or lookback_slices > len(tensor):
        raise LeadLagError(
            f"lookback of {lookback_slices} slices is outside 1..{len(tensor)}"
        )

    counts = tensor.slices[-lookback_slices:].sum(axis=0, dtype=np.int64)
    logger.debug(f"Summed {lookback_slices} of {len(tensor)} lead-lag slices")
    return SummedLeadMatrix(tensor.tickers, counts, diagonal_masked=True)


def top_pairs(summed: SummedLeadMatrix, count: int = DEFAULT_PAIR_COUNT) -> List[LeaderLaggerPair]:
    """Extract the strongest leader-lagger pairs.

    Pairs are ordered by strength descending, then by lagger and leader
    ticker ascending. Self-pairs and zero counts are never returned.

    Args:
        summed: Diagonal-masked lead counts
        count: Maximum number of pairs

    Returns:
        Up to ``count`` pairs

    Raises:
        LeadLagError: If the matrix is not diagonal-masked
    """
    if not summed.diagonal_masked:
        raise LeadLagError("top pairs require a diagonal-masked lead matrix")
    if count < 1:
        return []

    counts = summed.off_diagonal()
    laggers, leaders = np.nonzero(counts > 0)
    if len(laggers) == 0:
        return []

    strengths = counts[laggers, leaders]
    if len(strengths) > count:
        # Only cells at or above the count-th largest strength can qualify.
        cutoff = np.partition(strengths, len(strengths) - count)[len(strengths) - count]
        keep = strengths >= cutoff
        laggers, leaders, strengths = laggers[keep], leaders[keep], strengths[keep]

    tickers = summed.tickers
    ranked = sorted(
        zip(strengths.tolist(), laggers.tolist(), leaders.tolist()),
        key=lambda cell: (-cell[0], tickers[cell[1]], tickers[cell[2]]),
    )
    return [
        LeaderLaggerPair(leader=tickers[j], lagger=tickers[i], strength=int(s))
        for s, i, j in ranked[:count]
    ]


def out_degree(summed: SummedLeadMatrix, ticker: str) -> int:
    """Count the distinct laggers a ticker leads (diagonal excluded).

    Raises:
        LeadLagError: If the ticker is unknown
    """
    summed.index_of(ticker)
    return out_degrees(summed)[ticker]


def out_degrees(summed: SummedLeadMatrix) -> Dict[str, int]:
    """Out-degree of every ticker in the lead graph, keyed in matrix order."""
    graph = lead_graph(summed)
    return {ticker: int(graph.out_degree(ticker)) for ticker in summed.tickers}


def lead_graph(summed: SummedLeadMatrix) -> nx.DiGraph:
    """Build the directed lead-lag network.

    Every ticker becomes a node; each positive off-diagonal cell becomes an
    edge ``leader -> lagger`` weighted by its count.
    """
    graph = nx.DiGraph()
    graph.add_nodes_from(summed.tickers)
    counts = summed.off_diagonal()
    for i, j in zip(*np.nonzero(counts > 0)):
        graph.add_edge(summed.tickers[j], summed.tickers[i], weight=int(counts[i, j]))
    return graph
