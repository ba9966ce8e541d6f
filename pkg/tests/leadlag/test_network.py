"""Tests for summed lead matrices, pair extraction and out-degrees."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.common.errors import LeadLagError
from app.leadlag import (
    DetectionParams,
    LeaderLaggerPair,
    LeadLagTensor,
    SummedLeadMatrix,
    lead_graph,
    out_degree,
    out_degrees,
    sum_and_mask,
    top_pairs,
)


def tensor_of(slices, tickers):
    slices = np.asarray(slices, dtype=bool)
    return LeadLagTensor(tuple(tickers), np.arange(len(slices)), slices, DetectionParams())


def matrix(counts, masked=True):
    counts = np.asarray(counts, dtype=np.int64)
    return SummedLeadMatrix(tuple(f"T{i}" for i in range(len(counts))), counts, masked)


def test_sum_two_slices():
    tensor = tensor_of([[[True, True], [False, True]]] * 2, ["A", "B"])
    summed = sum_and_mask(tensor, 2)
    np.testing.assert_array_equal(summed.counts, [[2, 2], [0, 2]])
    assert summed.diagonal_masked
    assert top_pairs(summed) == [LeaderLaggerPair(leader="B", lagger="A", strength=2)]


def test_sum_uses_trailing_slices():
    first = [[False, False], [True, False]]
    last = [[False, True], [False, False]]
    summed = sum_and_mask(tensor_of([first, last, last], ["A", "B"]), 2)
    np.testing.assert_array_equal(summed.counts, [[0, 2], [0, 0]])


@pytest.mark.parametrize("lookback", [0, 4])
def test_lookback_out_of_range(lookback):
    tensor = tensor_of(np.zeros((3, 2, 2)), ["A", "B"])
    with pytest.raises(LeadLagError):
        sum_and_mask(tensor, lookback)


def test_top_pairs_order_and_ties():
    summed = matrix([[9, 3, 5], [3, 9, 0], [1, 5, 9]])
    pairs = top_pairs(summed, count=4)
    assert [(p.leader, p.lagger, p.strength) for p in pairs] == [
        ("T2", "T0", 5),
        ("T1", "T2", 5),
        ("T1", "T0", 3),
        ("T0", "T1", 3),
    ]


def test_top_pairs_needs_masked_matrix():
    with pytest.raises(LeadLagError):
        top_pairs(matrix([[0, 1], [1, 0]], masked=False))


def test_top_pairs_of_empty_matrix():
    assert top_pairs(matrix([[4, 0], [0, 4]])) == []


def test_twenty_five_candidates_keep_twenty():
    rng = np.random.default_rng(3)
    counts = np.zeros((6, 6), dtype=np.int64)
    cells = [(i, j) for i in range(6) for j in range(6) if i != j][:25]
    for i, j in cells:
        counts[i, j] = rng.integers(1, 10)
    summed = matrix(counts)

    pairs = top_pairs(summed, count=20)
    chosen = {(summed.index_of(p.lagger), summed.index_of(p.leader)) for p in pairs}
    excluded = [counts[i, j] for i, j in cells if (i, j) not in chosen]

    assert len(pairs) == 20
    assert min(p.strength for p in pairs) >= max(excluded)


@settings(max_examples=200, deadline=None)
@given(
    seed=st.integers(0, 2**32 - 1),
    n=st.integers(2, 8),
    high=st.integers(1, 4),
    count=st.integers(1, 30),
)
def test_top_pairs_matches_exhaustive_sort(seed, n, high, count):
    rng = np.random.default_rng(seed)
    summed = matrix(rng.integers(0, high + 1, size=(n, n)))
    tickers = summed.tickers

    cells = [
        (-int(summed.counts[i, j]), tickers[i], tickers[j])
        for i in range(n)
        for j in range(n)
        if i != j and summed.counts[i, j] > 0
    ]
    expected = [(leader, lagger, -negated) for negated, lagger, leader in sorted(cells)[:count]]

    pairs = top_pairs(summed, count)
    assert [(p.leader, p.lagger, p.strength) for p in pairs] == expected
    assert all(p.leader != p.lagger for p in pairs)


def test_out_degree_of_complete_graph():
    summed = matrix(np.ones((4, 4)))
    assert all(out_degree(summed, ticker) == 3 for ticker in summed.tickers)


def test_out_degree_counts_distinct_laggers():
    summed = matrix([[7, 2, 0], [5, 7, 0], [1, 0, 0]])
    assert out_degrees(summed) == {"T0": 2, "T1": 1, "T2": 0}
    with pytest.raises(LeadLagError):
        out_degree(summed, "T9")


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 7))
def test_out_degrees_sum_to_edge_count(seed, n):
    counts = np.random.default_rng(seed).integers(0, 3, size=(n, n))
    summed = matrix(counts)
    off_diagonal = sum(1 for i in range(n) for j in range(n) if i != j and counts[i, j] > 0)
    assert sum(out_degrees(summed).values()) == off_diagonal


def test_lead_graph_points_leader_to_lagger():
    graph = lead_graph(matrix([[3, 4], [0, 3]]))
    assert set(graph.nodes) == {"T0", "T1"}
    assert list(graph.edges(data="weight")) == [("T1", "T0", 4)]


def test_pair_validation():
    with pytest.raises(LeadLagError):
        LeaderLaggerPair("A", "A", 1)
    with pytest.raises(LeadLagError):
        LeaderLaggerPair("A", "B", 0)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
