"""Graph and adjacency exports for the lead-lag network."""

import logging
from pathlib import Path
from typing import Iterable, List, Union

import networkx as nx
import pandas as pd

from app.common.errors import LeadLagError
from app.leadlag.network import LeaderLaggerPair, SummedLeadMatrix

logger = logging.getLogger(__name__)

LEADER_COLOR = "red"
LAGGER_COLOR = "blue"

PathLike = Union[str, Path]


def pair_graph(pairs: Iterable[LeaderLaggerPair]) -> nx.DiGraph:
    """Build a colored digraph from selected pairs.

    Edges point leader -> lagger. Nodes that only lead are red; any node that
    is a lagger in at least one pair is blue.
    """
    graph = nx.DiGraph()
    for pair in pairs:
        graph.add_edge(pair.leader, pair.lagger, strength=pair.strength)
    for node in graph.nodes:
        graph.nodes[node]["color"] = LAGGER_COLOR if graph.in_degree(node) > 0 else LEADER_COLOR
    return graph


def to_dot(graph: nx.DiGraph, name: str = "leadlag") -> str:
    """Serialize a pair graph as DOT text with sorted nodes and edges."""
    lines: List[str] = [f"digraph {name} {{", "  node [style=filled, fontcolor=white];"]
    for node in sorted(graph.nodes):
        lines.append(f'  "{_escape(node)}" [color={graph.nodes[node]["color"]}];')
    for leader, lagger in sorted(graph.edges):
        strength = graph.edges[leader, lagger]["strength"]
        lines.append(f'  "{_escape(leader)}" -> "{_escape(lagger)}" [label="{strength}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_graph(pairs: List[LeaderLaggerPair], path: PathLike) -> Path:
    """Write the lead-lag pairs as a DOT digraph.

    Args:
        pairs: Pairs to draw
        path: Destination file

    Returns:
        Path of the written file

    Raises:
        LeadLagError: If there are no pairs or the file cannot be written
    """
    if not pairs:
        raise LeadLagError("no lead-lag pairs")

    output = Path(path)
    text = to_dot(pair_graph(pairs))
    try:
        output.parent.mkdir(parents=True, exist_ok=True)
        with open(output, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    except OSError as e:
        raise LeadLagError(f"cannot write graph to {output}: {e}") from e

    logger.info(f"Wrote lead-lag graph with {len(pairs)} edges to {output}")
    return output


def write_adjacency_csv(summed: SummedLeadMatrix, path: PathLike) -> Path:
    """Dump lead counts with laggers as rows and leaders as columns."""
    output = Path(path)
    frame = pd.DataFrame(summed.counts, index=list(summed.tickers), columns=list(summed.tickers))
    frame.index.name = "lagger"
    try:
        output.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(output, lineterminator="\n")
    except OSError as e:
        raise LeadLagError(f"cannot write adjacency matrix to {output}: {e}") from e

    logger.info(f"Wrote {len(summed.tickers)}x{len(summed.tickers)} adjacency matrix to {output}")
    return output


def _escape(name: str) -> str:
    return name.replace("\\", "\\\\").replace('"', '\\"')
