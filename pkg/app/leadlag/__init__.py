"""Lead-lag detection, network construction and graph export."""

from app.leadlag.detector import DetectionParams, LeadLagTensor, build_tensor, detect_lead
from app.leadlag.export import export_graph, pair_graph, write_adjacency_csv
from app.leadlag.network import (
    LeaderLaggerPair,
    SummedLeadMatrix,
    lead_graph,
    out_degree,
    out_degrees,
    sum_and_mask,
    top_pairs,
)

__all__ = [
    "DetectionParams",
    "LeadLagTensor",
    "LeaderLaggerPair",
    "SummedLeadMatrix",
    "build_tensor",
    "detect_lead",
    "export_graph",
    "lead_graph",
    "out_degree",
    "out_degrees",
    "pair_graph",
    "sum_and_mask",
    "top_pairs",
    "write_adjacency_csv",
]
