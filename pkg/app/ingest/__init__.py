"""Price data ingestion: loading, gap repair, calendar alignment and synthetic panels."""

from app.ingest.calendar import DateSpan, align_calendars, parse_span, resolve_span
from app.ingest.loader import (
    load_benchmark,
    load_price_panel,
    write_benchmark,
    write_price_panel,
)
from app.ingest.panel import (
    GapPolicy,
    PricePanel,
    ReturnsPanel,
    compute_returns,
    equal_weight_index,
)
from app.ingest.synthetic import SyntheticSpec, generate_synthetic_panel

__all__ = [
    "DateSpan",
    "GapPolicy",
    "PricePanel",
    "ReturnsPanel",
    "SyntheticSpec",
    "align_calendars",
    "compute_returns",
    "equal_weight_index",
    "generate_synthetic_panel",
    "load_benchmark",
    "load_price_panel",
    "parse_span",
    "resolve_span",
    "write_benchmark",
    "write_price_panel",
]
