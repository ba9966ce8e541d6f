"""Parameter sweeps over buy threshold and trailing stop."""

from app.sweep.grid import (
    HOLD_STOP,
    HOLD_THRESHOLD,
    SweepGrid,
    SweepSpec,
    best_cell,
    cross_section,
    evaluate_cell,
    grid_range,
    run_sweep,
    write_contour_csv,
    write_cross_section_csv,
)

__all__ = [
    "HOLD_STOP",
    "HOLD_THRESHOLD",
    "SweepGrid",
    "SweepSpec",
    "best_cell",
    "cross_section",
    "evaluate_cell",
    "grid_range",
    "run_sweep",
    "write_contour_csv",
    "write_cross_section_csv",
]
