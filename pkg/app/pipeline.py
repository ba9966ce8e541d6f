"""Subcommand runners and the main entry point."""

import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional

from app.backtest import (
    evaluate_performance,
    format_summary,
    max_leader_ratio,
    run_backtest,
    write_daily_values_csv,
    write_ledger_csv,
)
from app.cli import parse_args, validate_args
from app.common.errors import ConfigError, EngineError, LeadLagError
from app.config import RunConfig
from app.ingest import (
    DateSpan,
    PricePanel,
    ReturnsPanel,
    align_calendars,
    compute_returns,
    equal_weight_index,
    generate_synthetic_panel,
    load_benchmark,
    load_price_panel,
    parse_span,
    resolve_span,
    write_benchmark,
    write_price_panel,
)
from app.leadlag import (
    LeadLagTensor,
    build_tensor,
    export_graph,
    lead_graph,
    sum_and_mask,
    top_pairs,
    write_adjacency_csv,
)
from app.scoring import QuarterlySelection, select_quarterly, write_selections_csv
from app.sweep import (
    HOLD_STOP,
    HOLD_THRESHOLD,
    SweepSpec,
    best_cell,
    run_sweep,
    write_contour_csv,
    write_cross_section_csv,
)

logger = logging.getLogger(__name__)

NETWORK_FILE = "network.dot"
ADJACENCY_FILE = "adjacency.csv"
SELECTIONS_FILE = "selections.csv"
LEDGER_FILE = "ledger.csv"
DAILY_VALUES_FILE = "daily_values.csv"
SUMMARY_FILE = "summary.txt"
CONTOUR_FILE = "contour.csv"
THRESHOLD_SECTION_FILE = "cross_section_threshold.csv"
STOP_SECTION_FILE = "cross_section_stop.csv"


def setup_logging(config: RunConfig, log_level_override: Optional[str] = None) -> None:
    """Setup logging configuration.

    Args:
        config: Configuration object
        log_level_override: Optional log level to override config setting
    """
    log_level_str = log_level_override or config.log_level
    log_level = getattr(logging, log_level_str.upper(), logging.INFO)
    log_file = config.log_file

    # Create log directory if needed
    if log_file:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)

    log_format = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stdout)]
    if log_file:
        handlers.append(logging.FileHandler(log_file, encoding="utf-8"))

    logging.basicConfig(level=log_level, format=log_format, handlers=handlers, force=True)


@dataclass(frozen=True, eq=False)
class RunInputs:
    """Panel, returns, span and tensor shared by the analysis subcommands."""

    panel: PricePanel
    returns: ReturnsPanel
    span: DateSpan
    tensor: LeadLagTensor


def load_panel(config: RunConfig) -> PricePanel:
    """Load the configured price file and, if configured, align the benchmark.

    Raises:
        ConfigError: If no price file is configured
    """
    if not config.prices_path:
        raise ConfigError("a price file is required", key="data.prices")
    panel = load_price_panel(config.prices_path, config.gap_policy())
    if config.benchmark_path:
        panel = align_calendars(panel, load_benchmark(config.benchmark_path))
    return panel


def resolve_run_span(config: RunConfig, panel: PricePanel) -> DateSpan:
    """Resolve the configured span against the panel calendar.

    Explicit ``span.start`` / ``span.end`` win over ``span.preset``. Without a
    start, trading begins on the first date that has a full CAPM lookback of
    history (or the last date on a shorter panel).
    """
    preset_start, preset_end = parse_span(config.span_preset)
    start = config.span_start or preset_start
    end = config.span_end or preset_end
    if start is None:
        lookback = config.capm_params().beta_lookback
        start = panel.dates[min(lookback, len(panel.dates) - 1)]
    return resolve_span(panel.dates, start, end)


def prepare_inputs(config: RunConfig) -> RunInputs:
    """Load data, resolve the span and build the lead-lag tensor."""
    logger.info("Loading price data")
    panel = load_panel(config)
    span = resolve_run_span(config, panel)

    logger.info("Building lead-lag tensor")
    returns = compute_returns(panel)
    tensor = build_tensor(
        returns,
        config.detection_params(),
        stride=config.detection_stride,
        workers=config.detection_workers,
    )
    logger.info(f"Trading span {span} ({len(span)} days)")
    return RunInputs(panel, returns, span, tensor)


def build_selections(config: RunConfig, inputs: RunInputs) -> List[QuarterlySelection]:
    logger.info("Selecting leader-lagger pairs for each quarter")
    return select_quarterly(
        inputs.panel,
        inputs.returns,
        inputs.tensor,
        inputs.span,
        config.capm_params(),
        config.selection_params(),
    )


def benchmark_for(panel: PricePanel) -> PricePanel:
    """Attach an equal-weighted universe index when no benchmark was loaded."""
    if panel.benchmark is not None:
        return panel
    logger.warning("No benchmark loaded; comparing against the equal-weighted universe")
    return PricePanel(panel.closes, equal_weight_index(panel.closes), panel.dropped)


# =============================================================================
# Subcommands
# =============================================================================


def cmd_synth(config: RunConfig) -> List[Path]:
    """Generate a synthetic panel and write its price and benchmark CSVs."""
    logger.info("Generating synthetic price panel")
    panel = generate_synthetic_panel(config.synthetic_spec())
    out = config.output_directory
    return [
        write_price_panel(panel, out / config.synth_prices_file),
        write_benchmark(panel, out / config.synth_benchmark_file),
    ]


def cmd_network(config: RunConfig) -> List[Path]:
    """Export the lead-lag network as of ``network.as_of`` (default: span start).

    Raises:
        LeadLagError: If no window completes before the as-of date or no pair
            has a positive count
    """
    inputs = prepare_inputs(config)
    dates = inputs.panel.dates
    if config.network_as_of:
        as_of = resolve_span(dates, config.network_as_of, config.network_as_of).start_index
    else:
        as_of = inputs.span.start_index

    available = inputs.tensor.available(as_of)
    if available == 0:
        raise LeadLagError(f"no complete lead-lag window before {dates[as_of]:%Y-%m-%d}")
    lookback = min(config.selection_params().lookback_slices, available)
    summed = sum_and_mask(inputs.tensor.truncate(available), lookback)
    pairs = top_pairs(summed, config.selection_params().candidate_count)
    logger.info(
        f"Network as of {dates[as_of]:%Y-%m-%d}: {len(pairs)} pairs from {lookback} windows"
    )

    graph = lead_graph(summed)
    degrees = sorted(graph.out_degree(), key=lambda item: (-item[1], item[0]))
    if degrees and degrees[0][1] > 0:
        leader, degree = degrees[0]
        logger.info(
            f"Lead graph: {graph.number_of_edges()} edges among {graph.number_of_nodes()} "
            f"tickers, widest leader {leader} ({degree} laggers)"
        )

    out = config.output_directory
    return [
        export_graph(pairs, out / NETWORK_FILE),
        write_adjacency_csv(summed, out / ADJACENCY_FILE),
    ]


def cmd_select(config: RunConfig) -> List[Path]:
    """Write the quarterly selections of the span."""
    inputs = prepare_inputs(config)
    selections = build_selections(config, inputs)
    return [write_selections_csv(selections, config.output_directory / SELECTIONS_FILE)]


def cmd_backtest(config: RunConfig) -> List[Path]:
    """Backtest the strategy and write the ledger, daily values and summary."""
    inputs = prepare_inputs(config)
    selections = build_selections(config, inputs)
    panel = benchmark_for(inputs.panel)
    params = config.strategy_params()

    ceiling = max_leader_ratio(panel, selections, inputs.span)
    logger.info(f"Largest leader close ratio in span: {ceiling:.6f}")
    if params.buy_threshold > ceiling:
        logger.warning(f"Buy threshold {params.buy_threshold} is above every leader move")

    logger.info("Running backtest")
    result = run_backtest(panel, selections, params, inputs.span)
    report = evaluate_performance(result, panel.benchmark)
    summary = format_summary(result, report)

    out = config.output_directory
    summary_path = out / SUMMARY_FILE
    summary_path.parent.mkdir(parents=True, exist_ok=True)
    with open(summary_path, "w", encoding="utf-8", newline="\n") as f:
        f.write(summary)
    for line in summary.splitlines():
        logger.info(line)

    return [
        write_ledger_csv(result, out / LEDGER_FILE),
        write_daily_values_csv(report, result, out / DAILY_VALUES_FILE),
        summary_path,
    ]


def cmd_sweep(config: RunConfig) -> List[Path]:
    """Sweep the buy threshold x trailing stop grid and write contour data."""
    inputs = prepare_inputs(config)
    selections = build_selections(config, inputs)
    try:
        spec = SweepSpec.from_ranges(
            config.sweep_threshold_range,
            config.sweep_stop_range,
            base=config.strategy_params(),
            span=inputs.span,
        )
    except ValueError as e:
        raise ConfigError(str(e), key="sweep", line=config.line_of("sweep")) from None

    logger.info("Running parameter sweep")
    grid = run_sweep(spec, inputs.panel, selections, workers=config.sweep_workers)
    stop, threshold, value = best_cell(grid)
    logger.info(f"Best cell: trailing stop {stop}, buy threshold {threshold}, return {value:.4%}")

    try:
        threshold_index = grid.threshold_index(
            config.sweep_hold_buy_threshold if config.sweep_hold_buy_threshold is not None
            else threshold
        )
        stop_index = grid.stop_index(
            config.sweep_hold_trailing_stop if config.sweep_hold_trailing_stop is not None
            else stop
        )
    except ValueError as e:
        raise ConfigError(str(e), key="sweep", line=config.line_of("sweep")) from None

    out = config.output_directory
    return [
        write_contour_csv(grid, out / CONTOUR_FILE),
        write_cross_section_csv(
            grid, HOLD_THRESHOLD, threshold_index, out / THRESHOLD_SECTION_FILE
        ),
        write_cross_section_csv(grid, HOLD_STOP, stop_index, out / STOP_SECTION_FILE),
    ]


COMMANDS: Dict[str, Callable[[RunConfig], List[Path]]] = {
    "synth": cmd_synth,
    "network": cmd_network,
    "select": cmd_select,
    "backtest": cmd_backtest,
    "sweep": cmd_sweep,
}


def load_config(args) -> RunConfig:
    """Load the configuration and apply command-line overrides.

    Dedicated flags are applied after ``--set`` overrides and win over them.
    """
    config = RunConfig(args.config)
    for assignment in args.overrides:
        config.apply_override(assignment)

    if args.out:
        config.set("output.directory", args.out)
    if args.span:
        start, end = parse_span(args.span)
        config.set("span.start", start)
        config.set("span.end", end)
    if args.stop_mode:
        config.set("strategy.stop_mode", args.stop_mode)
    if args.buy_threshold is not None:
        config.set("strategy.buy_threshold", args.buy_threshold)
    if args.trailing_stop is not None:
        config.set("strategy.trailing_stop", args.trailing_stop)
    return config


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point for Lead-Lag Engine.

    Args:
        argv: Command-line arguments (default: sys.argv[1:])

    Returns:
        Exit code: 0 success, 2 configuration error, 3 data error, 4 runtime error
    """
    args = parse_args(argv)

    if not validate_args(args):
        return ConfigError.exit_code

    try:
        config = load_config(args)
        setup_logging(config, args.log_level)

        logger.info("=" * 60)
        logger.info(f"Lead-Lag Engine - Starting {args.command}")
        logger.info("=" * 60)

        written = COMMANDS[args.command](config)

        logger.info("=" * 60)
        logger.info(f"{args.command} completed successfully")
        for path in written:
            logger.info(f"Output file: {path}")
        logger.info("=" * 60)
        return 0

    except EngineError as e:
        logger.error(f"{args.command} failed: {e}")
        return e.exit_code

    except Exception as e:
        logger.error(f"Unexpected error: {e}", exc_info=True)
        return EngineError.exit_code


if __name__ == "__main__":
    sys.exit(main())
