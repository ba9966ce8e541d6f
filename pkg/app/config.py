"""Configuration management module for Lead-Lag Engine.

Run settings live in one YAML file with a mapping per section (``data``,
``detection``, ``strategy``, ...). Every setting is addressed by its dotted
path, e.g. ``strategy.buy_threshold``, which is also the form accepted by
``--set KEY=VALUE`` overrides.
"""

import os
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import yaml

from app.backtest.models import StopMode, StrategyParams
from app.common.errors import ConfigError
from app.ingest.panel import GapPolicy
from app.ingest.synthetic import SyntheticSpec
from app.leadlag.detector import DetectionParams
from app.scoring.capm import CapmParams
from app.scoring.selection import SelectionParams

DEFAULT_CONFIG_PATH = "./config/config.yaml"

DEFAULTS: Dict[str, Any] = {
    "data.prices": None,
    "data.benchmark": None,
    "data.gap.max_forward_fill": 5,
    "data.gap.drop_ticker_above": 0.1,
    "output.directory": "output",
    "span.start": None,
    "span.end": None,
    "span.preset": None,
    "detection.lag": 1,
    "detection.epsilon": 0.01,
    "detection.window": 5,
    "detection.stride": 1,
    "detection.workers": 1,
    "capm.risk_free_rate": 0.02,
    "capm.beta_lookback": 252,
    "capm.periods_per_year": 252,
    "selection.capm_weight": 0.7,
    "selection.outdeg_weight": 0.3,
    "selection.candidate_count": 20,
    "selection.select_count": 6,
    "selection.lookback_slices": 60,
    "selection.signed_blend": False,
    "strategy.buy_threshold": 1.02,
    "strategy.trailing_stop": 0.10,
    "strategy.initial_capital": 500000.0,
    "strategy.commission_per_trade": 0.0,
    "strategy.stop_mode": "trailing-max",
    "strategy.fractional_shares": True,
    "sweep.buy_thresholds.start": 1.00,
    "sweep.buy_thresholds.stop": 1.15,
    "sweep.buy_thresholds.step": 0.01,
    "sweep.trailing_stops.start": 0.0,
    "sweep.trailing_stops.stop": 1.0,
    "sweep.trailing_stops.step": 0.05,
    "sweep.hold_buy_threshold": None,
    "sweep.hold_trailing_stop": None,
    "sweep.workers": 1,
    "network.as_of": None,
    "synth.tickers": 10,
    "synth.days": 500,
    "synth.drift": 0.0003,
    "synth.volatility": 0.015,
    "synth.seed": 1,
    "synth.start": "2020-01-01",
    "synth.initial_price": 100.0,
    "synth.couplings": [],
    "synth.lag": 1,
    "synth.coupling_noise": 0.0,
    "synth.prices_file": "prices.csv",
    "synth.benchmark_file": "benchmark.csv",
    "logging.level": "INFO",
    "logging.file": None,
}

_SECTIONS = {
    ".".join(key.split(".")[:depth]) for key in DEFAULTS for depth in range(1, key.count("."))
} | {key.rsplit(".", 1)[0] for key in DEFAULTS}


class RunConfig:
    """Run configuration loader and accessor."""

    def __init__(self, config_path: Optional[str] = None):
        """Initialize configuration.

        Args:
            config_path: Path to YAML configuration file. If None, the
                CONFIG_PATH environment variable is used, then
                ./config/config.yaml if it exists, else built-in defaults.

        Raises:
            ConfigError: If the file is missing, malformed or has unknown keys
        """
        if config_path is None:
            config_path = os.environ.get("CONFIG_PATH")
            if config_path is None and Path(DEFAULT_CONFIG_PATH).exists():
                config_path = DEFAULT_CONFIG_PATH

        self.config_path = Path(config_path) if config_path else None
        self._values: Dict[str, Any] = {}
        self._lines: Dict[str, int] = {}
        if self.config_path is not None:
            self._load_config()

    def _load_config(self) -> None:
        """Load and flatten the YAML file, remembering the line of every key."""
        assert self.config_path is not None
        if not self.config_path.exists():
            raise ConfigError(f"configuration file not found: {self.config_path}")

        with open(self.config_path, "r", encoding="utf-8") as f:
            text = f.read()
        try:
            root = yaml.compose(text)
            document = yaml.safe_load(text) or {}
        except yaml.YAMLError as e:
            mark = getattr(e, "problem_mark", None)
            raise ConfigError(
                f"invalid YAML: {getattr(e, 'problem', None) or e}",
                line=mark.line + 1 if mark is not None else None,
            ) from None

        if root is not None:
            self._record_lines(root, "")
        if not isinstance(document, dict):
            raise ConfigError("configuration must be a mapping of sections", line=1)
        self._flatten(document, "")

    def _record_lines(self, node: yaml.Node, prefix: str) -> None:
        if not isinstance(node, yaml.MappingNode):
            return
        for key_node, value_node in node.value:
            dotted = f"{prefix}{key_node.value}"
            self._lines[dotted] = key_node.start_mark.line + 1
            if dotted in _SECTIONS:
                self._record_lines(value_node, f"{dotted}.")

    def _flatten(self, mapping: Dict[Any, Any], prefix: str) -> None:
        for key, value in mapping.items():
            dotted = f"{prefix}{key}"
            if dotted in DEFAULTS:
                self._values[dotted] = value
            elif dotted in _SECTIONS:
                if value is None:
                    continue
                if not isinstance(value, dict):
                    raise ConfigError("expected a mapping", key=dotted, line=self.line_of(dotted))
                self._flatten(value, f"{dotted}.")
            else:
                raise ConfigError("unknown setting", key=dotted, line=self.line_of(dotted))

    # =========================================================================
    # Generic Access
    # =========================================================================

    def line_of(self, key: str) -> Optional[int]:
        """Line where a key (or its closest enclosing section) was written."""
        while key:
            if key in self._lines:
                return self._lines[key]
            key = key.rsplit(".", 1)[0] if "." in key else ""
        return None

    def get(self, key: str) -> Any:
        """Get a setting by dotted key, falling back to its default."""
        if key not in DEFAULTS:
            raise ConfigError("unknown setting", key=key)
        return self._values.get(key, DEFAULTS[key])

    def set(self, key: str, value: Any) -> None:
        """Override a setting; later calls win.

        Raises:
            ConfigError: If the key is unknown
        """
        if key not in DEFAULTS:
            raise ConfigError("unknown setting", key=key)
        self._values[key] = value
        self._lines.pop(key, None)

    def apply_override(self, assignment: str) -> None:
        """Apply a ``KEY=VALUE`` override; the value is parsed as YAML."""
        if "=" not in assignment:
            raise ConfigError(f"expected KEY=VALUE, got {assignment!r}")
        key, raw = assignment.split("=", 1)
        try:
            value = yaml.safe_load(raw) if raw.strip() else None
        except yaml.YAMLError:
            raise ConfigError(f"cannot parse value {raw!r}", key=key.strip()) from None
        self.set(key.strip(), value)

    def _error(self, key: str, message: str) -> ConfigError:
        return ConfigError(message, key=key, line=self.line_of(key))

    def _int(self, key: str) -> int:
        value = self.get(key)
        if isinstance(value, bool) or not isinstance(value, int):
            raise self._error(key, f"expected an integer, got {value!r}")
        return value

    def _float(self, key: str) -> float:
        value = self.get(key)
        if isinstance(value, str):
            try:
                return float(value)
            except ValueError:
                pass
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise self._error(key, f"expected a number, got {value!r}")
        return float(value)

    def _optional_float(self, key: str) -> Optional[float]:
        return None if self.get(key) is None else self._float(key)

    def _bool(self, key: str) -> bool:
        value = self.get(key)
        if not isinstance(value, bool):
            raise self._error(key, f"expected true or false, got {value!r}")
        return value

    def _optional_str(self, key: str) -> Optional[str]:
        value = self.get(key)
        if value is None:
            return None
        if isinstance(value, (dict, list)):
            raise self._error(key, f"expected a string, got {value!r}")
        return str(value)

    def _str(self, key: str) -> str:
        value = self._optional_str(key)
        if value is None:
            raise self._error(key, "a value is required")
        return value

    # =========================================================================
    # Data Configuration
    # =========================================================================

    @property
    def prices_path(self) -> Optional[str]:
        """Get long-form price CSV path."""
        return self._optional_str("data.prices")

    @property
    def benchmark_path(self) -> Optional[str]:
        """Get benchmark CSV path (optional)."""
        return self._optional_str("data.benchmark")

    @property
    def gap_max_forward_fill(self) -> int:
        """Get the longest run of missing days filled with the last close."""
        return self._int("data.gap.max_forward_fill")

    @property
    def gap_drop_ticker_above(self) -> float:
        """Get the missing-cell fraction above which a ticker is dropped."""
        return self._float("data.gap.drop_ticker_above")

    @property
    def output_directory(self) -> Path:
        """Get directory that receives every artifact."""
        return Path(self._str("output.directory"))

    # =========================================================================
    # Span Configuration
    # =========================================================================

    @property
    def span_start(self) -> Optional[str]:
        """Get first day of the trading span (None: first day with a full CAPM lookback)."""
        return self._optional_str("span.start")

    @property
    def span_end(self) -> Optional[str]:
        """Get last day of the trading span (None: last panel date)."""
        return self._optional_str("span.end")

    @property
    def span_preset(self) -> Optional[str]:
        """Get named span preset (bear or bull)."""
        return self._optional_str("span.preset")

    # =========================================================================
    # Detection, CAPM and Selection Configuration
    # =========================================================================

    @property
    def detection_stride(self) -> int:
        """Get rows between consecutive window starts."""
        return self._int("detection.stride")

    @property
    def detection_workers(self) -> int:
        """Get threads used to build tensor slices."""
        return self._int("detection.workers")

    @property
    def network_as_of(self) -> Optional[str]:
        """Get date the exported network is built for (None: span start)."""
        return self._optional_str("network.as_of")

    # =========================================================================
    # Sweep Configuration
    # =========================================================================

    @property
    def sweep_threshold_range(self) -> Tuple[float, float, float]:
        """Get (start, stop, step) of the buy threshold axis."""
        return tuple(  # type: ignore[return-value]
            self._float(f"sweep.buy_thresholds.{part}") for part in ("start", "stop", "step")
        )

    @property
    def sweep_stop_range(self) -> Tuple[float, float, float]:
        """Get (start, stop, step) of the trailing stop axis."""
        return tuple(  # type: ignore[return-value]
            self._float(f"sweep.trailing_stops.{part}") for part in ("start", "stop", "step")
        )

    @property
    def sweep_hold_buy_threshold(self) -> Optional[float]:
        """Get buy threshold held for the cross-section (None: best cell)."""
        return self._optional_float("sweep.hold_buy_threshold")

    @property
    def sweep_hold_trailing_stop(self) -> Optional[float]:
        """Get trailing stop held for the cross-section (None: best cell)."""
        return self._optional_float("sweep.hold_trailing_stop")

    @property
    def sweep_workers(self) -> int:
        """Get worker processes used by the sweep."""
        return self._int("sweep.workers")

    # =========================================================================
    # Synthetic Data Configuration
    # =========================================================================

    @property
    def synth_prices_file(self) -> str:
        """Get file name of the generated price CSV inside the output directory."""
        return self._str("synth.prices_file")

    @property
    def synth_benchmark_file(self) -> str:
        """Get file name of the generated benchmark CSV inside the output directory."""
        return self._str("synth.benchmark_file")

    # =========================================================================
    # Logging Configuration
    # =========================================================================

    @property
    def log_level(self) -> str:
        """Get logging level."""
        return self._str("logging.level").upper()

    @property
    def log_file(self) -> Optional[str]:
        """Get log file path (None: console only)."""
        return self._optional_str("logging.file")

    # =========================================================================
    # Parameter Builders
    # =========================================================================

    def gap_policy(self) -> GapPolicy:
        return self._build(
            "data.gap",
            GapPolicy,
            max_forward_fill=self.gap_max_forward_fill,
            drop_ticker_above=self.gap_drop_ticker_above,
        )

    def detection_params(self) -> DetectionParams:
        return self._build(
            "detection",
            DetectionParams,
            lag=self._int("detection.lag"),
            epsilon=self._float("detection.epsilon"),
            window=self._int("detection.window"),
        )

    def capm_params(self) -> CapmParams:
        return self._build(
            "capm",
            CapmParams,
            risk_free_rate=self._float("capm.risk_free_rate"),
            beta_lookback=self._int("capm.beta_lookback"),
            periods_per_year=self._int("capm.periods_per_year"),
        )

    def selection_params(self) -> SelectionParams:
        return self._build(
            "selection",
            SelectionParams,
            capm_weight=self._float("selection.capm_weight"),
            outdeg_weight=self._float("selection.outdeg_weight"),
            candidate_count=self._int("selection.candidate_count"),
            select_count=self._int("selection.select_count"),
            lookback_slices=self._int("selection.lookback_slices"),
            signed_blend=self._bool("selection.signed_blend"),
        )

    def strategy_params(self) -> StrategyParams:
        mode = self._str("strategy.stop_mode")
        try:
            stop_mode = StopMode(mode)
        except ValueError:
            choices = ", ".join(m.value for m in StopMode)
            raise self._error("strategy.stop_mode", f"expected one of {choices}, got {mode!r}")
        return self._build(
            "strategy",
            StrategyParams,
            buy_threshold=self._float("strategy.buy_threshold"),
            trailing_stop=self._float("strategy.trailing_stop"),
            initial_capital=self._float("strategy.initial_capital"),
            commission_per_trade=self._float("strategy.commission_per_trade"),
            stop_mode=stop_mode,
            fractional_shares=self._bool("strategy.fractional_shares"),
        )

    def synthetic_spec(self) -> SyntheticSpec:
        return self._build(
            "synth",
            SyntheticSpec,
            n_tickers=self._int("synth.tickers"),
            n_days=self._int("synth.days"),
            drift=self._float("synth.drift"),
            volatility=self._float("synth.volatility"),
            seed=self._int("synth.seed"),
            start=self._str("synth.start"),
            initial_price=self._float("synth.initial_price"),
            couplings=self._couplings(),
            lag=self._int("synth.lag"),
            coupling_noise=self._float("synth.coupling_noise"),
        )

    def _couplings(self) -> Tuple[Tuple[int, int], ...]:
        value = self.get("synth.couplings") or []
        pairs: List[Tuple[int, int]] = []
        if not isinstance(value, list):
            raise self._error("synth.couplings", "expected a list of [leader, lagger] pairs")
        for item in value:
            if (
                not isinstance(item, list)
                or len(item) != 2
                or not all(isinstance(i, int) and not isinstance(i, bool) for i in item)
            ):
                raise self._error(
                    "synth.couplings", f"expected [leader, lagger] ticker indices, got {item!r}"
                )
            pairs.append((item[0], item[1]))
        return tuple(pairs)

    def _build(self, section: str, factory: Any, **kwargs: Any) -> Any:
        try:
            return factory(**kwargs)
        except ValueError as e:
            raise ConfigError(str(e), key=section, line=self.line_of(section)) from None
