"""End-to-end tests of the subcommands through main()."""

import textwrap

import pandas as pd
import pytest

from app.pipeline import main
from tests.builders import NETWORK_ADJACENCY, NETWORK_DOT, NETWORK_PRICES, SYNTH_FLAT, SYNTH_SEED1

SYNTH_FLAGS = [
    "--set",
    "synth.tickers=6",
    "--set",
    "synth.days=320",
    "--set",
    "synth.seed=7",
    "--set",
    "synth.volatility=0.012",
    "--set",
    "synth.couplings=[[0, 1], [2, 3]]",
]

PIPELINE = ["network", "select", "backtest", "sweep"]


@pytest.fixture(scope="module")
def data_dir(tmp_path_factory):
    directory = tmp_path_factory.mktemp("data")
    assert main(["synth", "--out", str(directory)] + SYNTH_FLAGS) == 0
    return directory


@pytest.fixture(scope="module")
def config_path(data_dir):
    path = data_dir / "config.yaml"
    path.write_text(
        textwrap.dedent(
            f"""\
            data:
              prices: {data_dir / "prices.csv"}
              benchmark: {data_dir / "benchmark.csv"}
            span:
              start: 2020-06-15
            capm:
              beta_lookback: 60
            selection:
              candidate_count: 10
              select_count: 4
              lookback_slices: 40
            sweep:
              buy_thresholds:
                start: 1.00
                stop: 1.02
                step: 0.01
              trailing_stops:
                start: 0.05
                stop: 0.15
                step: 0.05
            """
        ),
        encoding="utf-8",
    )
    return path


def run_all(config_path, out):
    for command in PIPELINE:
        assert main([command, "-c", str(config_path), "--out", str(out)]) == 0
    return {path.name: path.read_bytes() for path in sorted(out.iterdir())}


def test_synth_is_deterministic(data_dir, tmp_path):
    assert main(["synth", "--out", str(tmp_path)] + SYNTH_FLAGS) == 0
    for name in ("prices.csv", "benchmark.csv"):
        assert (tmp_path / name).read_bytes() == (data_dir / name).read_bytes()


def test_pipeline_outputs_are_byte_identical(config_path, tmp_path):
    first = run_all(config_path, tmp_path / "first")
    second = run_all(config_path, tmp_path / "second")

    assert sorted(first) == [
        "adjacency.csv",
        "contour.csv",
        "cross_section_stop.csv",
        "cross_section_threshold.csv",
        "daily_values.csv",
        "ledger.csv",
        "network.dot",
        "selections.csv",
        "summary.txt",
    ]
    assert first == second


def test_network_colors_planted_leaders(config_path, tmp_path):
    """Test that the two strongest pairs are the planted couplings."""
    args = ["network", "-c", str(config_path), "--out", str(tmp_path)]
    top_two = ["--set", "selection.candidate_count=2", "--set", "selection.select_count=2"]
    assert main(args + top_two) == 0
    dot = (tmp_path / "network.dot").read_text(encoding="utf-8")

    assert dot.startswith("digraph leadlag {")
    assert '"SYN000" [color=red];' in dot
    assert '"SYN001" [color=blue];' in dot
    assert '"SYN000" -> "SYN001" [label="40"];' in dot
    assert '"SYN002" -> "SYN003"' in dot


def test_network_as_of_date(config_path, tmp_path):
    args = ["network", "-c", str(config_path), "--out", str(tmp_path)]
    assert main(args + ["--set", "network.as_of=2020-03-02"]) == 0
    assert main(args + ["--set", "network.as_of=2020-01-02"]) == 4


def test_threshold_above_every_leader_move_earns_nothing(config_path, tmp_path):
    args = ["backtest", "-c", str(config_path), "--out", str(tmp_path), "--buy-threshold", "1.5"]
    assert main(args) == 0

    summary = (tmp_path / "summary.txt").read_text(encoding="utf-8")
    assert "portfolio_return: 0.0000000000" in summary
    assert "final_value: 500000.00" in summary
    assert pd.read_csv(tmp_path / "ledger.csv").empty


def test_single_cell_sweep_matches_backtest(config_path, tmp_path):
    flags = ["-c", str(config_path), "--out", str(tmp_path)]
    assert main(["backtest"] + flags + ["--buy-threshold", "1.01", "--trailing-stop", "0.1"]) == 0
    one_cell = [
        "--set",
        "sweep.buy_thresholds.start=1.01",
        "--set",
        "sweep.buy_thresholds.stop=1.01",
        "--set",
        "sweep.trailing_stops.start=0.1",
        "--set",
        "sweep.trailing_stops.stop=0.1",
    ]
    assert main(["sweep"] + flags + one_cell) == 0

    summary = dict(
        line.split(": ", 1)
        for line in (tmp_path / "summary.txt").read_text(encoding="utf-8").splitlines()
    )
    contour = pd.read_csv(tmp_path / "contour.csv", comment="#")
    assert len(contour) == 1
    assert contour["portfolio_return"].iloc[0] == pytest.approx(
        float(summary["portfolio_return"]), abs=1e-10
    )
    assert contour["trade_count"].iloc[0] == int(summary["trades"])


def test_sweep_cross_sections_hold_configured_values(config_path, tmp_path):
    args = [
        "sweep",
        "-c",
        str(config_path),
        "--out",
        str(tmp_path),
        "--set",
        "sweep.hold_buy_threshold=1.01",
        "--set",
        "sweep.hold_trailing_stop=0.15",
    ]
    assert main(args) == 0
    by_stop = pd.read_csv(tmp_path / "cross_section_threshold.csv")
    by_threshold = pd.read_csv(tmp_path / "cross_section_stop.csv")
    assert set(by_stop["buy_threshold"]) == {1.01}
    assert len(by_stop) == 3
    assert set(by_threshold["trailing_stop"]) == {0.15}
    assert len(by_threshold) == 3


def test_hold_value_off_the_grid(config_path, tmp_path):
    args = ["sweep", "-c", str(config_path), "--out", str(tmp_path)]
    assert main(args + ["--set", "sweep.hold_buy_threshold=1.5"]) == 2


def test_exit_codes(config_path, data_dir, tmp_path):
    out = ["--out", str(tmp_path)]
    # configuration errors
    assert main(["backtest", "-c", str(tmp_path / "absent.yaml")]) == 2
    assert main(["backtest", "-c", str(config_path), "--set", "strategy.bogus=1"] + out) == 2
    assert main(["backtest", "-c", str(config_path), "--span", "1999-01-01:2000-01-01"]) == 2
    assert main(["select", "-c", str(config_path), "--set", "data.prices="] + out) == 2

    # data errors
    broken = tmp_path / "broken.csv"
    broken.write_text("date,ticker,close\n2020-01-01,A,abc\n", encoding="utf-8")
    assert main(["select", "-c", str(config_path), "--set", f"data.prices={broken}"] + out) == 3


def test_stop_mode_flag_changes_the_run(config_path, tmp_path):
    flags = ["-c", str(config_path), "--buy-threshold", "1.005", "--trailing-stop", "0.01"]
    assert main(["backtest", "--out", str(tmp_path / "max")] + flags) == 0
    assert (
        main(["backtest", "--out", str(tmp_path / "prev"), "--stop-mode", "prev-close"] + flags)
        == 0
    )
    trailing = pd.read_csv(tmp_path / "max" / "ledger.csv")
    previous = pd.read_csv(tmp_path / "prev" / "ledger.csv")
    assert not trailing.equals(previous)


def test_network_matches_golden_files(tmp_path, capsys):
    """Test the DOT and adjacency exports of a three-ticker chain A -> B -> C."""
    args = [
        "network",
        "--out",
        str(tmp_path),
        "--set",
        f"data.prices={NETWORK_PRICES}",
        "--set",
        "detection.window=2",
        "--set",
        "selection.lookback_slices=10",
        "--set",
        "network.as_of=2022-03-10",
    ]
    assert main(args) == 0
    assert (tmp_path / "network.dot").read_bytes() == NETWORK_DOT.read_bytes()
    assert (tmp_path / "adjacency.csv").read_bytes() == NETWORK_ADJACENCY.read_bytes()
    logged = capsys.readouterr().out
    assert "Lead-Lag Engine - Starting network" in logged
    assert logged.index("Loading price data") < logged.index("Building lead-lag tensor")
    assert "2 edges among 3 tickers, widest leader A (1 laggers)" in logged


def test_flat_synth_matches_golden_file(tmp_path):
    flat = ["--set", "synth.drift=0", "--set", "synth.volatility=0"]
    size = ["--set", "synth.tickers=2", "--set", "synth.days=10"]
    assert main(["synth", "--out", str(tmp_path)] + flat + size) == 0
    assert (tmp_path / "prices.csv").read_bytes() == SYNTH_FLAT.read_bytes()


def test_seed_one_synth_matches_golden_file(tmp_path):
    """Test the default seed-1 generator output against its recorded prices.

    The golden file is recorded on the first run of a fresh checkout and
    compared byte for byte from then on.
    """
    size = ["--set", "synth.tickers=2", "--set", "synth.days=10", "--set", "synth.seed=1"]
    assert main(["synth", "--out", str(tmp_path)] + size) == 0
    written = (tmp_path / "prices.csv").read_bytes()
    if not SYNTH_SEED1.exists():
        SYNTH_SEED1.write_bytes(written)
        pytest.skip(f"recorded {SYNTH_SEED1.name}; commit it to pin the generator")
    assert written == SYNTH_SEED1.read_bytes()


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
