"""
Tests for the command-line harness (typer CliRunner, in-process).

Run with: python scripts/test_cli.py
"""

import sys
import os
import tempfile
from pathlib import Path

# Add parent directory to path to allow imports
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from typer.testing import CliRunner

from app.cli import app
from app.core.logging_config import setup_logging
from app.services.harness_service import CSV_COLUMNS
from runner import run_all

ROOT = Path(__file__).resolve().parent.parent
runner = CliRunner()

# bind the console handler before any invocation swaps the streams
setup_logging("WARNING")


def invoke(*args):
    return runner.invoke(app, ["--log-level", "WARNING", *args])


def test_design_verify_good_and_bad_files():
    ok = invoke("design", "verify", str(ROOT / "data" / "3-8-4-1.txt"))
    assert ok.exit_code == 0, ok.output
    assert "valid 3-(8,4,1) design, b=14" in ok.output
    assert "lambda_s^t 1:2 2:2 3:1" in ok.output
    with tempfile.TemporaryDirectory() as tmp:
        broken = Path(tmp) / "broken.txt"
        text = (ROOT / "data" / "3-8-4-1.txt").read_text(encoding="utf-8").replace("2 3 5 8", "2 3 5 7")
        broken.write_text(text, encoding="utf-8")
        bad = invoke("design", "verify", str(broken))
    assert bad.exit_code == 1
    assert "(2, 3, 7)" in bad.output


def test_hppda_build_prints_matching_params():
    result = invoke("hppda", "build")
    assert result.exit_code == 0, result.output
    assert "B_1: measured (15, 9, 4, 35) predicted (15, 9, 4, 35) ok" in result.output
    assert "B_2: measured (3, 3, 2, 1) predicted (3, 3, 2, 1) ok" in result.output
    assert "Y_1=12 Y_2=12 feasible" in result.output


def test_hppda_build_flags_infeasible_map():
    result = invoke("hppda", "build", "--a", "1.2=2")
    assert result.exit_code == 1
    assert "INFEASIBLE" in result.output


def test_hppda_verify_all_online_sets():
    result = invoke("hppda", "verify", "--all-online-sets")
    assert result.exit_code == 0
    assert "56/56 online sets pass" in result.output
    one = invoke("hppda", "verify", "--online", "2,4,6")
    assert "I=2,4,6 j=1:ok/ok j=2:ok/ok" in one.output


def test_hppda_show_and_empty_b():
    result = invoke("hppda", "show", "--j", "2")
    assert result.output.strip() == "*|*|(123,1)_1\n*|(123,1)_1|*\n(123,1)_1|*|*"
    missing = invoke("hppda", "show", "--j", "2", "--a", "1.1=2,2.1=1")
    assert missing.exit_code == 1


def test_scheme_rate():
    result = invoke("scheme", "rate")
    assert result.exit_code == 0
    assert "M/N=7/12 R=3 D=12 K_o=18 R/K_o=1/6" in result.output


def test_scheme_simulate_with_csv():
    with tempfile.TemporaryDirectory() as tmp:
        prefix = Path(tmp) / "run"
        result = invoke("scheme", "simulate", "--online", "2,4,6", "--csv", str(prefix))
        assert result.exit_code == 0, result.output
        assert "36 transmissions" in result.output
        assert "X36 (j=2, (123,1)_1)" in result.output
        users = Path(f"{prefix}_users.csv").read_text(encoding="utf-8").splitlines()
    assert len(users) == 19


def test_scheme_simulate_rejects_bad_online_set():
    result = invoke("scheme", "simulate", "--online", "2,4")
    assert result.exit_code == 1
    assert "error:" in result.output


def test_scheme_check_all_small_instance():
    result = invoke(
        "scheme", "check-all", "--design", "complete:6,3,2", "--r", "1", "--a", "1.1=1", "--n", "2", "--no-progress",
    )
    assert result.exit_code == 0, result.output
    assert "15 online sets, 30/30 users decoded" in result.output


def test_sweep_writes_csv():
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp) / "sweep.csv"
        result = invoke("sweep", "--config", str(ROOT / "data" / "sweep_comparison.env"), "--out", str(out), "--check-dominance")
        assert result.exit_code == 0, result.output
        lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert "dominance holds" in result.output


TESTS = [
    test_design_verify_good_and_bad_files,
    test_hppda_build_prints_matching_params,
    test_hppda_build_flags_infeasible_map,
    test_hppda_verify_all_online_sets,
    test_hppda_show_and_empty_b,
    test_scheme_rate,
    test_scheme_simulate_with_csv,
    test_scheme_simulate_rejects_bad_online_set,
    test_scheme_check_all_small_instance,
    test_sweep_writes_csv,
]


def main():
    return run_all("CLI Tests", TESTS)


if __name__ == "__main__":
    exit(main())
