"""
Tests for exhaustive hotplug certification and the rate-memory sweep.

Run with: python scripts/test_harness.py
"""

import sys
import os
import tempfile
from fractions import Fraction
from pathlib import Path

# Add parent directory to path to allow imports
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import pytest

from app.schemas.schemas import SweepConfig
from app.services.design_service import DesignService
from app.services.harness_service import CSV_COLUMNS, ConfigError, HarnessService
from app.services.hppda_service import HppdaService
from app.services.scheme_service import SchemeError, SchemeService
from runner import run_all

ROOT = Path(__file__).resolve().parent.parent
COMPARISON = ROOT / "data" / "sweep_comparison.env"


def placed(d, r, a, n):
    g = HppdaService.build_hppda(d, r, a)
    library = SchemeService.generate_library(n, 16 * SchemeService.subpacketization(g), seed=2024)
    return SchemeService.place(g, library)


def test_check_all_on_steiner_instance():
    instance = placed(DesignService.catalog_design("3-8-4-1"), 2, {(1, 1): 2, (2, 1): 1, (1, 2): 1}, 18)
    report = HarnessService.check_all(instance, workers=4)
    assert report.ok, report.failure
    assert report.online_sets == 56
    assert report.users_checked == report.passed == 56 * 18
    assert report.rate_formula == 3
    assert all(s.transmissions == 36 for s in report.per_set)
    print(f"  [OK] {report.passed} users decoded across {report.online_sets} online sets")


def test_check_all_on_complete_design_single_access():
    instance = placed(DesignService.complete_design(6, 3, 2), 1, {(1, 1): 1}, 2)
    assert (instance.code.n, instance.code.d) == (20, 11)
    report = HarnessService.check_all(instance)
    assert report.ok
    assert report.online_sets == 15 and report.users_checked == 30


def test_check_all_needs_enough_files():
    instance = placed(DesignService.catalog_design("3-8-4-1"), 2, {(1, 1): 2, (2, 1): 1, (1, 2): 1}, 17)
    with pytest.raises(SchemeError):
        HarnessService.check_all(instance)


def test_comparison_sweep_rows():
    cfg = HarnessService.parse_sweep_config(COMPARISON)
    rows = HarnessService.sweep(cfg)
    proposed = {r.params: r for r in rows if r.scheme == "proposed"}
    row = proposed["a_1_1=2;a_2_1=1;a_1_2=1"]
    assert (row.m_over_n, row.rate, row.k_o, row.rate_per_user) == (Fraction(7, 12), 3, 18, Fraction(1, 6))
    assert row.m_over_n_dec == "0.583333"
    mt = [r for r in rows if r.scheme == "mt"]
    assert (mt[0].params, mt[0].m_over_n, mt[0].rate, mt[0].k_o, mt[0].rate_per_user) == (
        "t=1", Fraction(1, 8), 1, 3, Fraction(1, 3),
    )
    schemes = [r.scheme for r in rows]
    assert schemes == sorted(schemes, key=["proposed", "mt", "crr_mt", "crr_t", "rr"].index)
    # maps with Y_2 > Y_1 are skipped
    d = DesignService.catalog_design("3-8-4-1")
    maps = HppdaService.all_a_maps(d, 2)
    feasible = [a for a in maps if HppdaService.feasibility_for(d, 2, a).feasible]
    assert len(proposed) == len(feasible) < len(maps)


def test_dominance_in_comparison_band():
    cfg = HarnessService.parse_sweep_config(COMPARISON)
    rows = HarnessService.sweep(cfg)
    verdict = HarnessService.dominance(rows, (cfg.band_low, cfg.band_high))
    assert verdict.holds, verdict.detail
    assert verdict.witness.scheme == "proposed"
    # lowest per-user rate in the band: D = 11 with a_{1,2} = 0
    assert verdict.witness.params == "a_1_1=1;a_2_1=2;a_1_2=0"
    assert verdict.witness.rate_per_user == Fraction(25, 198)
    assert all(verdict.witness.rate_per_user < b.rate_per_user for b in verdict.beaten)
    assert {b.scheme for b in verdict.beaten} >= {"crr_t", "rr"}


def test_dominance_fails_without_proposed_rows():
    cfg = SweepConfig(proposed_a="1.1=0,2.1=0,1.2=2")
    rows = HarnessService.sweep(cfg)
    assert not any(r.scheme == "proposed" for r in rows)
    verdict = HarnessService.dominance(rows, (Fraction(1, 2), Fraction(7, 10)))
    assert not verdict.holds and verdict.detail == "no proposed row in the band"


def test_sweep_with_simulation_cross_check():
    cfg = SweepConfig(proposed_a="1.1=2,2.1=1,1.2=1;1.1=2,2.1=1", crr_a="1=2,2=1", rr_a="1=2,2=2")
    rows = HarnessService.sweep(cfg, simulate=True)
    assert [r.scheme for r in rows].count("proposed") == 2
    assert [r.scheme for r in rows].count("crr_t") == 1


def test_csv_output_is_stable():
    cfg = HarnessService.parse_sweep_config(COMPARISON)
    first = HarnessService.to_csv(HarnessService.sweep(cfg))
    second = HarnessService.to_csv(HarnessService.sweep(cfg))
    assert first == second
    lines = first.splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert "proposed,a_1_1=2;a_2_1=1;a_1_2=1,7/12,3,18,1/6,0.583333,0.166667" in lines
    assert "mt,t=1,1/8,1,3,1/3,0.125,0.333333" in lines
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "sweep.csv"
        HarnessService.to_csv(HarnessService.sweep(cfg), path)
        assert path.read_text(encoding="utf-8") == first


def test_empty_sweep_writes_header_only():
    assert HarnessService.to_csv([]) == ",".join(CSV_COLUMNS) + "\n"


def test_config_parsing():
    cfg = HarnessService.parse_sweep_config("design = complete:6,3,2\nr = 1\nband_low = 2/5\nmystery = 1\n")
    assert cfg.design == "complete:6,3,2" and cfg.r == 1
    assert cfg.band_low == Fraction(2, 5)
    assert cfg.band_high == Fraction(7, 10)
    with pytest.raises(ConfigError):
        HarnessService.parse_sweep_config("r = two\n")
    with pytest.raises(ConfigError):
        HarnessService.sweep(HarnessService.parse_sweep_config("proposed_a = nonsense\n"))


TESTS = [
    test_check_all_on_steiner_instance,
    test_check_all_on_complete_design_single_access,
    test_check_all_needs_enough_files,
    test_comparison_sweep_rows,
    test_dominance_in_comparison_band,
    test_dominance_fails_without_proposed_rows,
    test_sweep_with_simulation_cross_check,
    test_csv_output_is_stable,
    test_empty_sweep_writes_header_only,
    test_config_parsing,
]


def main():
    return run_all("Harness Tests", TESTS)


if __name__ == "__main__":
    exit(main())
