"""
Tests for t-design validation, intersection parameters and design files.

This script tests:
1. Validation of the shipped designs and of complete designs
2. λ_s, λ_i^{i+j} and λ_s^t against brute-force block counts
3. The block selector A^I_H and the alternating-sum identity
4. Design file parsing and catalog resolution

Run with: python scripts/test_designs.py
"""

import sys
import os
import tempfile
from itertools import combinations
from pathlib import Path

# Add parent directory to path to allow imports
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import pytest
from hypothesis import given, settings, strategies as st

from app.core.catalog import TEST_COMPLETE_FAMILY, catalog_names
from app.core.combinatorics import binom, k_subsets, points
from app.services.design_service import DesignError, DesignService
from runner import run_all

ROOT = Path(__file__).resolve().parent.parent

STEINER_BLOCKS = [
    [1, 2, 5, 6], [3, 4, 7, 8], [2, 4, 6, 8], [1, 3, 5, 7], [1, 4, 5, 8], [2, 3, 6, 7], [1, 2, 3, 4],
    [5, 6, 7, 8], [1, 2, 7, 8], [3, 4, 5, 6], [1, 3, 6, 8], [2, 4, 5, 7], [1, 4, 6, 7], [2, 3, 5, 8],
]


def family():
    designs = [DesignService.catalog_design(name) for name in catalog_names()]
    designs += [DesignService.complete_design(v, k, t) for v, k, t in TEST_COMPLETE_FAMILY]
    return designs


def test_steiner_design_is_valid():
    report = DesignService.validate_design(8, STEINER_BLOCKS, 3, 1)
    assert report.valid, report.violation
    d = report.design
    assert (d.v, d.k, d.t, d.lam, d.b) == (8, 4, 3, 1, 14)
    assert d.blocks[0] == (1, 2, 3, 4)
    assert list(d.blocks) == sorted(d.blocks)
    print(f"  [OK] {d.describe()} with b={d.b}")


def test_single_swapped_point_names_first_bad_triple():
    blocks = [b if b != [2, 3, 5, 8] else [2, 3, 5, 7] for b in STEINER_BLOCKS]
    report = DesignService.validate_design(8, blocks, 3, 1)
    assert not report.valid
    assert report.t_subset == (2, 3, 7)
    assert report.replication == 2
    print(f"  [OK] {report.violation}")


def test_block_level_violations():
    assert DesignService.validate_design(4, [[1, 1], [2, 3]], 1, 1).block == (1, 1)
    assert not DesignService.validate_design(4, [[1, 2], [3, 4, 1]], 1, 1).valid
    assert "outside" in DesignService.validate_design(4, [[0, 1], [2, 3]], 1, 1).violation
    assert "repeated" in DesignService.validate_design(4, [[1, 2], [2, 1], [3, 4]], 1, 1).violation
    assert "parameter order" in DesignService.validate_design(3, [[1, 2, 3]], 1, 1).violation
    with pytest.raises(DesignError):
        DesignService.validate_design(4, [], 1, 1)
    with pytest.raises(DesignError):
        DesignService.validate_design(4, [[1, 2]], 0, 1)


def test_complete_designs_validate():
    checked = 0
    for v in range(2, 11):
        for k in range(1, min(5, v - 1) + 1):
            for t in range(1, k + 1):
                d = DesignService.complete_design(v, k, t)
                report = DesignService.validate_design(v, d.blocks, t, d.lam, k=k)
                assert report.valid, f"complete({v},{k},{t}): {report.violation}"
                assert d.b == binom(v, k)
                checked += 1
    print(f"  [OK] {checked} complete designs validated")


def test_lambda_values_on_steiner_design():
    d = DesignService.catalog_design("3-8-4-1")
    assert DesignService.lambdas(d) == {0: 14, 1: 7, 2: 3, 3: 1}
    assert DesignService.lambda_i_j(d, 1, 1) == 4
    assert DesignService.lambda_i_j(d, 0, 0) == d.b
    assert [DesignService.lambda_s_t(d, s) for s in (1, 2, 3)] == [2, 2, 1]
    params = DesignService.design_params(d)
    assert params.lambda_s_t == {1: 2, 2: 2, 3: 1}
    with pytest.raises(DesignError):
        DesignService.lambda_s(d, 4)
    with pytest.raises(DesignError):
        DesignService.lambda_i_j(d, 2, 2)


def test_lambda_s_t_on_complete_design():
    d = DesignService.complete_design(8, 4, 3)
    assert [DesignService.lambda_s_t(d, s) for s in (1, 2, 3)] == [10, 10, 5]
    small = DesignService.complete_design(5, 3, 3)
    assert DesignService.lambda_i_j(small, 1, 2) == 1


def test_lambdas_match_brute_force_counts():
    for d in family():
        for s in range(0, d.t + 1):
            expected = DesignService.lambda_s(d, s)
            for Y in k_subsets(points(d.v), s):
                assert DesignService.count_blocks(d, contain=Y) == expected
        for i in range(0, d.t + 1):
            for j in range(0, d.t - i + 1):
                expected = DesignService.lambda_i_j(d, i, j)
                for Y in k_subsets(points(d.v), i):
                    rest = [p for p in points(d.v) if p not in Y]
                    for Z in combinations(rest, j):
                        assert DesignService.count_blocks(d, contain=Y, avoid=Z) == expected
        print(f"  [OK] {d.name}: every λ_s and λ_i^(i+j) matches a direct count")


def test_incidence_row_and_column_sums():
    for d in family():
        m = DesignService.incidence(d)
        assert m.shape == (d.b, d.v)
        assert set(m.sum(axis=1)) == {d.k}
        assert set(m.sum(axis=0)) == {DesignService.lambda_s(d, 1)}


def test_blocks_for_selects_exact_intersection():
    d = DesignService.catalog_design("3-8-4-1")
    I = (2, 4, 6)
    assert DesignService.blocks_for(d, (2,), I) == [(1, 2, 7, 8), (2, 3, 5, 8)]
    assert DesignService.blocks_for(d, (4, 6), I) == [(1, 4, 6, 7), (3, 4, 5, 6)]
    assert DesignService.blocks_for(d, (2, 4), I) == [(1, 2, 3, 4), (2, 4, 5, 7)]
    with pytest.raises(DesignError):
        DesignService.blocks_for(d, (2, 4, 6), I)
    with pytest.raises(DesignError):
        DesignService.blocks_for(d, (1,), I)
    with pytest.raises(DesignError):
        DesignService.blocks_for(d, (2,), (2, 4))


def test_blocks_for_sizes_match_lambda_s_t():
    for d in family():
        for I in k_subsets(points(d.v), d.t):
            for s in range(1, d.t):
                for H in k_subsets(I, s):
                    chosen = DesignService.blocks_for(d, H, I)
                    assert len(chosen) == DesignService.lambda_s_t(d, s)
                    assert all(set(A) & set(I) == set(H) for A in chosen)


def test_alternating_identity_holds_on_family():
    for d in family():
        for j in range(1, d.t + 1):
            sides = DesignService.point_count_identity(d, j)
            assert sides["lhs"] == sides["rhs"], f"{d.name} j={j}: {sides}"
    print("  [OK] both sides agree for every design and j")


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_random_subsets_have_constant_replication(data):
    d = data.draw(st.sampled_from(family()))
    s = data.draw(st.integers(min_value=0, max_value=d.t))
    Y = data.draw(st.lists(st.integers(1, d.v), min_size=s, max_size=s, unique=True))
    assert DesignService.count_blocks(d, contain=Y) == DesignService.lambda_s(d, s)


def test_design_file_round_trip():
    d = DesignService.load_design(ROOT / "data" / "3-8-4-1.txt")
    assert d.blocks == DesignService.catalog_design("3-8-4-1").blocks
    again = DesignService.parse_design_text(DesignService.dump_design_text(d))
    assert again.blocks == d.blocks and again.lam == d.lam
    fano = DesignService.load_design(ROOT / "data" / "fano.txt")
    assert (fano.v, fano.k, fano.t, fano.lam, fano.b) == (7, 3, 2, 1, 7)


def test_design_file_rejects_zero_based_and_unsorted():
    with pytest.raises(DesignError, match="1-based"):
        DesignService.parse_design_text("4 2 1 1\n0 1\n2 3\n")
    with pytest.raises(DesignError, match="ascending"):
        DesignService.parse_design_text("4 2 1 1\n2 1\n3 4\n")
    with pytest.raises(DesignError, match="header"):
        DesignService.parse_design_text("# only a comment\n")


def test_resolve_design_references():
    assert DesignService.resolve_design("catalog:fano").name == "fano"
    assert DesignService.resolve_design("3-8-4-1").b == 14
    assert DesignService.resolve_design("complete:6,3,2").b == 20
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "k4.txt"
        path.write_text("# pairs of four points\n4 2 2 1\n1 2\n1 3\n1 4\n2 3\n2 4\n3 4\n", encoding="utf-8")
        assert DesignService.resolve_design(str(path)).b == 6
    with pytest.raises(DesignError):
        DesignService.resolve_design("catalog:nope")
    with pytest.raises(DesignError):
        DesignService.resolve_design("complete:6,3")
    with pytest.raises(DesignError):
        DesignService.resolve_design("/no/such/design.txt")


TESTS = [
    test_steiner_design_is_valid,
    test_single_swapped_point_names_first_bad_triple,
    test_block_level_violations,
    test_complete_designs_validate,
    test_lambda_values_on_steiner_design,
    test_lambda_s_t_on_complete_design,
    test_lambdas_match_brute_force_counts,
    test_incidence_row_and_column_sums,
    test_blocks_for_selects_exact_intersection,
    test_blocks_for_sizes_match_lambda_s_t,
    test_alternating_identity_holds_on_family,
    test_random_subsets_have_constant_replication,
    test_design_file_round_trip,
    test_design_file_rejects_zero_based_and_unsorted,
    test_resolve_design_references,
]


def main():
    return run_all("Design Tests", TESTS)


if __name__ == "__main__":
    exit(main())
