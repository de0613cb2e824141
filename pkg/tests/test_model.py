"""Demand-structure construction, index arithmetic, enumeration."""

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ringcache.model import (
    DemandError,
    InvalidInstanceError,
    ProblemInstance,
    build_demand_structure,
    count_demands,
    cyclic_mod,
    enumerate_demands,
    mask_of,
    nodes_of,
)


def structure(K, a, b, L=1, M=0):
    inst = ProblemInstance(K, a, b, L, Fraction(M))
    return inst, build_demand_structure(inst)


class TestCyclicMod:
    def test_divisible_maps_to_modulus(self):
        assert cyclic_mod(4, 4) == 4

    def test_wraparound_by_one(self):
        assert cyclic_mod(5, 4) == 1

    def test_zero_maps_to_modulus(self):
        assert cyclic_mod(0, 3) == 3

    def test_rejects_nonpositive_modulus(self):
        with pytest.raises(ValueError):
            cyclic_mod(3, 0)

    @given(st.integers(-1000, 1000), st.integers(1, 60))
    def test_range_and_congruence(self, x, m):
        r = cyclic_mod(x, m)
        assert 1 <= r <= m
        assert (r - x) % m == 0


class TestMasks:
    def test_roundtrip(self):
        assert nodes_of(mask_of([1, 3])) == (1, 3)
        assert mask_of([2]) == 2
        assert nodes_of(0) == ()


class TestBuildDemandStructure:
    def test_paper_running_example(self):
        # K=3, a=2, b=1: the nine files split into three overlapping sets.
        _, ds = structure(3, 2, 1)
        assert set(ds.demand_set(1)) == {1, 2, 3, 4, 5}
        assert set(ds.demand_set(2)) == {4, 5, 6, 7, 8}
        assert set(ds.demand_set(3)) == {7, 8, 9, 1, 2}
        assert ds.class1 == {1, 2, 4, 5, 7, 8}
        assert ds.class2 == {3, 6, 9}
        assert ds.d1(1) == (1, 2) and ds.d2(1) == (3,) and ds.d3(1) == (4, 5)

    def test_four_regions_unit_overlap(self):
        _, ds = structure(4, 1, 1)
        assert set(ds.demand_set(1)) == {1, 2, 3}
        assert set(ds.demand_set(2)) == {3, 4, 5}
        assert set(ds.demand_set(3)) == {5, 6, 7}
        assert set(ds.demand_set(4)) == {7, 8, 1}

    def test_no_overlap_when_a_is_zero(self):
        _, ds = structure(2, 0, 2)
        assert set(ds.demand_set(1)) == {1, 2}
        assert set(ds.demand_set(2)) == {3, 4}
        assert ds.demand_set(1).isdisjoint(ds.demand_set(2))
        assert ds.class1 == frozenset()

    def test_two_regions_share_both_sides(self):
        # For K=2 the left and right neighbour coincide; the interval
        # formula still yields disjoint parts of the stated sizes.
        _, ds = structure(2, 1, 1)
        assert set(ds.demand_set(1)) == {1, 2, 3}
        assert set(ds.demand_set(2)) == {1, 3, 4}
        assert ds.d3(1) == (3,) == ds.d1(2)
        assert ds.d3(2) == (1,) == ds.d1(1)
        assert ds.demand_set(1) & ds.demand_set(2) == {1, 3}

    def test_rejects_single_region(self):
        with pytest.raises(InvalidInstanceError):
            ProblemInstance(1, 1, 1)

    @pytest.mark.parametrize("K", [2, 3, 4, 5, 6, 7, 8])
    @pytest.mark.parametrize("a", [0, 1, 2, 3, 4])
    @pytest.mark.parametrize("b", [0, 1, 2, 3, 4])
    def test_invariants_sweep(self, K, a, b):
        if a + b < 1:
            return
        _, ds = structure(K, a, b)
        n = K * (a + b)
        union = set()
        for k in range(1, K + 1):
            assert len(ds.demand_set(k)) == 2 * a + b
            assert len(ds.d1(k)) == len(ds.d3(k)) == a
            assert len(ds.d2(k)) == b
            assert set(ds.d3(k)) == set(ds.d1(cyclic_mod(k + 1, K)))
            union |= ds.demand_set(k)
            if K >= 3:
                right = cyclic_mod(k + 1, K)
                assert len(ds.demand_set(k) & ds.demand_set(right)) == a
        assert union == set(range(1, n + 1))
        assert not ds.class1 & ds.class2
        assert len(ds.class1) == a * K and len(ds.class2) == b * K

    def test_deterministic(self):
        _, first = structure(5, 2, 3)
        _, second = structure(5, 2, 3)
        assert first.demands == second.demands

    def test_mutation_is_caught_by_named_invariant(self):
        import dataclasses

        from ringcache.model import validate_structure

        _, ds = structure(3, 2, 1)
        shifted = tuple(tuple(x + 1 for x in part) for part in ds.part3)
        broken = dataclasses.replace(ds, part3=shifted)
        with pytest.raises(InvalidInstanceError, match="D3"):
            validate_structure(broken)

    def test_home_and_demand_regions(self):
        _, ds = structure(3, 2, 1)
        assert ds.home_region(4) == 2  # file 4 sits in D1[2] = D3[1]
        assert ds.demand_regions(4) == (1, 2)
        assert ds.demand_regions(3) == (1,)
        assert ds.demand_regions(1) == (1, 3)


class TestProblemInstance:
    def test_clamps_large_m(self):
        inst = ProblemInstance(3, 2, 1, 1, Fraction(99))
        assert inst.M == 5

    def test_rejects_negative_m(self):
        with pytest.raises(InvalidInstanceError):
            ProblemInstance(3, 2, 1, 1, Fraction(-1))

    def test_rejects_bad_l(self):
        with pytest.raises(InvalidInstanceError):
            ProblemInstance(3, 2, 1, 4)
        with pytest.raises(InvalidInstanceError):
            ProblemInstance(3, 2, 1, 0)

    def test_rejects_empty_library(self):
        with pytest.raises(InvalidInstanceError):
            ProblemInstance(3, 0, 0)

    def test_n_derivation(self):
        assert ProblemInstance(4, 1, 1).N == 8
        assert ProblemInstance(3, 2, 1).N == 9

    def test_json_roundtrip(self):
        inst = ProblemInstance(4, 1, 2, 2, Fraction(5, 2))
        doc = inst.to_json_dict()
        assert doc == {"K": 4, "a": 1, "b": 2, "L": 2, "M": "5/2"}
        assert ProblemInstance.from_json_dict(doc) == inst


def oracle_count_distinct(demand_sets):
    """Independent brute-force count over explicitly given demand sets."""
    from itertools import product

    return sum(1 for d in product(*demand_sets) if len(set(d)) == len(demand_sets))


class TestEnumerateDemands:
    def test_total_count_is_product(self):
        _, ds = structure(3, 2, 1)
        assert count_demands(ds) == 125

    def test_distinct_count_running_example(self):
        # Oracle over the paper-stated sets, independent of the builder:
        # 30 vectors repeat a shared file (10 per adjacent pair), no overlaps.
        oracle = oracle_count_distinct(
            [{1, 2, 3, 4, 5}, {4, 5, 6, 7, 8}, {7, 8, 9, 1, 2}]
        )
        assert oracle == 95
        _, ds = structure(3, 2, 1)
        assert count_demands(ds, distinct_only=True) == oracle

    def test_distinct_count_two_regions(self):
        # D1={1,2,3}, D2={1,3,4} share files 1 and 3, so 9 - 2 = 7 remain.
        oracle = oracle_count_distinct([{1, 2, 3}, {1, 3, 4}])
        assert oracle == 7
        _, ds = structure(2, 1, 1)
        assert count_demands(ds, distinct_only=True) == oracle

    @pytest.mark.parametrize("K,a,b", [(2, 1, 1), (3, 1, 1), (3, 2, 1), (4, 1, 1)])
    def test_power_law_and_flags(self, K, a, b):
        _, ds = structure(K, a, b)
        seen = list(enumerate_demands(ds))
        assert len(seen) == (2 * a + b) ** K
        assert seen == sorted(seen, key=lambda v: v.files)
        for v in seen:
            assert v.distinct == (len(set(v.files)) == K)
            for k, f in enumerate(v.files, start=1):
                assert f in ds.demand_set(k)

    def test_validate_demand(self):
        _, ds = structure(3, 2, 1)
        assert ds.validate_demand((1, 6, 7)).distinct
        assert not ds.validate_demand((4, 4, 9)).distinct
        with pytest.raises(DemandError):
            ds.validate_demand((9, 6, 7))
        with pytest.raises(DemandError):
            ds.validate_demand((1, 6))
