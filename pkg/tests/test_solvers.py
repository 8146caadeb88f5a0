"""Exact solvers: brute force, Dilworth matching, Greene-Kleitman flow, Mirsky.

The three routes (brute force, matching on the product order, min-cost
flow) are mutually cross-checked on random families; witnesses are always
verified against the definition, never trusted from the solver.
"""

import random
from math import comb

import pytest

from conftest import random_family
from spernerlab.errors import ContractError, DomainError
from spernerlab.lattice import SubsetFamily, count_k_chains, middle_layers
from spernerlab.solvers import (
    brute_force_max_k_chain_free,
    containment_is_strict_order,
    max_antichain,
    max_k_chain_free,
    mirsky_decompose,
    symmetric_chains,
)


class TestSymmetricChains:
    def test_partition_and_shape(self):
        for n in range(1, 9):
            chains = symmetric_chains(n)
            assert len(chains) == comb(n, n // 2)
            seen = set()
            for ch in chains:
                sizes = [m.bit_count() for m in ch]
                assert sizes == list(range(sizes[0], sizes[-1] + 1))
                assert sizes[0] + sizes[-1] == n  # symmetric around n/2
                for a, b in zip(ch, ch[1:]):
                    assert (a & b) == a and a != b
                seen.update(ch)
            assert len(seen) == 1 << n


class TestBruteForce:
    def test_p3_antichain(self):
        assert brute_force_max_k_chain_free(SubsetFamily.full(3), 2).size == 3

    def test_k_above_height(self):
        fam = SubsetFamily.full(3)
        assert brute_force_max_k_chain_free(fam, 5).size == 8

    def test_p4_two_layers(self):
        assert brute_force_max_k_chain_free(SubsetFamily.full(4), 3).size == 10

    def test_refuses_large(self):
        with pytest.raises(DomainError):
            brute_force_max_k_chain_free(SubsetFamily.full(5), 2)

    def test_witness_is_feasible(self, rng):
        for _ in range(10):
            fam = random_family(4, 0.7, rng)
            res = brute_force_max_k_chain_free(fam, 2)
            wfam = SubsetFamily(4, res.witness)
            assert wfam.size == res.size
            assert count_k_chains(wfam, 2) == 0


class TestMaxAntichain:
    def test_full_lattices(self):
        for n in range(2, 11):
            res = max_antichain(SubsetFamily.full(n))
            assert res.size == comb(n, n // 2)

    def test_single_chain(self):
        fam = SubsetFamily(4, [0b0000, 0b0001, 0b0011, 0b1111])
        assert max_antichain(fam).size == 1

    def test_empty(self):
        assert max_antichain(SubsetFamily(3, [])).size == 0

    def test_against_brute_force(self, rng):
        for _ in range(200):
            fam = random_family(6, 0.25, rng)
            if fam.size > 24:
                continue
            res = max_antichain(fam)
            assert res.size == brute_force_max_k_chain_free(fam, 2).size
            wfam = SubsetFamily(6, res.witness)
            assert wfam.size == res.size
            assert count_k_chains(wfam, 2) == 0

    def test_certificate_fields(self):
        res = max_antichain(SubsetFamily.full(6))
        assert res.certificate["chain_cover"] == res.size
        assert res.certificate["matching"] == 64 - res.size


class TestMaxKChainFree:
    def test_p4_k3(self):
        for method in ("flow", "matching"):
            assert max_k_chain_free(SubsetFamily.full(4), 3, method=method).size == 10

    def test_already_chain_free(self, rng):
        fam = middle_layers(6, 3)
        res = max_k_chain_free(fam, 3)
        assert res.size == fam.size
        assert count_k_chains(fam, 3) == 0

    def test_against_brute_force(self, rng):
        for trial in range(200):
            n = 5
            fam = random_family(n, 0.5, rng)
            if not 1 <= fam.size <= 24:
                continue
            k = rng.choice([2, 3, 4])
            expected = brute_force_max_k_chain_free(fam, k).size
            assert max_k_chain_free(fam, k, method="flow").size == expected
            assert max_k_chain_free(fam, k, method="matching").size == expected

    def test_flow_matches_layer_sums(self):
        for n in range(2, 9):
            for k in (2, 3, 4):
                if k - 1 > n + 1:
                    continue
                res = max_k_chain_free(SubsetFamily.full(n), k, method="flow")
                assert res.size == middle_layers(n, k).size

    def test_witness_height(self, rng):
        for _ in range(20):
            fam = random_family(5, 0.6, rng)
            if fam.size == 0:
                continue
            k = rng.choice([2, 3])
            res = max_k_chain_free(fam, k)
            wfam = SubsetFamily(5, res.witness)
            assert wfam.size == res.size
            assert count_k_chains(wfam, k) == 0

    def test_duality_certificate(self, rng):
        # Greene-Kleitman equality: optimum + flow excess = |fam|
        for _ in range(20):
            fam = random_family(5, 0.5, rng)
            if fam.size == 0:
                continue
            res = max_k_chain_free(fam, 3, method="flow")
            assert res.size + res.certificate["flow_excess"] == fam.size

    def test_k_domain(self):
        with pytest.raises(DomainError):
            max_k_chain_free(SubsetFamily.full(3), 1)


class TestMirsky:
    def test_two_levels(self):
        mo = mirsky_decompose(middle_layers(6, 3), 3)
        assert mo.ok
        assert sorted(f.size for f in mo.antichains) == [15, 20]

    def test_violation_witness(self):
        mo = mirsky_decompose(SubsetFamily.full(3), 3)
        assert not mo.ok
        assert len(mo.violation) == 3

    def test_random_decompositions(self, rng):
        for _ in range(25):
            fam = random_family(8, 0.05, rng)
            res = max_k_chain_free(fam, 3)
            wfam = SubsetFamily(8, res.witness)
            mo = mirsky_decompose(wfam, 3)
            assert mo.ok
            assert len(mo.antichains) == 2
            union = SubsetFamily(8, ())
            total = 0
            for a in mo.antichains:
                assert count_k_chains(a, 2) == 0
                union = union.union(a)
                total += a.size
            assert union == wfam and total == wfam.size


class TestPosetInstance:
    def test_containment_is_strict_order(self, rng):
        for _ in range(10):
            fam = random_family(4, 0.6, rng)
            assert containment_is_strict_order(fam)
