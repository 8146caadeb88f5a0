"""Balanced hypergraph builder: saturation, classification, good-edge search.

Invariants under fuzz: codegree caps never violated, ledger equals a full
recount, the bad-extension and critical-chain bounds hold with exact
rationals, and the count of saturated singletons obeys its edge-budget
bound.
"""

import random
from fractions import Fraction
from itertools import combinations
from math import ceil, comb

import pytest

from conftest import random_family
from spernerlab.density import DensityTable
from spernerlab.errors import ContractError, DomainError
from spernerlab.lattice import Chain, SubsetFamily, enumerate_chains, middle_layers
from spernerlab.supersat import (
    ChainHypergraph,
    SaturationLedger,
    build_balanced_hypergraph,
    calibrate_balanced_hypergraph,
    classify_chain,
    default_delta_grid,
    dump_hypergraph,
    edge_count_target,
    find_good_edge,
    is_saturated,
    load_hypergraph,
    max_codegree,
    min_comparable_binomial,
)


def build_p4_pair_instance():
    """P(4), k=2, delta*m = 2: cap(1) = 2, cap(2) = 1."""
    fam = SubsetFamily.full(4)
    return ChainHypergraph(fam, 2, Fraction(1, 2), Fraction(4))


class TestSaturation:
    def test_empty_ledger_unsaturated(self):
        H = build_p4_pair_instance()
        assert not is_saturated([0b0001], H.ledger)

    def test_edge_cap_is_one(self):
        H = build_p4_pair_instance()
        H.add_edge(Chain((0b0011, 0b0001)))
        assert is_saturated([0b0011, 0b0001], H.ledger)

    def test_singleton_saturates_at_cap(self):
        H = build_p4_pair_instance()
        H.add_edge(Chain((0b0011, 0b0001)))
        assert not is_saturated([0b0001], H.ledger)
        H.add_edge(Chain((0b0101, 0b0001)))
        assert is_saturated([0b0001], H.ledger)
        assert 0b0001 in H.removed

    def test_size_domain(self):
        H = build_p4_pair_instance()
        with pytest.raises(DomainError):
            is_saturated([1, 2, 3], H.ledger)

    def test_cap_violation_raises(self):
        H = build_p4_pair_instance()
        H.add_edge(Chain((0b0011, 0b0001)))
        with pytest.raises(ContractError):
            H.add_edge(Chain((0b0011, 0b0001)))


class TestClassifyChain:
    def test_empty_ledger_good(self):
        H = build_p4_pair_instance()
        got = classify_chain(Chain((0b0111, 0b0011)), H.ledger)
        assert got.good and got.critical_prefix is None

    def test_saturated_top_has_no_prefix(self):
        H = build_p4_pair_instance()
        H.add_edge(Chain((0b0011, 0b0001)))
        H.add_edge(Chain((0b0011, 0b0010)))
        assert is_saturated([0b0011], H.ledger)
        got = classify_chain(Chain((0b0011, 0b0010)), H.ledger)
        # the top vertex alone is saturated: bad, no good prefix exists
        assert not got.good and got.critical_prefix is None

    def test_critical_prefix_one(self):
        # k=3 on P(4): saturate the pair {F1,F2} so the length-2 prefix goes bad
        fam = SubsetFamily.full(4)
        H = ChainHypergraph(fam, 3, Fraction(1, 2), Fraction(4))
        # cap(2) = floor(2^1) = 2
        H.add_edge(Chain((0b0111, 0b0011, 0b0001)))
        H.add_edge(Chain((0b0111, 0b0011, 0b0010)))
        assert is_saturated([0b0111, 0b0011], H.ledger)
        got = classify_chain(Chain((0b0111, 0b0011, 0b0010)), H.ledger)
        assert not got.good
        assert got.critical_prefix == 1

    def test_too_long(self):
        H = build_p4_pair_instance()
        with pytest.raises(DomainError):
            classify_chain(Chain((0b0111, 0b0011, 0b0001)), H.ledger)


class TestFindGoodEdge:
    def test_empty_hypergraph_first_chain(self):
        fam = SubsetFamily.full(3)
        H = ChainHypergraph(fam, 2, Fraction(1, 2), Fraction(2))
        got = find_good_edge(H, Fraction(1, 2))
        # minimal-cardinality dense vertex is {1} (mask 1); below it only {}
        assert got == Chain((0b001, 0b000))

    def test_absent_when_all_saturated(self):
        # three nested sets in P(2), delta*m = 1: every vertex cap is 1, so
        # the first edge saturates both its endpoints and nothing remains
        fam = SubsetFamily(2, [0b11, 0b01, 0b00])
        H = ChainHypergraph(fam, 2, Fraction(1, 2), Fraction(2))
        first = find_good_edge(H, Fraction(1, 100))
        assert first is not None
        H.add_edge(first)
        assert find_good_edge(H, Fraction(1, 100)) is None

    def test_good_edge_exists_under_budget(self):
        # middle two layers of P(6) plus extra level-4 sets; a good edge must
        # exist at every step where the hypotheses (edge budget, alpha slack
        # surviving the singleton removals) still hold
        fam = middle_layers(6, 3)  # levels 3 and 2
        extra = SubsetFamily(6, SubsetFamily.full(6).level(4)[:20])
        fam = fam.union(extra)
        alpha = Fraction(1)
        delta, m = Fraction(1, 2), Fraction(2)
        H = ChainHypergraph(fam, 2, delta, m)
        budget = Fraction(delta) ** 2 * m * comb(6, 3)
        nC = comb(6, 3)
        steps = 0
        while H.edge_count() < budget:
            if alpha - Fraction(len(H.removed), nC) <= alpha / 2:
                break
            edge = find_good_edge(H, alpha)
            assert edge is not None, "good edge must exist while under budget"
            assert classify_chain(edge, H.ledger).good
            H.add_edge(edge)
            steps += 1
        assert steps >= 5

    def test_precondition_violation(self):
        fam = middle_layers(4, 2)  # 6 members: below (1+alpha)*C(4,2) for any alpha>0
        H = ChainHypergraph(fam, 2, Fraction(1, 2), Fraction(2))
        with pytest.raises(ContractError):
            find_good_edge(H, Fraction(1, 4))


class TestBuilder:
    def test_p8_k2_target_met_and_recount(self):
        fam = SubsetFamily.full(8).restrict_min_size(3)
        m = Fraction(8, 3)
        H, delta = calibrate_balanced_hypergraph(fam, 2, m, Fraction(1, 4))
        assert H.target_met
        assert H.edge_count() >= edge_count_target(8, 2, delta, m)
        recount = H.recount_degrees()
        assert recount == H.ledger.degrees
        for ell in (1, 2):
            cap = (delta * m) ** (2 - ell)
            got = max(
                (v for key, v in recount.items() if len(key) == ell), default=0
            )
            assert got <= cap
            assert max_codegree(H, ell) == got

    def test_antichain_rejected(self):
        fam = middle_layers(6, 2)
        with pytest.raises(ContractError):
            build_balanced_hypergraph(fam, 2, Fraction(1, 2), Fraction(2), Fraction(1, 4))

    def test_tightness_layers_example(self):
        # k-1 middle layers plus alpha*C extra from the next layer up
        n, k = 9, 2
        alpha = Fraction(1, 2)
        base = middle_layers(n, k)  # level 5 (ties break toward ceil(n/2))
        extra_count = ceil(alpha * comb(n, n // 2))
        extra = SubsetFamily(n, SubsetFamily.full(n).level(6)[:extra_count])
        fam = base.union(extra)
        m = Fraction(n, 3)
        H, delta = calibrate_balanced_hypergraph(fam, k, m, alpha)
        assert H.target_met
        assert H.edge_count() >= edge_count_target(n, k, delta, m)
        for ell in (1, 2):
            assert max_codegree(H, ell) <= (delta * m) ** (k - ell)

    def test_delta_hypothesis_checked(self):
        fam = SubsetFamily.full(6).restrict_min_size(2)
        with pytest.raises(ContractError):
            build_balanced_hypergraph(fam, 2, Fraction(1, 16), Fraction(2), Fraction(1, 4))

    def test_m_hypothesis_checked(self):
        fam = SubsetFamily.full(6)  # contains the empty set: C(|F|,0) = 1
        with pytest.raises(ContractError):
            build_balanced_hypergraph(fam, 2, Fraction(1, 2), Fraction(2), Fraction(1, 4))

    def test_edge_target_override(self):
        fam = SubsetFamily.full(8).restrict_min_size(3)
        H = build_balanced_hypergraph(
            fam, 2, Fraction(3, 8), Fraction(8, 3), Fraction(1, 4), edge_target=5
        )
        assert H.edge_count() == 5 and H.target_met


class TestMinComparableBinomial:
    def test_small_cases(self):
        assert min_comparable_binomial(SubsetFamily.full(4)) == 1
        assert min_comparable_binomial(SubsetFamily.full(4).restrict_min_size(2)) == 3
        assert min_comparable_binomial(middle_layers(6, 2)) is None

    def test_matches_pair_scan(self, rng):
        for _ in range(20):
            n = rng.randint(3, 7)
            fam = random_family(n, 0.4, rng)
            masks = list(fam.masks_by_size())
            direct = None
            for i, a in enumerate(masks):
                for b in masks:
                    if a != b and (a & b) == b:
                        v = comb(a.bit_count(), b.bit_count())
                        direct = v if direct is None else min(direct, v)
            assert min_comparable_binomial(fam) == direct


class TestFuzzInvariants:
    def test_caps_and_ledger_consistency(self, rng):
        for trial in range(8):
            n = rng.randint(5, 7)
            k = rng.choice([2, 3])
            fam = SubsetFamily.full(n).restrict_min_size(2)
            m = Fraction(2)
            delta = rng.choice([Fraction(1, 2), Fraction(1)])
            H = build_balanced_hypergraph(fam, k, delta, m, Fraction(1, 4))
            assert H.recount_degrees() == H.ledger.degrees
            for ell in range(1, k + 1):
                assert max_codegree(H, ell) <= (delta * m) ** (k - ell)

    def test_bad_extension_bound(self, rng):
        # for good A and unsaturated {F}: #F with A+{F} bad <= 2^|A| * 2*delta*k*m
        n, k = 6, 3
        fam = SubsetFamily.full(n).restrict_min_size(2)
        delta, m = Fraction(1, 2), Fraction(2)
        H = build_balanced_hypergraph(fam, k, delta, m, Fraction(1, 4))
        led = H.ledger
        tracked = [key for key in led.degrees if 1 <= len(key) < k]
        rng.shuffle(tracked)
        for A in tracked[:120]:
            if not classify_chain_good_family(A, led):
                continue
            count = 0
            for F in range(1 << n):
                key_f = (F,)
                if led.degree(key_f) == led.cap(1):
                    continue
                if F in A:
                    continue
                if not family_is_good(tuple(sorted(A + (F,))), led):
                    count += 1
            assert count <= 2 ** len(A) * 2 * delta * k * m

    def test_critical_chain_density_bound(self):
        # exact-rational check of the critical-chain inequality
        n, k = 6, 3
        fam = SubsetFamily.full(n).restrict_min_size(2)
        delta, m = Fraction(1, 2), Fraction(2)
        H = build_balanced_hypergraph(fam, k, delta, m, Fraction(1, 4))
        work = H.working_family()
        table = DensityTable(work, k)
        tops = [m_ for m_ in work.masks_by_size() if m_.bit_count() >= 4][:6]
        for F1 in tops:
            for ell in (1, 2):
                lhs = Fraction(0)
                for ch in enumerate_chains(work, ell + 1):
                    if ch[0] != F1:
                        continue
                    cls = classify_chain(Chain(ch.elements), H.ledger)
                    prefix_good = family_is_good(tuple(sorted(ch.elements[:ell])), H.ledger)
                    full_good = family_is_good(tuple(sorted(ch.elements)), H.ledger)
                    if not (prefix_good and not full_good):
                        continue
                    w = Fraction(1)
                    for a, b in zip(ch.elements, ch.elements[1:]):
                        w /= comb(a.bit_count(), b.bit_count())
                    lhs += w
                bound = 2**ell * 2 * delta * k * table.value(F1, ell)
                assert lhs <= bound

    def test_saturated_singleton_budget(self, rng):
        # |S(empty)| * floor((delta*m)^(k-1)) <= k * e(H)
        for trial in range(6):
            n = rng.randint(6, 8)
            k = rng.choice([2, 3])
            fam = SubsetFamily.full(n).restrict_min_size(2)
            delta, m = Fraction(1, 2), Fraction(2)
            H = build_balanced_hypergraph(fam, k, delta, m, Fraction(1, 4))
            cap1 = H.ledger.caps[1]
            saturated = [
                key for key, v in H.ledger.degrees.items() if len(key) == 1 and v == cap1
            ]
            assert len(saturated) * cap1 <= k * H.edge_count()
            assert set(H.removed) == {key[0] for key in saturated}


def family_is_good(masks: tuple, ledger) -> bool:
    for r in range(1, min(len(masks), ledger.k) + 1):
        for sub in combinations(masks, r):
            if is_saturated(sub, ledger):
                return False
    return True


def classify_chain_good_family(masks: tuple, ledger) -> bool:
    return family_is_good(masks, ledger)


class TestDumpLoad:
    def test_round_trip(self, tmp_path):
        fam = SubsetFamily.full(6).restrict_min_size(2)
        H = build_balanced_hypergraph(fam, 2, Fraction(1, 2), Fraction(2), Fraction(1, 4))
        path = tmp_path / "hg.txt"
        dump_hypergraph(H, path)
        H2 = load_hypergraph(path, fam)
        assert H2.edges == H.edges
        assert H2.ledger.degrees == H.ledger.degrees
        head = path.read_text().split("\n")[0]
        assert head == "6 2 1/2 2/1"

    def test_grid(self):
        grid = default_delta_grid(Fraction(8, 3))
        assert grid[0] == Fraction(3, 8) and grid[-1] == 1
