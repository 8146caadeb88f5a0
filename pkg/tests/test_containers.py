"""Container pipeline: tau rule, scythe extraction/replay, fingerprints.

The load-bearing property throughout is purity: the next container is a
function of (current container, fingerprint set) only, checked by replaying
every construction with the independent set hidden.
"""

import math
import random
from fractions import Fraction
from math import comb

import pytest

from conftest import random_chain_free, random_family
from spernerlab.containers import (
    ContainerConfig,
    Fingerprint,
    container_from_trace,
    container_step,
    dump_fingerprint_json,
    fingerprint,
    fingerprint_count_bound,
    fingerprint_replay,
    scythe_container,
    scythe_extract,
    slogs_check,
    small_set_cutoff,
    tau,
)
from spernerlab.errors import ContractError, DomainError
from spernerlab.lattice import SubsetFamily, middle_layers
from spernerlab.solvers import max_antichain
from spernerlab.supersat import build_balanced_hypergraph


class TestTau:
    def test_boundary_inclusive(self):
        n, k = 10, 2
        thr = 3 * k * comb(n, n // 2)
        assert tau(thr, n, k) == Fraction(1, n)
        assert tau(thr + 1, n, k) == Fraction(1, n**3)

    def test_zero(self):
        assert tau(0, 10, 2) == Fraction(1, 10)

    def test_negative(self):
        with pytest.raises(DomainError):
            tau(-1, 10, 2)


class TestCutoff:
    def test_budget_respected(self):
        for n in range(5, 17):
            for k in (2, 3):
                s = small_set_cutoff(n, k, Fraction(1, 4))
                assert 1 <= s <= math.ceil(n / 3)
                assert sum(comb(n, j) for j in range(s)) <= Fraction(1, 4) * comb(n, n // 2) / 2

    def test_too_small_n(self):
        with pytest.raises(ContractError):
            small_set_cutoff(3, 2, Fraction(1, 8))


class TestScythe:
    def _builder_h(self):
        fam = SubsetFamily.full(8).restrict_min_size(3)
        H = build_balanced_hypergraph(
            fam, 2, Fraction(1, 2), Fraction(8, 3), Fraction(1, 4)
        )
        return fam, H

    def test_no_edges(self):
        fam = SubsetFamily.full(6).restrict_min_size(2)
        H = build_balanced_hypergraph(
            fam, 2, Fraction(1, 2), Fraction(2), Fraction(1, 4), edge_target=0
        )
        T, cont = scythe_extract(H, Fraction(1, 6), fam)
        assert T.size == 0 and cont == fam

    def test_empty_independent(self):
        fam, H = self._builder_h()
        T, cont = scythe_extract(H, Fraction(1, 8), SubsetFamily(8, []))
        assert T.size == 0
        assert cont == scythe_container(H, Fraction(1, 8), SubsetFamily(8, []))

    def test_antichain_extraction(self):
        fam, H = self._builder_h()
        ac = SubsetFamily(8, max_antichain(fam).witness)
        tv = tau(fam.size, 8, 2)
        T, cont = scythe_extract(H, tv, ac)
        assert T.size <= 2 * tv * fam.size
        assert T.issubset(ac)
        for v in ac.masks_by_size():
            assert v in cont or v in T
        assert scythe_container(H, tv, T) == cont

    def test_rejects_dependent_set(self):
        fam, H = self._builder_h()
        edge = H.edges[0]
        dep = SubsetFamily(8, edge.elements)
        with pytest.raises(ContractError):
            scythe_extract(H, Fraction(1, 8), dep)

    def test_budget_halt(self):
        # tiny tau forces an empty budget: nothing may be resolved
        fam, H = self._builder_h()
        ac = SubsetFamily(8, max_antichain(fam).witness)
        T, cont = scythe_extract(H, Fraction(1, 100000), ac)
        assert T.size == 0 and cont == fam

    def test_degree_condition_reported(self):
        fam, H = self._builder_h()
        with pytest.raises(ContractError, match="ell="):
            scythe_extract(H, Fraction(1, 8), SubsetFamily(8, []), c=Fraction(1, 10**9))


class TestContainerStep:
    def test_shrink_on_full_lattice(self):
        cfg = ContainerConfig(k=2)
        C = SubsetFamily.full(10)
        I = middle_layers(10, 2)
        T, C2 = container_step(C, I, cfg)
        assert C2.size <= (1 - cfg.delta_shrink) * C.size
        assert T.issubset(I)
        assert C2.isdisjoint(T)

    def test_empty_independent_is_function_of_c(self):
        cfg = ContainerConfig(k=2)
        C = SubsetFamily.full(9)
        T, C2 = container_step(C, SubsetFamily(9, []), cfg)
        assert T.size == 0
        assert C2 == container_from_trace(C, SubsetFamily(9, []), cfg)

    def test_below_threshold_is_error(self):
        cfg = ContainerConfig(k=2)
        C = middle_layers(8, 2)
        with pytest.raises(ContractError):
            container_step(C, SubsetFamily(8, []), cfg)

    def test_partitioned_route(self):
        # the big-family route is unreachable from P(n) for n <= 22 (then
        # 2^n < 3k*C(n,n//2)); exercise it via the threshold override
        cfg = ContainerConfig(k=2, tau_threshold=3500)
        C = SubsetFamily.full(12)
        I = SubsetFamily(12, middle_layers(12, 2).level(6)[:200])
        assert cfg.tau_value(C.size, 12) == Fraction(1, 12**3)
        T, C2 = container_step(C, I, cfg)
        assert C2.size <= (1 - cfg.delta_shrink) * C.size
        assert T.size <= 2 * Fraction(1, 12**3) * C.size
        assert C2 == container_from_trace(C, T, cfg)

    def test_route_switch_is_size_based(self):
        n, k = 10, 2
        thr = 3 * k * comb(n, n // 2)
        assert (1 << n) <= thr  # whole lattice stays on the direct route
        cfg = ContainerConfig(k=k)
        assert cfg.tau_value(1 << n, n) == Fraction(1, n)
        assert cfg.tau_value(thr + 1, n) == Fraction(1, n**3)


class TestFingerprint:
    def test_immediate_stop(self):
        # 2^n already below (k-1+eps)*C(n,n//2): zero iterations
        cfg = ContainerConfig(k=3)
        I = SubsetFamily(2, [])
        fp = fingerprint(I, cfg)
        assert fp.iteration_count == 0
        assert fp.final_container == SubsetFamily.full(2)

    def test_middle_layer_p10(self):
        cfg = ContainerConfig(k=2)
        I = middle_layers(10, 2)
        fp = fingerprint(I, cfg)
        fp.validate(I)
        assert fp.final_container.size <= (1 + Fraction(1, 2)) * comb(10, 5)
        assert fp.containers[-1].size < (1 + Fraction(1, 4)) * comb(10, 5)
        assert fp.iteration_count <= 8 * 10
        # budget: |T(I)| within the summed per-step allowance
        total = sum(t.size for t in fp.tees)
        allowance = sum(
            2 * tau(c.size, 10, 2) * c.size for c in fp.containers[:-1]
        )
        assert total <= allowance

    def test_replay_identical(self):
        cfg = ContainerConfig(k=2)
        I = middle_layers(9, 2)
        fp = fingerprint(I, cfg)
        replayed = fingerprint_replay(fp.tees, 9, cfg)
        assert list(replayed) == list(fp.containers)

    def test_same_tees_same_container(self, rng):
        # two independent sets sharing a T-trajectory get identical containers
        cfg = ContainerConfig(k=2)
        I1 = random_chain_free(9, 2, rng)
        fp1 = fingerprint(I1, cfg)
        replay = fingerprint_replay(fp1.tees, 9, cfg)
        assert replay[-1] == fp1.containers[-1]

    def test_rejects_chained_input(self):
        cfg = ContainerConfig(k=2)
        with pytest.raises(ContractError):
            fingerprint(SubsetFamily(6, [0b1, 0b11, 0b111]), cfg)

    def test_fuzz_invariants(self, rng):
        for trial in range(12):
            n = rng.choice([8, 9, 10])
            k = rng.choice([2, 3])
            cfg = ContainerConfig(k=k)
            I = random_chain_free(n, k, rng)
            fp = fingerprint(I, cfg)
            fp.validate(I)
            for a, b in zip(fp.containers, fp.containers[1:]):
                assert b.size <= (1 - cfg.delta_shrink) * a.size
            assert fp.iteration_count <= cfg.iteration_factor * n

    def test_two_regime_tee_split(self):
        # at this scale every step runs below the threshold, so the
        # pre-threshold tee contribution is empty and the post-threshold sum
        # is a small multiple of C(n,n//2)/n
        cfg = ContainerConfig(k=2)
        n = 10
        fp = fingerprint(middle_layers(n, 2), cfg)
        thr = cfg.threshold(n)
        pre = [c for c in fp.containers[:-1] if c.size > thr]
        assert pre == []
        post_sum = sum(Fraction(1, n) * c.size for c in fp.containers[:-1])
        measured_c = post_sum / (Fraction(comb(n, n // 2), n))
        assert measured_c > 0  # reported, not asserted against a constant

    def test_json_dump(self, tmp_path):
        import json

        cfg = ContainerConfig(k=2)
        fp = fingerprint(middle_layers(8, 2), cfg)
        path = tmp_path / "fp.json"
        dump_fingerprint_json(fp, path)
        doc = json.loads(path.read_text())
        assert doc["n"] == 8 and doc["k"] == 2
        assert doc["iteration_count"] == fp.iteration_count
        assert len(doc["container_sizes"]) == fp.iteration_count + 1
        assert doc["final_container_size"] == fp.final_container.size


class TestCountBound:
    def test_direct_value(self):
        # s = 1, K = 1, n = 10: C(10,5) * exp(C(10,5)/10)
        got = fingerprint_count_bound(1, 10, Fraction(1))
        expect = 252 * math.exp(25.2)
        assert abs(got - expect) / expect < 1e-12

    def test_zero_k(self):
        assert fingerprint_count_bound(5, 10, 0) == 0.0

    def test_monotone_below_peak(self):
        # increasing in s below K*C(n,n//2)/e
        K = Fraction(2)
        n = 12
        peak = float(K) * comb(12, 6) / math.e
        vals = [
            fingerprint_count_bound(s, n, K, log=True)
            for s in range(1, int(peak), max(1, int(peak) // 50))
        ]
        assert all(a < b for a, b in zip(vals, vals[1:]))

    def test_domain(self):
        with pytest.raises(DomainError):
            fingerprint_count_bound(0, 10, 1)


class TestSlogs:
    def test_single_term_zero_gap(self):
        for a in (Fraction(3), Fraction(17, 2), Fraction(100)):
            lhs, rhs, gap = slogs_check([a], a * 4, Fraction(1, 2))
            assert gap == 0.0

    def test_all_ones(self):
        M = Fraction(64)
        delta = Fraction(1, 4)
        m = int(math.log(64) / -math.log(0.75))
        seq = [Fraction(1)] * m
        lhs, rhs, gap = slogs_check(seq, M, delta)
        assert rhs == 0.0
        assert lhs == pytest.approx(m * math.log(m))
        assert gap <= 40 * float(M)

    def test_geometric(self):
        M = Fraction(100)
        delta = Fraction(1, 3)
        seq = []
        cur = Fraction(1)
        for j in range(1, 8):
            cur *= 1 - delta
            if cur * M < 1:
                break
            seq.append(cur * M)
        lhs, rhs, gap = slogs_check(seq, M, delta)
        s = float(sum(seq))
        assert lhs == pytest.approx(s * math.log(s))
        assert gap <= 40 * float(M)

    def test_constraint_violation(self):
        with pytest.raises(DomainError):
            slogs_check([Fraction(1, 2)], Fraction(10), Fraction(1, 2))
        with pytest.raises(DomainError):
            slogs_check([Fraction(6)], Fraction(10), Fraction(1, 2))
