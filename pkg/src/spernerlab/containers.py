"""Container pipeline: scythe extraction, iterated steps, and fingerprints.

Every k-chain-free family I gets a short *fingerprint*: starting from
C_1 = P(n), each step builds a balanced chain hypergraph H on the current
container C_i, sweeps its vertices in decreasing degree order, and resolves
every vertex met with positive live degree - members of I go into the
fingerprint set T_i (up to a budget of floor(k * tau * N)), everything else
is deleted.  Edges branch downward when they lose a T-vertex, so k sweep
rounds settle uniformities k..1.  The next container C_{i+1} is computed
*from T_i alone* (the extraction replays itself with T-membership in place
of I-membership), which makes the container function well defined; the
iteration stops when |C_i| < (k-1+epsilon) * C(n, n//2).

The step discards members smaller than a size cutoff before building H (they
are carried through containers untouched).  The cutoff is the largest s not
exceeding ceil(n/3) whose levels hold at most epsilon*C(n,n//2)/2 sets, so
the discard budget holds at every n; the chain parameter m equals n/3 when
the cutoff is unclamped and the cutoff itself otherwise.

Families larger than 3k*C(n,n//2) take the partitioned route with
tau = 1/n^3 (unreachable from P(n) for n <= 22, but exercised in tests via
a threshold override).
"""

from __future__ import annotations

import json
import math
from collections import OrderedDict
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Callable, Iterable, Optional, Sequence

from .errors import ContractError, DomainError
from .lattice import Chain, SubsetFamily, has_k_chain
from .solvers import symmetric_chains
from .supersat import (
    ChainHypergraph,
    calibrate_balanced_hypergraph,
    default_delta_grid,
)

__all__ = [
    "ContainerConfig",
    "Fingerprint",
    "tau",
    "small_set_cutoff",
    "scythe_extract",
    "scythe_container",
    "container_step",
    "container_from_trace",
    "fingerprint",
    "fingerprint_replay",
    "fingerprint_count_bound",
    "slogs_check",
    "dump_fingerprint_json",
]


def tau(family_size: int, n: int, k: int) -> Fraction:
    """Container-step selection rate: 1/n up to 3k*C(n,n//2) members, 1/n^3 beyond."""
    if family_size < 0:
        raise DomainError(f"family_size must be >= 0, got {family_size}")
    if family_size <= 3 * k * comb(n, n // 2):
        return Fraction(1, n)
    return Fraction(1, n**3)


def small_set_cutoff(n: int, k: int, epsilon: Fraction) -> int:
    """Largest s <= ceil(n/3) with sum_{j<s} C(n,j) <= epsilon*C(n,n//2)/2.

    Members below this size are excluded from hypergraph building; the bound
    keeps the excluded mass within the allowed half-epsilon budget.
    """
    budget = Fraction(epsilon) * comb(n, n // 2) / 2
    total = 0
    best = 0
    for s in range(1, math.ceil(n / 3) + 1):
        total += comb(n, s - 1)
        if total <= budget:
            best = s
        else:
            break
    if best < 1:
        raise ContractError(
            f"n={n} too small for epsilon={epsilon}: even discarding only the "
            f"empty set exceeds the budget {budget}"
        )
    return best


@dataclass(frozen=True)
class ContainerConfig:
    """Tunables for the container pipeline.

    delta_shrink is the per-step shrink factor every step must achieve; the
    default was calibrated by sweeping the pipeline over n in 8..12.  c is
    the degree-condition constant checked before each extraction.  K only
    feeds the counting bounds.  tau_threshold overrides the 3k*C(n,n//2)
    route switch (testing hook); delta_grid overrides the builder's
    delta search grid.
    """

    k: int
    epsilon: Fraction = Fraction(1, 4)
    delta_shrink: Fraction = Fraction(1, 64)
    c: Fraction = Fraction(1 << 20)
    K: Fraction = Fraction(10)
    tau_threshold: Optional[int] = None
    iteration_factor: int = 8
    delta_grid: Optional[tuple[Fraction, ...]] = None
    quota_factor: int = 2  # each step resolves ~quota_factor*delta_shrink*|C| vertices

    def __post_init__(self):
        if self.k < 2:
            raise DomainError(f"k must be >= 2, got {self.k}")
        if not 0 < self.epsilon < 1:
            raise DomainError(f"epsilon must be in (0,1), got {self.epsilon}")
        if not 0 < self.delta_shrink < 1:
            raise DomainError(f"delta_shrink must be in (0,1), got {self.delta_shrink}")
        if self.c <= 0 or self.K < 0:
            raise DomainError("c must be positive and K nonnegative")
        if self.iteration_factor < 1:
            raise DomainError("iteration_factor must be >= 1")
        if self.quota_factor < 2:
            raise DomainError("quota_factor must be >= 2 to secure the shrink")

    def step_quota(self, container_size: int) -> int:
        return max(1, math.ceil(self.quota_factor * self.delta_shrink * container_size))

    def threshold(self, n: int) -> int:
        if self.tau_threshold is not None:
            return self.tau_threshold
        return 3 * self.k * comb(n, n // 2)

    def tau_value(self, family_size: int, n: int) -> Fraction:
        if family_size <= self.threshold(n):
            return Fraction(1, n)
        return Fraction(1, n**3)


# ---------------------------------------------------------------------------
# the sweep shared by extraction and replay


def _sweep(
    edges: Sequence[tuple[int, ...]],
    k: int,
    budget: int,
    is_marked: Callable[[int], bool],
    quota: Optional[int] = None,
    pole_ties: Optional[int] = None,
) -> tuple[list[int], set[int]]:
    """k rounds of frozen-order max-degree sweeps.

    Round r processes the edges currently reduced to uniformity k-r+1 in
    decreasing start-of-round degree order.  Ties go by mask, or - when
    `pole_ties` is the ground-set size n - by distance from the middle
    level first, so each edge loses its most extreme vertex before its
    innermost one is ever looked at.  A processed vertex with positive live
    degree is resolved: marked vertices are chosen (and stripped from every
    live edge, branching those edges one stage down), unmarked ones are
    deleted (killing their live edges).  Processing halts the moment the
    budget-th vertex is chosen, or once `quota` vertices have been resolved
    - enough to secure the step's shrink while leaving the rest of the
    container untouched.

    Returns (chosen in processing order, deleted).
    """
    chosen: list[int] = []
    chosen_set: set[int] = set()
    deleted: set[int] = set()
    if budget <= 0 or not edges:
        return chosen, deleted
    if quota is None:
        quota = 1 << 62
    if pole_ties is None:
        order_key = lambda v: (-degl[v], v)  # noqa: E731
    else:
        # farthest from the middle level first; upper level before its
        # mirror (the k-1 middle layers bias downward, so the upper side of
        # an extremity tie is the safer deletion)
        order_key = lambda v: (  # noqa: E731
            -degl[v],
            -abs(2 * v.bit_count() - pole_ties),
            -v.bit_count(),
            v,
        )
    remaining = [set(e) for e in edges]
    alive = [True] * len(edges)
    stage = [k] * len(edges)
    incid: dict[int, list[int]] = {}
    for eid, e in enumerate(edges):
        for v in e:
            incid.setdefault(v, []).append(eid)
    stage_lists: dict[int, list[int]] = {k: list(range(len(edges)))}

    for j in range(k, 0, -1):
        eids = [e for e in stage_lists.get(j, ()) if alive[e] and stage[e] == j]
        if not eids:
            continue
        degl: dict[int, int] = {}
        for eid in eids:
            for v in remaining[eid]:
                degl[v] = degl.get(v, 0) + 1
        order = sorted(degl, key=order_key)
        for v in order:
            if degl[v] <= 0 or v in chosen_set or v in deleted:
                continue
            if is_marked(v):
                chosen.append(v)
                chosen_set.add(v)
                for eid in incid.get(v, ()):
                    if not alive[eid] or v not in remaining[eid]:
                        continue
                    rem = remaining[eid]
                    rem.discard(v)
                    if not rem:
                        raise ContractError(
                            "an edge lies entirely inside the marked set"
                        )
                    old = stage[eid]
                    stage[eid] = old - 1
                    stage_lists.setdefault(old - 1, []).append(eid)
                    if old == j:
                        for w in rem:
                            if w in degl:
                                degl[w] -= 1
                degl[v] = 0
                if len(chosen) == budget:
                    return chosen, deleted
            else:
                deleted.add(v)
                for eid in incid.get(v, ()):
                    if not alive[eid] or v not in remaining[eid]:
                        continue
                    alive[eid] = False
                    if stage[eid] == j:
                        for w in remaining[eid]:
                            if w != v and w in degl:
                                degl[w] -= 1
                degl[v] = 0
            if len(chosen) + len(deleted) >= quota:
                return chosen, deleted
    return chosen, deleted


def _check_degree_condition(
    H: ChainHypergraph, tau_value: Fraction, N: int, c: Fraction
) -> None:
    e = H.edge_count()
    for ell in range(1, H.k + 1):
        bound = Fraction(c) * tau_value ** (ell - 1) * Fraction(e, N)
        if H.ledger.max_degree[ell] > bound:
            raise ContractError(
                f"degree condition fails at ell={ell}: "
                f"Delta_{ell} = {H.ledger.max_degree[ell]} > {bound}"
            )


def scythe_extract(
    H: ChainHypergraph,
    tau_value: Fraction,
    independent: SubsetFamily,
    c: Fraction = Fraction(1 << 20),
    budget_base: Optional[int] = None,
    quota: Optional[int] = None,
    pole_ties: Optional[int] = None,
) -> tuple[SubsetFamily, SubsetFamily]:
    """Extract (T, container) for an independent set of H.

    T collects at most floor(k*tau*N) members of `independent`; the returned
    container includes every vertex not deleted and depends on (H, tau, T)
    only - `scythe_container` reproduces it from T without seeing I.
    """
    fam = H.family
    if not 0 < tau_value < 1:
        raise DomainError(f"tau must be in (0,1), got {tau_value}")
    edge_sets = [ch.elements for ch in H.edges]
    for e in edge_sets:
        if all(v in independent for v in e):
            raise ContractError("independent set contains a full edge")
    N = budget_base if budget_base is not None else fam.size
    _check_degree_condition(H, tau_value, N, c)
    budget = int(Fraction(H.k) * tau_value * N)
    chosen, deleted = _sweep(
        edge_sets, H.k, budget, independent.__contains__, quota, pole_ties
    )
    T = SubsetFamily(fam.n, chosen)
    container = fam.without_masks(deleted)
    return T, container


def scythe_container(
    H: ChainHypergraph,
    tau_value: Fraction,
    T: SubsetFamily,
    budget_base: Optional[int] = None,
    quota: Optional[int] = None,
    pole_ties: Optional[int] = None,
) -> SubsetFamily:
    """Replay the sweep with T-membership as the oracle; pure in (H, tau, T)."""
    fam = H.family
    N = budget_base if budget_base is not None else fam.size
    budget = int(Fraction(H.k) * tau_value * N)
    _, deleted = _sweep(
        [ch.elements for ch in H.edges], H.k, budget, T.__contains__, quota, pole_ties
    )
    return fam.without_masks(deleted)


# ---------------------------------------------------------------------------
# a single container step


_BUILD_CACHE: OrderedDict = OrderedDict()
_BUILD_CACHE_MAX = 512


def _cfg_build_key(cfg: ContainerConfig) -> tuple:
    return (
        cfg.k,
        cfg.epsilon,
        cfg.tau_threshold,
        cfg.delta_grid,
        cfg.delta_shrink,
        cfg.quota_factor,
    )


def _build_for_container(C: SubsetFamily, cfg: ContainerConfig):
    """(H, riders, hyper_vertices) for the current container, cached.

    `riders` are the members excluded from hypergraph building (small sets
    in the direct route, everything outside the selected block subfamilies
    in the partitioned route); they pass through the step untouched.
    """
    key = (C, _cfg_build_key(cfg))
    got = _BUILD_CACHE.get(key)
    if got is not None:
        _BUILD_CACHE.move_to_end(key)
        return got
    n = C.n
    if C.size <= cfg.threshold(n):
        out = _build_direct(C, cfg)
    else:
        out = _build_partitioned(C, cfg)
    _BUILD_CACHE[key] = out
    if len(_BUILD_CACHE) > _BUILD_CACHE_MAX:
        _BUILD_CACHE.popitem(last=False)
    return out


def _build_direct(C: SubsetFamily, cfg: ContainerConfig):
    n, k = C.n, cfg.k
    nC = comb(n, n // 2)
    cutoff = small_set_cutoff(n, k, cfg.epsilon)
    big = C.restrict_min_size(cutoff)
    riders = C.difference(big)
    if riders.size > Fraction(cfg.epsilon) * nC / 2:
        raise ContractError(
            f"discarded {riders.size} small sets, over the budget "
            f"{Fraction(cfg.epsilon) * nC / 2}"
        )
    alpha_eff = Fraction(big.size - (k - 1) * nC, nC)
    if alpha_eff <= 0:
        raise ContractError(
            f"container too small after discarding: {big.size} <= (k-1)*C(n,n//2)"
        )
    m = Fraction(n, 3) if cutoff == math.ceil(n / 3) else Fraction(cutoff)
    edge_target = 2 * cfg.step_quota(C.size)
    H = _peel_hypergraph(big, k, m, edge_target)
    return H, riders, big


def _peel_hypergraph(
    big: SubsetFamily, k: int, m: Fraction, edge_target: int
) -> ChainHypergraph:
    """Disjoint k-chains peeled from the symmetric chain decomposition.

    Each symmetric chain of P(n), projected onto the family, repeatedly
    sheds its k outermost surviving members as one edge.  Edges are emitted
    deepest-spanning first (largest distance of their innermost member from
    the middle level), so mid-lattice vertices enter the hypergraph only
    when nothing more extreme is left.  All edges are pairwise disjoint, so
    every codegree is at most one and the balance caps hold trivially.
    """
    n = big.n
    candidates: list[tuple[tuple[int, int, int], tuple[int, ...]]] = []

    def extremity(v: int) -> int:
        return abs(2 * v.bit_count() - n)

    for chain in symmetric_chains(n):
        proj = [v for v in chain if v in big]
        while len(proj) >= k:
            scored = sorted(proj, key=lambda v: (-extremity(v), -v.bit_count(), v))
            take = scored[:k]
            edge = tuple(sorted(take, key=lambda v: (-v.bit_count(), v)))
            inner = min(extremity(v) for v in take)
            candidates.append(((-inner, edge[-1].bit_count(), edge[-1]), edge))
            taken = set(take)
            proj = [v for v in proj if v not in taken]
    candidates.sort(key=lambda t: t[0])
    H = ChainHypergraph(big, k, 1 / Fraction(m), Fraction(m))
    for _key, edge in candidates[:edge_target]:
        H.add_edge(Chain(edge))
    H.target_met = H.edge_count() >= edge_target
    return H


def _build_partitioned(C: SubsetFamily, cfg: ContainerConfig):
    """Blocks of threshold size; per block, the best size-residue class mod 3."""
    n, k = C.n, cfg.k
    nC = comb(n, n // 2)
    thr = cfg.threshold(n)
    members = list(C.masks_by_size())
    t = C.size // thr
    if t < 1:
        raise ContractError("partitioned route requires |C| above the threshold")
    blocks: list[list[int]] = [[] for _ in range(t)]
    for i, mask in enumerate(members[: t * thr]):
        blocks[i % t].append(mask)
    floor_third = math.ceil(n / 3)
    m = Fraction(comb(n // 3, 3))
    if m < 1:
        raise ContractError(f"n={n} too small for the partitioned route")
    all_edges = []
    picked_masks: list[int] = []
    delta_max = Fraction(0)
    grid = cfg.delta_grid if cfg.delta_grid is not None else default_delta_grid(m)
    for blk in blocks:
        by_residue: dict[int, list[int]] = {0: [], 1: [], 2: []}
        for mask in blk:
            sz = mask.bit_count()
            if sz >= floor_third:
                by_residue[sz % 3].append(mask)
        residue = max(by_residue, key=lambda r: (len(by_residue[r]), -r))
        part = by_residue[residue]
        alpha_i = Fraction(len(part) - (k - 1) * nC, nC)
        if alpha_i <= 0:
            raise ContractError(
                f"block residue class too small: {len(part)} <= (k-1)*C(n,n//2)"
            )
        sub = SubsetFamily(n, part)
        H_i, d_i = calibrate_balanced_hypergraph(
            sub, k, m, min(alpha_i, Fraction(1)), grid, "span"
        )
        delta_max = max(delta_max, d_i)
        all_edges.extend(H_i.edges)
        picked_masks.extend(part)
    union_fam = SubsetFamily(n, picked_masks)
    H = ChainHypergraph(union_fam, k, delta_max, m)
    for ch in all_edges:
        H.add_edge(ch)
    riders = C.difference(union_fam)
    return H, riders, union_fam


def container_step(
    C: SubsetFamily,
    independent: SubsetFamily,
    cfg: ContainerConfig,
) -> tuple[SubsetFamily, SubsetFamily]:
    """One application: returns (T, C_next) with C_next = f(C, T) \\ T.

    Requires |C| >= (k-1+epsilon)*C(n,n//2) (the caller's stopping rule) and
    I ∩ C free of k-chains.  The step must shrink the container by the
    configured delta_shrink factor or it is an error.
    """
    n, k = C.n, cfg.k
    nC = comb(n, n // 2)
    if C.size < (k - 1 + cfg.epsilon) * nC:
        raise ContractError(
            f"|C| = {C.size} below the iteration threshold "
            f"{(k - 1 + cfg.epsilon) * nC}; stop iterating"
        )
    I_in_C = independent.intersection(C)
    if has_k_chain(I_in_C, k):
        raise ContractError("independent set meets the container in a k-chain")
    tau_value = cfg.tau_value(C.size, n)
    H, riders, hyper_vertices = _build_for_container(C, cfg)
    I_big = I_in_C.intersection(hyper_vertices)
    T, _ = scythe_extract(
        H,
        tau_value,
        I_big,
        cfg.c,
        budget_base=hyper_vertices.size,
        quota=cfg.step_quota(C.size),
        pole_ties=n,
    )
    C_next = container_from_trace(C, T, cfg)
    # budget: |T| <= k * tau(|C|) * |C|
    if T.size > Fraction(k) * tau_value * C.size:
        raise ContractError(f"|T| = {T.size} over budget {Fraction(k) * tau_value * C.size}")
    if not T.issubset(I_in_C):
        raise ContractError("fingerprint set escaped the independent set")
    limit = (1 - Fraction(cfg.delta_shrink)) * C.size
    if C_next.size > limit:
        raise ContractError(
            f"step shrank |C| = {C.size} only to {C_next.size} > {limit} "
            f"(delta_shrink = {cfg.delta_shrink})"
        )
    return T, C_next


def container_from_trace(
    C: SubsetFamily, T: SubsetFamily, cfg: ContainerConfig
) -> SubsetFamily:
    """The container function: next container from (C, T) alone."""
    n = C.n
    tau_value = cfg.tau_value(C.size, n)
    H, riders, hyper_vertices = _build_for_container(C, cfg)
    kept = scythe_container(
        H,
        tau_value,
        T,
        budget_base=hyper_vertices.size,
        quota=cfg.step_quota(C.size),
        pole_ties=n,
    )
    return kept.union(riders).difference(T)


# ---------------------------------------------------------------------------
# the iterated pipeline


@dataclass(frozen=True)
class Fingerprint:
    """Trajectory of one pipeline run: T_1..T_m and C_1 ⊇ ... ⊇ C_{m+1}."""

    tees: tuple[SubsetFamily, ...]
    containers: tuple[SubsetFamily, ...]
    epsilon: Fraction
    k: int

    @property
    def iteration_count(self) -> int:
        return len(self.tees)

    @property
    def n(self) -> int:
        return self.containers[0].n

    def union_tees(self) -> SubsetFamily:
        out = SubsetFamily(self.n, ())
        for t in self.tees:
            out = out.union(t)
        return out

    @property
    def final_container(self) -> SubsetFamily:
        return self.containers[-1].union(self.union_tees())

    def validate(self, independent: Optional[SubsetFamily] = None) -> None:
        """Check the construction invariants (raises ContractError)."""
        parts = list(self.tees) + [self.containers[-1]]
        for i, a in enumerate(parts):
            for b in parts[i + 1 :]:
                if not a.isdisjoint(b):
                    raise ContractError("fingerprint parts are not pairwise disjoint")
        for c1, c2 in zip(self.containers, self.containers[1:]):
            if not c2.issubset(c1):
                raise ContractError("containers must be nested")
        if independent is not None:
            final = self.final_container
            if not independent.issubset(final):
                raise ContractError("independent set escapes its container")
            for t in self.tees:
                if not t.issubset(independent):
                    raise ContractError("fingerprint set escapes the independent set")


def fingerprint(independent: SubsetFamily, cfg: ContainerConfig) -> Fingerprint:
    """Iterate container steps from C_1 = P(n) down to the stopping size.

    Asserts the construction's guarantees: T(I) ⊆ I ⊆ final container,
    |final container| <= (k-1+2*epsilon)*C(n,n//2), and an iteration count
    at most iteration_factor * n.
    """
    n, k = independent.n, cfg.k
    nC = comb(n, n // 2)
    if has_k_chain(independent, k):
        raise ContractError("input family contains a k-chain")
    C = SubsetFamily.full(n)
    tees: list[SubsetFamily] = []
    containers = [C]
    cap = cfg.iteration_factor * n
    while C.size >= (k - 1 + cfg.epsilon) * nC:
        if len(tees) >= cap:
            raise ContractError(f"iteration count exceeded {cap}")
        T, C = container_step(C, independent, cfg)
        tees.append(T)
        containers.append(C)
    fp = Fingerprint(tuple(tees), tuple(containers), cfg.epsilon, k)
    fp.validate(independent)
    final = fp.final_container
    bound = (k - 1 + 2 * Fraction(cfg.epsilon)) * nC
    if final.size > bound:
        raise ContractError(
            f"final container has {final.size} members, over (k-1+2e)*C = {bound}"
        )
    return fp


def fingerprint_replay(
    tees: Sequence[SubsetFamily], n: int, cfg: ContainerConfig
) -> tuple[SubsetFamily, ...]:
    """Rebuild the container trajectory from the T-sequence alone."""
    C = SubsetFamily.full(n)
    out = [C]
    for T in tees:
        C = container_from_trace(C, T, cfg)
        out.append(C)
    return tuple(out)


# ---------------------------------------------------------------------------
# counting bounds


def fingerprint_count_bound(s: int, n: int, K, log: bool = False) -> float:
    """(K*C(n,n//2)/s)^s * exp((K/n)*C(n,n//2)), evaluated in the log domain.

    Returns the value (possibly math.inf); with log=True returns its natural
    logarithm instead.
    """
    if s < 1:
        raise DomainError(f"s must be >= 1, got {s}")
    K = Fraction(K)
    if K < 0:
        raise DomainError(f"K must be >= 0, got {K}")
    nC = comb(n, n // 2)
    if K == 0:
        return -math.inf if log else 0.0
    logv = s * (math.log(K * nC) - math.log(s)) + float(K) * nC / n
    if log:
        return logv
    try:
        return math.exp(logv)
    except OverflowError:
        return math.inf


def slogs_check(a: Sequence, M, delta) -> tuple[float, float, float]:
    """(s*log(s), sum a_j*log(a_j), gap) for an admissible sequence.

    Admissible means 1 <= a_j <= (1-delta)^j * M for every j; violations are
    DomainErrors.  The gap is the quantity calibrated against a constant
    multiple of M.
    """
    M = Fraction(M)
    delta = Fraction(delta)
    if not 0 < delta < 1:
        raise DomainError(f"delta must be in (0,1), got {delta}")
    if not a:
        raise DomainError("sequence must be non-empty")
    vals = [Fraction(x) for x in a]
    shrink = Fraction(1)
    for j, x in enumerate(vals, start=1):
        shrink *= 1 - delta
        if not 1 <= x <= shrink * M:
            raise DomainError(
                f"a_{j} = {x} outside [1, (1-delta)^{j} * M = {shrink * M}]"
            )
    s = float(sum(vals))
    lhs = s * math.log(s)
    rhs = sum(float(x) * math.log(float(x)) for x in vals)
    return lhs, rhs, lhs - rhs


def dump_fingerprint_json(fp: Fingerprint, path) -> None:
    """JSON dump: n, k, epsilon, iteration_count, tees, container_sizes, final size."""
    doc = {
        "n": fp.n,
        "k": fp.k,
        "epsilon": [fp.epsilon.numerator, fp.epsilon.denominator],
        "iteration_count": fp.iteration_count,
        "tees": [[format(m, "x") for m in sorted(t.masks_by_size())] for t in fp.tees],
        "container_sizes": [c.size for c in fp.containers],
        "final_container_size": fp.final_container.size,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
