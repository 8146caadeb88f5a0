"""Exact extremal solvers over subset families.

Three dualities do the work:

* Dilworth: a maximum antichain equals a minimum chain cover, computed as
  |fam| - (maximum bipartite matching on the strict-containment relation).
* Greene-Kleitman: the largest union of m antichains (equivalently the
  largest subfamily with no (m+1)-chain) equals the minimum over chain
  partitions of sum(min(|C|, m)), computed as a min-cost circulation.
* Mirsky: a family with no k-chain splits into k-1 antichains by height.

Matching uses Hopcroft-Karp phases warm-started from a symmetric chain
decomposition of P(n) projected onto the family.  Containment arcs are
enumerated within a size-difference window that escalates until a Koenig
antichain certificate verifies globally, so answers are exact while the
arc lists stay near-linear for random families.

All solvers are pure functions of immutable inputs and may run concurrently.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from heapq import heappop, heappush
from itertools import combinations
from math import comb
from typing import Optional, Sequence

import numpy as np

from .errors import ContractError, DomainError, SolverTimeout
from .lattice import Chain, SubsetFamily, family_heights, longest_chain

BRUTE_FORCE_CAP = 24


# ---------------------------------------------------------------------------
# symmetric chain decomposition of P(n) (bracket matching)


@lru_cache(maxsize=8)
def symmetric_chains(n: int) -> tuple[tuple[int, ...], ...]:
    """Partition of P(n) into C(n, n//2) symmetric chains.

    Positions are read left to right; an absent element is an opening
    bracket, a present one a closing bracket.  The matched pairs are frozen
    along a chain and the unmatched positions toggle bottom-up.
    """
    chains = []
    for bottom in range(1 << n):
        stack = []
        unmatched_present = False
        free = []
        for i in range(n):
            if bottom >> i & 1:
                if stack:
                    stack.pop()
                else:
                    unmatched_present = True
                    break
            else:
                stack.append(i)
        if unmatched_present:
            continue  # not the bottom of its chain
        chain = [bottom]
        cur = bottom
        for i in stack:  # unmatched open positions, left to right
            cur |= 1 << i
            chain.append(cur)
        chains.append(tuple(chain))
    return tuple(chains)


# ---------------------------------------------------------------------------
# bipartite matching core (Hopcroft-Karp with explicit adjacency)


class _Matching:
    """Maximum matching state over an escalating arc set.

    Left and right vertices are arbitrary hashables (here: masks or
    (mask, colour) pairs).  `pair_u`/`pair_v` survive arc escalation, so
    augmenting resumes from the warm-started matching.
    """

    def __init__(self):
        self.adj: dict[object, list] = {}
        self.pair_u: dict[object, object] = {}
        self.pair_v: dict[object, object] = {}

    def add_arc(self, u, v):
        self.adj.setdefault(u, []).append(v)

    def force_pair(self, u, v):
        """Seed a matched pair (the arc need not be in `adj`)."""
        self.pair_u[u] = v
        self.pair_v[v] = u

    def size(self) -> int:
        return len(self.pair_u)

    def augment_to_max(self, left_order: Sequence, deadline: float | None = None):
        """Hopcroft-Karp phases until no augmenting path remains."""
        INF = float("inf")
        adj = self.adj
        pair_u = self.pair_u
        pair_v = self.pair_v
        while True:
            if deadline is not None and time.monotonic() > deadline:
                raise SolverTimeout("matching phase exceeded deadline")
            # BFS layering from unmatched left vertices
            dist = {}
            queue = []
            for u in left_order:
                if u not in pair_u and u in adj:
                    dist[u] = 0
                    queue.append(u)
            found = False
            qi = 0
            while qi < len(queue):
                u = queue[qi]
                qi += 1
                for v in adj[u]:
                    w = pair_v.get(v)
                    if w is None:
                        found = True
                    elif w not in dist:
                        dist[w] = dist[u] + 1
                        queue.append(w)
            if not found:
                return
            # vertex-disjoint augmenting DFS along the layering, iterative
            iters = {}
            for u in left_order:
                if u in pair_u or u not in adj:
                    continue
                stack = [u]
                iters[u] = iter(adj[u])
                path = []
                while stack:
                    cur = stack[-1]
                    advanced = False
                    for v in iters[cur]:
                        w = pair_v.get(v)
                        if w is None:
                            # augment along stack
                            path = stack[:]
                            prev_v = v
                            for node in reversed(path):
                                nxt = pair_u.get(node)
                                pair_u[node] = prev_v
                                pair_v[prev_v] = node
                                prev_v = nxt
                            stack = []
                            advanced = True
                            break
                        if dist.get(w, INF) == dist[cur] + 1 and w not in iters:
                            stack.append(w)
                            iters[w] = iter(adj[w])
                            advanced = True
                            break
                    if not advanced and stack:
                        dead = stack.pop()
                        dist[dead] = INF

    def alternating_reachable(self) -> tuple[set, set]:
        """(left, right) vertices reachable by alternating paths from unmatched lefts."""
        z_left = set()
        z_right = set()
        queue = [u for u in self.adj if u not in self.pair_u]
        z_left.update(queue)
        qi = 0
        while qi < len(queue):
            u = queue[qi]
            qi += 1
            for v in self.adj.get(u, ()):
                if v in z_right:
                    continue
                z_right.add(v)
                w = self.pair_v.get(v)
                if w is not None and w not in z_left:
                    z_left.add(w)
                    queue.append(w)
        return z_left, z_right


def _window_arcs(fam: SubsetFamily, lo_gap: int, hi_gap: int):
    """Yield (u, v) with u ⊋ v in fam and lo_gap <= |u|-|v| <= hi_gap."""
    positions_cache: dict[int, tuple[int, ...]] = {}
    for u in fam.masks_by_size():
        su = u.bit_count()
        if su < lo_gap:
            continue
        bits = positions_cache.get(u)
        if bits is None:
            bits = tuple(i for i in range(fam.n) if u >> i & 1)
            positions_cache[u] = bits
        for d in range(lo_gap, min(hi_gap, su) + 1):
            for drop in combinations(bits, d):
                v = u
                for i in drop:
                    v ^= 1 << i
                if v in fam:
                    yield u, v


def _verify_antichain(masks: Sequence[int]) -> bool:
    """Pairwise containment check, vectorized in blocks."""
    if len(masks) <= 1:
        return True
    arr = np.fromiter(masks, dtype=np.int64)
    block = 2048
    for i in range(0, len(arr), block):
        a = arr[i : i + block]
        sub = (a[:, None] & arr[None, :]) == a[:, None]
        sup = (a[:, None] & arr[None, :]) == arr[None, :]
        comparable = sub | sup
        # remove self-comparisons
        for r in range(len(a)):
            comparable[r, i + r] = False
        if comparable.any():
            return False
    return True


@dataclass
class SolveResult:
    size: int
    witness: tuple[int, ...]
    method: str
    certificate: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "size": self.size,
            "witness_masks": [format(m, "x") for m in self.witness],
            "method": self.method,
            "certificate": self.certificate,
        }


def max_antichain(
    fam: SubsetFamily, deadline: float | None = None
) -> SolveResult:
    """Maximum antichain of `fam` via Dilworth duality.

    Returns the exact optimum with a witness (no comparable pair; verified)
    and a chain-cover certificate of matching size.
    """
    if fam.size == 0:
        return SolveResult(0, (), "dilworth-matching", {"matching": 0, "window": 0})
    n = fam.n
    mat = _Matching()
    # warm start: consecutive present members of each symmetric chain of P(n)
    for chain in symmetric_chains(n):
        prev = None
        for m in chain:
            if m in fam:
                if prev is not None:
                    mat.force_pair(m, prev)  # m ⊋ prev, one step up the chain
                prev = m
    left_order = list(fam.masks_top_down())
    for u in left_order:
        mat.adj.setdefault(u, [])
    schedule = [d for d in (2, 4, 8) if d < n] + [n]
    lo = 1
    for window in schedule:
        for u, v in _window_arcs(fam, lo, window):
            mat.add_arc(u, v)
        lo = window + 1
        mat.augment_to_max(left_order, deadline)
        z_left, z_right = mat.alternating_reachable()
        witness = [
            m for m in fam.masks_by_size() if m in z_left and m not in z_right
        ]
        cover = fam.size - mat.size()
        if len(witness) == cover and _verify_antichain(witness):
            return SolveResult(
                cover,
                tuple(sorted(witness)),
                "dilworth-matching",
                {"matching": mat.size(), "window": window, "chain_cover": cover},
            )
    raise ContractError("antichain certificate failed at full window")  # unreachable


# ---------------------------------------------------------------------------
# min-cost circulation for the k-chain-free optimum (Greene-Kleitman)


class _MinCostFlow:
    """Successive shortest paths with potentials; unit capacities.

    Phases augment a blocking set of shortest paths at a time, so the number
    of Dijkstra rounds is bounded by the number of distinct path costs.
    """

    def __init__(self, n_nodes: int):
        self.n = n_nodes
        self.to: list[int] = []
        self.cap: list[int] = []
        self.cost: list[int] = []
        self.adj: list[list[int]] = [[] for _ in range(n_nodes)]

    def add_arc(self, u: int, v: int, cap: int, cost: int):
        self.adj[u].append(len(self.to))
        self.to.append(v)
        self.cap.append(cap)
        self.cost.append(cost)
        self.adj[v].append(len(self.to))
        self.to.append(u)
        self.cap.append(0)
        self.cost.append(-cost)

    def min_cost_nonpositive(
        self, s: int, t: int, init_potential: list[int], deadline: float | None = None
    ) -> tuple[int, int]:
        """Send flow along negative-cost s-t paths until none remain.

        Returns (total_cost, total_flow).  `init_potential` must make all
        residual reduced costs nonnegative (e.g. DAG shortest distances).
        Each Dijkstra round augments its shortest path plus a best-effort
        batch of further tight paths, so rounds are few.
        """
        to, cap, cost, adj = self.to, self.cap, self.cost, self.adj
        pot = list(init_potential)
        INF = float("inf")
        total_cost = 0
        total_flow = 0
        parent = [-1] * self.n
        while True:
            if deadline is not None and time.monotonic() > deadline:
                raise SolverTimeout("flow phase exceeded deadline")
            dist: list[float] = [INF] * self.n
            dist[s] = 0
            parent[t] = -1
            heap = [(0, s)]
            while heap:
                d, u = heappop(heap)
                if d > dist[u]:
                    continue
                pu = pot[u]
                for eid in adj[u]:
                    if cap[eid] <= 0:
                        continue
                    v = to[eid]
                    nd = d + cost[eid] + pu - pot[v]
                    if nd < dist[v]:
                        dist[v] = nd
                        parent[v] = eid
                        heappush(heap, (nd, v))
            if dist[t] == INF or dist[t] + pot[t] - pot[s] >= 0:
                return total_cost, total_flow
            for v in range(self.n):
                if dist[v] != INF:
                    pot[v] += dist[v]
            # guaranteed progress: augment the recorded shortest path
            path = []
            v = t
            while v != s:
                eid = parent[v]
                path.append(eid)
                v = to[eid ^ 1]
            for eid in path:
                cap[eid] -= 1
                cap[eid ^ 1] += 1
                total_cost += cost[eid]
            total_flow += 1
            total_cost_extra, extra_flow = self._augment_tight_batch(s, t, pot)
            total_cost += total_cost_extra
            total_flow += extra_flow

    def _augment_tight_batch(self, s: int, t: int, pot: list[int]) -> tuple[int, int]:
        """Best-effort: push more unit paths along tight arcs (reduced cost 0).

        On-stack marking prevents residual two-cycles; anything missed is
        picked up by the next Dijkstra round.
        """
        to, cap, cost, adj = self.to, self.cap, self.cost, self.adj
        it = [0] * self.n
        on_stack = [False] * self.n
        got_cost = 0
        got_flow = 0
        while True:
            stack = [s]
            on_stack[s] = True
            path: list[int] = []
            reached = False
            while stack:
                u = stack[-1]
                if u == t:
                    reached = True
                    break
                progressed = False
                while it[u] < len(adj[u]):
                    eid = adj[u][it[u]]
                    v = to[eid]
                    if cap[eid] > 0 and not on_stack[v] and pot[u] + cost[eid] == pot[v]:
                        stack.append(v)
                        on_stack[v] = True
                        path.append(eid)
                        progressed = True
                        break
                    it[u] += 1
                if not progressed and not reached:
                    dead = stack.pop()
                    on_stack[dead] = False
                    if path:
                        it[stack[-1]] += 1
                        path.pop()
            for u in stack:
                on_stack[u] = False
            if not reached:
                return got_cost, got_flow
            pathcost = sum(cost[eid] for eid in path)
            if pathcost >= 0:
                return got_cost, got_flow
            for eid in path:
                cap[eid] -= 1
                cap[eid ^ 1] += 1
            got_cost += pathcost
            got_flow += 1


def _closure_arcs(fam: SubsetFamily):
    """All (u, v) with u ⊋ v, both in fam."""
    return _window_arcs(fam, 1, fam.n)


def _gk_flow_value(fam: SubsetFamily, m: int, deadline: float | None = None) -> int:
    """max over vertex-disjoint chain families of sum(len - m), via min-cost flow."""
    masks = list(fam.masks_by_size())
    idx = {mask: i for i, mask in enumerate(masks)}
    nv = len(masks)
    S, T = 2 * nv, 2 * nv + 1
    fl = _MinCostFlow(2 * nv + 2)
    for i in range(nv):
        fl.add_arc(S, 2 * i, 1, m)  # start a chain here: pay m
        fl.add_arc(2 * i, 2 * i + 1, 1, -1)  # cover the vertex: gain 1
        fl.add_arc(2 * i + 1, T, 1, 0)
    for u, v in _closure_arcs(fam):
        fl.add_arc(2 * idx[u] + 1, 2 * idx[v], 1, 0)
    # initial potentials: shortest distances in the DAG, one pass in size-
    # descending order (containment arcs always point to smaller sets)
    INF_I = 1 << 30
    order = sorted(range(nv), key=lambda i: (-masks[i].bit_count(), masks[i]))
    arcs_by_tail: dict[int, list[int]] = {}
    for u, v in _closure_arcs(fam):
        arcs_by_tail.setdefault(idx[u], []).append(idx[v])
    pot = [INF_I] * (2 * nv + 2)
    pot[S] = 0
    for i in order:
        vin, vout = 2 * i, 2 * i + 1
        pot[vin] = min(pot[vin], m)
        pot[vout] = min(pot[vout], pot[vin] - 1)
        for j in arcs_by_tail.get(i, ()):
            w_in = 2 * j
            if pot[vout] < pot[w_in]:
                pot[w_in] = pot[vout]
    pot[T] = min((pot[2 * i + 1] for i in range(nv)), default=0)
    cost, _flow = fl.min_cost_nonpositive(S, T, pot, deadline)
    return -cost  # = max(covered - q*m) >= 0


def _product_antichain_witness(
    fam: SubsetFamily, m: int, deadline: float | None = None
) -> tuple[int, tuple[int, ...]]:
    """Witness for the largest union of m antichains.

    Dilworth on the product order Q = fam x {1..m} with
    (v,i) > (w,j) iff (v ⊋ w and i <= j) or (v == w and i < j):
    antichains of Q biject with unions of m antichains of fam.
    """
    masks = list(fam.masks_by_size())
    mat = _Matching()
    left_order = []
    for v in fam.masks_top_down():
        for i in range(1, m + 1):
            left_order.append((v, i))
            mat.adj.setdefault((v, i), [])
    for v in masks:
        for i in range(1, m + 1):
            for j in range(i + 1, m + 1):
                mat.add_arc((v, i), (v, j))
    for u, v in _closure_arcs(fam):
        for i in range(1, m + 1):
            for j in range(i, m + 1):
                mat.add_arc((u, i), (v, j))
    mat.augment_to_max(left_order, deadline)
    z_left, z_right = mat.alternating_reachable()
    picked = [
        p for p in left_order if p in z_left and p not in z_right
    ]
    size = m * fam.size - mat.size()
    if len(picked) != size:
        raise ContractError("product-poset certificate mismatch")
    witness = sorted({v for v, _ in picked})
    if len(witness) != size:
        raise ContractError("product-poset projection not injective")
    return size, tuple(witness)


def max_k_chain_free(
    fam: SubsetFamily,
    k: int,
    method: str = "auto",
    witness: bool = True,
    deadline: float | None = None,
) -> SolveResult:
    """Maximum subfamily of `fam` containing no k-chain, exactly.

    method: "flow" (min-cost circulation), "matching" (product-poset
    Dilworth), or "auto" (matching for k=2, flow otherwise).  When both a
    flow size and a matching witness are computed they are cross-checked.
    """
    if k < 2:
        raise DomainError(f"k must be >= 2, got {k}")
    if method not in ("auto", "flow", "matching"):
        raise DomainError(f"unknown method {method!r}")
    m = k - 1
    if fam.size == 0:
        return SolveResult(0, (), "empty", {})
    if method == "auto" and k == 2:
        res = max_antichain(fam, deadline)
        return SolveResult(res.size, res.witness, res.method, res.certificate)
    if method == "matching":
        size, wit = _product_antichain_witness(fam, m, deadline)
        _check_witness(fam, wit, k)
        return SolveResult(size, wit, "product-matching", {"colours": m})
    # flow value; witness (if requested) via the product construction
    excess = _gk_flow_value(fam, m, deadline)
    size = fam.size - excess
    cert = {"flow_excess": excess, "truncation": m}
    if witness:
        wsize, wit = _product_antichain_witness(fam, m, deadline)
        if wsize != size:
            raise ContractError(
                f"flow optimum {size} disagrees with matching optimum {wsize}"
            )
        _check_witness(fam, wit, k)
        return SolveResult(size, wit, "gk-flow", cert)
    return SolveResult(size, (), "gk-flow", cert)


def _check_witness(fam: SubsetFamily, witness: Sequence[int], k: int) -> None:
    wfam = SubsetFamily(fam.n, witness)
    heights = family_heights(wfam)
    if heights and max(heights.values()) >= k:
        raise ContractError("witness contains a k-chain")


def brute_force_max_k_chain_free(fam: SubsetFamily, k: int) -> SolveResult:
    """Exhaustive optimum by branching on the elements of some k-chain.

    Refuses families larger than 24 elements.
    """
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    if fam.size > BRUTE_FORCE_CAP:
        raise DomainError(
            f"family of size {fam.size} too large for brute force (cap {BRUTE_FORCE_CAP})"
        )
    masks = list(fam.masks_by_size())
    index = {m: i for i, m in enumerate(masks)}
    chains: list[tuple[int, tuple[int, ...]]] = []
    for ch in _enumerate_index_chains(masks, k):
        bits = 0
        for i in ch:
            bits |= 1 << i
        chains.append((bits, ch))
    full = (1 << len(masks)) - 1
    memo: dict[int, int] = {}
    best_sets: dict[int, int] = {}

    def solve(s: int) -> int:
        got = memo.get(s)
        if got is not None:
            return got
        hit = None
        for bits, ch in chains:
            if bits & ~s == 0:
                hit = ch
                break
        if hit is None:
            memo[s] = s.bit_count()
            best_sets[s] = s
            return memo[s]
        best = -1
        best_s = 0
        for i in hit:
            sub = solve(s & ~(1 << i))
            if sub > best:
                best = sub
                best_s = best_sets[s & ~(1 << i)]
        memo[s] = best
        best_sets[s] = best_s
        return best

    size = solve(full)
    wit_bits = best_sets[full]
    witness = tuple(masks[i] for i in range(len(masks)) if wit_bits >> i & 1)
    return SolveResult(size, witness, "brute-force", {"chains_considered": len(chains)})


def _enumerate_index_chains(masks: list[int], k: int):
    """All k-chains as index tuples, elements ordered by size descending."""
    if k == 1:
        for i in range(len(masks)):
            yield (i,)
        return
    order = sorted(range(len(masks)), key=lambda i: (-masks[i].bit_count(), masks[i]))
    below: dict[int, list[int]] = {}
    for a in order:
        below[a] = [
            b
            for b in order
            if masks[b] != masks[a] and (masks[b] & masks[a]) == masks[b]
        ]

    def extend(prefix: list[int]):
        if len(prefix) == k:
            yield tuple(prefix)
            return
        for b in below[prefix[-1]]:
            prefix.append(b)
            yield from extend(prefix)
            prefix.pop()

    for a in order:
        yield from extend([a])


@dataclass
class MirskyOutcome:
    antichains: Optional[list[SubsetFamily]]
    violation: Optional[Chain]

    @property
    def ok(self) -> bool:
        return self.antichains is not None


def mirsky_decompose(fam: SubsetFamily, k: int) -> MirskyOutcome:
    """Split a k-chain-free family into k-1 antichains by height.

    If the family does contain a k-chain, returns that chain as the
    violation instead.
    """
    if k < 2:
        raise DomainError(f"k must be >= 2, got {k}")
    heights = family_heights(fam)
    if heights and max(heights.values()) >= k:
        witness = longest_chain(fam)
        return MirskyOutcome(None, Chain(witness.elements[:k]))
    layers: list[list[int]] = [[] for _ in range(k - 1)]
    for m, h in heights.items():
        layers[h - 1].append(m)
    return MirskyOutcome([SubsetFamily(fam.n, lv) for lv in layers], None)


def containment_is_strict_order(fam: SubsetFamily) -> bool:
    """Check irreflexivity and transitivity of ⊋ on `fam` (small instances)."""
    masks = list(fam.masks_by_size())
    rel = {
        (a, b)
        for a in masks
        for b in masks
        if a != b and (a & b) == b
    }
    if any((a, a) in rel for a in masks):
        return False
    for (a, b) in rel:
        for c in masks:
            if (b, c) in rel and (a, c) not in rel:
                return False
    return True
