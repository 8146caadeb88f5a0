"""Greedy construction of balanced k-chain hypergraphs.

Given a family with at least (k-1+alpha) * C(n, n//2) members, the builder
grows an edge set of k-chains one edge at a time, subject to hard codegree
caps: a vertex set A with 1 <= |A| <= k may lie in at most
floor((delta*m)^(k-|A|)) edges.  A set that reaches its cap is *saturated*;
a chain is *bad* if some subfamily of its elements is saturated and *good*
otherwise.  Each round locates a member of minimal cardinality whose
k-chain density clears alpha/k and searches depth-first below it for a good
chain, pruning any prefix that has already gone bad.

The caps guarantee the balance conclusion by construction; whether the
edge-count target ceil(delta^k * m^(k-1) * C(n, n//2)) is reached is
reported as a flag, and `calibrate_balanced_hypergraph` binary-searches a
delta grid for the largest value that still meets it.

Saturated singletons are removed from the working family as they appear
(adjusting alpha by the removed fraction); the density table is rebuilt
lazily, when a full scan with the current table comes up empty, so that an
"absent" verdict is always made against fresh densities.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import ceil, comb
from typing import Iterable, Optional

from .density import DensityTable
from .errors import ContractError, DomainError
from .lattice import Chain, SubsetFamily

__all__ = [
    "SaturationLedger",
    "ChainHypergraph",
    "ChainClass",
    "is_saturated",
    "classify_chain",
    "find_good_edge",
    "build_balanced_hypergraph",
    "calibrate_balanced_hypergraph",
    "default_delta_grid",
    "max_codegree",
    "min_comparable_binomial",
    "edge_count_target",
    "dump_hypergraph",
    "load_hypergraph",
]


class SaturationLedger:
    """Codegree bookkeeping for the growing hypergraph.

    Tracks d(A) for every vertex set A (1 <= |A| <= k) with positive degree,
    keyed by the sorted mask tuple, together with the caps
    cap(l) = floor((delta*m)^(k-l)).  cap(k) = 1 makes edges simple.
    """

    def __init__(self, k: int, delta: Fraction, chain_param_m: Fraction):
        if k < 2:
            raise DomainError(f"k must be >= 2, got {k}")
        self.k = k
        self.delta = Fraction(delta)
        self.chain_param_m = Fraction(chain_param_m)
        dm = self.delta * self.chain_param_m
        # caps[l] for l = 0..k; index 0 unused
        self.caps = [0] * (k + 1)
        for ell in range(1, k + 1):
            self.caps[ell] = int(dm ** (k - ell))  # Fraction ** int is exact; int() floors toward 0 for >= 0
        self.degrees: dict[tuple[int, ...], int] = {}
        self.max_degree = [0] * (k + 1)
        self.edge_count = 0

    def cap(self, ell: int) -> int:
        if not 1 <= ell <= self.k:
            raise DomainError(f"|A|={ell} out of range 1..{self.k}")
        return self.caps[ell]

    def degree(self, key: tuple[int, ...]) -> int:
        return self.degrees.get(key, 0)

    def add_edge(self, masks: tuple[int, ...]) -> list[int]:
        """Record one edge; returns singletons that just saturated."""
        newly_saturated = []
        for r in range(1, self.k + 1):
            cap = self.caps[r]
            for sub in combinations(masks, r):
                key = tuple(sorted(sub))
                d = self.degrees.get(key, 0) + 1
                if d > cap:
                    raise ContractError(
                        f"codegree cap violated: d({key}) = {d} > {cap}"
                    )
                self.degrees[key] = d
                if d > self.max_degree[r]:
                    self.max_degree[r] = d
                if r == 1 and d == cap:
                    newly_saturated.append(key[0])
        self.edge_count += 1
        return newly_saturated


def is_saturated(A: Iterable[int], ledger: SaturationLedger) -> bool:
    """True iff the vertex set A has hit its codegree cap."""
    key = tuple(sorted(set(A)))
    if not 1 <= len(key) <= ledger.k:
        raise DomainError(f"|A|={len(key)} out of range 1..{ledger.k}")
    return ledger.degree(key) == ledger.cap(len(key))


@dataclass(frozen=True)
class ChainClass:
    good: bool
    critical_prefix: Optional[int]  # None when good, or when the top vertex alone is saturated


def classify_chain(ch: Chain, ledger: SaturationLedger) -> ChainClass:
    """Good iff no subfamily of the chain's element set is saturated.

    A bad chain is reported with the unique l such that the first l elements
    are a good family but the first l+1 are not; the degenerate case of a
    saturated top vertex has no such l and yields critical_prefix None.
    """
    elems = ch.elements
    if len(elems) > ledger.k:
        raise DomainError(f"chain of length {len(elems)} exceeds k={ledger.k}")
    good_prefix = 0
    for t in range(1, len(elems) + 1):
        # the prefix {F_1..F_t} is good iff all its subfamilies are unsaturated;
        # given the shorter prefix was good, only subsets containing F_t are new
        new = elems[t - 1]
        bad = False
        for r in range(0, t):
            for sub in combinations(elems[: t - 1], r):
                if is_saturated(sub + (new,), ledger):
                    bad = True
                    break
            if bad:
                break
        if bad:
            return ChainClass(False, good_prefix if good_prefix >= 1 else None)
        good_prefix = t
    return ChainClass(True, None)


class ChainHypergraph:
    """k-uniform hypergraph of chains over a family, with its ledger."""

    def __init__(self, family: SubsetFamily, k: int, delta: Fraction, m: Fraction):
        self.family = family
        self.k = k
        self.edges: list[Chain] = []
        self.ledger = SaturationLedger(k, delta, m)
        self.removed: set[int] = set()  # saturated singletons taken out of the working family
        self.target_met = False

    @property
    def delta(self) -> Fraction:
        return self.ledger.delta

    @property
    def m(self) -> Fraction:
        return self.ledger.chain_param_m

    def edge_count(self) -> int:
        return len(self.edges)

    def working_family(self) -> SubsetFamily:
        if not self.removed:
            return self.family
        return self.family.without_masks(self.removed)

    def add_edge(self, ch: Chain) -> None:
        if len(ch) != self.k:
            raise DomainError(f"edge must be a {self.k}-chain")
        for m in ch:
            if m not in self.family:
                raise DomainError(f"edge vertex {m:#x} not in family")
        newly = self.ledger.add_edge(ch.elements)
        self.edges.append(ch)
        self.removed.update(newly)

    def recount_degrees(self) -> dict[tuple[int, ...], int]:
        """Independent degree recount from the edge list."""
        out: dict[tuple[int, ...], int] = {}
        for ch in self.edges:
            for r in range(1, self.k + 1):
                for sub in combinations(ch.elements, r):
                    key = tuple(sorted(sub))
                    out[key] = out.get(key, 0) + 1
        return out


def max_codegree(H: ChainHypergraph, ell: int) -> int:
    """Delta_l(H) from the ledger (recount available via H.recount_degrees)."""
    if not 1 <= ell <= H.k:
        raise DomainError(f"ell={ell} out of range 1..{H.k}")
    return H.ledger.max_degree[ell]


def edge_count_target(n: int, k: int, delta: Fraction, m: Fraction) -> int:
    """ceil(delta^k * m^(k-1) * C(n, n//2))."""
    x = Fraction(delta) ** k * Fraction(m) ** (k - 1) * comb(n, n // 2)
    return ceil(x)


def min_comparable_binomial(fam: SubsetFamily) -> Optional[int]:
    """min C(|F|,|G|) over comparable pairs F ⊋ G in fam, or None if an antichain.

    Levelwise superset-closure on the 2^n-bit membership bitmap: cheap even
    for large families.
    """
    n = fam.n
    size = 1 << n
    level_bits = []
    for j in range(n + 1):
        b = 0
        for m in fam.level(j):
            b |= 1 << m
        level_bits.append(b)
    full = (1 << size) - 1
    # without_bit[b] marks the mask-positions whose mask lacks element b
    without_bit = []
    for b in range(n):
        pattern = (1 << (1 << b)) - 1  # ones in [0, 2^b)
        width = 1 << (b + 1)
        while width < size:
            pattern |= pattern << width
            width <<= 1
        without_bit.append(pattern)
    best: Optional[int] = None
    for j in range(n + 1):
        if not level_bits[j]:
            continue
        reach = level_bits[j]
        for b in range(n):
            reach |= (reach & without_bit[b]) << (1 << b)
        reach &= full
        for jj in range(j + 1, n + 1):
            if level_bits[jj] and (level_bits[jj] & reach):
                c = comb(jj, j)
                if best is None or c < best:
                    best = c
    return best


class _GoodEdgeSearcher:
    """Stateful depth-first search for good edges over one build.

    Keeps (a) a density table over the current working family with the list
    of qualifying top vertices, (b) per-vertex lists of present subsets, and
    (c) resume pointers: a candidate that failed is skipped forever, which
    is sound because saturation only grows.

    search_order "proof" scans tops by minimal cardinality and extensions by
    descending size (the density argument's orientation); "span" scans tops
    from the lattice top and extensions from the bottom, producing edges
    that hug the extremes first - the container pipeline wants that, so its
    sweeps reach mid-lattice vertices as late as possible.
    """

    def __init__(self, H: ChainHypergraph, alpha: Fraction, search_order: str = "proof"):
        if search_order not in ("proof", "span"):
            raise DomainError(f"unknown search_order {search_order!r}")
        self.H = H
        self.alpha = Fraction(alpha)
        self.search_order = search_order
        self.n = H.family.n
        self.nC = comb(self.n, self.n // 2)
        self._subsets: dict[int, list[int]] = {}
        self._ptr: dict[tuple[int, ...], int] = {}
        self._built_removed = -1  # size of removed set at last table build
        self._qualifying: list[int] = []
        self._q_ptr = 0

    # -- density table handling

    def alpha_eff(self) -> Fraction:
        return self.alpha - Fraction(len(self.H.removed), self.nC)

    def _refresh(self) -> bool:
        """Rebuild densities over the current working family; False if alpha ran out."""
        a = self.alpha_eff()
        if a <= 0:
            return False
        a = min(a, Fraction(1))
        work = self.H.working_family()
        table = DensityTable(work, self.H.k)
        k = self.H.k
        scale = table.scale(k)
        num, den = a.numerator, a.denominator
        tops = (
            work.masks_by_size()
            if self.search_order == "proof"
            else work.masks_top_down()
        )
        self._qualifying = [
            m for m in tops if table.scaled_value(m, k) * k * den >= num * scale
        ]
        self._q_ptr = 0
        self._built_removed = len(self.H.removed)
        return True

    def _subs(self, mask: int) -> list[int]:
        got = self._subsets.get(mask)
        if got is None:
            fam = self.H.family
            got = []
            s = (mask - 1) & mask
            while True:
                if s in fam:
                    got.append(s)
                if s == 0:
                    break
                s = (s - 1) & mask
            if self.search_order == "proof":
                got.sort(key=lambda x: (-x.bit_count(), x))
            else:
                got.sort(key=lambda x: (x.bit_count(), x))
            self._subsets[mask] = got
        return got

    # -- goodness checks against the live ledger

    def _vertex_ok(self, m: int) -> bool:
        led = self.H.ledger
        return m not in self.H.removed and led.degree((m,)) < led.caps[1]

    def _extension_ok(self, prefix: tuple[int, ...], m: int) -> bool:
        """All subfamilies containing m within prefix+{m} unsaturated."""
        led = self.H.ledger
        caps = led.caps
        deg = led.degrees
        for r in range(0, len(prefix) + 1):
            for sub in combinations(prefix, r):
                key = tuple(sorted(sub + (m,)))
                if deg.get(key, 0) >= caps[len(key)]:
                    return False
        return True

    def _dfs(self, prefix: tuple[int, ...]) -> Optional[tuple[int, ...]]:
        k = self.H.k
        last = prefix[-1]
        subs = self._subs(last)
        ptr = self._ptr.get(prefix, 0)
        while ptr < len(subs):
            cand = subs[ptr]
            if not self._vertex_ok(cand) or not self._extension_ok(prefix, cand):
                ptr += 1
                continue
            ext = prefix + (cand,)
            if len(ext) == k:
                self._ptr[prefix] = ptr  # resume here; more edges may fit
                return ext
            got = self._dfs(ext)
            if got is not None:
                self._ptr[prefix] = ptr
                return got
            ptr += 1  # subtree exhausted for good; saturation is monotone
        self._ptr[prefix] = ptr
        return None

    def next_good_edge(self) -> Optional[Chain]:
        if self._built_removed < 0 and not self._refresh():
            return None
        while True:
            while self._q_ptr < len(self._qualifying):
                top = self._qualifying[self._q_ptr]
                if not self._vertex_ok(top):
                    self._q_ptr += 1
                    continue
                got = self._dfs((top,))
                if got is not None:
                    return Chain(got)
                self._q_ptr += 1
            # scan exhausted: retry on a fresh table if the family changed
            if len(self.H.removed) == self._built_removed:
                return None
            if not self._refresh():
                return None


def _check_build_preconditions(
    fam: SubsetFamily, k: int, delta: Fraction, m: Fraction, alpha: Fraction
) -> None:
    n = fam.n
    nC = comb(n, n // 2)
    if not 0 < alpha:
        raise DomainError(f"alpha must be positive, got {alpha}")
    if fam.size < (k - 1 + alpha) * nC:
        raise ContractError(
            f"family too small: |F| = {fam.size} < (k-1+alpha)*C(n,n//2) = "
            f"{(k - 1 + alpha) * nC}"
        )
    if delta <= 0 or m <= 0:
        raise DomainError("delta and m must be positive")
    if Fraction(1) / delta > m:
        raise ContractError(f"need delta^-1 <= m: 1/{delta} > {m}")
    minb = min_comparable_binomial(fam)
    if minb is None:
        raise ContractError("family is an antichain: no chains to build from")
    if m > minb:
        raise ContractError(
            f"need m <= C(|F|,|G|) for all comparable pairs: m = {m} > {minb}"
        )


def find_good_edge(H: ChainHypergraph, alpha: Fraction) -> Optional[Chain]:
    """One-shot search for a good k-chain not yet in H (fresh densities).

    The family-size precondition applies to the family as supplied; once
    saturation-driven removals have eaten the alpha slack the search is
    simply exhausted (None), not an error.  The standing hypotheses (edge
    budget and codegree caps) are asserted before searching.
    """
    alpha = Fraction(alpha)
    nC = comb(H.family.n, H.family.n // 2)
    if H.family.size < (H.k - 1 + alpha) * nC:
        raise ContractError(
            f"family too small: {H.family.size} < (k-1+alpha)*C = "
            f"{(H.k - 1 + alpha) * nC}"
        )
    budget = Fraction(H.delta) ** H.k * Fraction(H.m) ** (H.k - 1) * nC
    if H.edge_count() > budget:
        raise ContractError(f"edge budget exceeded: e(H) = {H.edge_count()} > {budget}")
    for ell in range(1, H.k + 1):
        cap = (H.delta * H.m) ** (H.k - ell)
        if H.ledger.max_degree[ell] > cap:
            raise ContractError(f"Delta_{ell} = {H.ledger.max_degree[ell]} > {cap}")
    return _GoodEdgeSearcher(H, alpha).next_good_edge()


def build_balanced_hypergraph(
    fam: SubsetFamily,
    k: int,
    delta: Fraction,
    m: Fraction,
    alpha: Fraction,
    search_order: str = "proof",
    edge_target: int | None = None,
) -> ChainHypergraph:
    """Grow H edge-by-edge until the edge target is met or no good edge remains.

    The codegree caps hold by construction regardless; `target_met` records
    whether e(H) reached the target - ceil(delta^k m^(k-1) C(n,n//2)) by
    default, or `edge_target` when the caller wants a smaller hypergraph.
    """
    delta, m, alpha = Fraction(delta), Fraction(m), Fraction(alpha)
    _check_build_preconditions(fam, k, delta, m, alpha)
    H = ChainHypergraph(fam, k, delta, m)
    target = edge_count_target(fam.n, k, delta, m)
    if edge_target is not None:
        target = min(target, edge_target)
    # quick infeasibility check against the vertex-degree cap
    if k * target > fam.size * H.ledger.caps[1]:
        H.target_met = False
        return H
    searcher = _GoodEdgeSearcher(H, alpha, search_order)
    while H.edge_count() < target:
        edge = searcher.next_good_edge()
        if edge is None:
            break
        H.add_edge(edge)
    H.target_met = H.edge_count() >= target
    return H


def default_delta_grid(m: Fraction) -> tuple[Fraction, ...]:
    """Powers of two times 1/m, clipped to (0, 1]."""
    lo = Fraction(1) / Fraction(m)
    if lo > 1:
        raise DomainError(f"m = {m} < 1 admits no valid delta")
    grid = []
    d = lo
    while d < 1:
        grid.append(d)
        d = d * 2
    grid.append(Fraction(1))
    return tuple(dict.fromkeys(grid))


def calibrate_balanced_hypergraph(
    fam: SubsetFamily,
    k: int,
    m: Fraction,
    alpha: Fraction,
    grid: tuple[Fraction, ...] | None = None,
    search_order: str = "proof",
    edge_target: int | None = None,
) -> tuple[ChainHypergraph, Fraction]:
    """Binary-search the delta grid for the largest value meeting the target.

    Returns (H, delta) for the best success; if every grid point fails, the
    attempt with the most edges is returned (its target_met stays False).
    """
    m = Fraction(m)
    if grid is None:
        grid = default_delta_grid(m)
    grid = tuple(sorted(set(Fraction(g) for g in grid)))
    results: dict[Fraction, ChainHypergraph] = {}

    def attempt(d: Fraction) -> ChainHypergraph:
        if d not in results:
            results[d] = build_balanced_hypergraph(
                fam, k, d, m, alpha, search_order, edge_target
            )
        return results[d]

    lo, hi = 0, len(grid) - 1
    best: Optional[tuple[Fraction, ChainHypergraph]] = None
    while lo <= hi:
        mid = (lo + hi + 1) // 2
        H = attempt(grid[mid])
        if H.target_met:
            best = (grid[mid], H)
            lo = mid + 1
        else:
            hi = mid - 1
        if lo > hi:
            break
    if best is not None:
        return best[1], best[0]
    fallback = max(results.items(), key=lambda kv: (kv[1].edge_count(), kv[0]))
    return fallback[1], fallback[0]


def dump_hypergraph(H: ChainHypergraph, path) -> None:
    """Text dump: header `n k delta_num/delta_den m_num/m_den`, one edge per line."""
    d, m = H.delta, H.m
    lines = [f"{H.family.n} {H.k} {d.numerator}/{d.denominator} {m.numerator}/{m.denominator}"]
    for ch in H.edges:
        lines.append(" ".join(format(v, "x") for v in ch.elements))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_hypergraph(path, family: SubsetFamily | None = None) -> ChainHypergraph:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    head = lines[0].split()
    n, k = int(head[0]), int(head[1])
    dn, dd = head[2].split("/")
    mn, md = head[3].split("/")
    delta = Fraction(int(dn), int(dd))
    m = Fraction(int(mn), int(md))
    edges = []
    verts = set()
    for ln in lines[1:]:
        masks = tuple(int(x, 16) for x in ln.split())
        edges.append(masks)
        verts.update(masks)
    if family is None:
        family = SubsetFamily(n, verts)
    H = ChainHypergraph(family, k, delta, m)
    for masks in edges:
        H.add_edge(Chain(masks))
    return H
