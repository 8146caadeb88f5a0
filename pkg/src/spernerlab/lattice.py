"""Boolean lattice P(n): subsets as bitmasks, families, and k-chain enumeration.

A subset of {1,...,n} is encoded as an n-bit mask (bit i-1 set iff i is in
the subset).  A family of subsets is a `SubsetFamily`: an immutable bitset
over the 2^n positions plus a per-cardinality index.  All chain operations
orient chains top-down (largest set first), and every enumeration order in
this module is deterministic so that downstream constructions are
reproducible bit for bit.

n is capped at 30 (bitset memory); experiments in this package target n <= 20.
"""

from __future__ import annotations

from math import comb
from typing import Iterable, Iterator, Sequence

from .errors import DomainError

N_CAP = 30

# A SubsetId is a plain int bitmask; the ambient n travels alongside it
# (usually inside a SubsetFamily).
SubsetId = int


def subset_size(mask: SubsetId) -> int:
    """Cardinality of the subset encoded by `mask`."""
    return mask.bit_count()


def is_strict_superset(a: SubsetId, b: SubsetId) -> bool:
    """True iff a ⊋ b as subsets."""
    return a != b and (a & b) == b


def level_size(n: int, j: int) -> int:
    """Number of j-element subsets of an n-set, exactly.

    Raises DomainError for j outside 0..n.
    """
    if not 0 <= n <= N_CAP:
        raise DomainError(f"n={n} out of supported range 0..{N_CAP}")
    if not 0 <= j <= n:
        raise DomainError(f"level j={j} out of range 0..{n}")
    return comb(n, j)


class Chain:
    """A strict chain F_1 ⊋ F_2 ⊋ ... ⊋ F_l of subsets, largest first."""

    __slots__ = ("elements",)

    def __init__(self, elements: Sequence[SubsetId]):
        elements = tuple(elements)
        for a, b in zip(elements, elements[1:]):
            if not is_strict_superset(a, b):
                raise DomainError(
                    f"chain elements must strictly decrease: {a:#x} !⊋ {b:#x}"
                )
        self.elements = elements

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self) -> Iterator[SubsetId]:
        return iter(self.elements)

    def __getitem__(self, i):
        return self.elements[i]

    def __eq__(self, other) -> bool:
        return isinstance(other, Chain) and self.elements == other.elements

    def __hash__(self) -> int:
        return hash(self.elements)

    def __repr__(self) -> str:
        return "Chain(%s)" % " > ".join(format(m, "x") for m in self.elements)


class SubsetFamily:
    """Immutable family of subsets of {1,...,n}.

    Membership lives in a flat bitset over all 2^n masks (O(1) lookups via a
    bytes buffer), and `levels[j]` lists the members of cardinality j in
    ascending mask order.  Instances are value-like: hashable, comparable,
    and safe to share between workers.
    """

    __slots__ = ("n", "size", "_bits", "_bytes", "_levels")

    def __init__(self, n: int, masks: Iterable[SubsetId] = ()):
        if not 1 <= n <= N_CAP:
            raise DomainError(f"n={n} out of supported range 1..{N_CAP}")
        self.n = n
        bits = 0
        for m in masks:
            if not 0 <= m < (1 << n):
                raise DomainError(f"mask {m:#x} out of range for n={n}")
            bits |= 1 << m
        self._bits = bits
        nbytes = ((1 << n) + 7) // 8
        self._bytes = bits.to_bytes(nbytes, "little")
        levels: list[list[int]] = [[] for _ in range(n + 1)]
        x = bits
        while x:
            lsb = x & -x
            m = lsb.bit_length() - 1
            levels[m.bit_count()].append(m)
            x ^= lsb
        self._levels = tuple(tuple(lv) for lv in levels)
        self.size = sum(len(lv) for lv in self._levels)

    @classmethod
    def _from_bits(cls, n: int, bits: int) -> "SubsetFamily":
        fam = cls.__new__(cls)
        fam.n = n
        fam._bits = bits
        nbytes = ((1 << n) + 7) // 8
        fam._bytes = bits.to_bytes(nbytes, "little")
        levels: list[list[int]] = [[] for _ in range(n + 1)]
        x = bits
        while x:
            lsb = x & -x
            m = lsb.bit_length() - 1
            levels[m.bit_count()].append(m)
            x ^= lsb
        fam._levels = tuple(tuple(lv) for lv in levels)
        fam.size = sum(len(lv) for lv in fam._levels)
        return fam

    @classmethod
    def full(cls, n: int) -> "SubsetFamily":
        """The whole power set P(n)."""
        if not 1 <= n <= N_CAP:
            raise DomainError(f"n={n} out of supported range 1..{N_CAP}")
        return cls._from_bits(n, (1 << (1 << n)) - 1)

    @property
    def levels(self) -> tuple[tuple[int, ...], ...]:
        return self._levels

    def level(self, j: int) -> tuple[int, ...]:
        return self._levels[j]

    def __contains__(self, mask: SubsetId) -> bool:
        if not 0 <= mask < (1 << self.n):
            return False
        return (self._bytes[mask >> 3] >> (mask & 7)) & 1 == 1

    def __len__(self) -> int:
        return self.size

    def __iter__(self) -> Iterator[SubsetId]:
        """Members in ascending mask order."""
        for m in sorted(self.masks_by_size()):
            yield m

    def masks_by_size(self) -> Iterator[SubsetId]:
        """Members ordered by (cardinality ascending, mask ascending)."""
        for lv in self._levels:
            yield from lv

    def masks_top_down(self) -> Iterator[SubsetId]:
        """Members ordered by (cardinality descending, mask ascending)."""
        for lv in reversed(self._levels):
            yield from lv

    def union(self, other: "SubsetFamily") -> "SubsetFamily":
        self._check_ambient(other)
        return SubsetFamily._from_bits(self.n, self._bits | other._bits)

    def difference(self, other: "SubsetFamily") -> "SubsetFamily":
        self._check_ambient(other)
        return SubsetFamily._from_bits(self.n, self._bits & ~other._bits)

    def intersection(self, other: "SubsetFamily") -> "SubsetFamily":
        self._check_ambient(other)
        return SubsetFamily._from_bits(self.n, self._bits & other._bits)

    def without_masks(self, masks: Iterable[SubsetId]) -> "SubsetFamily":
        bits = self._bits
        for m in masks:
            bits &= ~(1 << m)
        return SubsetFamily._from_bits(self.n, bits)

    def issubset(self, other: "SubsetFamily") -> bool:
        self._check_ambient(other)
        return self._bits & ~other._bits == 0

    def isdisjoint(self, other: "SubsetFamily") -> bool:
        self._check_ambient(other)
        return self._bits & other._bits == 0

    def restrict_min_size(self, t: int) -> "SubsetFamily":
        """Members of cardinality >= t."""
        keep = 0
        for j in range(max(t, 0), self.n + 1):
            for m in self._levels[j]:
                keep |= 1 << m
        return SubsetFamily._from_bits(self.n, keep)

    def _check_ambient(self, other: "SubsetFamily") -> None:
        if self.n != other.n:
            raise DomainError(f"ambient mismatch: n={self.n} vs n={other.n}")

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SubsetFamily)
            and self.n == other.n
            and self._bits == other._bits
        )

    def __hash__(self) -> int:
        return hash((self.n, self._bits))

    def __repr__(self) -> str:
        return f"SubsetFamily(n={self.n}, size={self.size})"


def middle_layers(n: int, k: int) -> SubsetFamily:
    """The k-1 largest levels of P(n); contains no k-chain.

    Ties between equal-sized levels are broken toward the level nearer
    ceil(n/2), and between equidistant levels the lower one wins.
    """
    if not 1 <= k - 1 <= n + 1:
        raise DomainError(f"need 1 <= k-1 <= n+1, got k={k}, n={n}")
    center = (n + 1) // 2
    order = sorted(range(n + 1), key=lambda j: (-comb(n, j), abs(j - center), j))
    chosen = sorted(order[: k - 1])
    masks: list[int] = []
    for j in chosen:
        masks.extend(_masks_of_size(n, j))
    return SubsetFamily(n, masks)


def _masks_of_size(n: int, j: int) -> Iterator[int]:
    """All n-bit masks of popcount j, ascending (Gosper's hack)."""
    if j == 0:
        yield 0
        return
    m = (1 << j) - 1
    top = 1 << n
    while m < top:
        yield m
        c = m & -m
        r = m + c
        m = (((r ^ m) >> 2) // c) | r


def count_k_chains(fam: SubsetFamily, k: int) -> int:
    """Number of k-element subsets of `fam` forming a chain, exactly.

    Computed by a level-by-level subset-sum transform: tops[m] counts
    l-chains whose largest element is m.
    """
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    if k == 1:
        return fam.size
    n = fam.n
    size = 1 << n
    # counts[m] = number of (l)-chains with top element m, for current l
    counts = [0] * size
    for m in fam.masks_by_size():
        counts[m] = 1
    total = 0
    for _ in range(k - 1):
        # zeta transform per level: acc[m] = sum of counts over subsets of m,
        # split by level so strictness (|F'| < |F|) can be enforced.
        acc = _subset_zeta_by_level(counts, fam)
        counts = acc
        for v in counts:
            if v:
                break
        else:
            return 0
    for m in fam.masks_by_size():
        total += counts[m]
    return total


def _subset_zeta_by_level(values: list[int], fam: SubsetFamily) -> list[int]:
    """next[m] = sum of values[m'] over fam members m' ⊊ m, for m in fam.

    Strictness comes from summing only levels below |m|: a subset of m with
    fewer elements is automatically a strict subset.
    """
    n = fam.n
    size = 1 << n
    out = [0] * size
    running = [0] * size  # zeta of all levels processed so far
    for j in range(n + 1):
        members = fam.level(j)
        # read off level j from `running` before folding level j in, so only
        # strictly smaller members contribute
        for m in members:
            out[m] = running[m]
        if members:
            lv = [0] * size
            for m in members:
                lv[m] = values[m]
            for b in range(n):
                step = 1 << b
                for base in range(0, size, step << 1):
                    hi = base + step
                    for i in range(hi, hi + step):
                        lv[i] += lv[i - step]
            for i in range(size):
                if lv[i]:
                    running[i] += lv[i]
    return out


def enumerate_chains(fam: SubsetFamily, k: int) -> Iterator[Chain]:
    """Yield every k-chain of `fam` exactly once, top element first.

    Deterministic order: chains compare lexicographically by successive
    elements under the key (cardinality descending, mask ascending).
    """
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    members_desc = list(fam.masks_top_down())
    prefix: list[int] = []

    def extend(below_of: int | None, depth: int) -> Iterator[Chain]:
        if depth == k:
            yield Chain(tuple(prefix))
            return
        for m in members_desc:
            if below_of is not None and not is_strict_superset(below_of, m):
                continue
            prefix.append(m)
            yield from extend(m, depth + 1)
            prefix.pop()

    yield from extend(None, 0)


def family_heights(fam: SubsetFamily) -> dict[int, int]:
    """Longest-chain height ending at each member (height of a minimal member is 1)."""
    heights: dict[int, int] = {}
    for m in fam.masks_by_size():
        best = 0
        sz = m.bit_count()
        for j in range(sz):
            for m2 in fam.level(j):
                if (m2 & m) == m2:
                    h = heights[m2]
                    if h > best:
                        best = h
        heights[m] = best + 1
    return heights


def longest_chain(fam: SubsetFamily) -> Chain:
    """One maximum-length chain of `fam` (deterministic)."""
    heights = family_heights(fam)
    if not heights:
        return Chain(())
    # walk down from the element of maximum height
    top = min(
        (m for m in fam.masks_by_size()),
        key=lambda m: (-heights[m], -m.bit_count(), m),
    )
    out = [top]
    cur = top
    while heights[cur] > 1:
        want = heights[cur] - 1
        nxt = None
        for j in range(cur.bit_count() - 1, -1, -1):
            for m2 in fam.level(j):
                if (m2 & cur) == m2 and heights[m2] == want:
                    nxt = m2
                    break
            if nxt is not None:
                break
        assert nxt is not None
        out.append(nxt)
        cur = nxt
    return Chain(out)


def has_k_chain(fam: SubsetFamily, k: int) -> bool:
    """True iff `fam` contains a chain of k distinct members."""
    if k <= 1:
        return fam.size >= k
    heights = family_heights(fam)
    return bool(heights) and max(heights.values()) >= k


def write_family(fam: SubsetFamily, path) -> None:
    """Write the interchange format: `n=<int>` then one lowercase-hex mask per line, ascending."""
    lines = [f"n={fam.n}"]
    lines.extend(format(m, "x") for m in sorted(fam.masks_by_size()))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_family(path) -> SubsetFamily:
    """Read the interchange format written by `write_family`.

    Blank lines are ignored; masks must be sorted ascending.
    """
    with open(path, "r", encoding="utf-8") as fh:
        raw = [ln.strip() for ln in fh]
    lines = [ln for ln in raw if ln]
    if not lines or not lines[0].startswith("n="):
        raise DomainError(f"{path}: first line must be 'n=<int>'")
    try:
        n = int(lines[0][2:])
    except ValueError as exc:
        raise DomainError(f"{path}: bad ground-set size {lines[0]!r}") from exc
    masks = []
    prev = -1
    for ln in lines[1:]:
        try:
            m = int(ln, 16)
        except ValueError as exc:
            raise DomainError(f"{path}: bad hex mask {ln!r}") from exc
        if m <= prev:
            raise DomainError(f"{path}: masks must be sorted ascending ({ln!r})")
        prev = m
        masks.append(m)
    return SubsetFamily(n, masks)
