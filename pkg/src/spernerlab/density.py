"""Exact l-chain densities and the permutation-method quantities.

The l-chain density of a member F of a family is the sum, over all chains
F = F_1 ⊋ F_2 ⊋ ... ⊋ F_l inside the family, of the product of reciprocal
binomials C(|F_{i-1}|,|F_i|)^{-1} along the steps.  Densities satisfy the
bottom-up recursion

    c_l(F) = sum over F ⊋ F' in fam of c_{l-1}(F') / C(|F|,|F'|),

which is what `DensityTable` evaluates.  All arithmetic is exact: densities
are stored as integers scaled by L^(l-1) where L is the lcm of every
binomial coefficient C(a,b) with a <= n, so each step's division by
C(|F|,|F'|) stays integral.  Floating point would break the exact
inequality checks layered on top of these values.
"""

from __future__ import annotations

import csv
from fractions import Fraction
from functools import lru_cache
from math import comb, lcm
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import DomainError
from .lattice import SubsetFamily

# values this large would overflow the vectorized int64 path
_INT64_SAFE = 1 << 62


@lru_cache(maxsize=None)
def binomial_lcm(n: int) -> int:
    """lcm of all C(a,b) with 0 <= b <= a <= n."""
    out = 1
    for a in range(n + 1):
        for b in range(a // 2 + 1):
            out = lcm(out, comb(a, b))
    return out


class DensityTable:
    """Exact chain densities c_l(F) for every member F and 1 <= l <= k_max.

    Build once per (family, k_max); immutable afterwards.  Internally keeps
    c_l(F) * L^(l-1) as exact integers (`scale(l)` returns the denominator).
    """

    def __init__(self, family: SubsetFamily, k_max: int):
        if k_max < 1:
            raise DomainError(f"k_max must be >= 1, got {k_max}")
        self.family = family
        self.k_max = k_max
        self.L = binomial_lcm(family.n)
        # _scaled[l] maps mask -> c_l(mask) * L^(l-1); level 1 is all-ones
        self._scaled: list[dict[int, int]] = [dict()]  # index 0 unused
        ones = {m: 1 for m in family.masks_by_size()}
        self._scaled.append(ones)
        for ell in range(2, k_max + 1):
            self._scaled.append(self._next_level(self._scaled[ell - 1], ell))

    def scale(self, ell: int) -> int:
        return self.L ** (ell - 1)

    def scaled_value(self, mask: int, ell: int) -> int:
        if not 1 <= ell <= self.k_max:
            raise DomainError(f"ell={ell} out of range 1..{self.k_max}")
        try:
            return self._scaled[ell][mask]
        except KeyError:
            raise DomainError(f"mask {mask:#x} not in family") from None

    def value(self, mask: int, ell: int) -> Fraction:
        return Fraction(self.scaled_value(mask, ell), self.scale(ell))

    def items(self, ell: int) -> Iterable[tuple[int, Fraction]]:
        den = self.scale(ell)
        for m, num in self._scaled[ell].items():
            yield m, Fraction(num, den)

    def _next_level(self, prev: dict[int, int], ell: int) -> dict[int, int]:
        fam = self.family
        n = fam.n
        # dense transform pays n^2 * 2^n regardless of family size; the
        # pairwise scan pays ~|fam|^2.  Pick the cheaper.
        dense_cost = (n * n) << n
        sparse_cost = fam.size * fam.size
        if sparse_cost <= dense_cost:
            return self._next_pairwise(prev)
        bound = ((n + 1) * self.L) ** (ell - 1)
        if bound < _INT64_SAFE and (1 << n) <= (n + 1) * self.L:
            return self._next_zeta_int64(prev)
        return self._next_zeta_pyint(prev)

    def _next_pairwise(self, prev: dict[int, int]) -> dict[int, int]:
        fam = self.family
        L = self.L
        out: dict[int, int] = {}
        lower: list[tuple[int, int]] = []  # (mask, prev value), by size asc
        for j in range(fam.n + 1):
            members = fam.level(j)
            for m in members:
                acc = 0
                for m2, v2 in lower:
                    if (m2 & m) == m2:
                        acc += v2 * (L // comb(j, m2.bit_count()))
                out[m] = acc
            for m in members:
                lower.append((m, prev[m]))
        return out

    def _next_zeta_int64(self, prev: dict[int, int]) -> dict[int, int]:
        fam = self.family
        n = fam.n
        size = 1 << n
        L = self.L
        # one zeta per source level; combine with exact integer weights
        zetas: list[Optional[np.ndarray]] = [None] * (n + 1)
        for j in range(n + 1):
            members = fam.level(j)
            if not members:
                continue
            v = np.zeros(size, dtype=np.int64)
            idx = np.fromiter(members, dtype=np.int64)
            v[idx] = np.fromiter((prev[m] for m in members), dtype=np.int64)
            zetas[j] = _zeta_subsets_int64(v, n)
        out: dict[int, int] = {}
        for jj in range(n + 1):
            members = fam.level(jj)
            if not members:
                continue
            idx = np.fromiter(members, dtype=np.int64)
            acc = np.zeros(len(members), dtype=np.int64)
            for j in range(jj):
                zj = zetas[j]
                if zj is None:
                    continue
                acc += zj[idx] * (L // comb(jj, j))
            for m, v in zip(members, acc.tolist()):
                out[m] = v
        return out

    def _next_zeta_pyint(self, prev: dict[int, int]) -> dict[int, int]:
        fam = self.family
        n = fam.n
        size = 1 << n
        L = self.L
        zetas: list[Optional[list[int]]] = [None] * (n + 1)
        for j in range(n + 1):
            members = fam.level(j)
            if not members:
                continue
            v = [0] * size
            for m in members:
                v[m] = prev[m]
            for b in range(n):
                step = 1 << b
                for base in range(0, size, step << 1):
                    hi = base + step
                    for i in range(hi, hi + step):
                        v[i] += v[i - step]
            zetas[j] = v
        out: dict[int, int] = {}
        for jj in range(n + 1):
            for m in fam.level(jj):
                acc = 0
                for j in range(jj):
                    zj = zetas[j]
                    if zj is not None:
                        acc += zj[m] * (L // comb(jj, j))
                out[m] = acc
        return out


def _zeta_subsets_int64(v: np.ndarray, n: int) -> np.ndarray:
    """In-place subset-sum (zeta) transform over the n-cube."""
    for b in range(n):
        w = v.reshape(-1, 2 << b)
        half = 1 << b
        w[:, half:] += w[:, :half]
    return v


@lru_cache(maxsize=64)
def density_table(family: SubsetFamily, k_max: int) -> DensityTable:
    """Memoized table per (family, k_max); families are immutable so tables are build-once."""
    return DensityTable(family, k_max)


def chain_density(mask: int, fam: SubsetFamily, ell: int) -> Fraction:
    """Exact l-chain density of `mask` within `fam` (c_1 is identically 1)."""
    if mask not in fam:
        raise DomainError(f"mask {mask:#x} not in family")
    if ell < 1:
        raise DomainError(f"ell must be >= 1, got {ell}")
    return density_table(fam, ell).value(mask, ell)


def permutation_chain_count(pi: Sequence[int], fam: SubsetFamily, ell: int) -> int:
    """Number of l-chains of `fam` whose members are all prefixes of `pi`.

    `pi` is a permutation of 1..n.  Prefix sets of a permutation are totally
    ordered, so the count equals C(s, l) where s is the number of prefixes
    (including the empty one) that belong to `fam`.
    """
    n = fam.n
    if sorted(pi) != list(range(1, n + 1)):
        raise DomainError(f"pi must be a permutation of 1..{n}")
    if ell < 1:
        raise DomainError(f"ell must be >= 1, got {ell}")
    s = 0
    mask = 0
    if mask in fam:
        s += 1
    for x in pi:
        mask |= 1 << (x - 1)
        if mask in fam:
            s += 1
    return comb(s, ell)


def binomial_gap_max(i: int, j: int) -> int:
    """max over s >= 0 of C(s,i) - C(s,j), for i < j.

    The difference is negative for every s >= 2j-1, so scanning s up to
    2j-1 is exhaustive.
    """
    if not 1 <= i < j:
        raise DomainError(f"need 1 <= i < j, got i={i}, j={j}")
    return max(comb(s, i) - comb(s, j) for s in range(0, 2 * j))


def density_gap(fam: SubsetFamily, i: int, j: int) -> Fraction:
    """Sum over F of (c_i(F) - c_j(F)) / C(n,|F|), exactly.

    Bounded above by max_s [C(s,i) - C(s,j)]; the bound is asserted.
    """
    if not 1 <= i < j:
        raise DomainError(f"need 1 <= i < j, got i={i}, j={j}")
    if fam.size == 0:
        return Fraction(0)
    table = density_table(fam, j)
    n = fam.n
    total = Fraction(0)
    for m in fam.masks_by_size():
        diff = table.value(m, i) - table.value(m, j)
        total += diff / comb(n, m.bit_count())
    bound = binomial_gap_max(i, j)
    assert total <= bound, f"density gap {total} exceeds bound {bound}"
    return total


def find_dense_vertex(
    fam: SubsetFamily, k: int, alpha: Fraction, table: DensityTable | None = None
) -> Optional[int]:
    """Member of minimal cardinality with c_k >= alpha/k (ties: smallest mask).

    Returns None when no member qualifies.  Whenever the family has at least
    (k-1+alpha) * C(n, n//2) members, a qualifying vertex exists.
    """
    if k < 2:
        raise DomainError(f"k must be >= 2, got {k}")
    alpha = Fraction(alpha)
    if not 0 < alpha <= 1:
        raise DomainError(f"alpha must satisfy 0 < alpha <= 1, got {alpha}")
    if table is None or table.k_max < k or table.family is not fam:
        table = density_table(fam, k)
    # compare k * c_k(F) >= alpha on the scaled integers to avoid Fractions
    scale = table.scale(k)
    num, den = alpha.numerator, alpha.denominator
    for m in fam.masks_by_size():
        if table.scaled_value(m, k) * k * den >= num * scale:
            return m
    return None


def dump_density_csv(table: DensityTable, path) -> None:
    """CSV with columns mask,size,ell,numerator,denominator."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["mask", "size", "ell", "numerator", "denominator"])
        for ell in range(1, table.k_max + 1):
            for m in table.family.masks_by_size():
                v = table.value(m, ell)
                w.writerow([format(m, "x"), m.bit_count(), ell, v.numerator, v.denominator])
