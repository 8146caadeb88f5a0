"""Shared generators and independent oracles for the test suite."""

import random
from fractions import Fraction
from itertools import combinations
from math import comb

import pytest

from spernerlab.lattice import Chain, SubsetFamily, middle_layers


def random_family(n, p, rng):
    return SubsetFamily(n, [m for m in range(1 << n) if rng.random() < p])


def random_chain_free(n, k, rng):
    """Random k-chain-free family: thinned union of k-1 levels near the middle."""
    ml = middle_layers(n, k)
    u = rng.uniform(0.2, 0.9)
    return SubsetFamily(n, [m for m in ml.masks_by_size() if rng.random() < u])


def is_chain(masks):
    s = sorted(masks, key=lambda m: -bin(m).count("1"))
    return all(a != b and (a & b) == b for a, b in zip(s, s[1:]))


def brute_chains(fam, k):
    """All k-chains as frozensets, by raw enumeration."""
    masks = list(fam.masks_by_size())
    return [frozenset(c) for c in combinations(masks, k) if is_chain(c)]


def direct_density(mask, fam, ell):
    """l-chain density by literal summation over enumerated chains."""
    from spernerlab.lattice import enumerate_chains

    total = Fraction(0)
    for ch in enumerate_chains(fam, ell):
        if ch[0] != mask:
            continue
        prod = Fraction(1)
        for a, b in zip(ch.elements, ch.elements[1:]):
            prod /= comb(a.bit_count(), b.bit_count())
        total += prod
    return total


@pytest.fixture
def rng():
    return random.Random(0xC0FFEE)
