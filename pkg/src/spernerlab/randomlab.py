"""Seeded random subfamilies of P(n) and the experiment harness.

Sampling is counter-based: each mask gets its own 64-bit draw computed by
mixing (seed, mask), so membership of one subset never depends on the order
in which others were examined and trials parallelize without shared state.
A mask is kept iff its draw is below floor(p * 2^64), which biases the
inclusion probability by less than 2^-64.

Draw schema (documented for reproducibility): with all arithmetic mod 2^64,

    x = (seed * 0x9E3779B97F4A7C15) XOR (mask * 0xD1342543DE82EF95)
    draw = mix(mix(x + 0x9E3779B97F4A7C15))

where mix is the splitmix64 finalizer
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    z = z ^ (z >> 31).
"""

from __future__ import annotations

import csv
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, SolverTimeout
from .lattice import SubsetFamily, middle_layers
from .solvers import max_antichain, max_k_chain_free

SCHEMA_VERSION = 1

_PHI = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_MASK_MULT = np.uint64(0xD1342543DE82EF95)


def _splitmix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def subset_draws(n: int, seed: int) -> np.ndarray:
    """The 2^n uniform 64-bit draws for (seed, mask), mask = 0..2^n-1."""
    masks = np.arange(1 << n, dtype=np.uint64)
    with np.errstate(over="ignore"):
        x = (np.uint64(seed & (2**64 - 1)) * _PHI) ^ (masks * _MASK_MULT)
        return _splitmix(_splitmix(x + _PHI))


def sample_power_set(n: int, p: Fraction, seed: int) -> SubsetFamily:
    """Each subset of [n] kept independently with probability p, given seed."""
    p = Fraction(p)
    if not 0 <= p <= 1:
        raise DomainError(f"p must be in [0,1], got {p}")
    if p == 1:
        return SubsetFamily.full(n)
    if p == 0:
        return SubsetFamily(n, ())
    threshold = (p.numerator << 64) // p.denominator
    draws = subset_draws(n, seed)
    keep = np.nonzero(draws < np.uint64(threshold))[0]
    return SubsetFamily(n, keep.tolist())


@dataclass
class TrialRecord:
    """One seeded experiment; determinism covers everything but runtime_ms."""

    n: int
    k: int
    p: Fraction
    seed: int
    sample_size: int
    opt_size: int
    ratio: float
    lb_size: int
    lb_ratio: float
    flag: str = ""
    runtime_ms: float = 0.0

    def csv_row(self) -> list:
        return [
            SCHEMA_VERSION,
            self.n,
            self.k,
            self.p.numerator,
            self.p.denominator,
            self.seed,
            self.sample_size,
            self.opt_size,
            repr(self.ratio),
            repr(self.lb_ratio),
            self.flag,
        ]


CSV_COLUMNS = [
    "schema_version",
    "n",
    "k",
    "p_num",
    "p_den",
    "seed",
    "sample_size",
    "opt_size",
    "ratio",
    "lb_ratio",
    "flag",
]


def run_trial(
    n: int, k: int, p: Fraction, seed: int, timeout_s: float = 60.0
) -> TrialRecord:
    """Sample P(n,p), solve the k-chain-free optimum exactly, record ratios.

    The lower-bound witness is (k-1 middle layers) ∩ sample - feasible by
    construction, so lb_ratio <= ratio always.  A solver timeout flags the
    record (opt falls back to the witness size) instead of dropping it.
    """
    p = Fraction(p)
    t0 = time.monotonic()
    fam = sample_power_set(n, p, seed)
    ml = middle_layers(n, k)
    lb_size = fam.intersection(ml).size
    denom = float(p * comb(n, n // 2))
    flag = ""
    deadline = t0 + timeout_s if timeout_s else None
    try:
        if fam.size == 0:
            opt = 0
        else:
            opt = max_k_chain_free(fam, k, witness=False, deadline=deadline).size
    except SolverTimeout:
        opt = lb_size
        flag = "timeout"
    ratio = (opt / denom) if denom > 0 else 0.0
    lb_ratio = (lb_size / denom) if denom > 0 else 0.0
    return TrialRecord(
        n=n,
        k=k,
        p=p,
        seed=seed,
        sample_size=fam.size,
        opt_size=opt,
        ratio=ratio,
        lb_size=lb_size,
        lb_ratio=lb_ratio,
        flag=flag,
        runtime_ms=(time.monotonic() - t0) * 1000.0,
    )


def _worker(args):
    return run_trial(*args)


def run_trials(
    n: int,
    k: int,
    p: Fraction,
    seeds: Sequence[int],
    timeout_s: float = 60.0,
    threads: int | None = None,
) -> list[TrialRecord]:
    """Run trials for each seed; results are merged in seed order.

    Worker count comes from SPERNERLAB_THREADS (default 1: fully serial).
    """
    if threads is None:
        threads = int(os.environ.get("SPERNERLAB_THREADS", "1"))
    jobs = [(n, k, Fraction(p), s, timeout_s) for s in seeds]
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(_worker, jobs))
    else:
        records = [run_trial(*j) for j in jobs]
    records.sort(key=lambda r: r.seed)
    return records


def two_layer_antichain_size(fam: SubsetFamily, k: int) -> int:
    """Certified k-chain-free construction: the exact maximum antichain of
    the sampled two middle layers, plus the next k-2 sampled layers whole."""
    n = fam.n
    m0 = n // 2
    two = SubsetFamily(n, list(fam.level(m0)) + list(fam.level(m0 + 1)))
    size = max_antichain(two).size if two.size else 0
    extra_layers = 0
    j_lo, j_hi = m0 - 1, m0 + 2
    for _ in range(k - 2):
        # take the larger remaining level, nearer the middle first
        if j_lo >= 0 and (j_hi > n or comb(n, j_lo) >= comb(n, j_hi)):
            extra_layers += len(fam.level(j_lo))
            j_lo -= 1
        elif j_hi <= n:
            extra_layers += len(fam.level(j_hi))
            j_hi += 1
    return size + extra_layers


def sparse_regime_trial(
    n: int,
    k: int,
    C: Fraction,
    seeds: Sequence[int],
    timeout_s: float = 60.0,
    threads: int | None = None,
) -> dict:
    """Trials at p = C/n with the explicit two-layer certified lower bound.

    Reports the mean exact ratio, the mean certified lower-bound ratio, and
    the theoretical target k - 1 + exp(-C/2) they are compared against.
    """
    C = Fraction(C)
    p = C / n
    if not 0 < p <= 1:
        raise DomainError(f"p = C/n = {p} out of range")
    records = run_trials(n, k, p, seeds, timeout_s, threads)
    denom = float(p * comb(n, n // 2))
    certified = []
    for seed in sorted(seeds):
        fam = sample_power_set(n, p, seed)
        certified.append(two_layer_antichain_size(fam, k) / denom)
    mean_ratio = sum(r.ratio for r in records) / len(records)
    mean_cert = sum(certified) / len(certified)
    return {
        "n": n,
        "k": k,
        "C": [C.numerator, C.denominator],
        "p": [p.numerator, p.denominator],
        "seeds": len(records),
        "mean_ratio": mean_ratio,
        "mean_certified_lb_ratio": mean_cert,
        "certified_lb_ratios": certified,
        "target": k - 1 + math.exp(-float(C) / 2),
        "records": records,
    }


def union_bound_evaluate(
    n: int, k: int, p: Fraction, epsilon: Fraction, K: Fraction
) -> tuple[float, float]:
    """Log-domain evaluation of the first-moment chain of bounds.

    Returns (summed, simplified), both natural logarithms: `summed` is the
    largest term (K*C/s)^s * e^(K*C/n) * p^s * e^(-eps^2*p*C/3) over
    1 <= s <= (K/n)*C, and `simplified` is the closed form
    (K/n)*C * exp((K*log(pn)/n)*C + (K/n)*C - (eps^2*p/3)*C).
    The simplified bound dominates at every admissible point.
    """
    p, epsilon, K = Fraction(p), Fraction(epsilon), Fraction(K)
    if not 0 < p <= 1:
        raise DomainError(f"p must be in (0,1], got {p}")
    if epsilon <= 0 or K <= 0:
        raise DomainError("epsilon and K must be positive")
    if p * n < K / epsilon:
        raise DomainError(
            f"hypothesis p*n >= K/epsilon fails: {p * n} < {K / epsilon}"
        )
    nC = comb(n, n // 2)
    s_end = int(Fraction(K, n) * nC)
    if s_end < 1:
        raise DomainError("range of s is empty: (K/n)*C(n,n//2) < 1")
    logp = math.log(float(p)) if p < 1 else 0.0
    logKC = math.log(float(K)) + math.log(nC)
    tail = float(K) * nC / n - float(epsilon) ** 2 * float(p) * nC / 3

    def logterm(s: int) -> float:
        return s * (logKC - math.log(s) + logp) + tail

    # the term is unimodal with peak at K*C*p/e; bracket it with endpoints
    peak = int(float(K) * nC * float(p) / math.e)
    cands = {1, s_end}
    for s in (peak - 1, peak, peak + 1):
        if 1 <= s <= s_end:
            cands.add(s)
    summed = max(logterm(s) for s in cands)
    simplified = (
        math.log(float(K) * nC / n)
        + (float(K) * math.log(float(p) * n) / n) * nC
        + float(K) * nC / n
        - (float(epsilon) ** 2 * float(p) / 3) * nC
    )
    assert summed <= simplified + 1e-12, (summed, simplified)
    return summed, simplified


def export(records: Iterable[TrialRecord], path, fmt: str) -> None:
    """Write records as CSV or JSON with a schema-version header; byte-stable."""
    records = list(records)
    if fmt == "csv":
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_COLUMNS)
            for r in records:
                w.writerow(r.csv_row())
    elif fmt == "json":
        doc = {
            "schema_version": SCHEMA_VERSION,
            "records": [
                {
                    "n": r.n,
                    "k": r.k,
                    "p_num": r.p.numerator,
                    "p_den": r.p.denominator,
                    "seed": r.seed,
                    "sample_size": r.sample_size,
                    "opt_size": r.opt_size,
                    "ratio": r.ratio,
                    "lb_ratio": r.lb_ratio,
                    "flag": r.flag,
                }
                for r in records
            ],
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
    else:
        raise DomainError(f"unknown export format {fmt!r}")


def read_records_json(path) -> list[TrialRecord]:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    out = []
    for r in doc["records"]:
        p = Fraction(r["p_num"], r["p_den"])
        out.append(
            TrialRecord(
                n=r["n"],
                k=r["k"],
                p=p,
                seed=r["seed"],
                sample_size=r["sample_size"],
                opt_size=r["opt_size"],
                ratio=r["ratio"],
                lb_size=0,
                lb_ratio=r["lb_ratio"],
                flag=r["flag"],
            )
        )
    return out
