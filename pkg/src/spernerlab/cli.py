"""Command-line entry point: one subcommand per module.

Numeric rationals are written `a/b`, plain integers, or symbolically `n/3`
(resolved against --n).  Seed lists are `a..b` (inclusive), comma lists, or
single integers.  A JSON config file supplies defaults; explicit flags win,
and the fully resolved configuration is echoed to stderr for provenance.
All randomness flows from --seeds; exit status 0 means every runtime
assertion in the dispatched module passed.  Worker count for experiment
batches is capped by SPERNERLAB_THREADS (default 1).
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from . import containers as ct
from . import density as dn
from . import randomlab as rl
from . import solvers as sv
from . import supersat as ss
from .errors import DomainError, SpernerlabError
from .lattice import SubsetFamily, read_family, write_family


def parse_rational(text: str, n: Optional[int] = None) -> Fraction:
    text = str(text).strip()
    m = re.fullmatch(r"(\d+)\s*/\s*(\d+)", text)
    if m:
        return Fraction(int(m.group(1)), int(m.group(2)))
    m = re.fullmatch(r"n\s*/\s*(\d+)", text)
    if m:
        if n is None:
            raise DomainError(f"symbolic rational {text!r} needs --n")
        return Fraction(n, int(m.group(1)))
    m = re.fullmatch(r"\d+", text)
    if m:
        return Fraction(int(text))
    raise DomainError(f"bad rational {text!r}: use a/b, an integer, or n/3")


def parse_seeds(text: str) -> list[int]:
    text = str(text).strip()
    m = re.fullmatch(r"(-?\d+)\s*\.\.\s*(-?\d+)", text)
    if m:
        lo, hi = int(m.group(1)), int(m.group(2))
        if hi < lo:
            raise DomainError(f"empty seed range {text!r}")
        return list(range(lo, hi + 1))
    if "," in text:
        return [int(x) for x in text.split(",")]
    return [int(text)]


@dataclass
class RunConfig:
    """Fully resolved invocation; numeric fields already validated."""

    subcommand: str
    values: dict = field(default_factory=dict)

    def echo(self) -> None:
        doc = {"subcommand": self.subcommand}
        for key, val in sorted(self.values.items()):
            if isinstance(val, Fraction):
                doc[key] = f"{val.numerator}/{val.denominator}"
            else:
                doc[key] = val
        print(f"config: {json.dumps(doc, sort_keys=True)}", file=sys.stderr)


_SUBCOMMAND_FLAGS = {
    "sample": {"n", "p", "seed", "out"},
    "solve": {"family", "k", "method", "witness"},
    "density": {"family", "k", "out"},
    "supersaturate": {"n", "family", "min_size", "k", "m", "alpha", "delta", "out"},
    "containers": {"n", "k", "epsilon", "independent", "out"},
    "experiment": {
        "n",
        "k",
        "p",
        "seeds",
        "out",
        "format",
        "timeout",
        "sparse_C",
        "summary_out",
    },
    "bounds": {"n", "k", "p", "epsilon", "K"},
}


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spernerlab")
    ap.add_argument("--config", help="JSON file with default flag values")
    sub = ap.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("sample", help="sample P(n,p) to a family file")
    p.add_argument("--n", type=int)
    p.add_argument("--p")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")

    p = sub.add_parser("solve", help="exact extremal optimum of a family")
    p.add_argument("--family")
    p.add_argument("--k", type=int)
    p.add_argument("--method", choices=["auto", "flow", "matching", "brute"])
    p.add_argument("--no-witness", dest="witness", action="store_false")

    p = sub.add_parser("density", help="dump the exact chain-density table")
    p.add_argument("--family")
    p.add_argument("--k", type=int)
    p.add_argument("--out")

    p = sub.add_parser("supersaturate", help="build a balanced chain hypergraph")
    p.add_argument("--n", type=int)
    p.add_argument("--family")
    p.add_argument("--min-size", dest="min_size", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--m")
    p.add_argument("--alpha")
    p.add_argument("--delta")
    p.add_argument("--out")

    p = sub.add_parser("containers", help="fingerprint a k-chain-free family")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--epsilon")
    p.add_argument("--independent")
    p.add_argument("--out")

    p = sub.add_parser("experiment", help="seeded random trials")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--p")
    p.add_argument("--seeds")
    p.add_argument("--out")
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--timeout", type=float)
    p.add_argument("--sparse-C", dest="sparse_C")
    p.add_argument("--summary-out", dest="summary_out")

    p = sub.add_parser("bounds", help="evaluate the union-bound chain")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--p")
    p.add_argument("--epsilon")
    p.add_argument("--K")
    return ap


def parse_config(argv: Sequence[str]) -> RunConfig:
    """argparse + optional JSON config file; flags override file values."""
    ap = _build_parser()
    ns = ap.parse_args(argv)
    sub = ns.subcommand
    allowed = _SUBCOMMAND_FLAGS[sub]
    values: dict = {}
    if ns.config:
        with open(ns.config, "r", encoding="utf-8") as fh:
            try:
                file_vals = json.load(fh)
            except json.JSONDecodeError as exc:
                raise DomainError(f"config {ns.config}: invalid JSON ({exc})") from exc
        if not isinstance(file_vals, dict):
            raise DomainError(f"config {ns.config}: expected a JSON object")
        for key, val in file_vals.items():
            if key not in allowed:
                raise DomainError(
                    f"config {ns.config}: unknown key {key!r} for {sub!r}"
                )
            values[key] = val
    for key in allowed:
        flag_val = getattr(ns, key, None)
        if flag_val is not None:
            values[key] = flag_val
    if "witness" not in values and sub == "solve":
        values["witness"] = getattr(ns, "witness", True)
    return _validate(RunConfig(sub, values))


def _require(cfg: RunConfig, *names: str) -> None:
    for name in names:
        if cfg.values.get(name) is None:
            raise DomainError(f"{cfg.subcommand}: missing required --{name.replace('_', '-')}")


def _validate(cfg: RunConfig) -> RunConfig:
    v = cfg.values
    sub = cfg.subcommand
    n = v.get("n")
    if n is not None:
        n = int(n)
        v["n"] = n
    for key in ("p", "m", "alpha", "delta", "epsilon", "K", "sparse_C"):
        if v.get(key) is not None:
            v[key] = parse_rational(v[key], n)
    if v.get("seeds") is not None:
        v["seeds"] = parse_seeds(v["seeds"]) if isinstance(v["seeds"], str) else [
            int(s) for s in v["seeds"]
        ]
    if v.get("k") is not None:
        v["k"] = int(v["k"])
    if sub == "sample":
        _require(cfg, "n", "p", "seed", "out")
        if not 0 <= v["p"] <= 1:
            raise DomainError(f"sample: p = {v['p']} outside [0,1]")
    elif sub == "solve":
        _require(cfg, "family", "k")
        v.setdefault("method", "auto")
    elif sub == "density":
        _require(cfg, "family", "k")
    elif sub == "supersaturate":
        _require(cfg, "k", "m")
        if v.get("family") is None and v.get("n") is None:
            raise DomainError("supersaturate: need --family or --n")
        v.setdefault("alpha", Fraction(1, 4))
    elif sub == "containers":
        _require(cfg, "n", "k", "independent")
        v.setdefault("epsilon", Fraction(1, 4))
    elif sub == "experiment":
        _require(cfg, "n", "k", "seeds")
        if v.get("sparse_C") is None:
            _require(cfg, "p")
        v.setdefault("format", "csv")
        v.setdefault("timeout", 60.0)
    elif sub == "bounds":
        _require(cfg, "n", "k", "p", "epsilon", "K")
    return cfg


def dispatch(cfg: RunConfig) -> int:
    """Run exactly one subcommand; 0 iff every internal assertion passed."""
    cfg.echo()
    v = cfg.values
    sub = cfg.subcommand
    if sub == "sample":
        fam = rl.sample_power_set(v["n"], v["p"], v["seed"])
        write_family(fam, v["out"])
        print(json.dumps({"n": v["n"], "size": fam.size, "out": v["out"]}))
    elif sub == "solve":
        fam = read_family(v["family"])
        if v["method"] == "brute":
            res = sv.brute_force_max_k_chain_free(fam, v["k"])
        elif v["k"] == 2 and v["method"] == "auto":
            res = sv.max_antichain(fam)
        else:
            method = v["method"] if v["method"] != "auto" else "flow"
            res = sv.max_k_chain_free(fam, v["k"], method=method, witness=v["witness"])
        print(json.dumps(res.to_json_dict(), sort_keys=True))
    elif sub == "density":
        fam = read_family(v["family"])
        table = dn.density_table(fam, v["k"])
        if v.get("out"):
            dn.dump_density_csv(table, v["out"])
            print(json.dumps({"rows": fam.size * v["k"], "out": v["out"]}))
        else:
            import io

            buf = io.StringIO()
            import csv as _csv

            w = _csv.writer(buf)
            w.writerow(["mask", "size", "ell", "numerator", "denominator"])
            for ell in range(1, v["k"] + 1):
                for mask in fam.masks_by_size():
                    val = table.value(mask, ell)
                    w.writerow(
                        [format(mask, "x"), mask.bit_count(), ell, val.numerator, val.denominator]
                    )
            sys.stdout.write(buf.getvalue())
    elif sub == "supersaturate":
        if v.get("family"):
            fam = read_family(v["family"])
        else:
            fam = SubsetFamily.full(v["n"])
            if v.get("min_size"):
                fam = fam.restrict_min_size(v["min_size"])
        if v.get("delta") is not None:
            H = ss.build_balanced_hypergraph(fam, v["k"], v["delta"], v["m"], v["alpha"])
            delta = v["delta"]
        else:
            H, delta = ss.calibrate_balanced_hypergraph(fam, v["k"], v["m"], v["alpha"])
        if v.get("out"):
            ss.dump_hypergraph(H, v["out"])
        report = {
            "n": fam.n,
            "k": v["k"],
            "delta": f"{delta.numerator}/{delta.denominator}",
            "m": f"{Fraction(v['m']).numerator}/{Fraction(v['m']).denominator}",
            "edges": H.edge_count(),
            "target": ss.edge_count_target(fam.n, v["k"], delta, v["m"]),
            "target_met": H.target_met,
            "max_codegree": [ss.max_codegree(H, ell) for ell in range(1, v["k"] + 1)],
            "removed_singletons": len(H.removed),
        }
        print(json.dumps(report, sort_keys=True))
    elif sub == "containers":
        independent = read_family(v["independent"])
        if independent.n != v["n"]:
            raise DomainError(
                f"independent family has n={independent.n}, expected {v['n']}"
            )
        config = ct.ContainerConfig(k=v["k"], epsilon=v["epsilon"])
        fp = ct.fingerprint(independent, config)
        if v.get("out"):
            ct.dump_fingerprint_json(fp, v["out"])
        print(
            json.dumps(
                {
                    "iteration_count": fp.iteration_count,
                    "final_container_size": fp.final_container.size,
                    "tee_sizes": [t.size for t in fp.tees],
                },
                sort_keys=True,
            )
        )
    elif sub == "experiment":
        if v.get("sparse_C") is not None:
            summary = rl.sparse_regime_trial(
                v["n"], v["k"], v["sparse_C"], v["seeds"], v["timeout"]
            )
            records = summary.pop("records")
            if v.get("out"):
                rl.export(records, v["out"], v["format"])
            if v.get("summary_out"):
                with open(v["summary_out"], "w", encoding="utf-8") as fh:
                    json.dump(summary, fh, indent=2, sort_keys=True)
            print(json.dumps(summary, sort_keys=True))
        else:
            records = rl.run_trials(v["n"], v["k"], v["p"], v["seeds"], v["timeout"])
            if v.get("out"):
                rl.export(records, v["out"], v["format"])
            flagged = sum(1 for r in records if r.flag)
            print(
                json.dumps(
                    {
                        "trials": len(records),
                        "flagged": flagged,
                        "mean_ratio": sum(r.ratio for r in records) / len(records),
                        "mean_lb_ratio": sum(r.lb_ratio for r in records) / len(records),
                    },
                    sort_keys=True,
                )
            )
    elif sub == "bounds":
        summed, simplified = rl.union_bound_evaluate(
            v["n"], v["k"], v["p"], v["epsilon"], v["K"]
        )
        print(json.dumps({"summed_log": summed, "simplified_log": simplified}))
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        cfg = parse_config(argv)
        return dispatch(cfg)
    except SpernerlabError as exc:
        print(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}),
            file=sys.stderr,
        )
        return 1
    except OSError as exc:
        print(
            json.dumps({"error": "OSError", "message": str(exc)}),
            file=sys.stderr,
        )
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
