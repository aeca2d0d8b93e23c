"""Command-line interface: ``minhashlaw <command> [options]``.

Inputs are UTF-8 text files (shingled over a shared universe) or ItemSet
JSON files (``*.json``). Exact values are printed as fractions, estimates
with 6 significant digits.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import os
import sys
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import exactlaw, montecarlo
from .errors import MinhashLawError
from .hashing import CoefficientLaw, LawSampler, PermutationSampler
from .itemsets import (
    ItemSet,
    build_representation_matrix,
    build_rum_matrix,
    jaccard,
    shingle_many,
    sim_to_simM,
)
from .signatures import sampled_rum_estimate

MAX_ENUM_LIMIT = 9


@dataclass(frozen=True)
class RunConfig:
    command: str
    inputs: tuple[str, ...] = ()
    p: int = 3
    k: int = 5
    hash: str = "permutation"
    mode: str = "min"
    law_file: str | None = None
    seed: int = 0
    trials: int = 100_000
    format: str = "text"
    enum_limit: int = exactlaw.DEFAULT_ENUM_LIMIT

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("--p must be >= 1")
        if self.k < 1:
            raise ValueError("--k must be >= 1")
        if self.trials < 1:
            raise ValueError("--trials must be >= 1")
        if not 1 <= self.enum_limit <= MAX_ENUM_LIMIT:
            raise ValueError(f"--enum-limit must lie in 1..{MAX_ENUM_LIMIT}")

    @property
    def law(self) -> CoefficientLaw | None:
        if self.law_file is None:
            return None
        return CoefficientLaw.from_json(Path(self.law_file).read_text(encoding="utf-8"))

    def sampler(self):
        if self.hash == "permutation":
            return PermutationSampler()
        return LawSampler(self.law)


def _fmt_est(x: float) -> str:
    return f"{x:.6g}"


def load_sets(paths, p: int) -> list[ItemSet]:
    """ItemSets from JSON files, or shingle sets of text files over one universe."""
    if not paths:
        raise ValueError("no input files given")
    is_json = [str(path).endswith(".json") for path in paths]
    if all(is_json):
        sets = [ItemSet.from_json(Path(path).read_text(encoding="utf-8")) for path in paths]
        first = sets[0].universe
        for s in sets[1:]:
            if s.universe.labels != first.labels:
                raise ValueError("ItemSet JSON inputs must share one universe")
        return [ItemSet(first, s.members) for s in sets]
    if any(is_json):
        raise ValueError("do not mix ItemSet JSON and text inputs")
    return shingle_many([Path(path).read_text(encoding="utf-8") for path in paths], p)


def _emit(rows: list[dict], fmt: str, out, extra: dict | None = None):
    if fmt == "json":
        payload = {"rows": rows}
        if extra:
            payload.update(extra)
        json.dump(payload, out, indent=2)
        out.write("\n")
        return
    if not rows:
        return
    if fmt == "csv":
        w = csv.DictWriter(out, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        return
    cols = list(rows[0])
    widths = {c: max(len(c), *(len(str(r[c])) for r in rows)) for c in cols}
    out.write("  ".join(c.ljust(widths[c]) for c in cols) + "\n")
    for r in rows:
        out.write("  ".join(str(r[c]).ljust(widths[c]) for c in cols) + "\n")
    for key, val in (extra or {}).items():
        out.write(f"# {key}: {val}\n")


def _pairs(cfg: RunConfig):
    sets = load_sets(cfg.inputs, cfg.p)
    if len(sets) < 2:
        raise ValueError("need at least two inputs")
    names = [Path(x).name for x in cfg.inputs]
    return sets, names, list(itertools.combinations(range(len(sets)), 2))


def cmd_sim(cfg: RunConfig, out) -> int:
    sets, names, pairs = _pairs(cfg)
    rows = []
    for i, j in pairs:
        s = jaccard(sets[i], sets[j])
        rows.append({"a": names[i], "b": names[j], "sim": str(s), "simM": str(sim_to_simM(s))})
    _emit(rows, cfg.format, out)
    return 0


def cmd_estimate(cfg: RunConfig, out, with_exact: bool = False) -> int:
    start = time.perf_counter()
    sets, names, pairs = _pairs(cfg)
    law = cfg.law
    rows = []
    for i, j in pairs:
        rng = np.random.default_rng([cfg.seed, i, j])
        est = sampled_rum_estimate(sets[i], sets[j], cfg.k, rng, hash=cfg.hash, law=law, mode=cfg.mode)
        row = {
            "a": names[i],
            "b": names[j],
            "t": est.t,
            "k": est.k,
            "simrum": _fmt_est(est.simrum),
            "recovered_sim": _fmt_est(est.recovered_sim),
        }
        if with_exact:
            exact = jaccard(sets[i], sets[j])
            row["exact_sim"] = str(exact)
            row["error"] = _fmt_est(est.recovered_sim - float(exact))
        rows.append(row)
    extra = {"seconds": _fmt_est(time.perf_counter() - start), "hash": cfg.hash, "mode": cfg.mode}
    _emit(rows, cfg.format, out, extra)
    return 0


def _matrix(cfg: RunConfig, form: str):
    sets = load_sets(cfg.inputs, cfg.p)
    if len(sets) != 2:
        raise ValueError("exactly two inputs are required")
    a, b = sets
    if form == "rum":
        return build_rum_matrix(a, b)
    return build_representation_matrix(a.universe, [a, b])


def _report(cfg: RunConfig, m):
    if cfg.hash == "permutation":
        return exactlaw.collision_probability_permutations(m, 1, 2, limit=cfg.enum_limit, mode=cfg.mode)
    return exactlaw.collision_probability(m, 1, 2, cfg.law, limit=cfg.enum_limit, mode=cfg.mode)


def _table_rows(table: exactlaw.DistributionTable) -> list[dict]:
    return [{"t": t, "s": str(Fraction(t, table.k)), "prob": str(v)} for t, v in enumerate(table.probs)]


def cmd_law(cfg: RunConfig, out, form: str = "ru", law_mode: str = "mixture") -> int:
    m = _matrix(cfg, form)
    report = _report(cfg, m)
    modes = ["product", "mixture"] if law_mode == "both" else [law_mode]
    tables = {md: exactlaw.simrum_law(report, cfg.k, md) for md in modes}
    extra = {"collision_probability": str(report.probability), "n_rows": m.n_rows, "form": form}
    if law_mode == "both":
        extra["tv_product_vs_mixture"] = str(exactlaw.total_variation(tables["product"].probs, tables["mixture"].probs))
        rows = [
            {"t": t, "s": str(Fraction(t, cfg.k)), "product": str(p), "mixture": str(q)}
            for t, (p, q) in enumerate(zip(tables["product"].probs, tables["mixture"].probs))
        ]
    else:
        rows = _table_rows(tables[law_mode])
    if cfg.format == "json" and law_mode != "both":
        out.write(tables[law_mode].to_json() + "\n")
        return 0
    _emit(rows, cfg.format, out, extra if cfg.format != "csv" else None)
    return 0


def cmd_ci(cfg: RunConfig, out, form="ru", law_mode="mixture", table_file=None, level=0.95, center=None) -> int:
    if table_file:
        table = exactlaw.DistributionTable.from_json(Path(table_file).read_text(encoding="utf-8"))
    else:
        table = exactlaw.simrum_law(_report(cfg, _matrix(cfg, form)), cfg.k, law_mode)
    p = Fraction(center) if center is not None else table.mean()
    ci = exactlaw.exact_ci(table, p, Fraction(str(level)))
    lo, hi = ci.bounds
    row = {
        "center": str(ci.center),
        "eps": str(ci.eps),
        "lower": str(lo),
        "upper": str(hi),
        "coverage": str(ci.coverage),
        "level": str(ci.level),
    }
    _emit([row], cfg.format, out)
    return 0


def cmd_simulate(cfg: RunConfig, out, form="rum", tv_threshold=0.01, workers=1) -> int:
    m = _matrix(cfg, form)
    emp = montecarlo.simulate_matrix(m, 1, 2, cfg.sampler(), cfg.k, cfg.trials, cfg.seed, cfg.mode, workers)
    extra = {"trials": emp.trials, "seed": emp.seed, "mean": _fmt_est(emp.mean())}
    rows = [{"t": t, "count": c} for t, c in enumerate(emp.counts)]
    if m.n_rows <= cfg.enum_limit:
        table = exactlaw.simrum_law(_report(cfg, m), cfg.k, "mixture")
        cmp = montecarlo.compare(emp, table, tv_threshold=tv_threshold)
        extra["comparison"] = cmp.as_dict()
        for r, v in zip(rows, table.probs):
            r["exact_prob"] = str(v)
    else:
        extra["comparison"] = f"skipped: {m.n_rows} rows exceed enumeration limit {cfg.enum_limit}"
    _emit(rows, cfg.format, out, extra if cfg.format != "csv" else None)
    return 0


def cmd_convergence(cfg: RunConfig, out, sizes=(50, 100, 200, 400, 800, 1600), replications=1000) -> int:
    sets = load_sets(cfg.inputs, cfg.p)
    if len(sets) != 2:
        raise ValueError("exactly two inputs are required")
    study = montecarlo.subsample_convergence(sets[0], sets[1], sizes, replications, cfg.seed)
    if cfg.format == "csv":
        out.write(study.to_csv())
        return 0
    rows = [{"n1": r.n1, "n2": r.n2, "mean_abs_err": _fmt_est(r.mean_abs_err)} for r in study]
    slope = None if study.slope is None else _fmt_est(study.slope)
    _emit(rows, cfg.format, out, {"sim": str(study.sim), "loglog_slope": slope})
    return 0


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("inputs", nargs="*", help="text files or ItemSet JSON files")
    common.add_argument("--p", type=int, default=3, help="shingle size (default 3)")
    common.add_argument("--k", type=int, default=5, help="number of hash functions (default 5)")
    common.add_argument("--mode", choices=["min", "max"], default="min")
    common.add_argument("--hash", choices=["linear", "permutation"], default="permutation")
    common.add_argument("--law", dest="law_file", metavar="FILE", help="CoefficientLaw JSON for linear hashing")
    common.add_argument("--seed", type=int, default=None, help="RNG seed (default $MINHASH_SEED or 0)")
    common.add_argument("--trials", type=int, default=100_000)
    common.add_argument("--format", choices=["text", "json", "csv"], default="text")
    common.add_argument("--enum-limit", type=int, default=exactlaw.DEFAULT_ENUM_LIMIT)

    parser = argparse.ArgumentParser(prog="minhashlaw", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("sim", parents=[common], help="exact Jaccard and modified similarity per pair")
    est = sub.add_parser("estimate", parents=[common], help="doubled-row minhash estimates per pair")
    est.add_argument("--with-exact", action="store_true", help="also print exact similarity and error")
    for name, helptext in (("law", "exact law of the estimate"), ("ci", "exact confidence interval")):
        sp = sub.add_parser(name, parents=[common], help=helptext)
        sp.add_argument("--form", choices=["ru", "rum"], default="ru", help="matrix layout (default ru)")
        sp.add_argument("--law-mode", choices=["product", "mixture", "both"] if name == "law" else ["product", "mixture"], default="mixture")
    ci = sub.choices["ci"]
    ci.add_argument("--table", metavar="FILE", help="DistributionTable JSON instead of inputs")
    ci.add_argument("--level", type=float, default=0.95)
    ci.add_argument("--center", help="interval center as a fraction (default: mean of the law)")
    simp = sub.add_parser("simulate", parents=[common], help="Monte Carlo law of the estimate")
    simp.add_argument("--form", choices=["ru", "rum"], default="rum")
    simp.add_argument("--tv-threshold", type=float, default=0.01)
    simp.add_argument("--workers", type=int, default=1)
    conv = sub.add_parser("convergence", parents=[common], help="subsample convergence experiment")
    conv.add_argument("--sizes", type=_int_list, default=[50, 100, 200, 400, 800, 1600])
    conv.add_argument("--replications", type=int, default=1000)
    return parser


def _seed(arg) -> int:
    if arg is not None:
        return arg
    env = os.environ.get("MINHASH_SEED")
    return int(env) if env else 0


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(
            command=args.command,
            inputs=tuple(args.inputs),
            p=args.p,
            k=args.k,
            hash=args.hash,
            mode=args.mode,
            law_file=args.law_file,
            seed=_seed(args.seed),
            trials=args.trials,
            format=args.format,
            enum_limit=args.enum_limit,
        )
        if args.command == "sim":
            return cmd_sim(cfg, out)
        if args.command == "estimate":
            return cmd_estimate(cfg, out, args.with_exact)
        if args.command == "law":
            return cmd_law(cfg, out, args.form, args.law_mode)
        if args.command == "ci":
            return cmd_ci(cfg, out, args.form, args.law_mode, args.table, args.level, args.center)
        if args.command == "simulate":
            return cmd_simulate(cfg, out, args.form, args.tv_threshold, args.workers)
        return cmd_convergence(cfg, out, args.sizes, args.replications)
    except (MinhashLawError, ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"minhashlaw: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
