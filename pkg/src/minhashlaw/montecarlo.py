"""Simulation harness for the similarity estimate.

Trials are split into fixed-size chunks; chunk ``c`` draws from the ``c``-th
child of ``SeedSequence(seed)``, so results are bit-identical whatever the
number of worker threads.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy import stats

from . import kernels
from .errors import EmptyInputError
from .exactlaw import DistributionTable
from .hashing import make_rng
from .itemsets import ItemSet, RepresentationMatrix, build_rum_matrix, jaccard
from .signatures import sentinel_for

CHUNK = 1 << 15


@dataclass(frozen=True)
class EmpiricalDistribution:
    k: int
    counts: tuple[int, ...]
    trials: int
    seed: int | None = None

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if len(counts) != self.k + 1:
            raise ValueError(f"need {self.k + 1} counts")
        if sum(counts) != self.trials:
            raise ValueError("counts must sum to the trial count")
        object.__setattr__(self, "counts", counts)

    @property
    def freqs(self) -> np.ndarray:
        return np.array(self.counts, dtype=float) / self.trials

    def mean(self) -> float:
        return float(np.dot(self.freqs, np.arange(self.k + 1)) / self.k)

    def to_json(self) -> str:
        return json.dumps({"k": self.k, "counts": list(self.counts), "trials": self.trials, "seed": self.seed})

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "count"])
        w.writerows(enumerate(self.counts))
        return buf.getvalue()


def _seed_entropy(seed) -> int:
    if seed is None:
        return int(np.random.SeedSequence().entropy)
    return int(seed)


def _run_chunks(n_trials: int, seed: int, fn, workers: int):
    n_chunks = max(1, math.ceil(n_trials / CHUNK))
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    sizes = [min(CHUNK, n_trials - c * CHUNK) for c in range(n_chunks)]
    jobs = list(zip(children, sizes))
    if workers > 1 and n_chunks > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda job: fn(np.random.default_rng(job[0]), job[1]), jobs))
    return [fn(np.random.default_rng(ss), size) for ss, size in jobs]


def simulate_matrix(
    m: RepresentationMatrix,
    h: int,
    l: int,
    sampler,
    k: int,
    trials: int,
    seed=None,
    mode: str = "min",
    workers: int = 1,
    shuffle_rows: bool = True,
) -> EmpiricalDistribution:
    """Empirical law of the match count ``t`` for columns ``h``, ``l`` of ``m``.

    Each trial draws a uniform row order (unless ``shuffle_rows`` is False)
    and a fresh ``k``-function hash matrix from ``sampler``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not hasattr(sampler, "draw"):
        raise TypeError(f"invalid sampler {sampler!r}")
    seed = _seed_entropy(seed)
    n = m.n_rows
    ch = m.column(h).astype(np.uint8)
    cl = m.column(l).astype(np.uint8)
    sentinel = sentinel_for(n, mode)

    def chunk(rng, size):
        if shuffle_rows:
            order = rng.permuted(np.tile(np.arange(n), (size, 1)), axis=1)
            g1, g2 = ch[order], cl[order]
        else:
            g1 = np.broadcast_to(ch, (size, n))
            g2 = np.broadcast_to(cl, (size, n))
        z = sampler.draw(rng, size, k, n)
        t = kernels.match_counts(g1, g2, z, sentinel, mode == "max")
        return np.bincount(t, minlength=k + 1)

    counts = np.sum(_run_chunks(trials, seed, chunk, workers), axis=0)
    return EmpiricalDistribution(k, tuple(counts.tolist()), trials, seed)


def simulate_simrum(
    a: ItemSet,
    b: ItemSet,
    sampler,
    k: int,
    trials: int,
    seed=None,
    mode: str = "min",
    workers: int = 1,
) -> EmpiricalDistribution:
    """Empirical law of the doubled-row estimate for the pair ``a``, ``b``."""
    if not len(a) and not len(b):
        raise EmptyInputError("both sets are empty")
    return simulate_matrix(build_rum_matrix(a, b), 1, 2, sampler, k, trials, seed, mode, workers)


def sample_from_table(table: DistributionTable, trials: int, seed=None) -> EmpiricalDistribution:
    seed = _seed_entropy(seed)
    rng = make_rng(seed)
    probs = np.array([float(v) for v in table.probs])
    counts = rng.multinomial(trials, probs / probs.sum())
    return EmpiricalDistribution(table.k, tuple(counts.tolist()), trials, seed)


@dataclass(frozen=True)
class Comparison:
    tv_distance: float
    chi_square: float | None
    dof: int | None
    p_value: float | None
    tv_threshold: float
    alpha: float

    @property
    def passed(self) -> bool:
        ok = self.tv_distance < self.tv_threshold
        if self.p_value is not None:
            ok = ok and self.p_value >= self.alpha
        return ok

    def as_dict(self) -> dict:
        return {
            "tv_distance": self.tv_distance,
            "chi_square": self.chi_square,
            "dof": self.dof,
            "p_value": self.p_value,
            "tv_threshold": self.tv_threshold,
            "alpha": self.alpha,
            "pass": self.passed,
        }


def _pooled_cells(expected: np.ndarray, observed: np.ndarray, min_expected: float):
    """Merge adjacent cells left to right until each has expected count >= min_expected."""
    exp_groups, obs_groups = [], []
    e_acc = o_acc = 0.0
    for e, o in zip(expected, observed):
        e_acc += e
        o_acc += o
        if e_acc >= min_expected:
            exp_groups.append(e_acc)
            obs_groups.append(o_acc)
            e_acc = o_acc = 0.0
    if e_acc or o_acc:
        if exp_groups:
            exp_groups[-1] += e_acc
            obs_groups[-1] += o_acc
        else:
            exp_groups.append(e_acc)
            obs_groups.append(o_acc)
    return np.array(exp_groups), np.array(obs_groups)


def compare(
    empirical: EmpiricalDistribution | DistributionTable,
    table: DistributionTable,
    tv_threshold: float = 0.01,
    alpha: float = 1e-3,
    min_expected: float = 5.0,
) -> Comparison:
    """Total variation distance and a pooled chi-square goodness-of-fit test."""
    if empirical.k != table.k:
        raise ValueError(f"k mismatch: {empirical.k} vs {table.k}")
    target = np.array([float(v) for v in table.probs])
    if isinstance(empirical, DistributionTable):
        tv = float(sum(abs(a - b) for a, b in zip(empirical.probs, table.probs)) / 2)
        return Comparison(tv, None, None, None, tv_threshold, alpha)
    tv = float(0.5 * np.abs(empirical.freqs - target).sum())
    observed = np.array(empirical.counts, dtype=float)
    exp_cells, obs_cells = _pooled_cells(target * empirical.trials, observed, min_expected)
    dof = len(exp_cells) - 1
    if dof < 1:
        return Comparison(tv, 0.0, 0, 1.0, tv_threshold, alpha)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(exp_cells > 0, (obs_cells - exp_cells) ** 2 / exp_cells, np.where(obs_cells > 0, np.inf, 0.0))
    chi2 = float(terms.sum())
    return Comparison(tv, chi2, dof, float(stats.chi2.sf(chi2, dof)), tv_threshold, alpha)


# ---------------------------------------------------------------------------
# subsampling convergence


@dataclass(frozen=True)
class ConvergenceRecord:
    n1: int
    n2: int
    replications: int
    mean_abs_err: float


@dataclass(frozen=True)
class ConvergenceStudy:
    records: tuple[ConvergenceRecord, ...]
    sim: Fraction
    slope: float | None

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)

    def errors(self) -> list[float]:
        return [r.mean_abs_err for r in self.records]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n1", "n2", "mean_abs_err"])
        for r in self.records:
            w.writerow([r.n1, r.n2, repr(r.mean_abs_err)])
        return buf.getvalue()


def loglog_slope(records: Sequence[ConvergenceRecord]) -> float | None:
    """Least-squares slope of log(error) against log(n1 + n2); None if undefined."""
    pts = [(r.n1 + r.n2, r.mean_abs_err) for r in records if r.mean_abs_err > 0]
    if len(pts) < 2:
        return None
    x = np.log([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    return float(np.polyfit(x, y, 1)[0])


def subsample_convergence(
    a: ItemSet,
    b: ItemSet,
    size_grid: Sequence[int | tuple[int, int]],
    replications: int,
    seed=None,
) -> ConvergenceStudy:
    """Mean absolute error of the similarity of random subsamples, per grid size.

    Grid entries are either ``s`` (both subsamples of size ``s``) or
    ``(n1, n2)``. Subsamples are drawn uniformly without replacement,
    independently from each set.
    """
    if replications < 1:
        raise ValueError("replications must be >= 1")
    sim = jaccard(a, b)
    arr_a = np.array(a.members, dtype=np.int64)
    arr_b = np.array(b.members, dtype=np.int64)
    rng = make_rng(seed)
    records = []
    for entry in size_grid:
        n1, n2 = (entry, entry) if isinstance(entry, (int, np.integer)) else entry
        if not (1 <= n1 <= len(arr_a) and 1 <= n2 <= len(arr_b)):
            raise ValueError(f"subsample sizes ({n1}, {n2}) exceed set sizes ({len(arr_a)}, {len(arr_b)})")
        errs = np.empty(replications)
        for r in range(replications):
            s1 = rng.choice(arr_a, n1, replace=False)
            s2 = rng.choice(arr_b, n2, replace=False)
            inter = np.intersect1d(s1, s2, assume_unique=True).size
            errs[r] = abs(inter / (n1 + n2 - inter) - float(sim))
        records.append(ConvergenceRecord(int(n1), int(n2), replications, float(errs.mean())))
    return ConvergenceStudy(tuple(records), sim, loglog_slope(records))
