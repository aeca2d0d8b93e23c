"""Exact probability laws of the minhash similarity estimate.

Everything here is computed with :class:`fractions.Fraction`. The random
experiment is: rows of a representation matrix are put in a uniformly random
order ``sigma``, then ``k`` hash functions are applied to row positions, each
either a linear map with i.i.d. coefficients or an independent uniform
permutation. Laws that need the full symmetric group are computed by
enumeration and are refused above an enumeration limit.

Two readings of the law of the estimate are provided. ``"product"``
multiplies unconditional per-coordinate collision probabilities, treating
coordinates as independent. ``"mixture"`` averages, over row orders, the
law obtained from the collision probabilities conditional on that order,
which is exact because coordinates are independent only given the order.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import kernels
from .errors import ConditioningError, EnumerationLimitError, UndefinedSimilarityError
from .hashing import CoefficientLaw, linear_values, make_rng
from .itemsets import RepresentationMatrix
from .signatures import sentinel_for

DEFAULT_ENUM_LIMIT = 7


def _frac(v) -> Fraction:
    return Fraction(str(v)) if isinstance(v, float) else Fraction(v)


# ---------------------------------------------------------------------------
# distribution tables


@dataclass(frozen=True)
class DistributionTable:
    """Law of ``t/k`` on ``t = 0..k``; ``probs[t] = P(estimate = t/k)``."""

    k: int
    probs: tuple[Fraction, ...]

    def __post_init__(self):
        probs = tuple(Fraction(v) for v in self.probs)
        if len(probs) != self.k + 1:
            raise ValueError(f"need {self.k + 1} probabilities, got {len(probs)}")
        if any(v < 0 for v in probs):
            raise ValueError("negative probability in table")
        if sum(probs) != 1:
            raise ValueError(f"table sums to {sum(probs)}, not 1")
        object.__setattr__(self, "probs", probs)

    @classmethod
    def binomial(cls, k: int, q) -> "DistributionTable":
        q = Fraction(q)
        return cls(k, tuple(math.comb(k, t) * q**t * (1 - q) ** (k - t) for t in range(k + 1)))

    @classmethod
    def degenerate(cls, k: int, t: int) -> "DistributionTable":
        return cls(k, tuple(Fraction(int(i == t)) for i in range(k + 1)))

    def support(self) -> list[Fraction]:
        return [Fraction(t, self.k) for t in range(self.k + 1)]

    def mean(self) -> Fraction:
        return moments(self, 1)

    def to_json(self) -> str:
        return json.dumps({"k": self.k, "probs": [str(v) for v in self.probs]})

    @classmethod
    def from_json(cls, text: str) -> "DistributionTable":
        obj = json.loads(text)
        return cls(int(obj["k"]), tuple(Fraction(v) for v in obj["probs"]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "s", "prob"])
        for t, v in enumerate(self.probs):
            w.writerow([t, str(Fraction(t, self.k)), str(v)])
        return buf.getvalue()


def total_variation(p: Sequence, q: Sequence) -> Fraction:
    if len(p) != len(q):
        raise ValueError("tables have different support sizes")
    return sum((abs(Fraction(a) - Fraction(b)) for a, b in zip(p, q)), Fraction(0)) / 2


def poisson_binomial(probs: Sequence) -> DistributionTable:
    """Law of (number of successes)/k for independent Bernoulli(probs[a])."""
    probs = [Fraction(p) for p in probs]
    if not probs:
        raise ValueError("need at least one probability")
    for p in probs:
        if not 0 <= p <= 1:
            raise ValueError(f"probability {p} outside [0, 1]")
    dist = [Fraction(1)]
    for p in probs:
        nxt = [Fraction(0)] * (len(dist) + 1)
        for t, v in enumerate(dist):
            nxt[t] += v * (1 - p)
            nxt[t + 1] += v * p
        dist = nxt
    return DistributionTable(len(probs), tuple(dist))


# ---------------------------------------------------------------------------
# similarity as a probability; random subsets


def conditional_similarity(m: RepresentationMatrix, h: int, l: int) -> Fraction:
    """P(row has ones in both columns | row has a one in some column) for a uniform row."""
    only_h, both, only_l, _neither = m.row_classes(h, l)
    if only_h + both + only_l == 0:
        raise UndefinedSimilarityError("every row is in neither column")
    return Fraction(both, both + only_h + only_l)


@dataclass(frozen=True)
class RandomSubsetLaw:
    n: int
    k: int
    m: int
    pmf: tuple[Fraction, ...]  # pmf[j] = P(#(X & Y) = j), j = 0..min(k, m)
    expected_similarity: Fraction


def random_subset_law(n: int, k: int, m: int) -> RandomSubsetLaw:
    """Intersection size of two independent uniform subsets of sizes ``k`` and ``m``.

    The law is the average of the two draw orders (either subset first), and
    the expected Jaccard similarity uses ``#(X|Y) = k + m - j``.
    """
    if not (1 <= k <= n and 1 <= m <= n):
        raise ValueError(f"need 1 <= k, m <= n, got n={n}, k={k}, m={m}")
    top = min(k, m)
    x_first = [Fraction(math.comb(k, j) * math.comb(n - k, m - j), math.comb(n, m)) for j in range(top + 1)]
    y_first = [Fraction(math.comb(m, j) * math.comb(n - m, k - j), math.comb(n, k)) for j in range(top + 1)]
    pmf = tuple((a + b) / 2 for a, b in zip(x_first, y_first))
    expected = sum((Fraction(j, m + k - j) * pmf[j] for j in range(top + 1)), Fraction(0))
    return RandomSubsetLaw(n, k, m, pmf, expected)


# ---------------------------------------------------------------------------
# collision probabilities by enumeration


@lru_cache(maxsize=16)
def all_permutations(n: int) -> np.ndarray:
    """All ``n!`` permutations of ``0..n-1`` as rows (lexicographic order), read-only."""
    arr = np.array(list(itertools.permutations(range(n))), dtype=np.int64).reshape(-1, n)
    arr.setflags(write=False)
    return arr


def _check_limit(n: int, limit: int):
    if n > limit:
        raise EnumerationLimitError(n, limit)


def order_patterns(m: RepresentationMatrix, h: int, l: int, limit: int = DEFAULT_ENUM_LIMIT):
    """Membership patterns of columns ``h``, ``l`` under every row order.

    Returns ``(g1, g2, counts)``: distinct pattern pairs as uint8 arrays of
    shape (P, N) and how many of the ``N!`` orders produce each. Position
    ``i`` of ``g1`` is 1 iff the row placed at ``i`` belongs to column ``h``.
    """
    n = m.n_rows
    _check_limit(n, limit)
    perms = all_permutations(n)
    # each row's (h, l) membership is a base-4 digit; one integer per order
    digit = (2 * m.column(h).astype(np.int64) + m.column(l))[perms]
    codes = digit @ (4 ** np.arange(n, dtype=np.int64))
    uniq, counts = np.unique(codes, return_counts=True)
    digits = (uniq[:, None] // 4 ** np.arange(n, dtype=np.int64)) % 4
    g1 = np.ascontiguousarray(digits >= 2, dtype=np.uint8)
    g2 = np.ascontiguousarray(digits % 2, dtype=np.uint8)
    return g1, g2, counts.astype(np.int64)


@dataclass(frozen=True)
class CollisionReport:
    """P(U_h(a) = U_l(a)) for one coordinate, with its law over row orders.

    ``conditional`` lists ``(p_sigma, count)``: ``count`` row orders give
    conditional collision probability ``p_sigma``. All coordinates share the
    same report because hash functions are identically distributed.
    """

    probability: Fraction
    conditional: tuple[tuple[Fraction, int], ...]
    n_orders: int
    scheme: str
    mode: str = "min"

    def per_alpha(self, k: int) -> list[Fraction]:
        return [self.probability] * k


def _report(cond_probs: list[Fraction], counts: np.ndarray, n_rows: int, scheme: str, mode: str):
    total = math.factorial(n_rows)
    grouped: Counter = Counter()
    for p, c in zip(cond_probs, counts.tolist()):
        grouped[p] += c
    prob = sum((p * c for p, c in grouped.items()), Fraction(0)) / total
    return CollisionReport(prob, tuple(sorted(grouped.items())), total, scheme, mode)


def collision_probability(
    m: RepresentationMatrix,
    h: int,
    l: int,
    law: CoefficientLaw | None = None,
    *,
    limit: int = DEFAULT_ENUM_LIMIT,
    mode: str = "min",
) -> CollisionReport:
    """Exact double enumeration over row orders and the coefficient support.

    For each order ``sigma`` and each pair ``(x, y)`` of the law's support
    the hashed extremes of both columns are compared; the law's mass on the
    agreeing pairs is the conditional collision probability, averaged over
    the ``N!`` orders. ``law=None`` is the uniform law on ``{1..N}^2``.
    """
    n = m.n_rows
    _check_limit(n, limit)
    if law is None:
        law = CoefficientLaw.uniform(n)
    g1, g2, counts = order_patterns(m, h, l, limit)
    xs, ys = law.support_arrays()
    z = linear_values(xs, ys, n)  # (S, N): hash value of each support pair at each position
    agree = kernels.agreement(g1, g2, z, sentinel_for(n, mode), mode == "max")
    cond = [sum((p for p, hit in zip(law.probs, row) if hit), Fraction(0)) for row in agree.tolist()]
    return _report(cond, counts, n, "law", mode)


def collision_probability_permutations(
    m: RepresentationMatrix, h: int, l: int, *, limit: int = DEFAULT_ENUM_LIMIT, mode: str = "min"
) -> CollisionReport:
    """As :func:`collision_probability` with the hash a uniform permutation of positions.

    Enumerates every row order and, for each distinct order pattern, every
    hash permutation.
    """
    n = m.n_rows
    _check_limit(n, limit)
    g1, g2, counts = order_patterns(m, h, l, limit)
    z = all_permutations(n) + 1
    agree = kernels.agreement(g1, g2, z, sentinel_for(n, mode), mode == "max")
    total = z.shape[0]
    cond = [Fraction(int(hits), total) for hits in agree.sum(axis=1).tolist()]
    return _report(cond, counts, n, "permutation", mode)


def permutation_collision_enumeration(
    m: RepresentationMatrix, h: int, l: int, *, limit: int = DEFAULT_ENUM_LIMIT, mode: str = "min"
) -> Fraction:
    """Fraction of the ``N!`` hash permutations under which columns ``h``, ``l`` collide.

    The row order of ``m`` is kept fixed.
    """
    n = m.n_rows
    _check_limit(n, limit)
    z = all_permutations(n) + 1
    g1 = m.column(h)[None, :]
    g2 = m.column(l)[None, :]
    hits = int(kernels.agreement(g1, g2, z, sentinel_for(n, mode), mode == "max").sum())
    return Fraction(hits, z.shape[0])


def collision_probability_uniform(i1: int, i2: int, i3: int) -> Fraction:
    """Chance that a uniform permutation puts the union's minimum on an intersection row."""
    if min(i1, i2, i3) < 0:
        raise ValueError("class sizes must be >= 0")
    if i1 + i2 + i3 == 0:
        raise UndefinedSimilarityError("no rows in the union")
    return Fraction(i2, i1 + i2 + i3)


# ---------------------------------------------------------------------------
# law of the estimate and its consequences


def simrum_law(collision, k: int | None = None, mode: str = "product") -> DistributionTable:
    """Law of the estimate ``t/k``.

    ``collision`` is either a sequence of ``k`` per-coordinate collision
    probabilities (product mode only) or a :class:`CollisionReport`, in which
    case ``k`` is required and both modes are available.
    """
    if mode not in ("product", "mixture"):
        raise ValueError("mode must be 'product' or 'mixture'")
    if isinstance(collision, CollisionReport):
        if k is None or k < 1:
            raise ValueError("k >= 1 is required with a CollisionReport")
        if mode == "product":
            return poisson_binomial(collision.per_alpha(k))
        acc = [Fraction(0)] * (k + 1)
        for p, count in collision.conditional:
            w = Fraction(count, collision.n_orders)
            for t, v in enumerate(DistributionTable.binomial(k, p).probs):
                acc[t] += w * v
        return DistributionTable(k, tuple(acc))
    if mode == "mixture":
        raise ValueError("mixture mode needs a CollisionReport (the law over row orders)")
    probs = list(collision)
    if k is not None and k != len(probs):
        raise ValueError(f"k={k} but {len(probs)} probabilities given")
    return poisson_binomial(probs)


def deviation_probability(table: DistributionTable, p, eps) -> Fraction:
    """P(|estimate - p| <= eps), summing the table over the closed band."""
    p, eps = _frac(p), _frac(eps)
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    if eps < 0:
        raise ValueError("eps must be >= 0")
    k = table.k
    lo, hi = k * (p - eps), k * (p + eps)
    return sum((v for t, v in enumerate(table.probs) if lo <= t <= hi), Fraction(0))


def moments(table: DistributionTable, p: int) -> Fraction:
    if p < 1:
        raise ValueError("moment order must be >= 1")
    return sum((Fraction(t, table.k) ** p * v for t, v in enumerate(table.probs)), Fraction(0))


@dataclass(frozen=True)
class ConfidenceInterval:
    center: Fraction
    eps: Fraction
    coverage: Fraction
    level: Fraction

    @property
    def bounds(self) -> tuple[Fraction, Fraction]:
        return self.center - self.eps, self.center + self.eps


def ci_candidates(k: int, p) -> list[Fraction]:
    """Half-widths at which coverage may change: the half-grid j/(2k) and all |t/k - p|."""
    p = _frac(p)
    cands = {Fraction(j, 2 * k) for j in range(2 * k + 1)}
    cands |= {abs(Fraction(t, k) - p) for t in range(k + 1)}
    return sorted(c for c in cands if c <= 1)


def exact_ci(table: DistributionTable, p, level=Fraction(95, 100)) -> ConfidenceInterval:
    """Smallest half-width whose closed band around ``p`` has probability >= ``level``.

    Coverage is a step function of the half-width that only jumps at the
    distances ``|t/k - p|``, so scanning :func:`ci_candidates` upward finds
    the minimum exactly.
    """
    p, level = _frac(p), _frac(level)
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    for eps in ci_candidates(table.k, p):
        cov = deviation_probability(table, p, eps)
        if cov >= level:
            return ConfidenceInterval(p, eps, cov, level)
    raise AssertionError("a half-width of 1 always covers the support")  # pragma: no cover


@dataclass(frozen=True)
class UniformSchemeStats:
    sim: Fraction
    k: int
    lam: Fraction
    mean: Fraction
    variance: Fraction
    tchebychev_bound: Fraction
    gaussian_halfwidth: float | None
    gaussian_bounds: tuple[float, float] | None


def gaussian_interval(sim, k: int, z: float = 1.96) -> tuple[float, float]:
    """Normal-approximation interval ``sim -/+ z*sqrt(sim(1-sim)/k)``."""
    sim = _frac(sim)
    if sim in (0, 1):
        raise ValueError("Gaussian interval is degenerate when the similarity is 0 or 1")
    half = z * math.sqrt(sim * (1 - sim) / k)
    return float(sim) - half, float(sim) + half


def uniform_scheme_stats(sim, k: int, lam) -> UniformSchemeStats:
    """Binomial moments, Chebyshev tail bound and 95% normal interval for ``k`` coordinates."""
    sim, lam = _frac(sim), _frac(lam)
    if not 0 <= sim <= 1:
        raise ValueError("sim must lie in [0, 1]")
    if k < 1:
        raise ValueError("k must be >= 1")
    if lam <= 0:
        raise ValueError("lambda must be > 0")
    var = sim * (1 - sim) / k
    bound = var / lam**2
    if sim in (0, 1):
        half = bounds = None
    else:
        bounds = gaussian_interval(sim, k)
        half = (bounds[1] - bounds[0]) / 2
    return UniformSchemeStats(sim, k, lam, sim, var, bound, half, bounds)


# ---------------------------------------------------------------------------
# general scheme (Monte Carlo under the disjointness condition)


@dataclass(frozen=True)
class GeneralSchemeResult:
    p_hat: float
    p_stderr: float
    disjoint_rate: float
    accepted: int
    trials: int
    k: int
    lam: float
    deviation_bound: float
    extra: dict = field(default_factory=dict)


def general_scheme(
    m: RepresentationMatrix,
    h: int,
    l: int,
    sampler,
    k: int,
    trials: int,
    seed=None,
    lam: float = 0.1,
    mode: str = "min",
) -> GeneralSchemeResult:
    """Rejection-sampling estimate of the conditional Bernoulli parameter.

    Each trial draws a ``k``-function hash matrix; trials where all rows are
    pairwise disjoint are kept. For a kept draw, coordinate ``a`` succeeds
    when the smallest hash value over the rows of the union (largest for
    ``mode="max"``) sits on a row of the intersection. The reported bound is
    ``P(D_n) p(1-p) / (k lam^2)``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = make_rng(seed)
    n = m.n_rows
    ch, cl = m.column(h).astype(bool), m.column(l).astype(bool)
    union = ch | cl
    inter = ch & cl
    if not union.any():
        raise UndefinedSimilarityError("no rows in the union")
    z = sampler.draw(rng, trials, k, n)
    ok = kernels.rows_disjoint(z).astype(bool)
    accepted = int(ok.sum())
    if accepted == 0:
        raise ConditioningError("no draw had pairwise disjoint rows")
    zu = np.where(union, z[ok], -1 if mode == "max" else n + 1)
    arg = zu.argmax(axis=-1) if mode == "max" else zu.argmin(axis=-1)
    success = inter[arg]  # (accepted, k)
    p_hat = float(success.mean())
    rate = accepted / trials
    return GeneralSchemeResult(
        p_hat=p_hat,
        p_stderr=float(np.sqrt(p_hat * (1 - p_hat) / success.size)),
        disjoint_rate=rate,
        accepted=accepted,
        trials=trials,
        k=k,
        lam=float(lam),
        deviation_bound=rate * p_hat * (1 - p_hat) / (k * float(lam) ** 2),
    )
