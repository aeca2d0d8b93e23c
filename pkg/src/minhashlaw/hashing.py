"""Minhashing function families.

A linear family holds ``k`` coefficient pairs ``(x, y)`` and hashes row ``i``
of an ``n``-row matrix to ``(x*i + y) mod n``, a zero remainder being read
as ``n`` so that values stay in ``1..n``. A permutation family holds ``k``
explicit permutations of ``1..n``.

Coefficient pairs are drawn i.i.d. from a :class:`CoefficientLaw`, a finite
law with exact rational masses. ``law=None`` everywhere means the default
law, uniform on ``{1..n} x {1..n}``, sampled without materializing its
``n**2`` support.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import kernels
from .errors import InvalidLawError
from .itemsets import is_permutation


def eval_linear(x: int, y: int, n: int, i: int) -> int:
    if n < 1:
        raise ValueError("modulus must be >= 1")
    if not 1 <= i <= n:
        raise ValueError(f"row index {i} outside 1..{n}")
    r = (x * i + y) % n
    return r if r != 0 else n


def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class CoefficientLaw:
    support: tuple[tuple[int, int], ...]
    probs: tuple[Fraction, ...]

    def __post_init__(self):
        support = tuple((int(p), int(q)) for p, q in self.support)
        probs = tuple(Fraction(v) for v in self.probs)
        if not support:
            raise InvalidLawError("empty support")
        if len(support) != len(probs):
            raise InvalidLawError("support and probabilities differ in length")
        if len(set(support)) != len(support):
            raise InvalidLawError("support pairs must be distinct")
        if any(v < 0 for v in probs):
            raise InvalidLawError("negative probability")
        if sum(probs) != 1:
            raise InvalidLawError(f"probabilities sum to {sum(probs)}, not 1")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def uniform(cls, n: int) -> "CoefficientLaw":
        pairs = tuple((p, q) for p in range(1, n + 1) for q in range(1, n + 1))
        return cls(pairs, (Fraction(1, n * n),) * len(pairs))

    @classmethod
    def uniform_on(cls, pairs: Sequence[tuple[int, int]]) -> "CoefficientLaw":
        return cls(tuple(pairs), (Fraction(1, len(pairs)),) * len(pairs))

    @classmethod
    def point_mass(cls, p: int, q: int) -> "CoefficientLaw":
        return cls(((p, q),), (Fraction(1),))

    def to_json(self) -> str:
        return json.dumps(
            {"support": [list(pq) for pq in self.support], "prob": [str(v) for v in self.probs]}
        )

    @classmethod
    def from_json(cls, text: str) -> "CoefficientLaw":
        obj = json.loads(text)
        try:
            return cls(tuple(tuple(pq) for pq in obj["support"]), tuple(Fraction(v) for v in obj["prob"]))
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            if isinstance(exc, InvalidLawError):
                raise
            raise InvalidLawError(f"malformed coefficient law: {exc}") from None

    def support_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        arr = np.array(self.support, dtype=np.int64)
        return arr[:, 0].copy(), arr[:, 1].copy()

    def draw_indices(self, rng: np.random.Generator, size) -> np.ndarray:
        """Indices into ``support``, drawn exactly from the rational masses when possible."""
        den = math.lcm(*(v.denominator for v in self.probs))
        if den < 2**62:
            cum = np.cumsum([int(v * den) for v in self.probs], dtype=np.int64)
            u = rng.integers(0, den, size=size, dtype=np.int64)
            return np.searchsorted(cum, u, side="right")
        weights = np.array([float(v) for v in self.probs])
        return rng.choice(len(self.support), size=size, p=weights / weights.sum())


def draw_coefficients(law: CoefficientLaw | None, n: int, rng: np.random.Generator, size):
    """Arrays ``(x, y)`` of shape ``size`` drawn i.i.d. from ``law``."""
    if law is None:
        return rng.integers(1, n + 1, size=size), rng.integers(1, n + 1, size=size)
    xs, ys = law.support_arrays()
    idx = law.draw_indices(rng, size)
    return xs[idx], ys[idx]


@dataclass(frozen=True)
class LinearHashFamily:
    modulus: int
    coeffs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.modulus < 1:
            raise ValueError("modulus must be >= 1")
        if not self.coeffs:
            raise ValueError("a family needs k >= 1 functions")
        object.__setattr__(self, "coeffs", tuple((int(x), int(y)) for x, y in self.coeffs))

    @property
    def k(self) -> int:
        return len(self.coeffs)

    @property
    def n(self) -> int:
        return self.modulus


@dataclass(frozen=True, eq=False)
class PermutationFamily:
    """``k`` permutations of ``1..n``, stored as a read-only (k, n) array."""

    perms: np.ndarray

    def __post_init__(self):
        perms = np.array(self.perms, dtype=np.int64, ndmin=2)
        if perms.size == 0:
            raise ValueError("a family needs k >= 1 permutations")
        n = perms.shape[1]
        k = perms.shape[0]
        flat = (perms - 1 + n * np.arange(k)[:, None]).ravel()
        if perms.ndim != 2 or perms.min() < 1 or perms.max() > n or not is_permutation(flat, k * n):
            raise ValueError(f"every row must be a permutation of 1..{n}")
        perms.setflags(write=False)
        object.__setattr__(self, "perms", perms)

    def __eq__(self, other):
        if not isinstance(other, PermutationFamily):
            return NotImplemented
        return np.array_equal(self.perms, other.perms)

    __hash__ = None

    @property
    def k(self) -> int:
        return self.perms.shape[0]

    @property
    def n(self) -> int:
        return self.perms.shape[1]


def sample_family(law: CoefficientLaw | None, k: int, n: int, seed=None) -> LinearHashFamily:
    if k < 1:
        raise ValueError("k must be >= 1")
    rng = make_rng(seed)
    xs, ys = draw_coefficients(law, n, rng, k)
    return LinearHashFamily(n, tuple(zip(xs.tolist(), ys.tolist())))


def sample_permutations(k: int, n: int, seed=None) -> PermutationFamily:
    rng = make_rng(seed)
    return PermutationFamily(permutation_values(rng, (k,), n))


def family_rows(family: LinearHashFamily | PermutationFamily) -> np.ndarray:
    """The ``n x k`` hash matrix: entry (i-1, a) is the value of function a at row i."""
    if isinstance(family, PermutationFamily):
        return np.ascontiguousarray(family.perms.T)
    xs = np.array([c[0] for c in family.coeffs], dtype=np.int64)
    ys = np.array([c[1] for c in family.coeffs], dtype=np.int64)
    return kernels.linear_hash(xs, ys, family.modulus)


def linear_values(xs: np.ndarray, ys: np.ndarray, n: int) -> np.ndarray:
    """Batched hash values: for coefficient arrays of shape S, an array S + (n,)."""
    rows = np.arange(1, n + 1, dtype=np.int64)
    z = (np.asarray(xs, dtype=np.int64)[..., None] * rows + np.asarray(ys, dtype=np.int64)[..., None]) % n
    z[z == 0] = n
    return z


def permutation_values(rng: np.random.Generator, shape, n: int) -> np.ndarray:
    """Independent uniform permutations of 1..n, one per index of ``shape``."""
    base = np.broadcast_to(np.arange(1, n + 1, dtype=np.int64), tuple(shape) + (n,))
    return rng.permuted(base.copy(), axis=-1)


@dataclass(frozen=True)
class DisjointnessEstimate:
    probability: float
    stderr: float
    pair_probs: np.ndarray  # (n, n) estimates of P(Z^(i)_a == Z^(j)_a); zero diagonal
    pair_share_probs: np.ndarray  # (n, n) estimates of P(rows i, j agree at some a)
    trials: int


def disjointness_probability(
    law: CoefficientLaw | None, n: int, k: int, trials: int, seed=None, *, permutations: bool = False
) -> DisjointnessEstimate:
    """Monte Carlo estimate of P(all hash rows are pairwise disjoint).

    Rows ``i`` and ``j`` are disjoint when they differ at every function index.
    With ``permutations=True`` the family is made of uniform permutations, for
    which the event is certain.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = make_rng(seed)
    if permutations:
        z = permutation_values(rng, (trials, k), n)
    else:
        z = linear_values(*draw_coefficients(law, n, rng, (trials, k)), n)
    ok = kernels.rows_disjoint(z)
    prob = float(ok.mean())
    eq = z[..., :, None] == z[..., None, :]
    pair = eq.mean(axis=(0, 1))
    share = eq.any(axis=1).mean(axis=0)
    np.fill_diagonal(pair, 0.0)
    np.fill_diagonal(share, 0.0)
    return DisjointnessEstimate(prob, float(np.sqrt(prob * (1 - prob) / trials)), pair, share, trials)


class LawSampler:
    """Draws linear hash values with i.i.d. coefficients from ``law`` (None = uniform)."""

    def __init__(self, law: CoefficientLaw | None = None):
        self.law = law

    def draw(self, rng: np.random.Generator, trials: int, k: int, n: int) -> np.ndarray:
        """Hash values of shape (trials, k, n)."""
        return linear_values(*draw_coefficients(self.law, n, rng, (trials, k)), n)

    def __repr__(self):
        return f"LawSampler({'uniform' if self.law is None else len(self.law.support)})"


class PermutationSampler:
    """Draws independent uniform permutations, one per hash function."""

    def draw(self, rng: np.random.Generator, trials: int, k: int, n: int) -> np.ndarray:
        return permutation_values(rng, (trials, k), n)

    def __repr__(self):
        return "PermutationSampler()"


class ReflectedSampler:
    """Wraps a sampler and maps every hash value v to n + 1 - v."""

    def __init__(self, inner):
        self.inner = inner

    def draw(self, rng: np.random.Generator, trials: int, k: int, n: int) -> np.ndarray:
        return n + 1 - self.inner.draw(rng, trials, k, n)

    def __repr__(self):
        return f"ReflectedSampler({self.inner!r})"
