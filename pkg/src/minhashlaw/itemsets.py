"""Universes, shingled item sets, Jaccard similarity and representation matrices.

Two matrix layouts are supported:

* the plain layout, one row per universe element, row ``i`` carrying element
  ``sigma(i)``;
* the doubled layout used by the modified estimator, where the members of
  ``A`` are listed followed by the members of ``B`` so that elements of the
  intersection occupy two rows. Membership is decided by the element a row
  carries, so both copies of a shared element are set in both columns.

All similarity values on these exact paths are :class:`fractions.Fraction`.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyInputError, UndefinedSimilarityError, UniverseMismatchError

_WS = re.compile(r"\s+")


@dataclass(frozen=True)
class Universe:
    """Ordered reference set; element ``labels[i-1]`` has index ``i``."""

    labels: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        if not self.labels:
            raise EmptyInputError("a universe needs at least one element")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("universe labels must be distinct")

    @property
    def n(self) -> int:
        return len(self.labels)

    @cached_property
    def index(self) -> dict[str, int]:
        return {label: i for i, label in enumerate(self.labels, start=1)}

    @classmethod
    def of_size(cls, n: int) -> "Universe":
        """Universe whose labels are the strings ``"1"`` .. ``"n"``."""
        return cls(tuple(str(i) for i in range(1, n + 1)))

    def itemset(self, members: Iterable[int]) -> "ItemSet":
        return ItemSet(self, members)

    def itemset_from_labels(self, labels: Iterable[str]) -> "ItemSet":
        try:
            return ItemSet(self, (self.index[lab] for lab in labels))
        except KeyError as exc:
            raise UniverseMismatchError(f"label {exc.args[0]!r} is not in the universe") from None


@dataclass(frozen=True)
class ItemSet:
    universe: Universe
    members: tuple[int, ...] = field(default=())

    def __post_init__(self):
        members = tuple(sorted(set(int(i) for i in self.members)))
        n = self.universe.n
        if members and (members[0] < 1 or members[-1] > n):
            raise UniverseMismatchError(f"members must lie in 1..{n}")
        object.__setattr__(self, "members", members)

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, i):
        return i in self.member_set

    @cached_property
    def member_set(self) -> frozenset[int]:
        return frozenset(self.members)

    @cached_property
    def array(self) -> np.ndarray:
        arr = np.array(self.members, dtype=np.int64)
        arr.setflags(write=False)
        return arr

    def labels(self) -> list[str]:
        return [self.universe.labels[i - 1] for i in self.members]

    def to_json(self) -> str:
        return json.dumps({"universe": list(self.universe.labels), "members": list(self.members)})

    @classmethod
    def from_json(cls, text: str) -> "ItemSet":
        obj = json.loads(text)
        return cls(Universe(tuple(obj["universe"])), obj["members"])


def _same_universe(*sets: ItemSet) -> Universe:
    u = sets[0].universe
    for s in sets[1:]:
        if s.universe is not u and s.universe.labels != u.labels:
            raise UniverseMismatchError("item sets are over different universes")
    return u


def normalize_text(text: str) -> str:
    return _WS.sub(" ", text.lower())


def shingle_strings(text: str, p: int) -> set[str]:
    """Distinct contiguous ``p``-character substrings of the normalized text."""
    if p < 1:
        raise ValueError("shingle size p must be >= 1")
    norm = normalize_text(text)
    if len(norm) < p:
        raise EmptyInputError(f"text has {len(norm)} characters after normalization, need >= {p}")
    return {norm[i : i + p] for i in range(len(norm) - p + 1)}


def shingle(text: str, p: int, universe: Universe | None = None) -> ItemSet:
    """Shingle one text. Without a universe, a fresh one (sorted shingles) is built."""
    grams = shingle_strings(text, p)
    if universe is None:
        universe = Universe(tuple(sorted(grams)))
    return universe.itemset_from_labels(grams)


def shingle_many(texts: Sequence[str], p: int) -> list[ItemSet]:
    """Shingle several texts over one shared universe (the union of their shingles)."""
    grams = [shingle_strings(t, p) for t in texts]
    universe = Universe(tuple(sorted(set().union(*grams))))
    return [universe.itemset_from_labels(g) for g in grams]


def jaccard(a: ItemSet, b: ItemSet) -> Fraction:
    _same_universe(a, b)
    union = len(a.member_set | b.member_set)
    if union == 0:
        raise UndefinedSimilarityError("similarity of two empty sets is undefined")
    return Fraction(len(a.member_set & b.member_set), union)


def sim_to_simM(s) -> Fraction:
    s = Fraction(s)
    _check_unit(s)
    return 2 * s / (1 + s)


def simM_to_sim(sm) -> Fraction:
    sm = Fraction(sm)
    _check_unit(sm)
    return sm / (2 - sm)


def _check_unit(v):
    if not 0 <= v <= 1:
        raise ValueError(f"similarity {v} outside [0, 1]")


def _frozen(a, dtype) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True, order="C")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class RepresentationMatrix:
    """Boolean rows x columns membership matrix.

    ``row_elements[i]`` is the universe index carried by row ``i + 1``;
    ``row_order`` is the permutation (1-based) that produced the row layout
    from the canonical listing.
    """

    cells: np.ndarray
    row_elements: np.ndarray
    row_order: np.ndarray
    universe: Universe
    doubled: bool = False

    def __post_init__(self):
        object.__setattr__(self, "cells", _frozen(self.cells, np.uint8))
        object.__setattr__(self, "row_elements", _frozen(self.row_elements, np.int64))
        object.__setattr__(self, "row_order", _frozen(self.row_order, np.int64))
        if self.cells.ndim != 2 or len(self.row_elements) != self.cells.shape[0]:
            raise ValueError("one element label per row required")

    def __eq__(self, other):
        if not isinstance(other, RepresentationMatrix):
            return NotImplemented
        return (
            np.array_equal(self.cells, other.cells)
            and np.array_equal(self.row_elements, other.row_elements)
            and self.doubled == other.doubled
        )

    __hash__ = None

    @property
    def n_rows(self) -> int:
        return self.cells.shape[0]

    @property
    def m_cols(self) -> int:
        return self.cells.shape[1]

    def column(self, h: int) -> np.ndarray:
        """Column ``h`` (1-based) as a uint8 vector."""
        if not 1 <= h <= self.m_cols:
            raise IndexError(f"column {h} outside 1..{self.m_cols}")
        return self.cells[:, h - 1]

    def row_classes(self, h: int, l: int) -> tuple[int, int, int, int]:
        """Counts of rows in (h only, both, l only, neither)."""
        a = self.column(h).astype(bool)
        b = self.column(l).astype(bool)
        return (
            int(np.sum(a & ~b)),
            int(np.sum(a & b)),
            int(np.sum(~a & b)),
            int(np.sum(~a & ~b)),
        )

    def reordered(self, sigma: Sequence[int]) -> "RepresentationMatrix":
        """Matrix whose row ``i`` is the current row ``sigma(i)``."""
        idx = _check_perm(sigma, self.n_rows)
        return RepresentationMatrix(
            self.cells[idx], self.row_elements[idx], self.row_order[idx], self.universe, self.doubled
        )


def is_permutation(values: np.ndarray, n: int) -> bool:
    """True when the 0-based integer vector ``values`` hits every index of 0..n-1 once."""
    if values.size != n or (n and (values.min() < 0 or values.max() >= n)):
        return False
    return bool(np.all(np.bincount(values, minlength=n) == 1))


def _check_perm(sigma, n: int) -> np.ndarray:
    """Validate a 1-based permutation of 1..n and return it 0-based."""
    if sigma is None:
        return np.arange(n, dtype=np.int64)
    idx = np.asarray(sigma, dtype=np.int64).reshape(-1) - 1
    if idx.size != n or not is_permutation(idx, n):
        raise ValueError(f"row order is not a permutation of 1..{n}")
    return idx


def build_representation_matrix(
    universe: Universe, sets: Sequence[ItemSet], sigma: Sequence[int] | None = None
) -> RepresentationMatrix:
    """Row ``i`` carries element ``sigma(i)``; cell (i, h) = 1 iff that element is in set h."""
    for s in sets:
        if s.universe is not universe and s.universe.labels != universe.labels:
            raise UniverseMismatchError("set is not over the given universe")
    elements = _check_perm(sigma, universe.n) + 1
    cells = np.zeros((universe.n, len(sets)), dtype=np.uint8)
    for h, s in enumerate(sets):
        cells[:, h] = np.isin(elements, s.array)
    return RepresentationMatrix(cells, elements, elements, universe)


def build_rum_matrix(a: ItemSet, b: ItemSet, sigma: Sequence[int] | None = None) -> RepresentationMatrix:
    """Doubled-row matrix: members of ``a`` then members of ``b``, reordered by ``sigma``.

    The result has ``len(a) + len(b)`` rows and two columns.
    """
    universe = _same_universe(a, b)
    listing = np.concatenate([a.array, b.array])
    if listing.size == 0:
        raise EmptyInputError("both sets are empty")
    idx = _check_perm(sigma, listing.size)
    in_a = np.concatenate([np.ones(len(a), bool), np.isin(b.array, a.array, assume_unique=True)])
    in_b = np.concatenate([np.isin(a.array, b.array, assume_unique=True), np.ones(len(b), bool)])
    cells = np.stack([in_a[idx], in_b[idx]], axis=1)
    return RepresentationMatrix(cells, listing[idx], idx + 1, universe, doubled=True)


def matrix_similarity(m: RepresentationMatrix, h: int, l: int) -> Fraction:
    """Rows with two ones over rows with at least one one, for columns ``h`` and ``l``."""
    if h == l:
        raise ValueError("need two distinct columns")
    only_h, both, only_l, _ = m.row_classes(h, l)
    if only_h + both + only_l == 0:
        raise UndefinedSimilarityError("no row has a one in either column")
    return Fraction(both, only_h + both + only_l)
