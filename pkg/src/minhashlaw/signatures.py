"""Signature matrices and the RU / RUM similarity estimates.

Three fills are provided and must agree exactly:

* :func:`fill_ru` runs the classic column-by-column procedure literally;
* :func:`fill_criterion_c` takes, for each column, the coordinate-wise
  minimum of the hash rows of its member rows (compiled kernel);
* :func:`fill_markov` iterates the state ``U^i`` row by row from the
  all-sentinel state ``U^0``.

Empty columns keep the sentinel ``n + 1`` (``0`` for max aggregation).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import kernels
from .errors import DimensionMismatchError, EmptyInputError
from .hashing import (
    CoefficientLaw,
    LinearHashFamily,
    PermutationFamily,
    family_rows,
    make_rng,
    sample_family,
    sample_permutations,
)
from .itemsets import ItemSet, RepresentationMatrix, build_rum_matrix

MODES = ("min", "max")


def sentinel_for(n: int, mode: str = "min") -> int:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    return n + 1 if mode == "min" else 0


@dataclass(frozen=True)
class SignatureMatrix:
    values: np.ndarray  # (k, m)
    n: int
    mode: str = "min"
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=np.int64)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if self.names is not None and len(self.names) != vals.shape[1]:
            raise ValueError("one name per column required")

    @property
    def k(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]

    @property
    def sentinel(self) -> int:
        return sentinel_for(self.n, self.mode)

    def column(self, h: int) -> np.ndarray:
        return self.values[:, h - 1]

    def __eq__(self, other):
        if not isinstance(other, SignatureMatrix):
            return NotImplemented
        return self.n == other.n and self.mode == other.mode and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash((self.n, self.mode, self.values.tobytes()))

    def to_json(self) -> str:
        names = self.names or tuple(f"S{h}" for h in range(1, self.m + 1))
        return json.dumps(
            {"k": self.k, "columns": {name: self.values[:, j].tolist() for j, name in enumerate(names)}}
        )

    @classmethod
    def from_json(cls, text: str, n: int, mode: str = "min") -> "SignatureMatrix":
        obj = json.loads(text)
        names = tuple(obj["columns"])
        values = np.array([obj["columns"][c] for c in names], dtype=np.int64).T.reshape(obj["k"], len(names))
        return cls(values, n, mode, names)


def _check_dims(m: RepresentationMatrix, z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.int64)
    if z.ndim != 2 or z.shape[0] != m.n_rows:
        raise DimensionMismatchError(
            f"hash matrix has shape {z.shape}, expected ({m.n_rows}, k) for {m.n_rows} rows"
        )
    return z


def fill_ru(m: RepresentationMatrix, z: np.ndarray) -> SignatureMatrix:
    z = _check_dims(m, z)
    n, k = z.shape
    cells = m.cells.tolist()
    rows = z.tolist()
    c = [[math.inf] * m.m_cols for _ in range(k)]  # step 1
    for j in range(m.m_cols):  # step 2
        for i in range(n):
            hashes = rows[i]  # 2-a
            if not cells[i][j]:  # 2-b
                continue
            for a in range(k):  # 2-c
                c[a][j] = min(c[a][j], hashes[a])
    out = [[n + 1 if v == math.inf else v for v in row] for row in c]
    return SignatureMatrix(np.array(out, dtype=np.int64).reshape(k, m.m_cols), n)


def fill_criterion_c(m: RepresentationMatrix, z: np.ndarray, mode: str = "min") -> SignatureMatrix:
    z = _check_dims(m, z)
    n, k = z.shape
    sentinel = sentinel_for(n, mode)
    cols = [kernels.column_extreme(z, m.cells[:, j], sentinel, mode == "max") for j in range(m.m_cols)]
    values = np.stack(cols, axis=1) if cols else np.empty((k, 0), dtype=np.int64)
    return SignatureMatrix(values, n, mode)


def fill_markov(
    m: RepresentationMatrix, z: np.ndarray, mode: str = "min", trace: bool = False
) -> SignatureMatrix | tuple[SignatureMatrix, list[np.ndarray]]:
    """Row-by-row state iteration.

    With ``trace=True`` also returns the states ``U^0 .. U^n`` as a list of
    (k, m) arrays.
    """
    z = _check_dims(m, z)
    n, k = z.shape
    agg = np.maximum if mode == "max" else np.minimum
    state = np.full((k, m.m_cols), sentinel_for(n, mode), dtype=np.int64)
    states = [state.copy()] if trace else None
    for i in range(n):
        member = m.cells[i].astype(bool)
        # U^i = U^{i-1} where C(i,h)=0, agg(U^{i-1}, Z^(i)) where C(i,h)=1
        state = np.where(member[None, :], agg(state, z[i][:, None]), state)
        if trace:
            states.append(state.copy())
    sig = SignatureMatrix(state, n, mode)
    return (sig, states) if trace else sig


@dataclass(frozen=True)
class SignatureEstimate:
    t: int
    k: int
    mode: str = "min"

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.t, self.k)

    @property
    def simrum(self) -> float:
        return self.t / self.k

    @property
    def recovered_sim(self) -> float:
        s = self.fraction
        return float(s / (2 - s))


def sim_signature(sig: SignatureMatrix, h: int, l: int) -> SignatureEstimate:
    """Fraction of coordinates at which columns ``h`` and ``l`` agree."""
    t = int(np.sum(sig.column(h) == sig.column(l)))
    return SignatureEstimate(t, sig.k, sig.mode)


def estimate_rum(
    a: ItemSet,
    b: ItemSet,
    family: LinearHashFamily | PermutationFamily,
    sigma: Sequence[int] | None = None,
    mode: str = "min",
) -> SignatureEstimate:
    """Doubled-row estimate of the modified similarity, plus its inversion."""
    if not len(a) and not len(b):
        raise EmptyInputError("both sets are empty")
    mat = build_rum_matrix(a, b, sigma)
    if family.n != mat.n_rows:
        raise DimensionMismatchError(f"family is over {family.n} rows, RUM matrix has {mat.n_rows}")
    sig = fill_criterion_c(mat, family_rows(family), mode)
    return sim_signature(sig, 1, 2)


def sampled_rum_estimate(
    a: ItemSet,
    b: ItemSet,
    k: int,
    seed=None,
    *,
    hash: str = "linear",
    law: CoefficientLaw | None = None,
    mode: str = "min",
) -> SignatureEstimate:
    """Draw a row order and a hash family from ``seed``, then run :func:`estimate_rum`."""
    rng = make_rng(seed)
    n_rows = len(a) + len(b)
    if n_rows == 0:
        raise EmptyInputError("both sets are empty")
    sigma = rng.permutation(n_rows) + 1
    if hash == "linear":
        family = sample_family(law, k, n_rows, rng)
    elif hash == "permutation":
        family = sample_permutations(k, n_rows, rng)
    else:
        raise ValueError(f"hash must be 'linear' or 'permutation', got {hash!r}")
    return estimate_rum(a, b, family, sigma, mode)
