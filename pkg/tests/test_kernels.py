"""Both kernel backends must return identical arrays."""

import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from minhashlaw import kernels

from .oracles import column_max, column_min, lin

needs_compiled = pytest.mark.skipif("cython" not in kernels.BACKENDS, reason="compiled backend not built")
BACKENDS = sorted(kernels.BACKENDS)


@st.composite
def hash_batches(draw):
    n = draw(st.integers(1, 9))
    t = draw(st.integers(1, 6))
    k = draw(st.integers(1, 5))
    z = draw(hnp.arrays(np.int64, (t, k, n), elements=st.integers(1, n)))
    g1 = draw(hnp.arrays(np.uint8, (t, n), elements=st.integers(0, 1)))
    g2 = draw(hnp.arrays(np.uint8, (t, n), elements=st.integers(0, 1)))
    return n, z, g1, g2


@pytest.mark.parametrize("backend", BACKENDS)
def test_linear_hash_against_scalar(backend):
    xs = np.array([0, 1, 2, 7, 12])
    ys = np.array([0, 3, 5, 1, 11])
    for n in (1, 2, 6, 11):
        z = kernels.linear_hash(xs, ys, n, backend=backend)
        assert z.tolist() == [[lin(x, y, n, i) for x, y in zip(xs, ys)] for i in range(1, n + 1)]


@pytest.mark.parametrize("backend", BACKENDS)
@settings(max_examples=100, deadline=None)
@given(hash_batches(), st.booleans())
def test_match_counts_against_reference(backend, batch, use_max):
    n, z, g1, g2 = batch
    pick = column_max if use_max else column_min
    sentinel = 0 if use_max else n + 1
    got = kernels.match_counts(g1, g2, z, sentinel, use_max, backend=backend)
    want = []
    for tr in range(z.shape[0]):
        c = 0
        for a in range(z.shape[1]):
            e1 = pick(z[tr, a].tolist(), g1[tr].tolist())
            e2 = pick(z[tr, a].tolist(), g2[tr].tolist())
            c += (sentinel if e1 is None else e1) == (sentinel if e2 is None else e2)
        want.append(c)
    assert got.tolist() == want


@needs_compiled
@settings(max_examples=100, deadline=None)
@given(hash_batches(), st.booleans())
def test_backends_agree(batch, use_max):
    n, z, g1, g2 = batch
    sentinel = 0 if use_max else n + 1
    flat = z.reshape(-1, n)
    for name, args in (
        ("match_counts", (g1, g2, z, sentinel, use_max)),
        ("agreement", (g1, g2, flat, sentinel, use_max)),
        ("column_extreme", (flat.T, g1[0], sentinel, use_max)),
        ("rows_disjoint", (z,)),
    ):
        fn = getattr(kernels, name)
        a = fn(*args, backend="cython")
        b = fn(*args, backend="python")
        assert a.dtype == b.dtype, name
        assert np.array_equal(a, b), name


@pytest.mark.parametrize("backend", BACKENDS)
def test_rows_disjoint(backend):
    perms = np.array([[[1, 2, 3], [3, 1, 2]]])
    tie = np.array([[[1, 1, 3], [3, 1, 2]]])
    assert kernels.rows_disjoint(np.concatenate([perms, tie]), backend=backend).tolist() == [1, 0]


@pytest.mark.parametrize("backend", BACKENDS)
def test_column_extreme_empty_column_keeps_sentinel(backend):
    z = np.array([[1, 2], [3, 4]])
    assert kernels.column_extreme(z, np.array([0, 0]), 3, False, backend=backend).tolist() == [3, 3]
    assert kernels.column_extreme(z, np.array([1, 1]), 0, True, backend=backend).tolist() == [3, 4]


def test_backend_is_reported():
    assert kernels.BACKEND in kernels.BACKENDS


def test_fallback_selected_by_environment():
    code = (
        "from minhashlaw import kernels; from minhashlaw.exactlaw import collision_probability;"
        "from minhashlaw.itemsets import Universe, build_rum_matrix;"
        "u = Universe.of_size(3); m = build_rum_matrix(u.itemset([1, 2]), u.itemset([2, 3]));"
        "print(kernels.BACKEND, collision_probability(m, 1, 2).probability)"
    )
    env = dict(os.environ, MINHASHLAW_PURE="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["python", "3/4"]
