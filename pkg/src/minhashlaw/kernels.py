"""Kernel dispatch.

The compiled extension ``_ckernels`` is used when it imports; otherwise the
numpy fallback ``_pykernels`` is used. Setting ``MINHASHLAW_PURE=1`` forces
the fallback. Both backends return identical arrays for identical inputs.
"""

import os

import numpy as np

from . import _pykernels

try:
    if os.environ.get("MINHASHLAW_PURE", "") not in ("", "0"):
        raise ImportError("pure backend requested")
    from . import _ckernels
except ImportError:
    _ckernels = None

BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    BACKENDS["cython"] = _ckernels

BACKEND = "cython" if _ckernels is not None else "python"
_impl = BACKENDS[BACKEND]


def _i64(a):
    return np.ascontiguousarray(a, dtype=np.int64)


def _u8(a):
    return np.ascontiguousarray(a, dtype=np.uint8)


def linear_hash(xs, ys, n, backend=None):
    impl = BACKENDS[backend] if backend else _impl
    return impl.linear_hash(_i64(xs), _i64(ys), int(n))


def column_extreme(z, members, sentinel, use_max=False, backend=None):
    impl = BACKENDS[backend] if backend else _impl
    return impl.column_extreme(_i64(z), _u8(members), int(sentinel), bool(use_max))


def agreement(g1, g2, z, sentinel, use_max=False, backend=None):
    impl = BACKENDS[backend] if backend else _impl
    return impl.agreement(_u8(g1), _u8(g2), _i64(z), int(sentinel), bool(use_max))


def match_counts(g1, g2, z, sentinel, use_max=False, backend=None):
    impl = BACKENDS[backend] if backend else _impl
    return impl.match_counts(_u8(g1), _u8(g2), _i64(z), int(sentinel), bool(use_max))


def rows_disjoint(z, backend=None):
    impl = BACKENDS[backend] if backend else _impl
    return impl.rows_disjoint(_i64(z))
