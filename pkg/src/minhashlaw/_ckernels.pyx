# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Signatures match ``_pykernels``."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef cnp.int64_t i64
ctypedef cnp.uint8_t u8


def linear_hash(const i64[::1] xs, const i64[::1] ys, i64 n):
    cdef Py_ssize_t k = xs.shape[0]
    cdef Py_ssize_t i, a
    cdef i64 r
    out = np.empty((n, k), dtype=np.int64)
    cdef i64[:, ::1] z = out
    with nogil:
        for i in range(n):
            for a in range(k):
                r = (xs[a] * (i + 1) + ys[a]) % n
                if r < 0:
                    r += n
                z[i, a] = r if r != 0 else n
    return out


def column_extreme(const i64[:, ::1] z, const u8[::1] members, i64 sentinel, bint use_max):
    cdef Py_ssize_t n = z.shape[0], k = z.shape[1]
    cdef Py_ssize_t i, a
    cdef i64 v
    out = np.full(k, sentinel, dtype=np.int64)
    cdef i64[::1] col = out
    with nogil:
        for i in range(n):
            if not members[i]:
                continue
            for a in range(k):
                v = z[i, a]
                if use_max:
                    if v > col[a]:
                        col[a] = v
                elif v < col[a]:
                    col[a] = v
    return out


cdef inline bint _agree(const u8* m1, const u8* m2, const i64* vals, Py_ssize_t n,
                        i64 sentinel, bint use_max) noexcept nogil:
    # extremes of vals over both masks, compared
    cdef Py_ssize_t i
    cdef i64 b1 = sentinel, b2 = sentinel, v
    if use_max:
        for i in range(n):
            v = vals[i]
            if m1[i] and v > b1:
                b1 = v
            if m2[i] and v > b2:
                b2 = v
    else:
        for i in range(n):
            v = vals[i]
            if m1[i] and v < b1:
                b1 = v
            if m2[i] and v < b2:
                b2 = v
    return b1 == b2


def agreement(const u8[:, ::1] g1, const u8[:, ::1] g2, const i64[:, ::1] z,
              i64 sentinel, bint use_max):
    cdef Py_ssize_t n_pat = g1.shape[0], n_vec = z.shape[0], n = z.shape[1]
    cdef Py_ssize_t p, s
    out = np.ones((n_pat, n_vec), dtype=np.uint8)
    cdef u8[:, ::1] res = out
    if n == 0:
        return out
    with nogil:
        for p in range(n_pat):
            for s in range(n_vec):
                res[p, s] = _agree(&g1[p, 0], &g2[p, 0], &z[s, 0], n, sentinel, use_max)
    return out


def match_counts(const u8[:, ::1] g1, const u8[:, ::1] g2, const i64[:, :, ::1] z,
                 i64 sentinel, bint use_max):
    cdef Py_ssize_t n_trials = z.shape[0], k = z.shape[1], n = z.shape[2]
    cdef Py_ssize_t t, a
    cdef i64 hits
    out = np.full(n_trials, k if n == 0 else 0, dtype=np.int64)
    cdef i64[::1] res = out
    if n == 0:
        return out
    with nogil:
        for t in range(n_trials):
            hits = 0
            for a in range(k):
                hits += _agree(&g1[t, 0], &g2[t, 0], &z[t, a, 0], n, sentinel, use_max)
            res[t] = hits
    return out


def rows_disjoint(const i64[:, :, ::1] z):
    cdef Py_ssize_t n_trials = z.shape[0], k = z.shape[1], n = z.shape[2]
    cdef Py_ssize_t t, a, i, j
    cdef bint ok
    out = np.empty(n_trials, dtype=np.uint8)
    cdef u8[::1] res = out
    with nogil:
        for t in range(n_trials):
            ok = True
            for a in range(k):
                for i in range(n):
                    for j in range(i + 1, n):
                        if z[t, a, i] == z[t, a, j]:
                            ok = False
                            break
                    if not ok:
                        break
                if not ok:
                    break
            res[t] = ok
    return out
