"""Pure numpy implementations of the hot kernels.

These mirror ``_ckernels.pyx`` exactly (same signatures, same outputs) and
are used whenever the compiled extension is unavailable.
"""

import numpy as np


def linear_hash(xs, ys, n):
    """Hash matrix of shape (n, k): entry (i-1, a) = (xs[a]*i + ys[a]) mod n, 0 -> n."""
    rows = np.arange(1, n + 1, dtype=np.int64)[:, None]
    z = (rows * xs[None, :] + ys[None, :]) % n
    z[z == 0] = n
    return z


def column_extreme(z, members, sentinel, use_max):
    """Coordinate-wise min (or max) of the rows of ``z`` flagged in ``members``."""
    picked = z[members.astype(bool)]
    if picked.shape[0] == 0:
        return np.full(z.shape[1], sentinel, dtype=np.int64)
    return picked.max(axis=0) if use_max else picked.min(axis=0)


def _masked_extreme(mask, values, sentinel, use_max):
    # mask broadcasts against values on the last axis
    filled = np.where(mask, values, sentinel)
    return filled.max(axis=-1) if use_max else filled.min(axis=-1)


def agreement(g1, g2, z, sentinel, use_max):
    """(P, S) uint8 matrix: 1 where pattern p and hash vector s give equal extremes."""
    n_pat = g1.shape[0]
    n_vec = z.shape[0]
    out = np.empty((n_pat, n_vec), dtype=np.uint8)
    m1 = g1.astype(bool)[:, None, :]
    m2 = g2.astype(bool)[:, None, :]
    vals = z[None, :, :]
    # keep the (P, chunk, N) temporaries bounded
    step = max(1, 2_000_000 // max(1, n_pat * z.shape[1]))
    for lo in range(0, n_vec, step):
        hi = min(n_vec, lo + step)
        e1 = _masked_extreme(m1, vals[:, lo:hi], sentinel, use_max)
        e2 = _masked_extreme(m2, vals[:, lo:hi], sentinel, use_max)
        out[:, lo:hi] = e1 == e2
    return out


def match_counts(g1, g2, z, sentinel, use_max):
    """Per-trial count of coordinates a with equal extremes; z has shape (T, k, N)."""
    m1 = g1.astype(bool)[:, None, :]
    m2 = g2.astype(bool)[:, None, :]
    e1 = _masked_extreme(m1, z, sentinel, use_max)
    e2 = _masked_extreme(m2, z, sentinel, use_max)
    return (e1 == e2).sum(axis=1).astype(np.int64)


def rows_disjoint(z):
    """Per trial, 1 if every hash column of z (T, k, N) takes N distinct values."""
    srt = np.sort(z, axis=-1)
    dup = (srt[..., 1:] == srt[..., :-1]).any(axis=-1)
    return (~dup.any(axis=-1)).astype(np.uint8)
