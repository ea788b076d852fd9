"""Compiled bitmask kernels. Hot loops only; orchestration stays in callers."""

from __future__ import annotations

import numpy as np
from numba import njit

NAME = "numba"

_ONE = np.uint64(1)
_ZERO = np.uint64(0)


@njit(cache=True, nogil=True)
def connected_batch(nbr_masks, n, src, dst, alive):
    batch = alive.shape[0]
    out = np.zeros(batch, dtype=np.bool_)
    src_bit = _ONE << np.uint64(src)
    dst_bit = _ONE << np.uint64(dst)
    for r in range(batch):
        a = alive[r]
        if (a & src_bit) == _ZERO or (a & dst_bit) == _ZERO:
            continue
        reach = src_bit
        while True:
            grow = reach
            for i in range(n):
                if (reach >> np.uint64(i)) & _ONE:
                    grow |= nbr_masks[i]
            grow &= a
            if grow & dst_bit:
                out[r] = True
                break
            if grow == reach:
                break
            reach = grow
    return out


@njit(cache=True, nogil=True)
def mcub_batch(cut_idx, cut_len, p):
    b = p.shape[0]
    c = cut_idx.shape[0]
    out = np.empty(b, dtype=np.float64)
    for r in range(b):
        rel = 1.0
        for ci in range(c):
            fail = 1.0
            for w in range(cut_len[ci]):
                fail *= p[r, cut_idx[ci, w]]
            rel *= 1.0 - fail
        out[r] = rel
    return out
