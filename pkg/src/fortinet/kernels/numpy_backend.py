"""Pure-numpy kernel fallback. Same contract as the numba backend."""

from __future__ import annotations

import numpy as np

NAME = "numpy"

# Cap on intermediate gather size in mcub_batch, in float64 elements.
_MCUB_CHUNK_ELEMS = 1 << 22


def connected_batch(nbr_masks, n, src, dst, alive):
    alive = np.ascontiguousarray(alive, dtype=np.uint64)
    src_bit = np.uint64(1) << np.uint64(src)
    dst_bit = np.uint64(1) << np.uint64(dst)
    endpoints = (alive & src_bit != 0) & (alive & dst_bit != 0)
    reach = np.where(endpoints, src_bit, np.uint64(0))
    # Fixed-point expansion over all rows at once: each pass ORs in the
    # neighborhoods of every reached node, masked to alive nodes.
    while True:
        grow = reach.copy()
        for i in range(n):
            sel = ((reach >> np.uint64(i)) & np.uint64(1)).astype(bool)
            if sel.any():
                grow[sel] |= nbr_masks[i]
        grow &= alive
        if np.array_equal(grow, reach):
            break
        reach = grow
    return (reach & dst_bit) != 0


def mcub_batch(cut_idx, cut_len, p):
    b = p.shape[0]
    c = cut_idx.shape[0]
    if c == 0 or b == 0:
        return np.ones(b, dtype=np.float64)
    pad = cut_idx < 0
    safe_idx = np.where(pad, 0, cut_idx)
    out = np.empty(b, dtype=np.float64)
    step = max(1, _MCUB_CHUNK_ELEMS // (c * cut_idx.shape[1]))
    for lo in range(0, b, step):
        hi = min(b, lo + step)
        gathered = p[lo:hi][:, safe_idx]
        gathered[:, pad] = 1.0
        fail = gathered.prod(axis=2)
        out[lo:hi] = np.prod(1.0 - fail, axis=1)
    return out
