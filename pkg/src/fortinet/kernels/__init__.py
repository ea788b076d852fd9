"""Selectable numeric kernels for connectivity and cut-set evaluation.

Two interchangeable backends implement the same contract:

* ``numba_backend``: machine-compiled bitmask kernels (preferred).
* ``numpy_backend``: vectorized pure-numpy equivalents.

The environment variable ``FORTINET_BACKEND`` forces a backend
(``numba`` or ``numpy``); by default the numba backend is used when
importable and numpy otherwise.  Both operate on networks of at most
64 nodes encoded as uint64 bitmasks.
"""

from __future__ import annotations

import os
from contextlib import contextmanager

BACKEND_ENV = "FORTINET_BACKEND"


def _load(name: str):
    if name == "numpy":
        from . import numpy_backend as impl
    elif name == "numba":
        from . import numba_backend as impl
    else:
        raise ValueError(
            f"unknown kernel backend {name!r}; expected 'numba' or 'numpy'"
        )
    return impl


def _select():
    choice = os.environ.get(BACKEND_ENV, "").strip().lower()
    if choice:
        return _load(choice)
    try:
        return _load("numba")
    except ImportError:
        return _load("numpy")


_impl = _select()


def active_backend() -> str:
    """Name of the backend currently serving kernel calls."""
    return _impl.NAME


def get_backend(name: str):
    """Load a backend module by name without activating it."""
    return _load(name)


@contextmanager
def use_backend(name: str):
    """Temporarily swap the active backend. Not thread-safe; test/bench use only."""
    global _impl
    previous = _impl
    _impl = _load(name)
    try:
        yield _impl
    finally:
        _impl = previous


def connected_batch(nbr_masks, n, src, dst, alive):
    """For each row of ``alive`` (uint64 node bitmask), decide whether ``src``
    and ``dst`` are joined by a path of alive nodes. Endpoints must be alive."""
    return _impl.connected_batch(nbr_masks, n, src, dst, alive)


def mcub_batch(cut_idx, cut_len, p):
    """Minimal-cut upper bound over a batch of probability rows.

    ``cut_idx`` is a (C, W) matrix of node indices padded with -1,
    ``cut_len`` the per-cut member counts, ``p`` a (B, n) matrix of node
    failure probabilities. Returns the (B,) vector of
    prod_c (1 - prod_{k in c} p[b, k]).
    """
    return _impl.mcub_batch(cut_idx, cut_len, p)
