"""Border-pair reliability: exact enumeration, minimal cut sets, bounds, sampling.

Reliability of an objective is the probability that its two border nodes
are joined by a path of operational nodes. Exact values enumerate all
states of the fallible nodes; above the enumeration cap the minimal-cut
upper bound on failure (a lower bound on reliability) takes over.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .errors import ApproximationWarning, EnumerationCapError, ObjectiveError
from .graphs import DEFAULT_ENUMERATION_CAP, Network, NodeId, is_connected

# Rows processed per kernel call; fixed so that accumulation order, and
# therefore every reported float, is independent of worker count.
_CHUNK = 1 << 16

# Partial-set visit budget for minimal-cut enumeration before giving up.
DEFAULT_CUT_SEARCH_LIMIT = 1 << 23

EXACT = "exact"
MCUB = "mcub"
MONTE_CARLO = "monte_carlo"
AUTO = "auto"

LOWER_BOUND = "lower_bound"


@dataclass(frozen=True)
class Objective:
    """A border pair whose connection reliability matters, optionally with a
    minimum reliability requirement used by requirement-aware searches."""

    name: str
    pair: tuple[NodeId, NodeId]
    min_reliability: float = 0.0


@dataclass(frozen=True)
class CutSetCollection:
    """Minimal vertex cut sets separating one objective's border pair.

    ``cuts`` holds frozensets of node ids, ordered by cardinality then
    lexicographic ids; ``index_cuts`` mirrors them as node-order index
    tuples. ``truncated`` marks an incomplete search (size cap or search
    budget hit), which voids the bound guarantee.
    """

    objective: Objective
    cuts: tuple[frozenset[NodeId], ...]
    index_cuts: tuple[tuple[int, ...], ...]
    truncated: bool = False

    def matrix(self) -> tuple[np.ndarray, np.ndarray]:
        """Padded (C, W) index matrix and (C,) length vector for the kernels."""
        c = len(self.index_cuts)
        w = max((len(cut) for cut in self.index_cuts), default=1)
        idx = np.full((c, w), -1, dtype=np.int64)
        lens = np.zeros(c, dtype=np.int64)
        for i, cut in enumerate(self.index_cuts):
            idx[i, : len(cut)] = cut
            lens[i] = len(cut)
        return idx, lens


@dataclass(frozen=True)
class ReliabilityEstimate:
    value: float
    method: str
    std_error: float | None = None
    bound_direction: str | None = None


def _resolve_p(net: Network, p: Sequence[float] | None) -> np.ndarray:
    if p is None:
        return np.asarray(net.base_p, dtype=np.float64)
    arr = np.asarray(p, dtype=np.float64)
    if arr.shape != (net.n,):
        raise ValueError(f"probability vector has shape {arr.shape}, expected ({net.n},)")
    if (arr < 0).any() or (arr > 1).any():
        raise ValueError("failure probabilities must lie in [0, 1]")
    return arr


def _objective_indices(net: Network, obj: Objective) -> tuple[int, int]:
    src, dst = obj.pair
    for node in (src, dst):
        if node not in net.index:
            raise ObjectiveError(f"objective {obj.name!r}: unknown node {node!r}")
        if node not in net.border_nodes:
            raise ObjectiveError(
                f"objective {obj.name!r}: pair member {node!r} is not a border node"
            )
    if src == dst:
        raise ObjectiveError(f"objective {obj.name!r}: pair members must differ")
    return net.index[src], net.index[dst]


def _check_attainable(net: Network, obj: Objective) -> None:
    all_up = (1,) * net.n
    if not is_connected(net, all_up, obj.pair):
        raise ObjectiveError(
            f"objective {obj.name!r} is unattainable: pair {obj.pair} is "
            "disconnected even with every node operational"
        )


def _pack_bool_rows(alive: np.ndarray) -> np.ndarray:
    """Pack a (B, n) boolean matrix into (B,) uint64 bitmasks."""
    n = alive.shape[1]
    shifts = np.arange(n, dtype=np.uint64)
    return np.bitwise_or.reduce(
        alive.astype(np.uint64) << shifts[np.newaxis, :], axis=1
    )


def _connected_masks(net: Network, src: int, dst: int, alive_masks: np.ndarray) -> np.ndarray:
    if net.nbr_masks is not None:
        return kernels.connected_batch(net.nbr_masks, net.n, src, dst, alive_masks)
    raise ValueError("kernel connectivity requires networks of at most 64 nodes")


def _full_alive_mask(net: Network) -> np.uint64:
    mask = np.uint64(0)
    for i in range(net.n):
        mask |= np.uint64(1) << np.uint64(i)
    return mask


def _nonfallible_mask(net: Network) -> np.uint64:
    mask = np.uint64(0)
    fall = set(net.fallible_indices)
    for i in range(net.n):
        if i not in fall:
            mask |= np.uint64(1) << np.uint64(i)
    return mask


def _state_alive_masks(net: Network, start: int, stop: int) -> np.ndarray:
    """Alive bitmasks of enumeration states [start, stop); counting order,
    first fallible node most significant."""
    fall = net.fallible_indices
    f = len(fall)
    idx = np.arange(start, stop, dtype=np.uint64)
    masks = np.full(idx.shape, _nonfallible_mask(net), dtype=np.uint64)
    for j, node in enumerate(fall):
        bit = (idx >> np.uint64(f - 1 - j)) & np.uint64(1)
        masks |= bit << np.uint64(node)
    return masks


def _state_probs(p_fall: np.ndarray, start: int, stop: int, f: int) -> np.ndarray:
    idx = np.arange(start, stop, dtype=np.uint64)
    probs = np.ones(idx.shape[0], dtype=np.float64)
    for j in range(f):
        bit = ((idx >> np.uint64(f - 1 - j)) & np.uint64(1)).astype(bool)
        probs *= np.where(bit, 1.0 - p_fall[j], p_fall[j])
    return probs


def reliability_exact(
    net: Network,
    obj: Objective,
    p: Sequence[float] | None = None,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> ReliabilityEstimate:
    """Exact pair reliability by full state enumeration.

    Work and memory scale with 2^f for f fallible nodes; callers above the
    cap get an EnumerationCapError pointing at the cut-set approximation.
    """
    pvec = _resolve_p(net, p)
    src, dst = _objective_indices(net, obj)
    _check_attainable(net, obj)
    fall = net.fallible_indices
    f = len(fall)
    if f > cap:
        raise EnumerationCapError(
            f"{f} fallible nodes exceed the exact-enumeration cap of {cap}; "
            "use the cut-set approximation or raise the cap"
        )
    p_fall = pvec[list(fall)]
    total = 0.0
    n_states = 1 << f
    for lo in range(0, n_states, _CHUNK):
        hi = min(n_states, lo + _CHUNK)
        alive = _state_alive_masks(net, lo, hi)
        conn = _connected_masks(net, src, dst, alive)
        probs = _state_probs(p_fall, lo, hi, f)
        total += float(probs @ conn.astype(np.float64))
    return ReliabilityEstimate(value=total, method=EXACT, bound_direction=EXACT)


def _surviving_path(
    net: Network, src: int, dst: int, failed: frozenset[int]
) -> tuple[int, ...] | None:
    """Shortest path of operational nodes joining the pair, or None.

    Breadth-first over the fixed adjacency order, so the returned path is
    deterministic for a given failed set.
    """
    if src in failed or dst in failed:
        return None
    parent = {src: -1}
    queue = [src]
    while queue:
        nxt: list[int] = []
        for i in queue:
            for j in net.adjacency_lists[i]:
                if j in parent or j in failed:
                    continue
                parent[j] = i
                if j == dst:
                    path = [j]
                    while path[-1] != src:
                        path.append(parent[path[-1]])
                    return tuple(reversed(path))
                nxt.append(j)
        queue = nxt
    return None


def minimal_cuts(
    net: Network,
    obj: Objective,
    max_size: int | None = None,
    search_limit: int = DEFAULT_CUT_SEARCH_LIMIT,
) -> CutSetCollection:
    """All minimal sets of fallible nodes whose joint failure disconnects the pair.

    Every cut must disable some node on every surviving path, so the
    search repeatedly finds one shortest surviving path and branches on
    its fallible nodes; supersets of found cuts are pruned because a
    partial set that already disconnects the pair stops branching. The
    candidate set is then reduced to its minimal members. ``max_size``
    caps the cut cardinality and marks the result truncated when a
    deeper branch had to be abandoned; visiting more than
    ``search_limit`` partial sets does the same.

    Depends only on topology, so one collection serves every probability
    vector for its objective.
    """
    src, dst = _objective_indices(net, obj)
    _check_attainable(net, obj)
    if net.nbr_masks is None:
        raise ValueError("minimal-cut search requires networks of at most 64 nodes")
    fallible = frozenset(net.fallible_indices)
    cap = len(fallible) if max_size is None else min(max_size, len(fallible))
    visited: set[frozenset[int]] = set()
    candidates: list[frozenset[int]] = []
    truncated = False
    budget_left = search_limit

    def explore(partial: frozenset[int]) -> None:
        nonlocal truncated, budget_left
        if partial in visited or truncated:
            return
        if budget_left <= 0:
            truncated = True
            return
        budget_left -= 1
        visited.add(partial)
        path = _surviving_path(net, src, dst, partial)
        if path is None:
            candidates.append(partial)
            return
        branch = [i for i in path if i in fallible and i not in partial]
        if not branch:
            # this path cannot be disabled, so no extension is a cut
            return
        if len(partial) >= cap:
            truncated = True
            return
        for i in branch:
            explore(partial | {i})

    explore(frozenset())
    if truncated:
        warnings.warn(
            f"minimal-cut search for objective {obj.name!r} stopped early; "
            "the collection may be incomplete and the bound guarantee is void",
            ApproximationWarning,
            stacklevel=2,
        )

    found = [cut for cut in dict.fromkeys(candidates) if _is_minimal_cut(net, src, dst, cut)]
    order = sorted(
        range(len(found)),
        key=lambda i: (
            len(found[i]),
            tuple(sorted(net.nodes[j].id for j in found[i])),
        ),
    )
    cuts = tuple(
        frozenset(net.nodes[j].id for j in found[i]) for i in order
    )
    index_cuts = tuple(tuple(sorted(found[i])) for i in order)
    return CutSetCollection(
        objective=obj, cuts=cuts, index_cuts=index_cuts, truncated=truncated
    )


def _is_minimal_cut(net: Network, src: int, dst: int, cut: frozenset[int]) -> bool:
    """True iff the cut disconnects the pair and no proper subset does.

    Checking each one-node-smaller subset suffices: cuts are monotone,
    so a disconnecting proper subset implies a disconnecting (k-1)-subset.
    """
    if _surviving_path(net, src, dst, cut) is not None:
        return False
    for v in cut:
        if _surviving_path(net, src, dst, cut - {v}) is None:
            return False
    return True


def reliability_mcub(
    cuts: CutSetCollection, p: Sequence[float]
) -> ReliabilityEstimate:
    """Minimal-cut approximation: product over cuts of (1 - joint failure).

    A lower bound on reliability when the collection is complete; a
    truncated collection clears the bound direction and warns. An empty
    collection means no fallible node set can disconnect the pair, so the
    value is 1.
    """
    parr = np.asarray(p, dtype=np.float64)
    value = 1.0
    for cut in cuts.index_cuts:
        fail = 1.0
        for i in cut:
            fail *= parr[i]
        value *= 1.0 - fail
    if cuts.truncated:
        warnings.warn(
            f"cut collection for objective {cuts.objective.name!r} is truncated; "
            "reporting an approximation without a bound guarantee",
            ApproximationWarning,
            stacklevel=2,
        )
        return ReliabilityEstimate(value=value, method=MCUB, bound_direction=None)
    return ReliabilityEstimate(value=value, method=MCUB, bound_direction=LOWER_BOUND)


def reliability_monte_carlo(
    net: Network,
    obj: Objective,
    p: Sequence[float] | None = None,
    samples: int = 100_000,
    seed: int = 0,
) -> ReliabilityEstimate:
    """Monte Carlo estimate of pair reliability.

    Deterministic for a given (seed, samples): sampling happens in fixed
    chunks, each driven by a child of one SeedSequence, so results do not
    depend on scheduling.
    """
    pvec = _resolve_p(net, p)
    src, dst = _objective_indices(net, obj)
    _check_attainable(net, obj)
    if samples <= 0:
        raise ValueError("samples must be positive")
    fall = list(net.fallible_indices)
    p_fall = pvec[fall]
    n_chunks = (samples + _CHUNK - 1) // _CHUNK
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    base_mask = _nonfallible_mask(net)
    hits = 0
    done = 0
    for ci in range(n_chunks):
        take = min(_CHUNK, samples - done)
        rng = np.random.default_rng(children[ci])
        u = rng.random((take, len(fall)))
        alive_bool = np.zeros((take, net.n), dtype=bool)
        alive_bool[:, fall] = u >= p_fall[np.newaxis, :]
        masks = _pack_bool_rows(alive_bool) | base_mask
        conn = _connected_masks(net, src, dst, masks)
        hits += int(conn.sum())
        done += take
    value = hits / samples
    std_error = math.sqrt(max(value * (1.0 - value), 0.0) / samples)
    return ReliabilityEstimate(
        value=value, method=MONTE_CARLO, std_error=std_error, bound_direction=None
    )


class ReliabilityContext:
    """Per-network cache of topology-derived artifacts.

    Cut collections and exact state-connectivity tables depend only on the
    topology, so they are computed once per objective and reused across
    arbitrarily many probability vectors (one per candidate portfolio).
    """

    def __init__(
        self,
        net: Network,
        objectives: Sequence[Objective],
        cap: int = DEFAULT_ENUMERATION_CAP,
        max_cut_size: int | None = None,
    ):
        self.net = net
        self.objectives = tuple(objectives)
        self.cap = cap
        self.max_cut_size = max_cut_size
        self._pairs = [_objective_indices(net, o) for o in self.objectives]
        for o in self.objectives:
            _check_attainable(net, o)
        names = [o.name for o in self.objectives]
        if len(set(names)) != len(names):
            raise ObjectiveError("objective names must be unique")
        self._cuts: dict[int, CutSetCollection] = {}
        self._cut_mats: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        self._conn: dict[int, np.ndarray] = {}

    @property
    def fallible_count(self) -> int:
        return len(self.net.fallible_indices)

    def resolve_method(self, method: str) -> str:
        if method == AUTO:
            return EXACT if self.fallible_count <= self.cap else MCUB
        if method in (EXACT, MCUB, MONTE_CARLO):
            return method
        raise ValueError(f"unknown reliability method {method!r}")

    def cuts(self, j: int) -> CutSetCollection:
        if j not in self._cuts:
            self._cuts[j] = minimal_cuts(
                self.net, self.objectives[j], max_size=self.max_cut_size
            )
        return self._cuts[j]

    def cut_matrix(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        if j not in self._cut_mats:
            self._cut_mats[j] = self.cuts(j).matrix()
        return self._cut_mats[j]

    def exact_connectivity(self, j: int) -> np.ndarray:
        """Boolean connectivity of every enumeration state for objective j."""
        if j not in self._conn:
            f = self.fallible_count
            if f > self.cap:
                raise EnumerationCapError(
                    f"{f} fallible nodes exceed the exact-enumeration cap of "
                    f"{self.cap}; use the cut-set approximation or raise the cap"
                )
            src, dst = self._pairs[j]
            n_states = 1 << f
            conn = np.zeros(n_states, dtype=bool)
            for lo in range(0, n_states, _CHUNK):
                hi = min(n_states, lo + _CHUNK)
                alive = _state_alive_masks(self.net, lo, hi)
                conn[lo:hi] = _connected_masks(self.net, src, dst, alive)
            self._conn[j] = conn
        return self._conn[j]

    def reliability_matrix(self, p_matrix: np.ndarray, method: str) -> np.ndarray:
        """(B, m) reliabilities for a (B, n) matrix of probability vectors."""
        resolved = self.resolve_method(method)
        b = p_matrix.shape[0]
        m = len(self.objectives)
        out = np.empty((b, m), dtype=np.float64)
        if resolved == EXACT:
            fall = list(self.net.fallible_indices)
            f = len(fall)
            p_fall = p_matrix[:, fall]
            conns = [
                self.exact_connectivity(j).astype(np.float64) for j in range(m)
            ]
            n_states = 1 << f
            out[:] = 0.0
            for lo in range(0, n_states, _CHUNK):
                hi = min(n_states, lo + _CHUNK)
                idx = np.arange(lo, hi, dtype=np.uint64)
                probs = np.ones((b, hi - lo), dtype=np.float64)
                for j in range(f):
                    bit = ((idx >> np.uint64(f - 1 - j)) & np.uint64(1)).astype(bool)
                    probs *= np.where(
                        bit[np.newaxis, :],
                        1.0 - p_fall[:, j, np.newaxis],
                        p_fall[:, j, np.newaxis],
                    )
                for j in range(m):
                    out[:, j] += probs @ conns[j][lo:hi]
        elif resolved == MCUB:
            for j in range(m):
                idx, lens = self.cut_matrix(j)
                out[:, j] = kernels.mcub_batch(idx, lens, p_matrix)
        else:
            raise ValueError(
                "batched evaluation supports the exact and mcub methods only"
            )
        return out

    def estimate(
        self,
        j: int,
        p: Sequence[float] | None,
        method: str,
        samples: int = 100_000,
        seed: int = 0,
    ) -> ReliabilityEstimate:
        resolved = self.resolve_method(method)
        obj = self.objectives[j]
        if resolved == EXACT:
            return reliability_exact(self.net, obj, p, cap=self.cap)
        if resolved == MCUB:
            return reliability_mcub(self.cuts(j), _resolve_p(self.net, p))
        return reliability_monte_carlo(self.net, obj, p, samples=samples, seed=seed)


def connection_reliabilities(
    net: Network,
    objectives: Sequence[Objective],
    p: Sequence[float] | None = None,
    method: str = AUTO,
    cap: int = DEFAULT_ENUMERATION_CAP,
    context: ReliabilityContext | None = None,
) -> np.ndarray:
    """Reliability vector aligned with the objective list.

    ``auto`` picks exact enumeration while the fallible count stays within
    the cap and the cut-set bound above it. Pass a ReliabilityContext to
    reuse cached cut collections across calls.
    """
    ctx = context or ReliabilityContext(net, objectives, cap=cap)
    pvec = _resolve_p(net, p)
    resolved = ctx.resolve_method(method)
    if resolved == MONTE_CARLO:
        return np.array(
            [ctx.estimate(j, pvec, MONTE_CARLO).value for j in range(len(ctx.objectives))]
        )
    return ctx.reliability_matrix(pvec[np.newaxis, :], resolved)[0]
