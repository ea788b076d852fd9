"""Failure-prone undirected networks, their states, and state probabilities.

Nodes fail independently; edges never fail. A network state assigns each
node 1 (operational) or 0 (disrupted). Border nodes are the service
endpoints between which connectivity is evaluated.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import EnumerationCapError, NetworkValidationError

NodeId = str
State = tuple[int, ...]

DEFAULT_ENUMERATION_CAP = 20


@dataclass(frozen=True)
class NodeSpec:
    """A node with an independent failure probability.

    ``fallible`` is derived from ``p_fail > 0`` when left as None; an
    explicit True keeps a currently reliable node in the varying set.
    """

    id: NodeId
    p_fail: float = 0.0
    fallible: bool | None = None

    def is_fallible(self) -> bool:
        if self.fallible is not None:
            return self.fallible
        return self.p_fail > 0.0


@dataclass(frozen=True)
class Network:
    """Immutable undirected network over NodeSpec entries.

    Node order is the construction order and fixes the meaning of state
    and probability vectors. Build through :func:`build_network` so the
    structural invariants are checked.
    """

    nodes: tuple[NodeSpec, ...]
    edges: tuple[tuple[NodeId, NodeId], ...]
    border_nodes: tuple[NodeId, ...]

    @cached_property
    def n(self) -> int:
        return len(self.nodes)

    @cached_property
    def index(self) -> dict[NodeId, int]:
        return {spec.id: i for i, spec in enumerate(self.nodes)}

    @cached_property
    def adjacency_lists(self) -> tuple[tuple[int, ...], ...]:
        nbrs: list[list[int]] = [[] for _ in range(self.n)]
        for a, b in self.edges:
            ia, ib = self.index[a], self.index[b]
            nbrs[ia].append(ib)
            nbrs[ib].append(ia)
        return tuple(tuple(sorted(set(v))) for v in nbrs)

    @cached_property
    def nbr_masks(self) -> np.ndarray | None:
        """uint64 neighbor bitmasks, or None when the network exceeds 64 nodes."""
        if self.n > 64:
            return None
        masks = np.zeros(self.n, dtype=np.uint64)
        for i, nbrs in enumerate(self.adjacency_lists):
            m = np.uint64(0)
            for j in nbrs:
                m |= np.uint64(1) << np.uint64(j)
            masks[i] = m
        masks.flags.writeable = False
        return masks

    @cached_property
    def fallible_indices(self) -> tuple[int, ...]:
        return tuple(i for i, spec in enumerate(self.nodes) if spec.is_fallible())

    @cached_property
    def border_indices(self) -> tuple[int, ...]:
        return tuple(self.index[b] for b in self.border_nodes)

    @cached_property
    def base_p(self) -> np.ndarray:
        p = np.array([spec.p_fail for spec in self.nodes], dtype=np.float64)
        p.flags.writeable = False
        return p


def build_network(
    nodes: Sequence[NodeSpec],
    edges: Iterable[tuple[NodeId, NodeId]],
    border_nodes: Sequence[NodeId],
) -> Network:
    """Validate and assemble a Network.

    Raises NetworkValidationError on duplicate node ids, dangling edge
    endpoints, self-loops, unknown or repeated border ids, or fewer than
    two borders. Duplicate edges are collapsed, first occurrence kept.
    """
    if not nodes:
        raise NetworkValidationError("network needs at least one node")
    seen: set[NodeId] = set()
    for spec in nodes:
        if spec.id in seen:
            raise NetworkValidationError(f"duplicate node id {spec.id!r}")
        seen.add(spec.id)
        if not (0.0 <= spec.p_fail <= 1.0):
            raise NetworkValidationError(
                f"node {spec.id!r}: p_fail {spec.p_fail} outside [0, 1]"
            )
        if spec.fallible is False and spec.p_fail > 0.0:
            raise NetworkValidationError(
                f"node {spec.id!r}: fallible=False conflicts with p_fail > 0"
            )
    cleaned: list[tuple[NodeId, NodeId]] = []
    seen_edges: set[frozenset[NodeId]] = set()
    for a, b in edges:
        if a not in seen or b not in seen:
            raise NetworkValidationError(f"edge ({a!r}, {b!r}) has a dangling endpoint")
        if a == b:
            raise NetworkValidationError(f"self-loop on node {a!r}")
        key = frozenset((a, b))
        if key in seen_edges:
            continue
        seen_edges.add(key)
        cleaned.append((a, b))
    if len(border_nodes) < 2:
        raise NetworkValidationError("at least two border nodes are required")
    border_seen: set[NodeId] = set()
    for b in border_nodes:
        if b not in seen:
            raise NetworkValidationError(f"unknown border node id {b!r}")
        if b in border_seen:
            raise NetworkValidationError(f"border node {b!r} listed twice")
        border_seen.add(b)
    return Network(tuple(nodes), tuple(cleaned), tuple(border_nodes))


def _check_state(net: Network, x: Sequence[int]) -> None:
    if len(x) != net.n:
        raise ValueError(f"state has length {len(x)}, expected {net.n}")
    for v in x:
        if v not in (0, 1):
            raise ValueError(f"state entries must be 0 or 1, got {v!r}")


def operational_subgraph(
    net: Network, x: Sequence[int]
) -> tuple[frozenset[NodeId], frozenset[tuple[NodeId, NodeId]]]:
    """Nodes and edges that survive in state ``x`` (both endpoints operational)."""
    _check_state(net, x)
    alive_ids = frozenset(spec.id for spec, v in zip(net.nodes, x) if v == 1)
    alive_edges = frozenset(
        (a, b) for a, b in net.edges if a in alive_ids and b in alive_ids
    )
    return alive_ids, alive_edges


def is_connected(net: Network, x: Sequence[int], pair: tuple[NodeId, NodeId]) -> bool:
    """True iff a path of operational nodes joins the two border nodes in state x.

    Both endpoints must themselves be operational for the pair to count as
    connected. Raises NetworkValidationError when a pair member is not a
    border node.
    """
    _check_state(net, x)
    src, dst = pair
    for node in (src, dst):
        if node not in net.index:
            raise NetworkValidationError(f"unknown node id {node!r} in pair")
        if node not in net.border_nodes:
            raise NetworkValidationError(f"pair member {node!r} is not a border node")
    si, di = net.index[src], net.index[dst]
    if not x[si] or not x[di]:
        return False
    if si == di:
        return True
    seen = [False] * net.n
    seen[si] = True
    queue = deque([si])
    while queue:
        i = queue.popleft()
        for j in net.adjacency_lists[i]:
            if x[j] and not seen[j]:
                if j == di:
                    return True
                seen[j] = True
                queue.append(j)
    return False


def state_probability(p: Sequence[float], x: Sequence[int]) -> float:
    """Probability of state ``x`` under independent node failures ``p``.

    Each node contributes 1 - p_k when operational and p_k when disrupted.
    """
    if len(p) != len(x):
        raise ValueError("probability vector and state differ in length")
    prob = 1.0
    for pk, xk in zip(p, x):
        if not (0.0 <= pk <= 1.0):
            raise ValueError(f"failure probability {pk} outside [0, 1]")
        prob *= (1.0 - pk) if xk else pk
    return prob


def enumerate_states(
    net: Network, cap: int = DEFAULT_ENUMERATION_CAP
) -> Iterator[State]:
    """Yield every network state in binary counting order.

    Only fallible nodes vary; perfectly reliable nodes are pinned
    operational. The first fallible node in node order is the most
    significant bit, so the fallible-bit string of consecutive states
    reads 00, 01, 10, 11, ... Raises EnumerationCapError when the count
    of fallible nodes exceeds ``cap``.
    """
    fall = net.fallible_indices
    f = len(fall)
    if f > cap:
        raise EnumerationCapError(
            f"{f} fallible nodes exceed the exact-enumeration cap of {cap}; "
            "use the cut-set approximation or raise the cap"
        )
    base = [1] * net.n
    shifts = [f - 1 - j for j in range(f)]
    for s in range(1 << f):
        for j in range(f):
            base[fall[j]] = (s >> shifts[j]) & 1
        yield tuple(base)
