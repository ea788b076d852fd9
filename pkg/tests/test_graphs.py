"""Network construction, state enumeration, and connectivity semantics."""

from __future__ import annotations

import itertools

import networkx as nx
import numpy as np
import pytest

from fortinet import (
    EnumerationCapError,
    NetworkValidationError,
    NodeSpec,
    build_network,
    enumerate_states,
    is_connected,
    operational_subgraph,
    state_probability,
)
from helpers import random_network


def line_network():
    nodes = [NodeSpec("A"), NodeSpec("m", p_fail=0.2), NodeSpec("B")]
    return build_network(nodes, [("A", "m"), ("m", "B")], ["A", "B"])


def test_node_spec_fallibility_defaults():
    assert not NodeSpec("x").is_fallible()
    assert NodeSpec("x", p_fail=0.1).is_fallible()
    assert NodeSpec("x", p_fail=0.0, fallible=True).is_fallible()
    assert not NodeSpec("x", p_fail=0.0, fallible=False).is_fallible()


@pytest.mark.parametrize(
    "nodes, edges, borders, message",
    [
        ([], [], [], "at least one node"),
        ([NodeSpec("a"), NodeSpec("a")], [], ["a", "a"], "duplicate node id"),
        ([NodeSpec("a", p_fail=1.5), NodeSpec("b")], [], ["a", "b"], "outside"),
        (
            [NodeSpec("a", p_fail=0.2, fallible=False), NodeSpec("b")],
            [],
            ["a", "b"],
            "conflicts",
        ),
        ([NodeSpec("a"), NodeSpec("b")], [("a", "c")], ["a", "b"], "dangling"),
        ([NodeSpec("a"), NodeSpec("b")], [("a", "a")], ["a", "b"], "self-loop"),
        ([NodeSpec("a"), NodeSpec("b")], [], ["a"], "at least two border"),
        ([NodeSpec("a"), NodeSpec("b")], [], ["a", "z"], "unknown border"),
        ([NodeSpec("a"), NodeSpec("b")], [], ["a", "a"], "listed twice"),
    ],
)
def test_build_network_rejects_invalid_input(nodes, edges, borders, message):
    with pytest.raises(NetworkValidationError, match=message):
        build_network(nodes, edges, borders)


def test_duplicate_edges_collapse():
    net = build_network(
        [NodeSpec("a"), NodeSpec("b")],
        [("a", "b"), ("b", "a"), ("a", "b")],
        ["a", "b"],
    )
    assert net.edges == (("a", "b"),)
    assert net.adjacency_lists == ((1,), (0,))


def test_network_index_and_masks():
    net = line_network()
    assert net.n == 3
    assert net.index == {"A": 0, "m": 1, "B": 2}
    assert net.fallible_indices == (1,)
    assert net.border_indices == (0, 2)
    assert net.nbr_masks is not None
    assert int(net.nbr_masks[1]) == 0b101


def test_enumerate_states_counting_order():
    net = build_network(
        [NodeSpec("A"), NodeSpec("x", 0.1), NodeSpec("y", 0.1), NodeSpec("B")],
        [("A", "x"), ("x", "y"), ("y", "B")],
        ["A", "B"],
    )
    states = list(enumerate_states(net))
    assert len(states) == 4
    # non-fallible nodes pinned up; first fallible node is the high bit
    assert states[0] == (1, 0, 0, 1)
    assert states[1] == (1, 0, 1, 1)
    assert states[2] == (1, 1, 0, 1)
    assert states[3] == (1, 1, 1, 1)


def test_enumerate_states_cap():
    rng = np.random.default_rng(3)
    net = random_network(rng, max_fallible=6, p_min=0.1, p_max=0.2)
    with pytest.raises(EnumerationCapError, match="exceed the exact-enumeration cap"):
        list(enumerate_states(net, cap=1))


def test_state_probabilities_sum_to_one():
    rng = np.random.default_rng(5)
    for _ in range(10):
        net = random_network(rng, max_fallible=7)
        total = sum(
            state_probability(net.base_p, x) for x in enumerate_states(net)
        )
        assert total == pytest.approx(1.0, abs=1e-12)


def test_state_probability_validation():
    with pytest.raises(ValueError, match="differ in length"):
        state_probability([0.1], (1, 0))
    with pytest.raises(ValueError, match="outside"):
        state_probability([1.4, 0.0], (1, 0))


def test_operational_subgraph():
    net = line_network()
    alive, edges = operational_subgraph(net, (1, 0, 1))
    assert alive == {"A", "B"}
    assert edges == frozenset()
    alive, edges = operational_subgraph(net, (1, 1, 1))
    assert edges == {("A", "m"), ("m", "B")}


def test_is_connected_matches_networkx():
    rng = np.random.default_rng(9)
    for _ in range(25):
        net = random_network(rng, max_fallible=8)
        pair = net.border_nodes[:2]
        for x in itertools.islice(enumerate_states(net), 64):
            alive_ids, alive_edges = operational_subgraph(net, x)
            graph = nx.Graph()
            graph.add_nodes_from(alive_ids)
            graph.add_edges_from(alive_edges)
            want = (
                pair[0] in alive_ids
                and pair[1] in alive_ids
                and nx.has_path(graph, pair[0], pair[1])
            )
            assert is_connected(net, x, pair) == want


def test_is_connected_requires_border_pair():
    net = line_network()
    with pytest.raises(NetworkValidationError, match="not a border node"):
        is_connected(net, (1, 1, 1), ("A", "m"))
    with pytest.raises(NetworkValidationError, match="unknown node"):
        is_connected(net, (1, 1, 1), ("A", "zz"))
    with pytest.raises(ValueError, match="state entries"):
        is_connected(net, (1, 2, 1), ("A", "B"))
