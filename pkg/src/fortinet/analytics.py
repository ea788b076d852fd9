"""Post-frontier analysis.

Core indices say how often an action appears among the cost-efficient
portfolios of a given cost level. Centrality reports compare that with
purely topological importance. Sensitivity sweeps rerun the frontier
over a grid of failure-probability assumptions and check whether its
composition moves. Reliability curves trace the best attainable
reliability per objective as the budget grows.
"""

from __future__ import annotations

import dataclasses
import hashlib
import math
import warnings
from dataclasses import dataclass
from typing import Mapping, Sequence

import networkx as nx
import numpy as np
from scipy.stats import spearmanr

from ._parallel import run_items
from .errors import ApproximationWarning
from .frontier import BOUND_ALL_ON, Frontier, algorithm1, algorithm2
from .graphs import DEFAULT_ENUMERATION_CAP, Network, NodeId, NodeSpec, build_network
from .portfolios import Portfolio, ProblemSpec, TOL
from .preferences import ExtremePointSet
from .reliability import AUTO

CORE_EXACT = "exact"
CORE_AT_MOST = "at_most"


def core_index(
    frontier: Frontier,
    action: int,
    cost: float,
    *,
    mode: str = CORE_EXACT,
    tol: float = TOL,
) -> float:
    """Share of frontier portfolios at a cost level that include an action.

    The level holds the entries whose cost matches exactly (within
    tolerance); mode "at_most" widens it to every entry at or below the
    level. An empty level is an error rather than 0/0.
    """
    if mode not in (CORE_EXACT, CORE_AT_MOST):
        raise ValueError(f"unknown core index mode {mode!r}")
    entries = frontier.at_cost(cost, tol=tol, at_most=mode == CORE_AT_MOST)
    if not entries:
        raise ValueError(f"no frontier entries at cost level {cost!r}")
    if not 0 <= action < len(entries[0].portfolio):
        raise ValueError(f"action index {action} out of range")
    hits = sum(1 for e in entries if e.portfolio[action] == 1)
    return hits / len(entries)


@dataclass(frozen=True)
class CoreIndexTable:
    """Core index of every action at every requested cost level."""

    rows: tuple[tuple[str, float, float], ...]
    cost_levels: tuple[float, ...]


def core_index_table(
    frontier: Frontier,
    spec: ProblemSpec,
    costs: Sequence[float] | None = None,
    *,
    mode: str = CORE_EXACT,
) -> CoreIndexTable:
    levels = tuple(costs) if costs is not None else frontier.cost_levels()
    rows = []
    for level in levels:
        for i, action in enumerate(spec.actions):
            rows.append((action.id, float(level), core_index(frontier, i, level, mode=mode)))
    return CoreIndexTable(rows=tuple(rows), cost_levels=levels)


@dataclass(frozen=True)
class CentralityReport:
    """Topological importance of every node under unweighted shortest
    paths, with optional rank correlations against a supplied
    importance vector (for example per-node core indices)."""

    nodes: tuple[NodeId, ...]
    degree: tuple[int, ...]
    closeness: tuple[float, ...]
    betweenness: tuple[float, ...]
    spearman: Mapping[str, float] | None = None

    def measure(self, name: str) -> tuple[float, ...]:
        if name not in ("degree", "closeness", "betweenness"):
            raise ValueError(f"unknown centrality measure {name!r}")
        return getattr(self, name)


def _rank_correlation(x: Sequence[float], y: Sequence[float]) -> float:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        result = spearmanr(np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64))
    return float(result.correlation)


def centrality(
    net: Network, importance: Mapping[NodeId, float] | None = None
) -> CentralityReport:
    """Degree, closeness, and betweenness per node.

    Closeness is (reachable - 1) / sum of distances, computed per
    component with a warning when the graph is disconnected.
    Betweenness counts interior presence on shortest paths, splitting
    credit equally among equal-length paths, endpoints excluded.
    """
    graph = nx.Graph()
    graph.add_nodes_from(node.id for node in net.nodes)
    graph.add_edges_from(net.edges)
    if graph.number_of_nodes() and not nx.is_connected(graph):
        warnings.warn(
            "graph is disconnected; closeness is computed per component",
            ApproximationWarning,
            stacklevel=2,
        )
    close = nx.closeness_centrality(graph, wf_improved=False)
    between = nx.betweenness_centrality(graph, normalized=False, endpoints=False)
    order = tuple(node.id for node in net.nodes)
    degree = tuple(int(graph.degree[v]) for v in order)
    closeness = tuple(float(close[v]) for v in order)
    betweenness = tuple(float(between[v]) for v in order)
    correlations: Mapping[str, float] | None = None
    if importance is not None:
        missing = [v for v in order if v not in importance]
        if missing:
            raise ValueError(f"importance vector misses node {missing[0]!r}")
        imp = [float(importance[v]) for v in order]
        correlations = {
            "degree": _rank_correlation(degree, imp),
            "closeness": _rank_correlation(closeness, imp),
            "betweenness": _rank_correlation(betweenness, imp),
        }
    return CentralityReport(
        nodes=order,
        degree=degree,
        closeness=closeness,
        betweenness=betweenness,
        spearman=correlations,
    )


def frontier_fingerprint(frontier: Frontier) -> str:
    """Order-free digest of the portfolio composition, ignoring values."""
    return portfolio_fingerprint(frontier.portfolios())


def portfolio_fingerprint(portfolios: Sequence[Portfolio]) -> str:
    lines = sorted("".join(str(int(v)) for v in q) for q in portfolios)
    return hashlib.sha256("\n".join(lines).encode("ascii")).hexdigest()


@dataclass(frozen=True)
class SensitivityCell:
    p_fail: float
    divisor: float
    p_after: float
    frontier_size: int
    fingerprint: str
    portfolios: tuple[Portfolio, ...]


@dataclass(frozen=True)
class SensitivityReport:
    """Frontier composition across a failure-probability grid."""

    cells: tuple[SensitivityCell, ...]
    composition_invariant: bool


def _with_uniform_probabilities(
    spec: ProblemSpec, p_fail: float, divisor: float
) -> ProblemSpec:
    """Assign one baseline to every fallible node and scale every action's
    achieved probability to baseline / divisor (0 for an infinite divisor),
    clipped to the node's own baseline."""
    nodes = []
    for node in spec.network.nodes:
        if node.is_fallible():
            nodes.append(NodeSpec(id=node.id, p_fail=p_fail, fallible=node.fallible))
        else:
            nodes.append(node)
    net = build_network(nodes, spec.network.edges, spec.network.border_nodes)
    reduced = 0.0 if math.isinf(divisor) else p_fail / divisor
    actions = []
    for action in spec.actions:
        baseline = net.nodes[net.index[action.node]].p_fail
        actions.append(
            dataclasses.replace(action, p_after=min(reduced, baseline))
        )
    return dataclasses.replace(spec, network=net, actions=tuple(actions))


def sensitivity_sweep(
    spec: ProblemSpec,
    p_grid: Sequence[float],
    divisor_grid: Sequence[float],
    *,
    basis: ExtremePointSet | None = None,
    method: str = AUTO,
    bound: str = BOUND_ALL_ON,
    cap: int = DEFAULT_ENUMERATION_CAP,
    apply_requirements: bool = True,
    threads: int | None = None,
) -> SensitivityReport:
    """Recompute the frontier for every (baseline, divisor) grid cell.

    Cells run independently in parallel and are reported in grid order,
    baselines outer, divisors inner. The report flags whether every cell
    produced the same portfolio composition.
    """
    for p in p_grid:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"baseline probability {p} outside [0, 1]")
    for d in divisor_grid:
        if not (math.isinf(d) or d >= 1.0):
            raise ValueError(f"divisor {d} must be >= 1 or infinite")
    grid = [(float(p), float(d)) for p in p_grid for d in divisor_grid]

    def run_cell(cell: tuple[float, float]) -> SensitivityCell:
        p_fail, divisor = cell
        cell_spec = _with_uniform_probabilities(spec, p_fail, divisor)
        solver = (
            algorithm2
            if apply_requirements and any(a > 0.0 for a in cell_spec.alpha)
            else algorithm1
        )
        frontier = solver(
            cell_spec, basis, method=method, bound=bound, cap=cap, threads=1
        )
        portfolios = frontier.portfolios()
        return SensitivityCell(
            p_fail=p_fail,
            divisor=divisor,
            p_after=0.0 if math.isinf(divisor) else p_fail / divisor,
            frontier_size=len(portfolios),
            fingerprint=portfolio_fingerprint(portfolios),
            portfolios=portfolios,
        )

    cells = tuple(run_items(run_cell, grid, threads))
    prints = {cell.fingerprint for cell in cells}
    return SensitivityReport(
        cells=cells, composition_invariant=len(prints) <= 1
    )


def reliability_curves(
    spec: ProblemSpec,
    budgets: Sequence[float],
    *,
    basis: ExtremePointSet | None = None,
    method: str = AUTO,
    bound: str = BOUND_ALL_ON,
    cap: int = DEFAULT_ENUMERATION_CAP,
    threads: int | None = None,
) -> tuple[tuple[float, str, float], ...]:
    """(budget, objective, best frontier reliability) rows.

    When the evaluation basis contains every canonical weight vector,
    the frontier provably contains a portfolio attaining the feasible
    maximum of each objective, so the curves are non-decreasing.
    """
    budget_list = [float(b) for b in budgets]
    if budget_list != sorted(budget_list):
        raise ValueError("budgets must be sorted ascending")
    if any(b < 0 for b in budget_list):
        raise ValueError("budgets must be nonnegative")
    rows: list[tuple[float, str, float]] = []
    for budget in budget_list:
        level_spec = dataclasses.replace(spec, budget=budget)
        frontier = algorithm1(
            level_spec, basis, method=method, bound=bound, cap=cap, threads=threads
        )
        for j, objective in enumerate(spec.objectives):
            best = max(entry.reliabilities[j] for entry in frontier.entries)
            rows.append((budget, objective.name, float(best)))
    return tuple(rows)
