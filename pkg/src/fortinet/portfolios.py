"""Fortification actions, portfolios, feasibility, and dominance relations.

A portfolio is a binary selection vector over the action list. Its cost
is additive, its effect replaces the failure probability of each
fortified node, and its value is the expected utility
sum_j w_j R_j(portfolio) evaluated at every extreme point of the weight
set.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import (
    BasisMismatchError,
    InfeasiblePortfolioError,
)
from .graphs import DEFAULT_ENUMERATION_CAP, Network, NodeId
from .preferences import TOL, ExtremePointSet, WeightSet, extreme_points
from .reliability import AUTO, Objective, ReliabilityContext

Portfolio = tuple[int, ...]

MUTEX = "mutex"
IMPLIES = "implies"
AT_MOST_K = "at_most_k"


@dataclass(frozen=True)
class FortificationAction:
    """Fortifying ``node`` costs ``cost`` and lowers its failure probability
    to ``p_after``, which may not exceed the baseline."""

    id: str
    node: NodeId
    cost: float
    p_after: float


@dataclass(frozen=True)
class LogicalConstraint:
    """mutex: at most one of ``actions``; implies: selecting the first
    requires the second; at_most_k: at most ``k`` of ``actions``."""

    kind: str
    actions: tuple[str, ...]
    k: int | None = None


@dataclass(frozen=True)
class ProblemSpec:
    """A complete fortification problem instance."""

    network: Network
    objectives: tuple[Objective, ...]
    actions: tuple[FortificationAction, ...]
    budget: float
    constraints: tuple[LogicalConstraint, ...]
    weight_set: WeightSet

    @cached_property
    def alpha(self) -> tuple[float, ...]:
        return tuple(o.min_reliability for o in self.objectives)

    @cached_property
    def action_index(self) -> dict[str, int]:
        return {a.id: i for i, a in enumerate(self.actions)}

    @cached_property
    def h(self) -> int:
        return len(self.actions)

    @cached_property
    def cost_vector(self) -> np.ndarray:
        arr = np.array([a.cost for a in self.actions], dtype=np.float64)
        arr.flags.writeable = False
        return arr

    @cached_property
    def node_mutex_groups(self) -> tuple[tuple[int, ...], ...]:
        """Implicit mutex: at most one action per node in any portfolio."""
        by_node: dict[NodeId, list[int]] = {}
        for i, a in enumerate(self.actions):
            by_node.setdefault(a.node, []).append(i)
        return tuple(
            tuple(v) for v in by_node.values() if len(v) > 1
        )


def build_problem(
    network: Network,
    objectives: Sequence[Objective],
    actions: Sequence[FortificationAction],
    budget: float,
    constraints: Sequence[LogicalConstraint] = (),
    weight_set: WeightSet | None = None,
) -> ProblemSpec:
    """Validate and assemble a ProblemSpec.

    Checks action identity and targets, baseline-consistent improvements,
    nonnegative costs and budget, constraint arity, objective naming, and
    that the weight-set dimension matches the objective count.
    """
    if not objectives:
        raise ValueError("at least one objective is required")
    names = [o.name for o in objectives]
    if len(set(names)) != len(names):
        raise ValueError("objective names must be unique")
    for o in objectives:
        if not (0.0 <= o.min_reliability <= 1.0):
            raise ValueError(
                f"objective {o.name!r}: min_reliability outside [0, 1]"
            )
    ids = set()
    for a in actions:
        if a.id in ids:
            raise ValueError(f"duplicate action id {a.id!r}")
        ids.add(a.id)
        if a.node not in network.index:
            raise ValueError(f"action {a.id!r} targets unknown node {a.node!r}")
        if a.cost < 0:
            raise ValueError(f"action {a.id!r} has negative cost")
        baseline = network.nodes[network.index[a.node]].p_fail
        if not (0.0 <= a.p_after <= baseline + TOL):
            raise ValueError(
                f"action {a.id!r}: p_after {a.p_after} must lie in [0, "
                f"baseline p_fail {baseline}]"
            )
    if budget < 0:
        raise ValueError("budget must be nonnegative")
    for c in constraints:
        unknown = [x for x in c.actions if x not in ids]
        if unknown:
            raise ValueError(f"constraint references unknown action {unknown[0]!r}")
        if len(set(c.actions)) != len(c.actions):
            raise ValueError("constraint lists an action twice")
        if c.kind == MUTEX:
            if len(c.actions) < 2:
                raise ValueError("mutex constraints need at least two actions")
        elif c.kind == IMPLIES:
            if len(c.actions) != 2:
                raise ValueError("implies constraints take exactly two actions")
        elif c.kind == AT_MOST_K:
            if c.k is None or c.k < 1:
                raise ValueError("at_most_k constraints need k >= 1")
            if len(c.actions) < 2:
                raise ValueError("at_most_k constraints need at least two actions")
        else:
            raise ValueError(f"unknown constraint kind {c.kind!r}")
    ws = weight_set if weight_set is not None else WeightSet(m=len(objectives))
    if ws.m != len(objectives):
        raise ValueError(
            f"weight set dimension {ws.m} does not match {len(objectives)} objectives"
        )
    return ProblemSpec(
        network=network,
        objectives=tuple(objectives),
        actions=tuple(actions),
        budget=float(budget),
        constraints=tuple(constraints),
        weight_set=ws,
    )


@dataclass(frozen=True)
class EvaluatedPortfolio:
    """A portfolio with its cost, per-objective reliabilities, and expected
    utility at every extreme point of the evaluation basis."""

    portfolio: Portfolio
    cost: float
    reliabilities: tuple[float, ...]
    utilities_at_extremes: tuple[float, ...]
    basis: ExtremePointSet


def _check_portfolio(spec: ProblemSpec, q: Sequence[int]) -> None:
    if len(q) != spec.h:
        raise ValueError(f"portfolio has length {len(q)}, expected {spec.h}")
    for v in q:
        if v not in (0, 1):
            raise ValueError(f"portfolio entries must be 0 or 1, got {v!r}")


def portfolio_cost(q: Sequence[int], spec: ProblemSpec) -> float:
    _check_portfolio(spec, q)
    return float(sum(a.cost for a, v in zip(spec.actions, q) if v))


def is_feasible(q: Sequence[int], spec: ProblemSpec) -> bool:
    """Budget plus explicit logical constraints plus the implicit one-action-
    per-node mutex."""
    _check_portfolio(spec, q)
    if portfolio_cost(q, spec) > spec.budget + TOL:
        return False
    for group in spec.node_mutex_groups:
        if sum(q[i] for i in group) > 1:
            return False
    for c in spec.constraints:
        idx = [spec.action_index[x] for x in c.actions]
        if c.kind == MUTEX:
            if sum(q[i] for i in idx) > 1:
                return False
        elif c.kind == IMPLIES:
            if q[idx[0]] == 1 and q[idx[1]] == 0:
                return False
        elif c.kind == AT_MOST_K:
            if sum(q[i] for i in idx) > c.k:
                return False
    return True


def effective_probabilities(q: Sequence[int], spec: ProblemSpec) -> np.ndarray:
    """Node failure probabilities after applying the selected actions.

    Feasible portfolios select at most one action per node. If a forced
    evaluation selects several, the smallest p_after wins, which keeps the
    result order-independent.
    """
    _check_portfolio(spec, q)
    p = np.array(spec.network.base_p, dtype=np.float64)
    for a, v in zip(spec.actions, q):
        if v:
            i = spec.network.index[a.node]
            p[i] = min(p[i], a.p_after)
    return p


class EvaluationContext:
    """Caches everything needed to evaluate portfolio batches for one
    problem and basis: cut collections, connectivity tables, cost and
    constraint matrices."""

    def __init__(
        self,
        spec: ProblemSpec,
        basis: ExtremePointSet | None = None,
        method: str = AUTO,
        cap: int = DEFAULT_ENUMERATION_CAP,
        max_cut_size: int | None = None,
        rel_context: ReliabilityContext | None = None,
    ):
        self.spec = spec
        self.basis = basis if basis is not None else extreme_points(spec.weight_set)
        if len(self.basis) == 0:
            raise ValueError("evaluation basis has no extreme points")
        self.rel = rel_context or ReliabilityContext(
            spec.network, spec.objectives, cap=cap, max_cut_size=max_cut_size
        )
        self.method = self.rel.resolve_method(method)
        self.weight_matrix = self.basis.matrix  # (E, m)
        self._node_cols = np.array(
            [spec.network.index[a.node] for a in spec.actions], dtype=np.int64
        )
        self._p_after = np.array([a.p_after for a in spec.actions], dtype=np.float64)

    def effective_matrix(self, bits: np.ndarray) -> np.ndarray:
        """(B, n) failure probabilities for a (B, h) selection matrix."""
        b = bits.shape[0]
        p = np.tile(self.spec.network.base_p, (b, 1))
        for l in range(self.spec.h):
            rows = bits[:, l].astype(bool)
            if rows.any():
                col = self._node_cols[l]
                p[rows, col] = np.minimum(p[rows, col], self._p_after[l])
        return p

    def evaluate_bits(
        self, bits: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Costs, reliabilities (B, m), and utilities (B, E) for a batch."""
        bits = np.asarray(bits, dtype=np.int8).reshape(-1, self.spec.h)
        costs = bits.astype(np.float64) @ self.spec.cost_vector
        p_matrix = self.effective_matrix(bits)
        r_matrix = self.rel.reliability_matrix(p_matrix, self.method)
        u_matrix = r_matrix @ self.weight_matrix.T
        return costs, r_matrix, u_matrix

    def evaluated(self, q: Sequence[int]) -> EvaluatedPortfolio:
        bits = np.asarray(q, dtype=np.int8).reshape(1, -1)
        costs, r_matrix, u_matrix = self.evaluate_bits(bits)
        return EvaluatedPortfolio(
            portfolio=tuple(int(v) for v in q),
            cost=float(costs[0]),
            reliabilities=tuple(float(v) for v in r_matrix[0]),
            utilities_at_extremes=tuple(float(v) for v in u_matrix[0]),
            basis=self.basis,
        )


def evaluate(
    q: Sequence[int],
    spec: ProblemSpec,
    basis: ExtremePointSet | None = None,
    method: str = AUTO,
    cap: int = DEFAULT_ENUMERATION_CAP,
    context: EvaluationContext | None = None,
    force: bool = False,
) -> EvaluatedPortfolio:
    """Evaluate one portfolio.

    Refuses infeasible portfolios unless ``force`` is set; forced
    evaluations still produce well-defined values and are used for
    optimistic extension bounds.
    """
    _check_portfolio(spec, q)
    if not force and not is_feasible(q, spec):
        raise InfeasiblePortfolioError(
            f"portfolio {tuple(q)} is infeasible; pass force=True to evaluate anyway"
        )
    ctx = context or EvaluationContext(spec, basis=basis, method=method, cap=cap)
    return ctx.evaluated(q)


def _check_comparable(a: EvaluatedPortfolio, b: EvaluatedPortfolio) -> None:
    if a.basis.points != b.basis.points:
        raise BasisMismatchError(
            "portfolios were evaluated under different extreme-point bases"
        )
    if len(a.utilities_at_extremes) != len(b.utilities_at_extremes):
        raise BasisMismatchError("utility vectors differ in length")


def dominates(q2: EvaluatedPortfolio, q1: EvaluatedPortfolio, tol: float = TOL) -> bool:
    """True iff q2's utility is at least q1's at every extreme point and
    strictly greater at some, within tolerance."""
    _check_comparable(q2, q1)
    u2 = q2.utilities_at_extremes
    u1 = q1.utilities_at_extremes
    ge_all = all(a >= b - tol for a, b in zip(u2, u1))
    gt_any = any(a > b + tol for a, b in zip(u2, u1))
    return ge_all and gt_any


def utility_equivalent(
    q2: EvaluatedPortfolio, q1: EvaluatedPortfolio, tol: float = TOL
) -> bool:
    """True iff the utilities agree at every extreme point within tolerance."""
    _check_comparable(q2, q1)
    return all(
        abs(a - b) <= tol
        for a, b in zip(q2.utilities_at_extremes, q1.utilities_at_extremes)
    )


def cost_efficient_wrt(
    q1: EvaluatedPortfolio, q2: EvaluatedPortfolio, tol: float = TOL
) -> bool:
    """True iff q1 beats q2: it dominates at no greater cost, or is
    utility-equivalent at strictly lower cost."""
    if dominates(q1, q2, tol) and q1.cost <= q2.cost + tol:
        return True
    return utility_equivalent(q1, q2, tol) and q1.cost < q2.cost - tol
