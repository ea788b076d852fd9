"""Shared test utilities: randomized instance generators and reference
implementations used as oracles.

The reference frontier builders enumerate every feasible portfolio and
apply the pairwise cost-efficiency predicate directly, so they share no
pruning or vectorised comparison code with the search engine under test.
"""

from __future__ import annotations

import itertools

import numpy as np

from fortinet import (
    EvaluatedPortfolio,
    EvaluationContext,
    FortificationAction,
    LogicalConstraint,
    NodeSpec,
    Objective,
    WeightConstraint,
    augment_with_requirements,
    build_network,
    build_problem,
    cost_efficient_wrt,
    extreme_points,
    is_feasible,
    make_weight_set,
    noninformative_set,
)
from fortinet.errors import InfeasibleWeightSetError
from fortinet.fixtures import fixture_path
from fortinet.problem_io import load_document


def load_fixture(name):
    return load_document(fixture_path(name))


def connected_edges(rng, names):
    """Random edge list that is guaranteed to span all names."""
    order = [names[int(i)] for i in rng.permutation(len(names))]
    edges = [(order[i], order[i + 1]) for i in range(len(order) - 1)]
    for _ in range(int(rng.integers(1, len(names) + 1))):
        i, j = rng.choice(len(names), size=2, replace=False)
        edges.append((names[int(i)], names[int(j)]))
    return edges


def random_network(rng, max_fallible=10, p_min=0.01, p_max=0.3, borders=2):
    n_fall = int(rng.integers(2, max_fallible + 1))
    border_ids = [f"T{i}" for i in range(borders)]
    inner = [f"v{i}" for i in range(n_fall)]
    nodes = [NodeSpec(id=b) for b in border_ids] + [
        NodeSpec(id=v, p_fail=float(rng.uniform(p_min, p_max))) for v in inner
    ]
    return build_network(nodes, connected_edges(rng, border_ids + inner), border_ids)


def random_weight_set(rng, m):
    """Half the draws keep the full simplex; the rest add one or two
    inequalities (ordering, upper bound, or lower bound), retrying until
    the polytope stays feasible."""
    if rng.random() < 0.5:
        return noninformative_set(m)
    for _ in range(8):
        cons = []
        for _ in range(int(rng.integers(1, 3))):
            kind = int(rng.integers(0, 3))
            coeffs = [0.0] * m
            if kind == 0:
                i, j = rng.choice(m, size=2, replace=False)
                # w_i >= w_j
                coeffs[int(i)] = -1.0
                coeffs[int(j)] = 1.0
                cons.append(WeightConstraint(tuple(coeffs), 0.0))
            elif kind == 1:
                coeffs[int(rng.integers(m))] = 1.0
                cons.append(
                    WeightConstraint(tuple(coeffs), float(rng.uniform(0.4, 0.9)))
                )
            else:
                coeffs[int(rng.integers(m))] = -1.0
                cons.append(
                    WeightConstraint(tuple(coeffs), -float(rng.uniform(0.05, 0.3)))
                )
        try:
            return make_weight_set(m, cons)
        except InfeasibleWeightSetError:
            continue
    return noninformative_set(m)


def random_instance(rng, with_alpha=True):
    """One randomized problem: 3 border nodes, 2 to 8 fallible nodes, 2 to 8
    actions with costs in {1, 2, 3}, 2 or 3 objectives, random budget and
    weight constraints, and a mutex or implies constraint on 30% of draws."""
    net = random_network(rng, max_fallible=8, p_min=0.02, p_max=0.3, borders=3)
    border_ids = list(net.border_nodes)
    pairs = list(itertools.combinations(border_ids, 2))
    m = int(rng.integers(2, 4))
    chosen = [pairs[int(i)] for i in rng.choice(len(pairs), size=m, replace=False)]
    objectives = []
    for k, pair in enumerate(chosen):
        alpha = 0.0
        if with_alpha and rng.random() < 0.5:
            alpha = float(rng.uniform(0.6, 0.995))
        objectives.append(Objective(name=f"o{k}", pair=pair, min_reliability=alpha))
    fallible_ids = [net.nodes[i].id for i in net.fallible_indices]
    h = int(rng.integers(2, 9))
    actions = []
    for l in range(h):
        node = fallible_ids[int(rng.integers(len(fallible_ids)))]
        base = net.nodes[net.index[node]].p_fail
        actions.append(
            FortificationAction(
                id=f"a{l}",
                node=node,
                cost=float(rng.integers(1, 4)),
                p_after=float(base * rng.uniform(0.0, 0.8)),
            )
        )
    total = sum(a.cost for a in actions)
    budget = float(rng.integers(1, max(2, int(0.75 * total)) + 1))
    constraints = []
    if rng.random() < 0.3:
        if rng.random() < 0.5 and h >= 3:
            size = int(rng.integers(2, 4))
            members = rng.choice(h, size=size, replace=False)
            constraints.append(
                LogicalConstraint(
                    kind="mutex", actions=tuple(f"a{int(i)}" for i in sorted(members))
                )
            )
        else:
            i, j = rng.choice(h, size=2, replace=False)
            constraints.append(
                LogicalConstraint(kind="implies", actions=(f"a{int(i)}", f"a{int(j)}"))
            )
    return build_problem(
        network=net,
        objectives=tuple(objectives),
        actions=tuple(actions),
        budget=budget,
        constraints=tuple(constraints),
        weight_set=random_weight_set(rng, m),
    )


def all_feasible(spec):
    return [
        q for q in itertools.product((0, 1), repeat=spec.h) if is_feasible(q, spec)
    ]


def evaluate_portfolios(spec, basis, portfolios):
    """Batch-evaluate explicit portfolios into EvaluatedPortfolio records."""
    ctx = EvaluationContext(spec, basis=basis)
    if not portfolios:
        return []
    costs, rel, util = ctx.evaluate_bits(np.asarray(portfolios, dtype=np.int8))
    return [
        EvaluatedPortfolio(
            portfolio=tuple(int(v) for v in q),
            cost=float(costs[i]),
            reliabilities=tuple(float(v) for v in rel[i]),
            utilities_at_extremes=tuple(float(v) for v in util[i]),
            basis=ctx.basis,
        )
        for i, q in enumerate(portfolios)
    ]


def pairwise_frontier(evals):
    """Cost-efficiency by direct pairwise comparison, no pruning."""
    return {
        e.portfolio
        for e in evals
        if not any(
            cost_efficient_wrt(other, e)
            for other in evals
            if other.portfolio != e.portfolio
        )
    }


def reference_frontier(spec, basis=None):
    base = basis if basis is not None else extreme_points(spec.weight_set)
    return pairwise_frontier(evaluate_portfolios(spec, base, all_feasible(spec)))


def reference_requirement_frontier(spec, basis=None):
    """Requirement-aware reference: frontier under the canonical-augmented
    basis, filtered by the minimum reliability levels, then re-filtered for
    cost-efficiency under the original basis."""
    base = basis if basis is not None else extreme_points(spec.weight_set)
    star = augment_with_requirements(base, spec.alpha)
    wide = pairwise_frontier(evaluate_portfolios(spec, star, all_feasible(spec)))
    kept = [
        e
        for e in evaluate_portfolios(spec, base, sorted(wide))
        if all(r >= a - 1e-9 for r, a in zip(e.reliabilities, spec.alpha))
    ]
    return pairwise_frontier(kept)


def frontier_portfolios(frontier):
    return {e.portfolio for e in frontier.entries}


def per_cost_level_counts(frontier, tol=1e-9):
    counts = {}
    for entry in frontier.entries:
        for level in counts:
            if abs(entry.cost - level) <= tol:
                counts[level] += 1
                break
        else:
            counts[entry.cost] = 1
    return counts
