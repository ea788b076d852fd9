"""Enumeration of cost-efficient fortification portfolios.

The exact search walks actions one at a time and keeps three sets:

* the running frontier of cost-efficient portfolios found so far,
* a basic set of beaten portfolios whose extensions may still win,
* a pending set of portfolios that currently violate an implication
  but can still be repaired by a later action.

Beaten and pending portfolios are discarded only when a frontier member
is guaranteed to beat every feasible extension, which keeps the output
identical to filtering the full feasible enumeration. A brute-force
reference implementation and single-weight / counting utilities live
here as well.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ._parallel import resolve_threads, run_spans
from .errors import EnumerationCapError, InfeasiblePortfolioError
from .graphs import DEFAULT_ENUMERATION_CAP
from .portfolios import (
    EvaluatedPortfolio,
    EvaluationContext,
    Portfolio,
    ProblemSpec,
    TOL,
)
from .preferences import ExtremePointSet, augment_with_requirements, extreme_points
from .reliability import AUTO

BOUND_ALL_ON = "qa"
BOUND_EXACT = "b1"

# rows per evaluation chunk; boundaries are fixed so results do not
# depend on the worker count
_EVAL_CHUNK = 1 << 12
_BEAT_CHUNK = 1 << 10
_COUNT_GUARD = 1 << 23


@dataclass(frozen=True)
class Frontier:
    """All cost-efficient portfolios, sorted by cost then bit pattern."""

    entries: tuple[EvaluatedPortfolio, ...]
    basis: ExtremePointSet
    spec_digest: str

    def __len__(self) -> int:
        return len(self.entries)

    def portfolios(self) -> tuple[Portfolio, ...]:
        return tuple(entry.portfolio for entry in self.entries)

    def cost_levels(self, tol: float = TOL) -> tuple[float, ...]:
        levels: list[float] = []
        for entry in self.entries:
            if not levels or entry.cost > levels[-1] + tol:
                levels.append(entry.cost)
        return tuple(levels)

    def at_cost(
        self, cost: float, tol: float = TOL, at_most: bool = False
    ) -> tuple[EvaluatedPortfolio, ...]:
        if at_most:
            return tuple(e for e in self.entries if e.cost <= cost + tol)
        return tuple(e for e in self.entries if abs(e.cost - cost) <= tol)


@dataclass(frozen=True)
class BasicSet:
    """Beaten portfolios kept alive because an extension may still win."""

    portfolios: tuple[Portfolio, ...]

    def __len__(self) -> int:
        return len(self.portfolios)


@dataclass(frozen=True)
class ExtensionBound:
    """Per-extreme upper bound on the utility of feasible extensions."""

    portfolio: Portfolio
    per_extreme_bounds: tuple[float, ...]
    # True when some single feasible extension attains every bound
    tight: bool


def _beaten_rows(
    u_a: np.ndarray,
    c_a: np.ndarray,
    u_b: np.ndarray,
    c_b: np.ndarray,
    *,
    self_compare: bool = False,
) -> np.ndarray:
    """Mark rows of (u_a, c_a) beaten by some row of (u_b, c_b).

    Row b beats row a when b weakly dominates a at every extreme point
    with a strict gain somewhere at no extra cost, or ties everywhere
    at strictly lower cost. With self_compare the diagonal is ignored.
    """
    n_a = len(c_a)
    out = np.zeros(n_a, dtype=bool)
    if n_a == 0 or len(c_b) == 0:
        return out
    for lo in range(0, n_a, _BEAT_CHUNK):
        hi = min(n_a, lo + _BEAT_CHUNK)
        ua = u_a[lo:hi, None, :]
        ge_all = (u_b[None, :, :] >= ua - TOL).all(axis=2)
        gt_any = (u_b[None, :, :] > ua + TOL).any(axis=2)
        eq_all = (np.abs(u_b[None, :, :] - ua) <= TOL).all(axis=2)
        ca = c_a[lo:hi, None]
        beat = (ge_all & gt_any & (c_b[None, :] <= ca + TOL)) | (
            eq_all & (c_b[None, :] < ca - TOL)
        )
        if self_compare:
            idx = np.arange(lo, hi)
            beat[np.arange(hi - lo), idx] = False
        out[lo:hi] = beat.any(axis=1)
    return out


def _killed_rows(
    u_bound: np.ndarray,
    c_min_ext: np.ndarray,
    u_front: np.ndarray,
    c_front: np.ndarray,
) -> np.ndarray:
    """Mark extendable rows whose every feasible extension is beaten.

    u_bound[i] bounds the utility of any feasible extension of row i
    from above, and c_min_ext[i] bounds its cost from below. A frontier
    member kills row i when it weakly beats the bound at every extreme
    and is either strictly cheaper than any extension or no dearer with
    a strictly better utility everywhere.
    """
    n = len(c_min_ext)
    out = np.zeros(n, dtype=bool)
    if n == 0 or len(c_front) == 0:
        return out
    for lo in range(0, n, _BEAT_CHUNK):
        hi = min(n, lo + _BEAT_CHUNK)
        ub = u_bound[lo:hi, None, :]
        ge_all = (u_front[None, :, :] >= ub - TOL).all(axis=2)
        gt_all = (u_front[None, :, :] > ub + TOL).all(axis=2)
        cheaper = c_front[None, :] < c_min_ext[lo:hi, None] - TOL
        no_dearer = c_front[None, :] <= c_min_ext[lo:hi, None] + TOL
        out[lo:hi] = (ge_all & (cheaper | (no_dearer & gt_all))).any(axis=1)
    return out


class _ConstraintTables:
    """Vectorised feasibility checks over portfolio bit matrices."""

    def __init__(self, spec: ProblemSpec) -> None:
        self.spec = spec
        self.cost = np.asarray(spec.cost_vector, dtype=np.float64)
        self.budget = float(spec.budget)
        groups = [np.asarray(g, dtype=np.intp) for g in spec.node_mutex_groups]
        limits: list[tuple[np.ndarray, int]] = []
        implies: list[tuple[int, int]] = []
        index = spec.action_index
        for con in spec.constraints:
            idx = np.asarray([index[a] for a in con.actions], dtype=np.intp)
            if con.kind == "mutex":
                groups.append(idx)
            elif con.kind == "at_most_k":
                limits.append((idx, int(con.k)))
            else:
                implies.append((int(idx[0]), int(idx[1])))
        self.mutex_groups = groups
        self.limits = limits
        self.implies = implies

    def within_budget(self, bits: np.ndarray) -> np.ndarray:
        return bits @ self.cost <= self.budget + TOL

    def hard_violations(self, bits: np.ndarray) -> np.ndarray:
        bad = np.zeros(len(bits), dtype=bool)
        for group in self.mutex_groups:
            bad |= bits[:, group].sum(axis=1) > 1
        for idx, k in self.limits:
            bad |= bits[:, idx].sum(axis=1) > k
        return bad

    def implication_status(
        self, bits: np.ndarray, position: np.ndarray, step: int
    ) -> tuple[np.ndarray, np.ndarray]:
        """Return (violated, repairable) masks at the given search step.

        A violated implication is repairable while its consequent has
        not been processed yet, i.e. its position exceeds step.
        """
        violated = np.zeros(len(bits), dtype=bool)
        repairable = np.ones(len(bits), dtype=bool)
        for a, b in self.implies:
            bad = (bits[:, a] == 1) & (bits[:, b] == 0)
            violated |= bad
            if position[b] <= step:
                repairable &= ~bad
        return violated, repairable

    def feasible(self, bits: np.ndarray) -> np.ndarray:
        ok = self.within_budget(bits) & ~self.hard_violations(bits)
        for a, b in self.implies:
            ok &= ~((bits[:, a] == 1) & (bits[:, b] == 0))
        return ok


def _evaluate_chunked(
    context: EvaluationContext, bits: np.ndarray, threads: int | None
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    total = len(bits)
    if total == 0:
        m = len(context.spec.objectives)
        n_ext = len(context.basis)
        return (
            np.zeros(0, dtype=np.float64),
            np.zeros((0, m), dtype=np.float64),
            np.zeros((0, n_ext), dtype=np.float64),
        )
    parts = run_spans(
        lambda lo, hi: context.evaluate_bits(bits[lo:hi]),
        total,
        _EVAL_CHUNK,
        threads,
    )
    costs = np.concatenate([p[0] for p in parts])
    rel = np.vstack([p[1] for p in parts])
    util = np.vstack([p[2] for p in parts])
    return costs, rel, util


def _processing_order(
    context: EvaluationContext, tables: _ConstraintTables
) -> np.ndarray:
    """Actions sorted by descending utility gain of the lone action.

    The gain is measured at the barycentre of the extreme points, which
    equals the mean utility across extremes; ties fall back to the
    declaration order. Any order is correct, this one just prunes well.
    """
    h = context.spec.h
    singles = np.eye(h, dtype=np.int8)
    _, _, util = context.evaluate_bits(singles)
    gains = util.mean(axis=1)
    return np.lexsort((np.arange(h), -gains)).astype(np.intp)


class _FrontierEngine:
    def __init__(
        self,
        context: EvaluationContext,
        *,
        bound: str = BOUND_ALL_ON,
        threads: int | None = None,
    ) -> None:
        if bound not in (BOUND_ALL_ON, BOUND_EXACT):
            raise ValueError(f"unknown extension bound mode {bound!r}")
        self.context = context
        self.spec = context.spec
        self.bound = bound
        self.threads = resolve_threads(threads)
        self.tables = _ConstraintTables(self.spec)

    def run(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        spec = self.spec
        ctx = self.context
        h = spec.h
        empty = np.zeros((1, h), dtype=np.int8)
        f_cost, f_rel, f_util = ctx.evaluate_bits(empty)
        f_bits = empty
        b_bits = np.zeros((0, h), dtype=np.int8)
        p_bits = np.zeros((0, h), dtype=np.int8)
        if h == 0:
            return f_bits, f_cost, f_rel, f_util

        order = _processing_order(ctx, self.tables)
        position = np.empty(h, dtype=np.intp)
        position[order] = np.arange(h)

        for step in range(h):
            col = int(order[step])
            parents = np.vstack([f_bits, b_bits, p_bits])
            children = parents.copy()
            children[:, col] = 1

            in_budget = self.tables.within_budget(children)
            hard = self.tables.hard_violations(children)
            violated, repairable = self.tables.implication_status(
                children, position, step
            )
            cand_mask = in_budget & ~hard & ~violated
            pend_mask = in_budget & ~hard & violated & repairable

            cand_bits = children[cand_mask]
            c_cost, c_rel, c_util = _evaluate_chunked(ctx, cand_bits, self.threads)

            # candidates beaten by other candidates or the old frontier
            pool_u = np.vstack([c_util, f_util])
            pool_c = np.concatenate([c_cost, f_cost])
            new_beaten = _beaten_rows(c_util, c_cost, pool_u, pool_c)
            # ignore self-beating: a row never beats itself under the
            # strict conditions, so no diagonal handling is needed
            keep_new = ~new_beaten

            old_beaten = _beaten_rows(
                f_util, f_cost, c_util[keep_new], c_cost[keep_new]
            )
            keep_old = ~old_beaten

            next_f_bits = np.vstack([f_bits[keep_old], cand_bits[keep_new]])
            next_f_cost = np.concatenate([f_cost[keep_old], c_cost[keep_new]])
            next_f_rel = np.vstack([f_rel[keep_old], c_rel[keep_new]])
            next_f_util = np.vstack([f_util[keep_old], c_util[keep_new]])

            future = order[step + 1 :]
            if len(future) == 0:
                b_bits = np.zeros((0, h), dtype=np.int8)
                p_bits = np.zeros((0, h), dtype=np.int8)
            else:
                basic_pool = np.vstack(
                    [cand_bits[new_beaten], f_bits[old_beaten], b_bits]
                )
                pending_pool = np.vstack([p_bits, children[pend_mask]])
                # retire pending rows whose missing consequent has been
                # processed already; no later step can repair them
                if len(pending_pool):
                    _, still_repairable = self.tables.implication_status(
                        pending_pool, position, step
                    )
                    pending_pool = pending_pool[still_repairable]
                b_bits = self._prune_extendable(
                    basic_pool, future, position, step, next_f_util, next_f_cost
                )
                p_bits = self._prune_extendable(
                    pending_pool, future, position, step, next_f_util, next_f_cost
                )

            f_bits, f_cost, f_rel, f_util = (
                next_f_bits,
                next_f_cost,
                next_f_rel,
                next_f_util,
            )

        return f_bits, f_cost, f_rel, f_util

    def _prune_extendable(
        self,
        bits: np.ndarray,
        future: np.ndarray,
        position: np.ndarray,
        step: int,
        front_util: np.ndarray,
        front_cost: np.ndarray,
    ) -> np.ndarray:
        """Keep only rows some feasible strict extension of which may
        still enter the frontier."""
        if len(bits) == 0:
            return bits
        costs = bits @ self.tables.cost
        min_future = float(self.tables.cost[future].min())
        alive = costs + min_future <= self.tables.budget + TOL
        bits = bits[alive]
        costs = costs[alive]
        if len(bits) == 0:
            return bits

        if self.bound == BOUND_ALL_ON:
            topped = bits.copy()
            topped[:, future] = 1
            _, _, u_bound = _evaluate_chunked(self.context, topped, self.threads)
            c_min_ext = costs + min_future
            killed = _killed_rows(u_bound, c_min_ext, front_util, front_cost)
            return bits[~killed]

        keep = np.ones(len(bits), dtype=bool)
        u_rows = np.empty((len(bits), len(self.context.basis)), dtype=np.float64)
        for i, row in enumerate(bits):
            fixed_on = frozenset(int(j) for j in np.flatnonzero(row))
            frozen_off = frozenset(
                int(j)
                for j in range(self.spec.h)
                if row[j] == 0 and position[j] <= step
            )
            bound, _, any_feasible, _ = _completion_search(
                self.context, fixed_on, frozen_off
            )
            if not any_feasible:
                keep[i] = False
            else:
                u_rows[i] = bound
        bits = bits[keep]
        u_rows = u_rows[keep]
        costs = costs[keep]
        if len(bits) == 0:
            return bits
        # the exact bound already maximises over extensions including
        # the row itself, so the cost floor stays the conservative one
        c_min_ext = costs + min_future
        killed = _killed_rows(u_rows, c_min_ext, front_util, front_cost)
        return bits[~killed]


def _sorted_entries(
    context: EvaluationContext,
    bits: np.ndarray,
    costs: np.ndarray,
    rel: np.ndarray,
    util: np.ndarray,
) -> tuple[EvaluatedPortfolio, ...]:
    rows = sorted(
        range(len(bits)), key=lambda i: (costs[i], tuple(int(v) for v in bits[i]))
    )
    entries = []
    for i in rows:
        entries.append(
            EvaluatedPortfolio(
                portfolio=tuple(int(v) for v in bits[i]),
                cost=float(costs[i]),
                reliabilities=tuple(float(v) for v in rel[i]),
                utilities_at_extremes=tuple(float(v) for v in util[i]),
                basis=context.basis,
            )
        )
    return tuple(entries)


def _spec_digest(spec: ProblemSpec) -> str:
    from . import problem_io

    return problem_io.spec_digest(spec)


def algorithm1(
    spec: ProblemSpec,
    basis: ExtremePointSet | None = None,
    *,
    method: str = AUTO,
    bound: str = BOUND_ALL_ON,
    cap: int = DEFAULT_ENUMERATION_CAP,
    max_cut_size: int | None = None,
    threads: int | None = None,
    context: EvaluationContext | None = None,
) -> Frontier:
    """Enumerate every cost-efficient portfolio under the weight set."""
    if context is None:
        context = EvaluationContext(
            spec,
            basis=basis,
            method=method,
            cap=cap,
            max_cut_size=max_cut_size,
        )
    engine = _FrontierEngine(context, bound=bound, threads=threads)
    bits, costs, rel, util = engine.run()
    entries = _sorted_entries(context, bits, costs, rel, util)
    return Frontier(entries=entries, basis=context.basis, spec_digest=_spec_digest(spec))


def algorithm2(
    spec: ProblemSpec,
    basis: ExtremePointSet | None = None,
    *,
    method: str = AUTO,
    bound: str = BOUND_ALL_ON,
    cap: int = DEFAULT_ENUMERATION_CAP,
    max_cut_size: int | None = None,
    threads: int | None = None,
) -> Frontier:
    """Cost-efficient portfolios meeting the minimum reliability levels.

    The weight basis is augmented with one canonical weight vector per
    required objective so the search cannot discard portfolios that are
    only attractive on a required connection; the requirement filter and
    a final cost-efficiency re-check against the original weight set are
    applied afterwards.
    """
    base = basis if basis is not None else extreme_points(spec.weight_set)
    alpha = spec.alpha
    if all(a == 0.0 for a in alpha):
        return algorithm1(
            spec,
            base,
            method=method,
            bound=bound,
            cap=cap,
            max_cut_size=max_cut_size,
            threads=threads,
        )

    star = augment_with_requirements(base, alpha)
    star_context = EvaluationContext(
        spec,
        basis=star,
        method=method,
        cap=cap,
        max_cut_size=max_cut_size,
    )
    wide = algorithm1(spec, star, bound=bound, threads=threads, context=star_context)

    kept = [
        entry
        for entry in wide.entries
        if all(r >= a - TOL for r, a in zip(entry.reliabilities, alpha))
    ]
    weight_matrix = base.matrix
    rel = np.asarray([entry.reliabilities for entry in kept], dtype=np.float64)
    costs = np.asarray([entry.cost for entry in kept], dtype=np.float64)
    util = rel @ weight_matrix.T if len(kept) else np.zeros((0, len(base)))
    beaten = _beaten_rows(util, costs, util, costs, self_compare=True)
    entries = tuple(
        EvaluatedPortfolio(
            portfolio=entry.portfolio,
            cost=entry.cost,
            reliabilities=entry.reliabilities,
            utilities_at_extremes=tuple(float(v) for v in util[i]),
            basis=base,
        )
        for i, entry in enumerate(kept)
        if not beaten[i]
    )
    return Frontier(entries=entries, basis=base, spec_digest=wide.spec_digest)


def _enumerate_feasible(spec: ProblemSpec, guard: int = _COUNT_GUARD) -> np.ndarray:
    """All feasible portfolios as a bit matrix, in ascending bit order."""
    tables = _ConstraintTables(spec)
    h = spec.h
    rows: list[np.ndarray] = []
    bits = np.zeros(h, dtype=np.int8)
    visited = 0

    def consequents_missing(depth: int) -> bool:
        for a, b in tables.implies:
            if bits[a] == 1 and bits[b] == 0 and b < depth:
                return True
        return False

    def walk(depth: int, cost: float) -> None:
        nonlocal visited
        visited += 1
        if visited > guard:
            raise EnumerationCapError(
                f"feasible enumeration exceeded {guard} nodes"
            )
        if cost > tables.budget + TOL:
            return
        if tables.hard_violations(bits[None, :])[0]:
            return
        if consequents_missing(depth):
            return
        if depth == h:
            rows.append(bits.copy())
            return
        walk(depth + 1, cost)
        bits[depth] = 1
        walk(depth + 1, cost + float(tables.cost[depth]))
        bits[depth] = 0

    walk(0, 0.0)
    if not rows:
        return np.zeros((0, h), dtype=np.int8)
    return np.asarray(rows, dtype=np.int8)


def brute_force_frontier(
    spec: ProblemSpec,
    basis: ExtremePointSet | None = None,
    *,
    method: str = AUTO,
    cap: int = DEFAULT_ENUMERATION_CAP,
    max_cut_size: int | None = None,
    threads: int | None = None,
    apply_requirements: bool = False,
) -> Frontier:
    """Reference frontier: evaluate every feasible portfolio, filter
    beaten ones pairwise. Exponential in the number of actions."""
    context = EvaluationContext(
        spec,
        basis=basis,
        method=method,
        cap=cap,
        max_cut_size=max_cut_size,
    )
    bits = _enumerate_feasible(spec)
    costs, rel, util = _evaluate_chunked(context, bits, threads)
    if apply_requirements and any(a > 0.0 for a in spec.alpha):
        alpha = np.asarray(spec.alpha, dtype=np.float64)
        meets = (rel >= alpha[None, :] - TOL).all(axis=1)
        bits, costs, rel, util = bits[meets], costs[meets], rel[meets], util[meets]
    beaten = _beaten_rows(util, costs, util, costs, self_compare=True)
    keep = ~beaten
    entries = _sorted_entries(context, bits[keep], costs[keep], rel[keep], util[keep])
    return Frontier(
        entries=entries, basis=context.basis, spec_digest=_spec_digest(spec)
    )


def extended_portfolio(portfolio: Sequence[int], level: int) -> Portfolio:
    """Copy the first `level` coordinates (1-based) and switch on the rest."""
    h = len(portfolio)
    if not 1 <= level <= h:
        raise ValueError(f"level must be in [1, {h}], got {level}")
    return tuple(int(v) for v in portfolio[:level]) + (1,) * (h - level)


def _completion_search(
    context: EvaluationContext,
    fixed_on: frozenset[int],
    frozen_off: frozenset[int],
    collect_leaves: bool = False,
    need_tight: bool = False,
) -> tuple[np.ndarray, bool, bool, list[tuple[np.ndarray, float, np.ndarray]]]:
    """Exact per-extreme maxima over feasible completions.

    Actions in fixed_on stay selected and actions in frozen_off stay
    unselected; every other action is free. Returns the per-extreme
    maximum utility, whether a single feasible completion attains all
    maxima at once, whether any feasible completion exists, and the
    visited leaves when requested.
    """
    spec = context.spec
    tables = _ConstraintTables(spec)
    h = spec.h
    free = [i for i in range(h) if i not in fixed_on and i not in frozen_off]
    n_ext = len(context.basis)
    bits = np.zeros(h, dtype=np.int8)
    for i in fixed_on:
        bits[i] = 1
    best = np.full(n_ext, -np.inf)
    leaves: list[tuple[np.ndarray, float, np.ndarray]] = []
    found = False

    decided = np.zeros(h, dtype=bool)
    for i in fixed_on:
        decided[i] = True
    for i in frozen_off:
        decided[i] = True

    def violated_now() -> bool:
        if tables.hard_violations(bits[None, :])[0]:
            return True
        for a, b in tables.implies:
            if bits[a] == 1 and decided[b] and bits[b] == 0:
                return True
        return False

    def optimistic_utility() -> np.ndarray:
        topped = bits.copy()
        topped[~decided] = 1
        _, _, util = context.evaluate_bits(topped[None, :])
        return util[0]

    def walk(depth: int, cost: float) -> None:
        nonlocal found, best
        if cost > tables.budget + TOL:
            return
        if violated_now():
            return
        if depth == len(free):
            _, _, util = context.evaluate_bits(bits[None, :])
            row = util[0]
            found = True
            best = np.maximum(best, row)
            if collect_leaves:
                leaves.append((row.copy(), cost, bits.copy()))
            return
        if found and bool((optimistic_utility() < best - TOL).all()):
            return
        action = free[depth]
        decided[action] = True
        bits[action] = 1
        walk(depth + 1, cost + float(tables.cost[action]))
        bits[action] = 0
        walk(depth + 1, cost)
        decided[action] = False

    start_cost = float(bits @ tables.cost)
    walk(0, start_cost)
    tight = False
    if found and (collect_leaves or need_tight):
        if collect_leaves:
            tight = any(bool((row >= best - TOL).all()) for row, _, _ in leaves)
        else:
            # leaves were not kept, so recheck: bounds are tight when one
            # feasible completion attains every per-extreme maximum at once
            tight = _tightness_check(context, tables, fixed_on, frozen_off, best)
    return best, tight, found, leaves


def _tightness_check(
    context: EvaluationContext,
    tables: _ConstraintTables,
    fixed_on: frozenset[int],
    frozen_off: frozenset[int],
    best: np.ndarray,
) -> bool:
    spec = context.spec
    h = spec.h
    free = [i for i in range(h) if i not in fixed_on and i not in frozen_off]
    bits = np.zeros(h, dtype=np.int8)
    for i in fixed_on:
        bits[i] = 1
    decided = np.zeros(h, dtype=bool)
    for i in fixed_on:
        decided[i] = True
    for i in frozen_off:
        decided[i] = True

    def violated_now() -> bool:
        if tables.hard_violations(bits[None, :])[0]:
            return True
        for a, b in tables.implies:
            if bits[a] == 1 and decided[b] and bits[b] == 0:
                return True
        return False

    def walk(depth: int, cost: float) -> bool:
        if cost > tables.budget + TOL:
            return False
        if violated_now():
            return False
        if depth == len(free):
            _, _, util = context.evaluate_bits(bits[None, :])
            return bool((util[0] >= best - TOL).all())
        topped = bits.copy()
        topped[~decided] = 1
        _, _, util = context.evaluate_bits(topped[None, :])
        if bool((util[0] < best - TOL).any()):
            return False
        action = free[depth]
        decided[action] = True
        bits[action] = 1
        if walk(depth + 1, cost + float(tables.cost[action])):
            decided[action] = False
            bits[action] = 0
            return True
        bits[action] = 0
        hit = walk(depth + 1, cost)
        decided[action] = False
        return hit

    return walk(0, float(bits @ tables.cost))


def extension_upper_bound(
    portfolio: Sequence[int],
    spec: ProblemSpec,
    basis: ExtremePointSet | None = None,
    *,
    frozen_off: Iterable[int] = (),
    method: str = AUTO,
    cap: int = DEFAULT_ENUMERATION_CAP,
    max_cut_size: int | None = None,
    context: EvaluationContext | None = None,
) -> ExtensionBound:
    """Exact per-extreme utility bound over feasible completions of a
    partial portfolio (selected actions stay, frozen ones stay off)."""
    if context is None:
        context = EvaluationContext(
            spec,
            basis=basis,
            method=method,
            cap=cap,
            max_cut_size=max_cut_size,
        )
    h = spec.h
    if len(portfolio) != h:
        raise ValueError(f"portfolio must have {h} coordinates")
    fixed_on = frozenset(i for i, v in enumerate(portfolio) if v)
    off = frozenset(int(i) for i in frozen_off)
    if not off.isdisjoint(fixed_on):
        raise ValueError("frozen_off overlaps selected actions")
    if any(i < 0 or i >= h for i in off):
        raise ValueError("frozen_off index out of range")
    best, tight, found, _ = _completion_search(context, fixed_on, off, need_tight=True)
    if not found:
        raise InfeasiblePortfolioError(
            "no feasible completion of the partial portfolio exists"
        )
    return ExtensionBound(
        portfolio=tuple(int(v) for v in portfolio),
        per_extreme_bounds=tuple(float(v) for v in best),
        tight=tight,
    )


def all_on_upper_bound(
    portfolio: Sequence[int],
    spec: ProblemSpec,
    basis: ExtremePointSet | None = None,
    *,
    level: int | None = None,
    method: str = AUTO,
    cap: int = DEFAULT_ENUMERATION_CAP,
    max_cut_size: int | None = None,
    context: EvaluationContext | None = None,
) -> ExtensionBound:
    """Utility of the everything-on extension, a cheap upper bound.

    Reliability can only grow when more actions are switched on. With no
    level every action is selected, which bounds every superset of the
    portfolio from above even when the topped-up portfolio is itself
    infeasible. With a level only actions past the first `level`
    coordinates are switched on, bounding the extensions that keep those
    coordinates fixed.
    """
    if context is None:
        context = EvaluationContext(
            spec,
            basis=basis,
            method=method,
            cap=cap,
            max_cut_size=max_cut_size,
        )
    h = spec.h
    if len(portfolio) != h:
        raise ValueError(f"portfolio must have {h} coordinates")
    if h == 0:
        topped: Portfolio = tuple()
    elif level is None:
        topped = (1,) * h
    else:
        topped = extended_portfolio(portfolio, level)
    bits = np.asarray([topped], dtype=np.int8)
    _, _, util = context.evaluate_bits(bits)
    return ExtensionBound(
        portfolio=tuple(int(v) for v in portfolio),
        per_extreme_bounds=tuple(float(v) for v in util[0]),
        tight=False,
    )


def solve_exact_weights(
    spec: ProblemSpec,
    weights: Sequence[float],
    *,
    method: str = AUTO,
    cap: int = DEFAULT_ENUMERATION_CAP,
    max_cut_size: int | None = None,
) -> EvaluatedPortfolio:
    """Best feasible portfolio for one fully specified weight vector.

    Ties within tolerance on utility go to the cheaper portfolio, then
    to the portfolio whose selected action indices come first.
    """
    w = np.asarray(list(weights), dtype=np.float64)
    m = len(spec.objectives)
    if w.shape != (m,):
        raise ValueError(f"expected {m} weights, got shape {w.shape}")
    if (w < -TOL).any():
        raise ValueError("weights must be non-negative")
    total = float(w.sum())
    if abs(total - 1.0) > 1e-9:
        raise ValueError("weights must sum to one")
    basis = ExtremePointSet(points=(tuple(float(v) for v in w),))
    context = EvaluationContext(
        spec,
        basis=basis,
        method=method,
        cap=cap,
        max_cut_size=max_cut_size,
    )
    _, _, found, leaves = _completion_search(
        context, frozenset(), frozenset(), collect_leaves=True
    )
    if not found:
        raise InfeasiblePortfolioError("no feasible portfolio exists")
    best_u = max(row[0] for row, _, _ in leaves)
    ties = [entry for entry in leaves if entry[0][0] >= best_u - TOL]
    winner = min(
        ties,
        key=lambda entry: (entry[1], tuple(int(i) for i in np.flatnonzero(entry[2]))),
    )
    return context.evaluated(tuple(int(v) for v in winner[2]))


def count_feasible(spec: ProblemSpec) -> int:
    """Number of feasible portfolios.

    Uses a cost-level dynamic programme when all action costs are
    integral and no logical constraints exist; otherwise counts by a
    guarded depth-first walk.
    """
    tables = _ConstraintTables(spec)
    costs = tables.cost
    integral = bool(np.all(np.abs(costs - np.round(costs)) <= TOL))
    unconstrained = (
        not tables.mutex_groups and not tables.limits and not tables.implies
    )
    if integral and unconstrained:
        budget = int(np.floor(tables.budget + TOL))
        if budget < 0:
            return 0
        ways = [0] * (budget + 1)
        ways[0] = 1
        for cost in np.round(costs).astype(np.int64):
            c = int(cost)
            if c == 0:
                ways = [2 * v for v in ways]
                continue
            for level in range(budget, c - 1, -1):
                ways[level] += ways[level - c]
        return int(sum(ways))

    h = spec.h
    bits = np.zeros(h, dtype=np.int8)
    visited = 0
    count = 0

    def walk(depth: int, cost: float) -> None:
        nonlocal visited, count
        visited += 1
        if visited > _COUNT_GUARD:
            raise EnumerationCapError(
                f"feasible count exceeded {_COUNT_GUARD} search nodes"
            )
        if cost > tables.budget + TOL:
            return
        if tables.hard_violations(bits[None, :])[0]:
            return
        for a, b in tables.implies:
            if bits[a] == 1 and bits[b] == 0 and b < depth:
                return
        if depth == h:
            count += 1
            return
        walk(depth + 1, cost)
        bits[depth] = 1
        walk(depth + 1, cost + float(costs[depth]))
        bits[depth] = 0

    walk(0, 0.0)
    return count
