"""Incomplete preference information over objectives as weight polytopes.

A weight set is the simplex intersected with linear inequalities
``coefficients . w <= bound``. All downstream dominance checks evaluate
utilities only at the polytope's extreme points, which is sufficient
because the utility is linear in w.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import InfeasibleWeightSetError

TOL = 1e-9


@dataclass(frozen=True)
class WeightConstraint:
    """One linear inequality coefficients . w <= bound."""

    coefficients: tuple[float, ...]
    bound: float


@dataclass(frozen=True)
class WeightSet:
    """Feasible objective weights: the m-simplex cut by linear constraints."""

    m: int
    constraints: tuple[WeightConstraint, ...] = ()


@dataclass(frozen=True)
class ExtremePointSet:
    """Vertices of a weight set, in a deterministic order."""

    points: tuple[tuple[float, ...], ...]

    @cached_property
    def matrix(self) -> np.ndarray:
        arr = np.array(self.points, dtype=np.float64)
        arr.flags.writeable = False
        return arr

    def __len__(self) -> int:
        return len(self.points)


def noninformative_set(m: int) -> WeightSet:
    """The whole simplex: no information beyond nonnegativity and sum one."""
    if m < 1:
        raise ValueError("at least one objective is required")
    return WeightSet(m=m, constraints=())


def make_weight_set(
    m: int, constraints: Sequence[WeightConstraint] = ()
) -> WeightSet:
    """Build a WeightSet and verify it is feasible.

    Raises InfeasibleWeightSetError when the constraint system has no
    point on the simplex.
    """
    if m < 1:
        raise ValueError("at least one objective is required")
    for c in constraints:
        if len(c.coefficients) != m:
            raise ValueError(
                f"constraint has {len(c.coefficients)} coefficients, expected {m}"
            )
    ws = WeightSet(m=m, constraints=tuple(constraints))
    if len(extreme_points(ws)) == 0:
        raise InfeasibleWeightSetError(
            "weight constraints leave no feasible point on the simplex"
        )
    return ws


def extreme_points(ws: WeightSet) -> ExtremePointSet:
    """Enumerate the vertices of a weight set.

    Candidate vertices solve the simplex equality plus m-1 active
    inequality rows (nonnegativity rows and user rows); infeasible or
    singular choices are skipped and near-duplicates collapse under a
    1e-9 max-norm tolerance. Every returned point is a true vertex since
    its active rows have full rank.
    """
    m = ws.m
    rows: list[np.ndarray] = []
    bounds: list[float] = []
    for j in range(m):
        row = np.zeros(m)
        row[j] = -1.0
        rows.append(row)
        bounds.append(0.0)
    for c in ws.constraints:
        rows.append(np.array(c.coefficients, dtype=np.float64))
        bounds.append(float(c.bound))
    a_mat = np.array(rows)
    b_vec = np.array(bounds)
    candidates: list[np.ndarray] = []
    for combo in itertools.combinations(range(len(rows)), m - 1):
        system = np.vstack([np.ones((1, m)), a_mat[list(combo)]])
        rhs = np.concatenate([[1.0], b_vec[list(combo)]])
        try:
            w = np.linalg.solve(system, rhs)
        except np.linalg.LinAlgError:
            continue
        # Guard against ill-conditioned systems passing solve.
        if not np.allclose(system @ w, rhs, atol=1e-7):
            continue
        if (w < -TOL).any():
            continue
        if (a_mat @ w > b_vec + TOL).any():
            continue
        candidates.append(w)
    candidates.sort(key=lambda w: tuple(np.round(w, 12)))
    kept: list[np.ndarray] = []
    for w in candidates:
        if all(np.max(np.abs(w - k)) > TOL for k in kept):
            kept.append(w)
    return ExtremePointSet(points=tuple(tuple(float(v) for v in w) for w in kept))


def ratio_constraints_from_volumes(
    volumes: Sequence[float], round_ratios: bool = True
) -> tuple[WeightConstraint, ...]:
    """Turn traffic volumes into lower-bound ratio constraints.

    The least-volume objective t anchors the scale; every other objective
    j receives w_j >= r_j * w_t with r_j = volumes[j] / volumes[t],
    optionally rounded to one decimal. Constraints are emitted in
    objective order.
    """
    vols = [float(v) for v in volumes]
    if len(vols) < 2:
        raise ValueError("ratio constraints need at least two volumes")
    if any(v <= 0 for v in vols):
        raise ValueError("volumes must be positive")
    t = min(range(len(vols)), key=lambda i: (vols[i], i))
    out: list[WeightConstraint] = []
    for j in range(len(vols)):
        if j == t:
            continue
        ratio = vols[j] / vols[t]
        if round_ratios:
            ratio = round(ratio, 1)
        coeffs = [0.0] * len(vols)
        coeffs[j] = -1.0
        coeffs[t] = ratio
        out.append(WeightConstraint(coefficients=tuple(coeffs), bound=0.0))
    return tuple(out)


def augment_with_requirements(
    basis: ExtremePointSet, alpha: Sequence[float]
) -> ExtremePointSet:
    """Append the canonical weight vector of every objective with a nonzero
    minimum-reliability requirement, skipping vectors already present."""
    m = len(alpha)
    if basis.points and len(basis.points[0]) != m:
        raise ValueError("alpha length does not match the basis dimension")
    points = list(basis.points)
    for j, aj in enumerate(alpha):
        if aj == 0.0:
            continue
        canonical = tuple(1.0 if i == j else 0.0 for i in range(m))
        present = any(
            max(abs(a - b) for a, b in zip(canonical, pt)) <= TOL for pt in points
        )
        if not present:
            points.append(canonical)
    return ExtremePointSet(points=tuple(points))
