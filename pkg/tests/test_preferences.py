"""Weight polytopes: vertex enumeration, ratio constraints, augmentation."""

from __future__ import annotations

import itertools

import numpy as np
import pytest
from scipy.optimize import linprog

from fortinet import (
    InfeasibleWeightSetError,
    WeightConstraint,
    augment_with_requirements,
    extreme_points,
    make_weight_set,
    noninformative_set,
    ratio_constraints_from_volumes,
)


def as_sorted_array(points):
    return np.array(sorted(tuple(float(v) for v in p) for p in points))


def assert_same_vertices(got, want, tol=1e-9):
    got = as_sorted_array(got)
    want = as_sorted_array(want)
    assert got.shape == want.shape
    assert np.max(np.abs(got - want)) <= tol


def test_noninformative_set_vertices_are_canonical():
    for m in (1, 2, 3, 5):
        pts = extreme_points(noninformative_set(m)).points
        assert_same_vertices(pts, np.eye(m))


def test_segment_constraints_give_interval_endpoints():
    ws = make_weight_set(
        2,
        [
            WeightConstraint((1.0, 0.0), 0.8),
            WeightConstraint((-1.0, 0.0), -0.6),
        ],
    )
    assert_same_vertices(extreme_points(ws).points, [(0.6, 0.4), (0.8, 0.2)])


def test_volume_ratio_vertices():
    cons = ratio_constraints_from_volumes((3035, 7547, 1373))
    ws = make_weight_set(3, cons)
    pts = extreme_points(ws).points
    want = [
        (1.0, 0.0, 0.0),
        (0.0, 1.0, 0.0),
        (2.2 / 8.7, 5.5 / 8.7, 1.0 / 8.7),
    ]
    assert_same_vertices(pts, want)


def test_ratio_constraints_shape_and_rounding():
    cons = ratio_constraints_from_volumes((3035, 7547, 1373))
    # anchored at the least-volume objective, one row per other objective
    assert len(cons) == 2
    assert cons[0].coefficients == (-1.0, 0.0, 2.2)
    assert cons[1].coefficients == (0.0, -1.0, 5.5)
    assert all(c.bound == 0.0 for c in cons)
    raw = ratio_constraints_from_volumes((3035, 7547, 1373), round_ratios=False)
    assert raw[0].coefficients[2] == pytest.approx(3035 / 1373)


def test_ratio_constraints_validation():
    with pytest.raises(ValueError, match="at least two"):
        ratio_constraints_from_volumes((5.0,))
    with pytest.raises(ValueError, match="positive"):
        ratio_constraints_from_volumes((5.0, 0.0))


def test_infeasible_weight_set_rejected():
    with pytest.raises(InfeasibleWeightSetError):
        make_weight_set(
            2,
            [
                WeightConstraint((1.0, 0.0), 0.1),
                WeightConstraint((-1.0, 0.0), -0.9),
            ],
        )


def test_constraint_arity_checked():
    with pytest.raises(ValueError, match="coefficients"):
        make_weight_set(3, [WeightConstraint((1.0, 0.0), 0.5)])
    with pytest.raises(ValueError, match="at least one objective"):
        noninformative_set(0)


def random_constraints(rng, m):
    cons = []
    for _ in range(int(rng.integers(1, 4))):
        coeffs = rng.uniform(-1.0, 1.0, size=m)
        bound = float(rng.uniform(0.1, 0.8))
        cons.append(WeightConstraint(tuple(float(c) for c in coeffs), bound))
    return cons


def support_maximum(ws, direction):
    """LP oracle: maximum of direction . w over the weight polytope."""
    a_ub = [list(c.coefficients) for c in ws.constraints]
    b_ub = [c.bound for c in ws.constraints]
    res = linprog(
        -np.asarray(direction),
        A_ub=np.asarray(a_ub) if a_ub else None,
        b_ub=np.asarray(b_ub) if b_ub else None,
        A_eq=np.ones((1, ws.m)),
        b_eq=np.ones(1),
        bounds=[(0, None)] * ws.m,
        method="highs",
    )
    assert res.status == 0
    return -res.fun


def test_vertices_support_the_polytope():
    """conv(vertices) equals the polytope: feasibility of every vertex plus
    support-function agreement along random directions."""
    rng = np.random.default_rng(41)
    for m in (2, 3, 4):
        for _ in range(8):
            try:
                ws = make_weight_set(m, random_constraints(rng, m))
            except InfeasibleWeightSetError:
                continue
            pts = extreme_points(ws).matrix
            assert len(pts) >= 1
            # every vertex satisfies the system
            assert np.allclose(pts.sum(axis=1), 1.0, atol=1e-9)
            assert (pts >= -1e-9).all()
            for c in ws.constraints:
                assert (pts @ np.asarray(c.coefficients) <= c.bound + 1e-7).all()
            # vertex maxima match the LP maxima
            for _ in range(12):
                d = rng.normal(size=m)
                lp = support_maximum(ws, d)
                vertex_best = float((pts @ d).max())
                assert vertex_best == pytest.approx(lp, abs=1e-7)


def test_every_returned_point_is_a_true_vertex():
    rng = np.random.default_rng(43)
    for _ in range(10):
        m = int(rng.integers(2, 5))
        try:
            ws = make_weight_set(m, random_constraints(rng, m))
        except InfeasibleWeightSetError:
            continue
        rows = [np.ones(m)]
        bounds = [1.0]
        for j in range(m):
            e = np.zeros(m)
            e[j] = -1.0
            rows.append(e)
            bounds.append(0.0)
        for c in ws.constraints:
            rows.append(np.asarray(c.coefficients))
            bounds.append(c.bound)
        rows = np.asarray(rows)
        bounds = np.asarray(bounds)
        for w in extreme_points(ws).matrix:
            active = np.abs(rows @ w - bounds) <= 1e-7
            assert np.linalg.matrix_rank(rows[active], tol=1e-9) == m


def test_duplicate_vertices_collapse():
    # redundant duplicate constraint must not duplicate vertices
    ws = make_weight_set(
        2,
        [
            WeightConstraint((1.0, 0.0), 0.7),
            WeightConstraint((2.0, 0.0), 1.4),
        ],
    )
    assert_same_vertices(extreme_points(ws).points, [(0.0, 1.0), (0.7, 0.3)])


def test_augment_with_requirements():
    base = extreme_points(
        make_weight_set(
            3,
            [
                WeightConstraint((1.0, 0.0, 0.0), 0.5),
                WeightConstraint((-1.0, 0.0, 0.0), -0.2),
            ],
        )
    )
    out = augment_with_requirements(base, (0.9, 0.0, 0.9))
    assert out.points[: len(base.points)] == base.points
    added = out.points[len(base.points) :]
    assert (1.0, 0.0, 0.0) in added
    assert (0.0, 0.0, 1.0) in added
    assert (0.0, 1.0, 0.0) not in added
    # canonical vectors already present are not appended twice
    simplex = extreme_points(noninformative_set(3))
    again = augment_with_requirements(simplex, (0.5, 0.5, 0.5))
    assert again.points == simplex.points


def test_augment_dimension_mismatch():
    base = extreme_points(noninformative_set(2))
    with pytest.raises(ValueError, match="does not match"):
        augment_with_requirements(base, (0.5, 0.5, 0.5))


def test_extreme_point_order_is_deterministic():
    cons = ratio_constraints_from_volumes((3035, 7547, 1373))
    a = extreme_points(make_weight_set(3, cons)).points
    again = extreme_points(make_weight_set(3, cons)).points
    assert a == again
    # reordered constraints give the same vertices in the same sort order,
    # up to solver roundoff
    b = extreme_points(make_weight_set(3, tuple(reversed(cons)))).points
    assert len(a) == len(b)
    for pa, pb in zip(a, b):
        assert pa == pytest.approx(pb, abs=1e-9)
    assert all(a[i] <= a[i + 1] for i in range(len(a) - 1))
