"""Acceptance gate: one test per published behaviour target.

Each test locks a hand-derived value, an exhaustive-oracle equivalence,
an ordering property, or a determinism promise, together with its
runtime budget where one is stated. The terminal summary prints one
PASS/FAIL line per criterion.
"""

from __future__ import annotations

import json
import math
import os
import subprocess
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from fortinet import (
    EvaluationContext,
    MCUB,
    Objective,
    ReliabilityContext,
    algorithm1,
    algorithm2,
    all_on_upper_bound,
    brute_force_frontier,
    count_feasible,
    extension_upper_bound,
    extreme_points,
    make_weight_set,
    noninformative_set,
    ratio_constraints_from_volumes,
    sensitivity_sweep,
)
from fortinet.fixtures import fixture_path
from fortinet.reliability import EXACT

from helpers import (
    all_feasible,
    evaluate_portfolios,
    frontier_portfolios,
    per_cost_level_counts,
    random_instance,
    random_network,
    reference_frontier,
    reference_requirement_frontier,
)

DATA = Path(__file__).resolve().parent / "data"
VOLUMES = (3035.0, 7547.0, 1373.0)


@pytest.fixture(scope="module")
def battery():
    """Shared randomized instance battery for the oracle-equivalence,
    per-objective-maximum, bound-ordering and shrinking-set checks."""
    rng = np.random.default_rng(4242)
    return [random_instance(rng) for _ in range(100)]


def test_criterion_01_feasible_portfolio_counts(standin):
    expected = {
        1: 23,
        3: 1794,
        5: 35443,
        10: 1744436,
        15: 4084248,
        20: 4194281,
    }
    started = time.perf_counter()
    counts = {
        budget: count_feasible(replace(standin.spec, budget=float(budget)))
        for budget in expected
    }
    elapsed = time.perf_counter() - started
    assert counts == expected
    assert elapsed < 1.0


def test_criterion_02_two_action_frontier_values(fig7):
    started = time.perf_counter()
    frontier = algorithm1(fig7.spec)
    got = {e.portfolio: e.utilities_at_extremes[0] for e in frontier.entries}
    expected = {
        (0, 0): 0.99,
        (0, 1): 0.995,
        (1, 0): 0.995,
        (1, 1): 0.9975,
    }
    assert set(got) == set(expected)
    for portfolio, utility in expected.items():
        assert got[portfolio] == pytest.approx(utility, abs=1e-9)

    # with perfect repairs the double upgrade adds nothing over a single one
    free_repairs = replace(
        fig7.spec,
        actions=tuple(replace(a, p_after=0.0) for a in fig7.spec.actions),
    )
    reduced = frontier_portfolios(algorithm1(free_repairs))
    assert reduced == {(0, 0), (0, 1), (1, 0)}
    assert time.perf_counter() - started < 1.0


def test_criterion_03_search_equals_exhaustive_reference(battery):
    started = time.perf_counter()
    mismatches = []
    for i, spec in enumerate(battery):
        base = extreme_points(spec.weight_set)
        oracle = reference_frontier(spec, base)
        if frontier_portfolios(algorithm1(spec, base)) != oracle:
            mismatches.append((i, "search vs pairwise oracle"))
        if frontier_portfolios(brute_force_frontier(spec, base)) != oracle:
            mismatches.append((i, "exhaustive filter vs pairwise oracle"))
        requirement_oracle = reference_requirement_frontier(spec, base)
        if frontier_portfolios(algorithm2(spec, base)) != requirement_oracle:
            mismatches.append((i, "requirement search vs staged oracle"))
    elapsed = time.perf_counter() - started
    assert mismatches == []
    assert elapsed < 300.0


def test_criterion_04_canonical_basis_attains_per_objective_maxima(battery):
    for spec in battery:
        basis = extreme_points(noninformative_set(len(spec.objectives)))
        frontier = algorithm1(spec, basis)
        evals = evaluate_portfolios(spec, basis, all_feasible(spec))
        for j in range(len(spec.objectives)):
            best_anywhere = max(e.reliabilities[j] for e in evals)
            best_on_frontier = max(e.reliabilities[j] for e in frontier.entries)
            assert best_on_frontier == pytest.approx(best_anywhere, abs=1e-9)


def test_criterion_05_cut_bound_is_a_certified_lower_bound():
    rng = np.random.default_rng(505)
    small_p_checked = 0
    for i in range(200):
        p_max = 0.05 if i % 2 == 0 else 0.3
        net = random_network(rng, max_fallible=10, p_min=0.005, p_max=p_max)
        context = ReliabilityContext(net, (Objective(name="t", pair=("T0", "T1")),))
        exact = context.estimate(0, None, EXACT).value
        lower = context.estimate(0, None, MCUB).value
        assert lower <= exact + 1e-12
        if p_max <= 0.05:
            assert abs(exact - lower) <= 5e-3
            small_p_checked += 1
    assert small_p_checked == 100


def test_criterion_06_extension_bounds_order_and_cover(battery):
    rng = np.random.default_rng(606)
    for spec in battery:
        base = extreme_points(spec.weight_set)
        feasible = all_feasible(spec)
        evals = {
            e.portfolio: e.utilities_at_extremes
            for e in evaluate_portfolios(spec, base, feasible)
        }
        for _ in range(2):
            anchor = feasible[int(rng.integers(len(feasible)))]
            level = int(rng.integers(1, spec.h + 1))
            partial = tuple(anchor[:level]) + (0,) * (spec.h - level)
            frozen_off = tuple(i for i in range(level) if anchor[i] == 0)

            exact = extension_upper_bound(
                partial, spec, base, frozen_off=frozen_off
            ).per_extreme_bounds
            cheap = all_on_upper_bound(
                partial, spec, base, level=level
            ).per_extreme_bounds
            assert all(e <= c + 1e-12 for e, c in zip(exact, cheap))

            completions = [
                q for q in feasible if q[:level] == tuple(anchor[:level])
            ]
            best = np.max([evals[q] for q in completions], axis=0)
            assert all(b <= e + 1e-12 for b, e in zip(best, exact))
            assert all(b <= c + 1e-12 for b, c in zip(best, cheap))
            # the completion-search bound is the completion maximum itself
            assert exact == pytest.approx(tuple(best), abs=1e-9)

        # both bound modes must select the same frontier; numeric payloads
        # may drift by an ulp because batch shapes differ between modes
        cheap_run = algorithm1(spec, base, bound="qa")
        tight_run = algorithm1(spec, base, bound="b1")
        assert [(e.portfolio, e.cost) for e in cheap_run.entries] == [
            (e.portfolio, e.cost) for e in tight_run.entries
        ]
        for cheap_entry, tight_entry in zip(cheap_run.entries, tight_run.entries):
            assert cheap_entry.reliabilities == pytest.approx(
                tight_entry.reliabilities, abs=1e-12
            )
            assert cheap_entry.utilities_at_extremes == pytest.approx(
                tight_entry.utilities_at_extremes, abs=1e-12
            )


def test_criterion_07_probability_grid_keeps_composition(fig7):
    started = time.perf_counter()
    p_grid = (0.01, 0.02, 0.03, 0.04, 0.05)
    base = sensitivity_sweep(fig7.spec, p_grid, (2, 3, 4, 5))
    assert len(base.cells) == 20
    assert base.composition_invariant

    broken = sensitivity_sweep(fig7.spec, p_grid, (2, 3, 4, 5, math.inf))
    assert not broken.composition_invariant
    base_size = min(cell.frontier_size for cell in base.cells)
    for cell in broken.cells:
        if math.isinf(cell.divisor):
            assert cell.p_after == 0.0
            assert cell.frontier_size < base_size
    assert time.perf_counter() - started < 10.0


def test_criterion_08_volume_ratio_vertices():
    points = extreme_points(
        make_weight_set(3, ratio_constraints_from_volumes(VOLUMES))
    )
    expected = (
        (0.0, 1.0, 0.0),
        (1.0, 0.0, 0.0),
        (2.2 / 8.7, 5.5 / 8.7, 1.0 / 8.7),
    )
    assert len(points) == 3
    for want in expected:
        hits = [
            p
            for p in points.points
            if max(abs(a - b) for a, b in zip(p, want)) <= 1e-9
        ]
        assert len(hits) == 1


def test_criterion_09_added_weight_information_never_enlarges_the_frontier(
    standin, battery
):
    base_counts = per_cost_level_counts(algorithm1(standin.spec))
    narrowed = replace(
        standin.spec,
        weight_set=make_weight_set(3, ratio_constraints_from_volumes(VOLUMES)),
    )
    narrow_counts = per_cost_level_counts(algorithm1(narrowed))
    for level, count in narrow_counts.items():
        assert count <= base_counts.get(level, 0)

    for spec in battery:
        wide = per_cost_level_counts(
            algorithm1(spec, extreme_points(noninformative_set(len(spec.objectives))))
        )
        narrow = per_cost_level_counts(
            algorithm1(spec, extreme_points(spec.weight_set))
        )
        for level, count in narrow.items():
            assert count <= wide.get(level, 0)


def test_criterion_10_standin_regression_lock(standin):
    frozen = json.loads((DATA / "standin_frontier.json").read_text(encoding="utf-8"))
    spec = standin.spec

    context = EvaluationContext(spec, method=MCUB)
    baseline = context.evaluated((0,) * spec.h).reliabilities
    for got, want in zip(baseline, frozen["baseline_reliabilities"]):
        assert got == pytest.approx(want, abs=1e-12)

    frontier = algorithm1(spec)
    assert len(frontier.entries) == len(frozen["entries"])
    for entry, locked in zip(frontier.entries, frozen["entries"]):
        assert "".join(str(b) for b in entry.portfolio) == locked["portfolio"]
        assert entry.cost == locked["cost"]
        for got, want in zip(entry.reliabilities, locked["reliabilities"]):
            assert got == pytest.approx(want, abs=1e-12)

    # independent exhaustive verification at a reduced budget
    reduced = replace(spec, budget=2.0)
    assert frontier_portfolios(algorithm1(reduced)) == frontier_portfolios(
        brute_force_frontier(reduced)
    )


def test_criterion_11_cli_outputs_are_byte_identical_across_workers(tmp_path):
    fig7 = str(fixture_path("fig7.json"))
    series = str(fixture_path("series.json"))
    commands = {
        "reliability": [series, "--method", "mc", "--samples", "5000", "--seed", "11"],
        "frontier": [fig7],
        "core-index": [fig7],
        "optimize": [fig7, "--weights", "1"],
        "sensitivity": [fig7],
        "validate": [series, "--samples", "5000", "--seed", "11"],
    }
    for command, args in commands.items():
        runs = []
        for threads in ("1", "8"):
            for repeat in range(2):
                out = tmp_path / f"{command}-{threads}-{repeat}.csv"
                env = dict(os.environ, FORTINET_THREADS=threads)
                proc = subprocess.run(
                    [sys.executable, "-m", "fortinet", command, *args, "--out", str(out)],
                    capture_output=True,
                    env=env,
                    check=False,
                )
                assert proc.returncode == 0, proc.stderr.decode()
                runs.append((proc.stdout, out.read_bytes()))
        assert all(run == runs[0] for run in runs[1:]), command
