"""Command-line front end.

Each subcommand parses a problem file, runs one computation, and emits a
CSV table with 12-significant-digit floats and LF line endings to stdout
or --out. A run manifest (input digest, version, options, wall time,
warnings) goes to stderr, or to a .manifest.json sidecar next to --out.
Exit codes: 0 success (including empty results), 1 usage or input
errors, 2 computational caps exceeded.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
import time
import warnings
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .analytics import core_index, sensitivity_sweep
from .errors import EnumerationCapError, FortinetError
from .frontier import Frontier, algorithm1, algorithm2, solve_exact_weights
from .problem_io import ProblemDocument, RunOptions, load_document
from .reliability import EXACT, MCUB, MONTE_CARLO, ReliabilityContext

_METHOD_CHOICES = ("auto", "exact", "mcub", "mc")
_METHOD_VALUES = {"auto": "auto", "exact": EXACT, "mcub": MCUB, "mc": MONTE_CARLO}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; map that to exit code 1
    def error(self, message: str) -> None:  # type: ignore[override]
        raise _UsageError(message)


def _fmt(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _bits(portfolio: Sequence[int]) -> str:
    return "".join(str(int(v)) for v in portfolio)


def _float_list(text: str, flag: str) -> list[float]:
    items = [part.strip() for part in text.split(",") if part.strip()]
    if not items:
        raise _UsageError(f"{flag} needs at least one value")
    out = []
    for part in items:
        try:
            out.append(float(part))
        except ValueError:
            raise _UsageError(f"{flag}: {part!r} is not a number") from None
    return out


def _resolve_method(args: argparse.Namespace, options: RunOptions) -> str:
    if getattr(args, "method", None):
        return _METHOD_VALUES[args.method]
    return options.method


def _resolve_bound(args: argparse.Namespace, options: RunOptions) -> str:
    return getattr(args, "bound", None) or options.bound


def _document_frontier(
    doc: ProblemDocument, args: argparse.Namespace
) -> tuple[Frontier, str]:
    options = doc.options
    method = _resolve_method(args, options)
    bound = _resolve_bound(args, options)
    solver = algorithm1 if getattr(args, "no_alpha", False) else algorithm2
    frontier = solver(
        doc.spec,
        method=method,
        bound=bound,
        cap=options.enumeration_cap,
        max_cut_size=options.max_cut_size,
    )
    return frontier, method


def _cmd_reliability(
    doc: ProblemDocument, args: argparse.Namespace
) -> tuple[list[str], list[list[Any]], list[str], dict[str, Any]]:
    options = doc.options
    method = _resolve_method(args, options)
    samples = args.samples if args.samples is not None else options.samples
    seed = args.seed if args.seed is not None else options.seed
    spec = doc.spec
    context = ReliabilityContext(
        spec.network,
        spec.objectives,
        cap=options.enumeration_cap,
        max_cut_size=options.max_cut_size,
    )
    rows = []
    for j, objective in enumerate(spec.objectives):
        est = context.estimate(j, None, method, samples=samples, seed=seed)
        rows.append(
            [objective.name, est.value, est.method, est.bound_direction, est.std_error]
        )
    header = ["objective", "value", "method", "bound_direction", "std_error"]
    info = {"method": method, "samples": samples, "seed": seed}
    return header, rows, [], info


def _cmd_frontier(
    doc: ProblemDocument, args: argparse.Namespace
) -> tuple[list[str], list[list[Any]], list[str], dict[str, Any]]:
    spec = doc.spec
    frontier, method = _document_frontier(doc, args)
    if not frontier.entries:
        warnings.warn("frontier is empty under the given requirements")
    header = (
        ["portfolio", "actions", "cost"]
        + [f"R_{o.name}" for o in spec.objectives]
        + [f"U_{k + 1}" for k in range(len(frontier.basis))]
    )
    rows = []
    for entry in frontier.entries:
        chosen = ";".join(
            a.id for a, bit in zip(spec.actions, entry.portfolio) if bit
        )
        rows.append(
            [_bits(entry.portfolio), chosen, entry.cost]
            + list(entry.reliabilities)
            + list(entry.utilities_at_extremes)
        )
    notes = [
        f"cost {_fmt(level)}: {len(frontier.at_cost(level))} portfolio(s)"
        for level in frontier.cost_levels()
    ]
    info = {
        "method": method,
        "bound": _resolve_bound(args, doc.options),
        "alpha_applied": not args.no_alpha,
        "frontier_size": len(frontier.entries),
    }
    return header, rows, notes, info


def _cmd_core_index(
    doc: ProblemDocument, args: argparse.Namespace
) -> tuple[list[str], list[list[Any]], list[str], dict[str, Any]]:
    spec = doc.spec
    frontier, method = _document_frontier(doc, args)
    mode = args.mode or doc.options.core_index_mode
    if args.costs:
        levels = _float_list(args.costs, "--costs")
    else:
        levels = list(frontier.cost_levels())
    rows: list[list[Any]] = []
    for level in levels:
        try:
            values = [
                core_index(frontier, i, level, mode=mode)
                for i in range(len(spec.actions))
            ]
        except ValueError:
            rows.append(["*", level, None, "error: no frontier entries at this cost"])
            continue
        for action, value in zip(spec.actions, values):
            rows.append([action.id, level, value, "ok"])
    header = ["action", "cost", "core_index", "status"]
    info = {"method": method, "mode": mode, "levels": [_fmt(v) for v in levels]}
    return header, rows, [], info


def _cmd_optimize(
    doc: ProblemDocument, args: argparse.Namespace
) -> tuple[list[str], list[list[Any]], list[str], dict[str, Any]]:
    spec = doc.spec
    options = doc.options
    method = _resolve_method(args, options)
    weights = _float_list(args.weights, "--weights")
    m = len(spec.objectives)
    if len(weights) != m:
        raise _UsageError(f"--weights needs {m} values, got {len(weights)}")
    if any(w < 0 for w in weights):
        raise _UsageError("--weights must be nonnegative")
    total = sum(weights)
    if total <= 0:
        raise _UsageError("--weights must not be all zero")
    if abs(total - 1.0) > 1e-9:
        warnings.warn(f"weights sum to {total:.12g}; renormalizing to the simplex")
        weights = [w / total for w in weights]
    entry = solve_exact_weights(
        spec,
        weights,
        method=method,
        cap=options.enumeration_cap,
        max_cut_size=options.max_cut_size,
    )
    chosen = ";".join(a.id for a, bit in zip(spec.actions, entry.portfolio) if bit)
    header = (
        ["portfolio", "actions", "cost", "utility"]
        + [f"R_{o.name}" for o in spec.objectives]
    )
    rows = [
        [_bits(entry.portfolio), chosen, entry.cost, entry.utilities_at_extremes[0]]
        + list(entry.reliabilities)
    ]
    info = {"method": method, "weights": [_fmt(w) for w in weights]}
    return header, rows, [], info


def _cmd_sensitivity(
    doc: ProblemDocument, args: argparse.Namespace
) -> tuple[list[str], list[list[Any]], list[str], dict[str, Any]]:
    options = doc.options
    method = _resolve_method(args, options)
    bound = _resolve_bound(args, options)
    p_grid = _float_list(args.p_grid, "--p-grid")
    divisor_grid = _float_list(args.divisor_grid, "--divisor-grid")
    report = sensitivity_sweep(
        doc.spec,
        p_grid,
        divisor_grid,
        method=method,
        bound=bound,
        cap=options.enumeration_cap,
        apply_requirements=not args.no_alpha,
    )
    header = [
        "p_fail",
        "divisor",
        "p_after",
        "frontier_size",
        "fingerprint",
        "composition_invariant",
    ]
    rows = [
        [
            cell.p_fail,
            cell.divisor,
            cell.p_after,
            cell.frontier_size,
            cell.fingerprint,
            report.composition_invariant,
        ]
        for cell in report.cells
    ]
    info = {
        "method": method,
        "bound": bound,
        "cells": len(report.cells),
        "composition_invariant": report.composition_invariant,
    }
    return header, rows, [], info


def _cmd_validate(
    doc: ProblemDocument, args: argparse.Namespace
) -> tuple[list[str], list[list[Any]], list[str], dict[str, Any]]:
    options = doc.options
    samples = args.samples if args.samples is not None else options.samples
    seed = args.seed if args.seed is not None else options.seed
    spec = doc.spec
    context = ReliabilityContext(
        spec.network,
        spec.objectives,
        cap=options.enumeration_cap,
        max_cut_size=options.max_cut_size,
    )
    exact_ok = context.resolve_method("auto") == EXACT
    rows = []
    for j, objective in enumerate(spec.objectives):
        exact = context.estimate(j, None, EXACT).value if exact_ok else None
        lower = context.estimate(j, None, MCUB).value
        mc = context.estimate(j, None, MONTE_CARLO, samples=samples, seed=seed)
        gap = exact - lower if exact is not None else None
        rows.append([objective.name, exact, lower, gap, mc.value, mc.std_error])
    header = ["objective", "exact", "mcub", "gap", "monte_carlo", "std_error"]
    info = {"samples": samples, "seed": seed, "exact_available": exact_ok}
    return header, rows, [], info


_COMMANDS = {
    "reliability": _cmd_reliability,
    "frontier": _cmd_frontier,
    "core-index": _cmd_core_index,
    "optimize": _cmd_optimize,
    "sensitivity": _cmd_sensitivity,
    "validate": _cmd_validate,
}


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="fortinet",
        description="Cost-efficient fortification portfolios for failure-prone networks.",
    )
    parser.add_argument("--version", action="version", version=f"fortinet {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: _Parser) -> None:
        p.add_argument("file", help="problem file (JSON, schema version 1)")
        p.add_argument("--out", help="write CSV here instead of stdout")
        p.add_argument(
            "--method",
            choices=_METHOD_CHOICES,
            help="reliability evaluation method (default: from file options)",
        )

    p = sub.add_parser("reliability", help="per-objective connection reliability")
    common(p)
    p.add_argument("--samples", type=int, help="Monte Carlo sample count")
    p.add_argument("--seed", type=int, help="Monte Carlo seed")

    p = sub.add_parser("frontier", help="enumerate cost-efficient portfolios")
    common(p)
    p.add_argument(
        "--no-alpha",
        action="store_true",
        help="ignore minimum reliability requirements from the file",
    )
    p.add_argument(
        "--bound",
        choices=("qa", "b1"),
        help="extension bound: qa = everything-on (cheap), b1 = exact (tight)",
    )

    p = sub.add_parser("core-index", help="per-action core indices by cost level")
    common(p)
    p.add_argument("--costs", help="comma-separated cost levels (default: all)")
    p.add_argument(
        "--mode",
        choices=("exact", "at_most"),
        help="match cost level exactly or include all cheaper entries",
    )
    p.add_argument("--no-alpha", action="store_true", help=argparse.SUPPRESS)
    p.add_argument("--bound", choices=("qa", "b1"), help=argparse.SUPPRESS)

    p = sub.add_parser("optimize", help="best portfolio for one weight vector")
    common(p)
    p.add_argument(
        "--weights", required=True, help="comma-separated objective weights"
    )

    p = sub.add_parser("sensitivity", help="frontier composition across a probability grid")
    common(p)
    p.add_argument(
        "--p-grid",
        default="0.01,0.02,0.03,0.04,0.05",
        help="comma-separated baseline failure probabilities",
    )
    p.add_argument(
        "--divisor-grid",
        default="2,3,4,5",
        help="comma-separated reduction divisors (inf allowed)",
    )
    p.add_argument("--no-alpha", action="store_true", help=argparse.SUPPRESS)
    p.add_argument("--bound", choices=("qa", "b1"), help=argparse.SUPPRESS)

    p = sub.add_parser("validate", help="compare reliability methods per objective")
    common(p)
    p.add_argument("--samples", type=int, help="Monte Carlo sample count")
    p.add_argument("--seed", type=int, help="Monte Carlo seed")

    return parser


def _render_csv(header: list[str], rows: list[list[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(value) for value in row])
    return buffer.getvalue()


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    started = time.perf_counter()
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            doc = load_document(args.file)
            header, rows, notes, info = _COMMANDS[args.command](doc, args)
            output = _render_csv(header, rows)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except EnumerationCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (FortinetError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    warning_texts = [str(w.message) for w in caught]
    for text in warning_texts:
        print(f"warning: {text}", file=sys.stderr)
    for note in notes:
        print(note, file=sys.stderr)

    manifest = {
        "tool": "fortinet",
        "version": __version__,
        "command": args.command,
        "input": str(args.file),
        "input_sha256": hashlib.sha256(
            Path(args.file).read_bytes()
        ).hexdigest(),
        "options": info,
        "rows": len(rows),
        "wall_time_s": round(time.perf_counter() - started, 6),
        "warnings": warning_texts,
    }
    if args.out:
        out_path = Path(args.out)
        out_path.write_text(output, encoding="utf-8")
        sidecar = out_path.with_name(out_path.name + ".manifest.json")
        sidecar.write_text(
            json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    else:
        sys.stdout.write(output)
        print(json.dumps(manifest, sort_keys=True), file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
