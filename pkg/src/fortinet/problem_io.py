"""Problem files: a strict JSON schema, canonical emission, digests.

Schema version "1". Unknown fields are rejected and every diagnostic
carries the dotted path of the offending field, so a typo in a fixture
fails loudly instead of silently changing the model.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Sequence

from .errors import ProblemFileError
from .graphs import DEFAULT_ENUMERATION_CAP, NodeSpec, build_network
from .portfolios import (
    AT_MOST_K,
    IMPLIES,
    MUTEX,
    FortificationAction,
    LogicalConstraint,
    ProblemSpec,
    build_problem,
)
from .preferences import (
    WeightConstraint,
    make_weight_set,
    ratio_constraints_from_volumes,
)
from .reliability import AUTO, EXACT, MCUB, MONTE_CARLO, Objective

SCHEMA_VERSION = "1"

_METHODS = {
    "auto": AUTO,
    "exact": EXACT,
    "mcub": MCUB,
    "mc": MONTE_CARLO,
    "monte_carlo": MONTE_CARLO,
}

BOUND_MODES = ("qa", "b1")
CORE_MODES = ("exact", "at_most")


@dataclass(frozen=True)
class RunOptions:
    """Execution knobs carried by a problem file, overridable by flags."""

    method: str = AUTO
    enumeration_cap: int = DEFAULT_ENUMERATION_CAP
    seed: int = 0
    samples: int = 100_000
    bound: str = "qa"
    max_cut_size: int | None = None
    round_ratios: bool = True
    core_index_mode: str = "exact"


@dataclass(frozen=True)
class ProblemDocument:
    """Parsed problem file: a validated spec plus run options."""

    spec: ProblemSpec
    options: RunOptions
    volumes: tuple[float, ...] | None = None


def _type_name(value: Any) -> str:
    return type(value).__name__


def _fail(path: str, message: str) -> ProblemFileError:
    return ProblemFileError(f"{path}: {message}")


def _as_mapping(value: Any, path: str) -> Mapping[str, Any]:
    if not isinstance(value, dict):
        raise _fail(path, f"expected an object, got {_type_name(value)}")
    return value


def _as_list(value: Any, path: str) -> list[Any]:
    if not isinstance(value, list):
        raise _fail(path, f"expected an array, got {_type_name(value)}")
    return value


def _check_unknown(obj: Mapping[str, Any], allowed: Sequence[str], path: str) -> None:
    for key in obj:
        if key not in allowed:
            raise _fail(f"{path}.{key}" if path else key, "unknown field")


def _get(
    obj: Mapping[str, Any], key: str, path: str, required: bool, default: Any = None
) -> Any:
    if key in obj:
        return obj[key]
    if required:
        raise _fail(f"{path}.{key}" if path else key, "required field is missing")
    return default


def _string(value: Any, path: str) -> str:
    if not isinstance(value, str):
        raise _fail(path, f"expected a string, got {_type_name(value)}")
    return value


def _boolean(value: Any, path: str) -> bool:
    if not isinstance(value, bool):
        raise _fail(path, f"expected a boolean, got {_type_name(value)}")
    return value


def _number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise _fail(path, f"expected a number, got {_type_name(value)}")
    value = float(value)
    if math.isnan(value):
        raise _fail(path, "NaN is not allowed")
    return value


def _integer(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise _fail(path, f"expected an integer, got {_type_name(value)}")
    return value


_TOP_FIELDS = (
    "schema_version",
    "nodes",
    "edges",
    "objectives",
    "actions",
    "budget",
    "logical_constraints",
    "weight_constraints",
    "options",
)


def parse_document(data: Any, source: str = "<memory>") -> ProblemDocument:
    """Validate raw JSON data against schema version 1.

    Raises ProblemFileError with a dotted field path on any violation,
    including unknown fields, wrong types, and model-level inconsistency.
    """
    root = _as_mapping(data, "document")
    _check_unknown(root, _TOP_FIELDS, "")
    version = _string(_get(root, "schema_version", "", True), "schema_version")
    if version != SCHEMA_VERSION:
        raise _fail("schema_version", f"expected {SCHEMA_VERSION!r}, got {version!r}")

    nodes = []
    border: list[str] = []
    for i, raw in enumerate(_as_list(_get(root, "nodes", "", True), "nodes")):
        path = f"nodes[{i}]"
        obj = _as_mapping(raw, path)
        _check_unknown(obj, ("id", "p_fail", "fallible", "border"), path)
        node_id = _string(_get(obj, "id", path, True), f"{path}.id")
        p_fail = _number(_get(obj, "p_fail", path, False, 0.0), f"{path}.p_fail")
        fallible = _get(obj, "fallible", path, False)
        if fallible is not None:
            fallible = _boolean(fallible, f"{path}.fallible")
        if _boolean(_get(obj, "border", path, False, False), f"{path}.border"):
            border.append(node_id)
        nodes.append(NodeSpec(id=node_id, p_fail=p_fail, fallible=fallible))

    edges = []
    for i, raw in enumerate(_as_list(_get(root, "edges", "", True), "edges")):
        path = f"edges[{i}]"
        pair = _as_list(raw, path)
        if len(pair) != 2:
            raise _fail(path, f"expected two endpoints, got {len(pair)}")
        edges.append(
            (_string(pair[0], f"{path}[0]"), _string(pair[1], f"{path}[1]"))
        )

    objectives = []
    volumes: list[float | None] = []
    for i, raw in enumerate(
        _as_list(_get(root, "objectives", "", True), "objectives")
    ):
        path = f"objectives[{i}]"
        obj = _as_mapping(raw, path)
        _check_unknown(obj, ("name", "pair", "min_reliability", "weight"), path)
        name = _string(_get(obj, "name", path, True), f"{path}.name")
        pair_raw = _as_list(_get(obj, "pair", path, True), f"{path}.pair")
        if len(pair_raw) != 2:
            raise _fail(f"{path}.pair", f"expected two node ids, got {len(pair_raw)}")
        pair = (
            _string(pair_raw[0], f"{path}.pair[0]"),
            _string(pair_raw[1], f"{path}.pair[1]"),
        )
        alpha = _number(
            _get(obj, "min_reliability", path, False, 0.0), f"{path}.min_reliability"
        )
        weight = _get(obj, "weight", path, False)
        if weight is not None:
            weight = _number(weight, f"{path}.weight")
            if weight <= 0:
                raise _fail(f"{path}.weight", "must be positive")
        volumes.append(weight)
        objectives.append(Objective(name=name, pair=pair, min_reliability=alpha))

    actions = []
    for i, raw in enumerate(_as_list(_get(root, "actions", "", True), "actions")):
        path = f"actions[{i}]"
        obj = _as_mapping(raw, path)
        _check_unknown(obj, ("id", "node", "cost", "p_after"), path)
        actions.append(
            FortificationAction(
                id=_string(_get(obj, "id", path, True), f"{path}.id"),
                node=_string(_get(obj, "node", path, True), f"{path}.node"),
                cost=_number(_get(obj, "cost", path, True), f"{path}.cost"),
                p_after=_number(_get(obj, "p_after", path, True), f"{path}.p_after"),
            )
        )

    budget = _number(_get(root, "budget", "", True), "budget")

    constraints = []
    for i, raw in enumerate(
        _as_list(_get(root, "logical_constraints", "", False, []), "logical_constraints")
    ):
        path = f"logical_constraints[{i}]"
        obj = _as_mapping(raw, path)
        _check_unknown(obj, ("kind", "actions", "k"), path)
        kind = _string(_get(obj, "kind", path, True), f"{path}.kind")
        if kind not in (MUTEX, IMPLIES, AT_MOST_K):
            raise _fail(f"{path}.kind", f"unknown constraint kind {kind!r}")
        ids = tuple(
            _string(v, f"{path}.actions[{j}]")
            for j, v in enumerate(_as_list(_get(obj, "actions", path, True), f"{path}.actions"))
        )
        k = _get(obj, "k", path, False)
        if kind == AT_MOST_K:
            k = _integer(k, f"{path}.k") if k is not None else None
            if k is None:
                raise _fail(f"{path}.k", "required for at_most_k constraints")
        elif k is not None:
            raise _fail(f"{path}.k", f"not allowed for {kind} constraints")
        constraints.append(LogicalConstraint(kind=kind, actions=ids, k=k))

    m = len(objectives)
    weight_rows = []
    for i, raw in enumerate(
        _as_list(_get(root, "weight_constraints", "", False, []), "weight_constraints")
    ):
        path = f"weight_constraints[{i}]"
        obj = _as_mapping(raw, path)
        _check_unknown(obj, ("coefficients", "sense", "bound"), path)
        coeffs = [
            _number(v, f"{path}.coefficients[{j}]")
            for j, v in enumerate(
                _as_list(_get(obj, "coefficients", path, True), f"{path}.coefficients")
            )
        ]
        if len(coeffs) != m:
            raise _fail(
                f"{path}.coefficients", f"expected {m} coefficients, got {len(coeffs)}"
            )
        sense = _string(_get(obj, "sense", path, False, "<="), f"{path}.sense")
        bound_val = _number(_get(obj, "bound", path, True), f"{path}.bound")
        if sense == "<=":
            pass
        elif sense == ">=":
            coeffs = [-c for c in coeffs]
            bound_val = -bound_val
        else:
            raise _fail(f"{path}.sense", f'expected "<=" or ">=", got {sense!r}')
        weight_rows.append(
            WeightConstraint(coefficients=tuple(coeffs), bound=bound_val)
        )

    options = _parse_options(_get(root, "options", "", False, {}))

    declared = [v for v in volumes if v is not None]
    volume_tuple: tuple[float, ...] | None = None
    if declared:
        if len(declared) != m:
            missing = volumes.index(None)
            raise _fail(
                f"objectives[{missing}].weight",
                "required once any objective declares a weight",
            )
        volume_tuple = tuple(float(v) for v in volumes)  # type: ignore[arg-type]
        weight_rows.extend(
            ratio_constraints_from_volumes(
                volume_tuple, round_ratios=options.round_ratios
            )
        )

    try:
        network = build_network(nodes, edges, border)
        weight_set = make_weight_set(m, weight_rows)
        spec = build_problem(
            network=network,
            objectives=objectives,
            actions=actions,
            budget=budget,
            constraints=constraints,
            weight_set=weight_set,
        )
    except ValueError as exc:
        raise ProblemFileError(f"{source}: {exc}") from exc
    return ProblemDocument(spec=spec, options=options, volumes=volume_tuple)


_OPTION_FIELDS = (
    "method",
    "enumeration_cap",
    "seed",
    "samples",
    "bound",
    "max_cut_size",
    "round_ratios",
    "core_index_mode",
)


def _parse_options(raw: Any) -> RunOptions:
    obj = _as_mapping(raw, "options")
    _check_unknown(obj, _OPTION_FIELDS, "options")
    method = _string(_get(obj, "method", "options", False, "auto"), "options.method")
    if method not in _METHODS:
        raise _fail(
            "options.method", f"expected one of {sorted(_METHODS)}, got {method!r}"
        )
    bound = _string(_get(obj, "bound", "options", False, "qa"), "options.bound")
    if bound not in BOUND_MODES:
        raise _fail("options.bound", f"expected one of {BOUND_MODES}, got {bound!r}")
    core_mode = _string(
        _get(obj, "core_index_mode", "options", False, "exact"),
        "options.core_index_mode",
    )
    if core_mode not in CORE_MODES:
        raise _fail(
            "options.core_index_mode",
            f"expected one of {CORE_MODES}, got {core_mode!r}",
        )
    cap = _integer(
        _get(obj, "enumeration_cap", "options", False, DEFAULT_ENUMERATION_CAP),
        "options.enumeration_cap",
    )
    if cap < 0:
        raise _fail("options.enumeration_cap", "must be nonnegative")
    seed = _integer(_get(obj, "seed", "options", False, 0), "options.seed")
    samples = _integer(
        _get(obj, "samples", "options", False, 100_000), "options.samples"
    )
    if samples < 1:
        raise _fail("options.samples", "must be positive")
    max_cut = _get(obj, "max_cut_size", "options", False)
    if max_cut is not None:
        max_cut = _integer(max_cut, "options.max_cut_size")
        if max_cut < 1:
            raise _fail("options.max_cut_size", "must be positive")
    round_ratios = _boolean(
        _get(obj, "round_ratios", "options", False, True), "options.round_ratios"
    )
    return RunOptions(
        method=_METHODS[method],
        enumeration_cap=cap,
        seed=seed,
        samples=samples,
        bound=bound,
        max_cut_size=max_cut,
        round_ratios=round_ratios,
        core_index_mode=core_mode,
    )


def loads_document(text: str, source: str = "<string>") -> ProblemDocument:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFileError(
            f"{source}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
    return parse_document(data, source)


def load_document(path: str | Path) -> ProblemDocument:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ProblemFileError(f"{p}: cannot read file: {exc}") from exc
    return loads_document(text, source=str(p))


def _method_key(method: str) -> str:
    for key, value in _METHODS.items():
        if value == method and key != "mc":
            return key
    raise ValueError(f"unknown method {method!r}")


def _options_data(options: RunOptions) -> dict[str, Any]:
    return {
        "method": _method_key(options.method),
        "enumeration_cap": options.enumeration_cap,
        "seed": options.seed,
        "samples": options.samples,
        "bound": options.bound,
        "max_cut_size": options.max_cut_size,
        "round_ratios": options.round_ratios,
        "core_index_mode": options.core_index_mode,
    }


def document_data(
    spec: ProblemSpec, options: RunOptions | None = None
) -> dict[str, Any]:
    """Plain-JSON form of a problem, parseable back to an equal spec.

    Weight constraints are emitted in normalized "<=" form, including
    any rows that were derived from objective weights on input.
    """
    border = set(spec.network.border_nodes)
    nodes = []
    for node in spec.network.nodes:
        item: dict[str, Any] = {"id": node.id, "p_fail": node.p_fail}
        if node.fallible is not None:
            item["fallible"] = node.fallible
        item["border"] = node.id in border
        nodes.append(item)
    constraints = []
    for con in spec.constraints:
        item = {"kind": con.kind, "actions": list(con.actions)}
        if con.kind == AT_MOST_K:
            item["k"] = con.k
        constraints.append(item)
    data: dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "nodes": nodes,
        "edges": [list(edge) for edge in spec.network.edges],
        "objectives": [
            {
                "name": o.name,
                "pair": list(o.pair),
                "min_reliability": o.min_reliability,
            }
            for o in spec.objectives
        ],
        "actions": [
            {"id": a.id, "node": a.node, "cost": a.cost, "p_after": a.p_after}
            for a in spec.actions
        ],
        "budget": spec.budget,
        "logical_constraints": constraints,
        "weight_constraints": [
            {
                "coefficients": list(row.coefficients),
                "sense": "<=",
                "bound": row.bound,
            }
            for row in spec.weight_set.constraints
        ],
    }
    if options is not None:
        data["options"] = _options_data(options)
    return data


def dumps_document(spec: ProblemSpec, options: RunOptions | None = None) -> str:
    """Canonical text form: sorted keys, two-space indent, LF endings."""
    return json.dumps(document_data(spec, options), sort_keys=True, indent=2) + "\n"


def spec_digest(spec: ProblemSpec) -> str:
    """Digest of the problem content alone, independent of run options."""
    payload = json.dumps(
        document_data(spec, None), sort_keys=True, separators=(",", ":")
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()
