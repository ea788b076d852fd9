"""Regenerate the frozen frontier for the bundled stand-in network.

Run from the repository root:

    python3 tools/freeze_standin.py

Writes tests/data/standin_frontier.json with the cost-efficient
portfolios of the stand-in problem in frontier order, their costs and
per-objective reliabilities, and the do-nothing baseline. The test
suite locks future runs against this file, so regenerate it only when
an intentional behavioural change is being made, and eyeball the diff.
"""

from __future__ import annotations

import json
from collections import Counter
from pathlib import Path

from fortinet import algorithm1
from fortinet.fixtures import fixture_path
from fortinet.problem_io import load_document
from fortinet.reliability import ReliabilityContext

FIXTURE = "siilinjarvi-standin.json"
TARGET = Path(__file__).resolve().parents[1] / "tests" / "data" / "standin_frontier.json"


def main() -> None:
    doc = load_document(fixture_path(FIXTURE))
    options = doc.options
    frontier = algorithm1(
        doc.spec,
        method=options.method,
        bound=options.bound,
        cap=options.enumeration_cap,
        max_cut_size=options.max_cut_size,
    )

    context = ReliabilityContext(
        doc.spec.network,
        doc.spec.objectives,
        cap=options.enumeration_cap,
        max_cut_size=options.max_cut_size,
    )
    method = context.resolve_method(options.method)
    baseline = [
        float(context.estimate(j, None, method).value)
        for j in range(len(doc.spec.objectives))
    ]

    payload = {
        "fixture": FIXTURE,
        "method": method,
        "bound": options.bound,
        "budget": doc.spec.budget,
        "objectives": [o.name for o in doc.spec.objectives],
        "baseline_reliabilities": baseline,
        "entries": [
            {
                "portfolio": "".join(str(int(b)) for b in entry.portfolio),
                "cost": entry.cost,
                "reliabilities": list(entry.reliabilities),
            }
            for entry in frontier.entries
        ],
    }

    TARGET.parent.mkdir(parents=True, exist_ok=True)
    TARGET.write_text(json.dumps(payload, indent=1) + "\n", encoding="utf-8")

    by_cost = Counter(entry.cost for entry in frontier.entries)
    print(f"wrote {TARGET}")
    print(f"entries: {len(frontier.entries)}  per cost: {dict(sorted(by_cost.items()))}")
    print(f"baseline: {baseline}")


if __name__ == "__main__":
    main()
