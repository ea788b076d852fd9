"""Session fixtures and the acceptance summary hook."""

from __future__ import annotations

import numpy as np
import pytest

from fortinet import EvaluationContext
from fortinet.fixtures import fixture_path
from fortinet.problem_io import load_document

_ACCEPTANCE_MARKER = "test_acceptance.py::test_criterion_"


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile both kernels once so timed tests measure algorithms, not jit."""
    doc = load_document(fixture_path("fig7.json"))
    zero = np.zeros((1, doc.spec.h), dtype=np.int8)
    EvaluationContext(doc.spec, method="exact").evaluate_bits(zero)
    EvaluationContext(doc.spec, method="mcub").evaluate_bits(zero)


@pytest.fixture(scope="session")
def fig7():
    return load_document(fixture_path("fig7.json"))


@pytest.fixture(scope="session")
def standin():
    return load_document(fixture_path("siilinjarvi-standin.json"))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Print one line per acceptance criterion test."""
    outcome = {}
    for status, word in (
        ("passed", "PASS"),
        ("failed", "FAIL"),
        ("error", "FAIL"),
        ("skipped", "SKIP"),
    ):
        for report in terminalreporter.stats.get(status, []):
            nodeid = getattr(report, "nodeid", "")
            if _ACCEPTANCE_MARKER in nodeid:
                outcome[nodeid.split("::")[-1]] = word
    if not outcome:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name in sorted(outcome):
        terminalreporter.write_line(f"{outcome[name]:4s} {name}")
