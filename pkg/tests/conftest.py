import os

import pytest
from hypothesis import settings

from pfca.context import build_context

settings.register_profile("pfca", max_examples=60, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "pfca"))

BOOL = ("0", "1")

# g1 = {a, b, c}, g2 = {a, b}, g3 = {b, c}, g4 = {}
CTX_A_ROWS = [
    ("g1", {"a": "1", "b": "1", "c": "1"}),
    ("g2", {"a": "1", "b": "1", "c": "0"}),
    ("g3", {"a": "0", "b": "1", "c": "1"}),
    ("g4", {"a": "0", "b": "0", "c": "0"}),
]
CTX_A_SCHEMA = {"a": BOOL, "b": BOOL, "c": BOOL}


@pytest.fixture
def ctx_a():
    return build_context(CTX_A_ROWS, CTX_A_SCHEMA)


@pytest.fixture
def lit(ctx_a):
    """``lit("+a")`` -> literal code in CTX-A."""
    return ctx_a.parse_literal


def boolean_context(rows, prefix="a"):
    """Context from 0/1 tuples, one boolean attribute per column."""
    m = len(rows[0]) if rows else 0
    schema = {f"{prefix}{j}": BOOL for j in range(m)}
    return build_context(
        [(f"g{i + 1}", {f"{prefix}{j}": str(v) for j, v in enumerate(r)}) for i, r in enumerate(rows)], schema
    )


ACCEPTANCE_LINES: list[str] = []


def report_criterion(criterion: str, passed: bool, detail: str) -> bool:
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
