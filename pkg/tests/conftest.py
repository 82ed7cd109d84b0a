"""Prints one pass/fail line per acceptance criterion at the end of the run."""

from __future__ import annotations

import re

import pytest

_CRITERIA: dict[int, list[tuple[str, str]]] = {}
_DETAILS: dict[int, list[str]] = {}
_NOT_APPLICABLE = {8: "C_min distribution claims are out of scope; nothing to check"}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)", report.nodeid)
    if not m:
        return
    k = int(m.group(1))
    if report.when == "call" or report.outcome != "passed":
        _CRITERIA.setdefault(k, []).append((report.nodeid, report.outcome))
        for name, value in report.user_properties:
            if name == "detail":
                _DETAILS.setdefault(k, []).append(str(value))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for k in sorted(set(_CRITERIA) | set(_NOT_APPLICABLE)):
        if k in _NOT_APPLICABLE and k not in _CRITERIA:
            tr.write_line(f"criterion {k}: N/A ({_NOT_APPLICABLE[k]})")
            continue
        outcomes = [o for _, o in _CRITERIA[k]]
        status = "PASS" if all(o == "passed" for o in outcomes) else "FAIL"
        detail = "; ".join(_DETAILS.get(k, []))
        tr.write_line(f"criterion {k}: {status}" + (f" ({detail})" if detail else ""))


@pytest.fixture
def detail(record_property):
    """Attach a short human-readable summary to the acceptance line."""

    def put(text: str) -> None:
        record_property("detail", text)

    return put
