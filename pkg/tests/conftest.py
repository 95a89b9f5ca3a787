"""Shared pytest wiring: one pass/fail summary line per acceptance criterion."""

import re

CRITERIA = {
    1: "exact solver matches exhaustive oracle",
    2: "validator soundness and mutation sensitivity",
    3: "boundary and movement-dynamics invariants",
    4: "interface-count loss trend",
    5: "horizon-length monotonicity trends",
    6: "weight-schedule behavior",
    7: "loss-threshold window and infeasibility",
    8: "all-ones threshold tautology",
    9: "LP export/parse/solve round trip",
    10: "minimum-horizon and rotation-time arithmetic",
}

_PAT = re.compile(r"test_criterion_0*(\d+)")
_results: dict[int, bool] = {}


def pytest_runtest_logreport(report):
    match = _PAT.search(report.nodeid)
    if not match:
        return
    num = int(match.group(1))
    if report.when == "call":
        passed = report.outcome == "passed"
        _results[num] = _results.get(num, True) and passed
    elif report.outcome not in ("passed", "skipped"):
        _results[num] = False


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_results):
        verdict = "PASS" if _results[num] else "FAIL"
        label = CRITERIA.get(num, "")
        terminalreporter.write_line(f"criterion {num:02d}: {verdict}  {label}")
