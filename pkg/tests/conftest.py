"""Shared fixtures and the acceptance summary hook."""

from __future__ import annotations

import re

from hypothesis import HealthCheck, settings

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


# One human-readable line per acceptance criterion, printed in the terminal
# summary so a full run ends with an explicit pass/fail table.
CRITERIA = {
    1: "additive solver: 500-instance sweep is complete and removal-stable",
    2: "additive outputs hit the social-cost floor and the oracle minimum",
    3: "cancelable solver: 500-instance sweep with batch and iteration bounds",
    4: "general solver: 500-instance sweep is envy-free with small leftover",
    5: "submodular solver: 300-instance sweep within factor-2 stability",
    6: "ternary counterexample: no allocation is both removal-stable and efficient",
    7: "cap-5 counterexample: every stable allocation is an inefficient even split",
    8: "class checker: flags, witnesses and containments",
    9: "structure checks: extension and exchange properties hold exhaustively",
    10: "benchmarks: operation counts within the fitted quadratic bound",
}

_ACCEPTANCE_RE = re.compile(r"test_acceptance\.py::test_criterion_(\d+)")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines: dict[int, str] = {}
    for outcome in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(outcome, []):
            match = _ACCEPTANCE_RE.search(getattr(report, "nodeid", ""))
            if not match:
                continue
            num = int(match.group(1))
            verdict = "PASS" if outcome == "passed" else "FAIL"
            lines[num] = f"criterion {num:>2}: {verdict}  {CRITERIA.get(num, '')}"
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for num in sorted(lines):
            terminalreporter.write_line(lines[num])
