import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_CRITERIA = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    name = item.originalname if hasattr(item, "originalname") else item.name
    if not name.startswith("test_criterion_"):
        return
    number = int(name.split("_")[2])
    doc = (item.function.__doc__ or name).strip().splitlines()[0]
    failed = report.failed or (report.when == "call" and report.skipped)
    previous = _CRITERIA.get(number, (doc, True, ""))
    ok = previous[1] and not failed
    reason = previous[2]
    if report.failed and not reason:
        reason = report.longrepr.reprcrash.message if hasattr(report.longrepr, "reprcrash") \
            else str(report.longrepr).splitlines()[-1]
    _CRITERIA[number] = (doc, ok, reason)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        doc, ok, reason = _CRITERIA[number]
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {doc}"
        if not ok:
            line += f"  ({reason})"
        terminalreporter.write_line(line)
