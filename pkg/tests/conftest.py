"""Prints one PASS/FAIL line per acceptance criterion at the end of the run."""

_criteria: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by this test")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark:
            number, title = mark.args
            _criteria[number] = {"title": title, "nodeid": item.nodeid, "outcome": "not run"}


def pytest_runtest_logreport(report):
    for entry in _criteria.values():
        if entry["nodeid"] != report.nodeid:
            continue
        if report.failed:
            entry["outcome"] = "FAIL"
        elif report.when == "call" and report.passed:
            entry["outcome"] = "PASS"
        elif report.skipped:
            entry["outcome"] = "SKIP"


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        entry = _criteria[number]
        terminalreporter.write_line(f"criterion {number:2d}: {entry['outcome']:7s} {entry['title']}")
