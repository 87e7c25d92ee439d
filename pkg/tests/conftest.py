import pytest

_criteria: dict[int, dict] = {}


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("acceptance")
        if marker is None:
            continue
        number, title = marker.args
        entry = _criteria.setdefault(number, {"title": title, "outcomes": {}, "details": []})
        entry["outcomes"][item.nodeid] = None


def pytest_runtest_logreport(report):
    for entry in _criteria.values():
        if report.nodeid not in entry["outcomes"]:
            continue
        if report.when == "call" or report.failed:
            prev = entry["outcomes"][report.nodeid]
            entry["outcomes"][report.nodeid] = "failed" if report.failed or prev == "failed" else report.outcome


def pytest_terminal_summary(terminalreporter):
    ran = {n: e for n, e in _criteria.items() if any(v is not None for v in e["outcomes"].values())}
    if not ran:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ran):
        entry = ran[number]
        states = [v for v in entry["outcomes"].values() if v is not None]
        verdict = "PASS" if states and all(s == "passed" for s in states) else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {verdict}  {entry['title']}")
        for line in entry["details"]:
            terminalreporter.write_line(f"    {line}")


@pytest.fixture
def detail(request):
    """Attach a measured value to the acceptance summary line of this test's criterion."""
    marker = request.node.get_closest_marker("acceptance")
    sink = _criteria[marker.args[0]]["details"] if marker else []
    return sink.append
