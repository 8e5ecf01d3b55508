import pytest

_criteria = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    marker = _markers.get(report.nodeid)
    if marker is None:
        return
    number, text = marker
    _criteria[report.nodeid] = (number, text, report.outcome)


_markers = {}


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            _markers[item.nodeid] = (mark.args[0], mark.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number, text, outcome in sorted(_criteria.values()):
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {number}: {text}")


@pytest.fixture
def us():
    from pressure_match.model import ModelParams

    return ModelParams(10, 0.3232, 0.1024)


@pytest.fixture
def japan3():
    from pressure_match.model import ModelParams

    return ModelParams(3, 0.5783, 0.2707)
