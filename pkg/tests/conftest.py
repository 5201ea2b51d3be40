import pytest

_criteria: dict[int, tuple[str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    # a failure in any phase sticks; a pass only counts from the call phase
    if report.failed:
        _criteria[number] = ("FAIL", title)
    elif report.when == "call" and _criteria.get(number, ("PASS",))[0] != "FAIL":
        _criteria[number] = ("PASS", title)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        status, title = _criteria[number]
        terminalreporter.write_line(f"criterion {number:2d}: {status}  {title}")
