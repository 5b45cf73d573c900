import pytest

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or report.when != "call":
        return
    number, title = mark.args
    detail = ""
    if report.failed:
        message = str(report.longrepr).strip().splitlines()
        detail = next((line for line in reversed(message) if line.startswith("E ")), message[-1])
    else:
        detail = "; ".join(value for key, value in item.user_properties if key == "detail")
    _RESULTS[number] = (title, report.passed, report.duration, detail)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        title, passed, seconds, detail = _RESULTS[number]
        status = "PASS" if passed else "FAIL"
        line = f"criterion {number}: {status} ({seconds:.1f} s) {title}"
        terminalreporter.write_line(line + (f" | {detail}" if detail else ""))
