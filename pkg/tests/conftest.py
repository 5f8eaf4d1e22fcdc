import pytest

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(label): one acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    label = marker.args[0]
    failed = report.failed
    if report.when == "call" or failed:
        previous = _RESULTS.get(label, True)
        _RESULTS[label] = previous and not failed


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_RESULTS, key=lambda s: int(s.split()[0][2:])):
        terminalreporter.write_line(f"{'PASS' if _RESULTS[label] else 'FAIL'}  {label}")
