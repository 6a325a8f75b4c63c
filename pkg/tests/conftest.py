import os

from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=200, deadline=None)
settings.register_profile("ci", max_examples=1000, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

import pytest

# (criterion number, title, status, detail), filled by the acceptance suite
ACCEPTANCE_LINES: list[tuple[int, str, str, str]] = []


class CriterionRecorder:
    def __init__(self, number: int, title: str) -> None:
        self.number = number
        self.title = title
        self.details: list[str] = []

    def note(self, text: str) -> None:
        self.details.append(text)
        print(f"criterion {self.number}: {text}")


@pytest.fixture
def criterion(request):
    marker = request.node.get_closest_marker("criterion")
    number, title = marker.args
    recorder = CriterionRecorder(number, title)
    yield recorder
    report = getattr(request.node, "rep_call", None)
    if report is None or report.skipped:
        status = "SKIP"
    else:
        status = "PASS" if report.passed else "FAIL"
    ACCEPTANCE_LINES.append((number, f"{title} [{request.node.callspec.id if hasattr(request.node, 'callspec') else 'all'}]", status, "; ".join(recorder.details)))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call" or (report.when == "setup" and report.skipped):
        item.rep_call = report


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, status, detail in sorted(ACCEPTANCE_LINES, key=lambda x: x[0]):
        line = f"{status} criterion {number}: {title}"
        if detail:
            line += f" -- {detail}"
        terminalreporter.write_line(line)
