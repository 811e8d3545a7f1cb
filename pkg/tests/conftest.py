"""Shared pytest hooks: a pass/fail line per acceptance check at the end of the run."""
import pytest

ACCEPTANCE = {}  # test name -> (title, detail)
_outcomes = {}


@pytest.fixture
def acceptance(request):
    """Register the running test as an acceptance check; call with a title and detail text."""

    def record(title, detail=""):
        ACCEPTANCE[request.node.name] = (title, detail)

    return record


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        _outcomes[item.name] = rep.passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance")
    for name, (title, detail) in ACCEPTANCE.items():
        status = "PASS" if _outcomes.get(name) else "FAIL"
        line = f"{status}  {title}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)
