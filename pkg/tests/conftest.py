import pytest

_ACCEPTANCE = pytest.StashKey[dict]()


@pytest.fixture(scope="session")
def acceptance_log(request):
    """Criterion number -> list of (passed, detail) checks, summarised at the end of the run."""
    return request.config.stash.setdefault(_ACCEPTANCE, {})


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    log = config.stash.get(_ACCEPTANCE, None)
    if not log:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(log):
        checks = log[number]
        verdict = "PASS" if all(ok for ok, _ in checks) else "FAIL"
        details = "; ".join(detail for _, detail in checks)
        terminalreporter.write_line(f"criterion {number:2d}: {verdict}  {details}")
