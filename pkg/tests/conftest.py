import numpy as np
import pytest

# One summary line per acceptance criterion, printed after the run so the
# verdicts survive in captured logs.
_ACCEPTANCE_LINES = {}


@pytest.fixture
def acceptance_record(request):
    """Callable(criterion, detail) recording a PASS line for the summary.

    The line is only emitted if the test finishes without raising, so a
    recorded criterion is a passed criterion.
    """

    def record(criterion, detail):
        _ACCEPTANCE_LINES[criterion] = detail

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    failed = {
        rep.nodeid
        for rep in terminalreporter.stats.get("failed", [])
    }
    for criterion in sorted(_ACCEPTANCE_LINES):
        detail = _ACCEPTANCE_LINES[criterion]
        terminalreporter.write_line(f"criterion {criterion}: PASS  {detail}")
    for rep_id in sorted(failed):
        if "test_acceptance" in rep_id:
            terminalreporter.write_line(f"FAILED acceptance test: {rep_id}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
