import pytest

from lsed.config import defaults
from lsed.experiments import run_experiment


@pytest.fixture(scope="session")
def trajectory_run(tmp_path_factory):
    """Default harmonic Monte-Carlo ensemble, run once per session."""
    out = tmp_path_factory.mktemp("trajectory")
    return run_experiment(defaults("trajectory"), out), out


ACCEPTANCE = pytest.StashKey()


@pytest.fixture
def verdict(request):
    """Record one PASS/FAIL line for an acceptance criterion."""
    lines = request.config.stash.setdefault(ACCEPTANCE, [])

    def record(number, passed, detail):
        line = f"{'PASS' if passed else 'FAIL'} criterion {number}: {detail}"
        print(line)
        lines.append(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
