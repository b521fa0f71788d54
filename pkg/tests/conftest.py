import pytest

from cychom.dgalg import BUNDLED, random_algebra


@pytest.fixture(scope="session")
def bundled():
    return {name: make() for name, make in BUNDLED.items()}


@pytest.fixture(scope="session")
def random_corpus():
    return [random_algebra(seed) for seed in range(10)]


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture(scope="session")
def acceptance_log(request):
    """Collects the one-line verdicts printed by the acceptance suite."""
    return request.config.stash.setdefault(_ACCEPTANCE, [])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
