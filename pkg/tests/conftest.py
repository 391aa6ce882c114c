import numpy as np
import pytest

from hutchinf.engine import attractor
from hutchinf.systems import planar_factor_system, planar_system, sup_pair_system


@pytest.fixture(scope="session")
def planar():
    return planar_system()


@pytest.fixture(scope="session")
def planar_coarse(planar):
    """Planar attractor at tol 0.05 (a few hundred points)."""
    return attractor(planar, 0.05)


@pytest.fixture(scope="session")
def factor():
    return planar_factor_system()


@pytest.fixture(scope="session")
def sup_pair():
    return sup_pair_system()


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


_CRITERIA = pytest.StashKey[list]()


@pytest.fixture
def report_criterion(request):
    """Print one PASS/FAIL line per acceptance criterion; lines are repeated in the summary."""
    lines = request.config.stash.setdefault(_CRITERIA, [])

    def report(n: int, ok: bool, detail: str):
        line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
        print(line)
        lines.append(line)

    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_CRITERIA, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
