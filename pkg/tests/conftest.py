import numpy as np
import pytest

from fraclab import limit_problem, make_grid, solve_ground_state


@pytest.fixture(scope="session")
def grid1():
    return make_grid(1, 32.0, 1024)


@pytest.fixture(scope="session")
def limit1(grid1):
    return limit_problem(0.5, 3.0, grid1)


@pytest.fixture(scope="session")
def u_inf1(limit1):
    u, rep = solve_ground_state(limit1)
    assert rep.converged
    return u


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def verdict(request):
    """Record one acceptance line; the test still asserts on its own."""
    lines = request.config.stash.setdefault(ACCEPTANCE_KEY, [])

    def record(tag, ok, detail):
        line = f"{tag} {'PASS' if ok else 'FAIL'}: {detail}"
        lines.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
