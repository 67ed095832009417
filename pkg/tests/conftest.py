import numpy as np
import pytest

from gauge_lab import FactorizationProblem, SolverConfig, generate_interactions, solve
from gauge_lab.datagen import STANDARD_FIXTURE


def power_iteration_singular_values(A, count, iters=2000, seed=0):
    """Leading singular values of ``A`` by power iteration with deflation of ``A``.

    Independent of LAPACK so it can serve as an oracle for rank checks.
    """
    rng = np.random.default_rng(seed)
    A = np.array(A, dtype=np.float64)
    values = []
    for _ in range(count):
        x = rng.standard_normal(A.shape[1])
        x /= np.linalg.norm(x)
        for _ in range(iters):
            y = A.T @ (A @ x)
            norm = np.linalg.norm(y)
            if norm == 0.0:
                break
            x = y / norm
        sigma = np.linalg.norm(A @ x)
        values.append(sigma)
        A = A - np.outer(A @ x, x)
    return np.array(values)


@pytest.fixture(scope="session")
def standard_problem():
    return FactorizationProblem(generate_interactions(STANDARD_FIXTURE), k=4, lam=0.0)


@pytest.fixture(scope="session")
def standard_sphere_solution(standard_problem):
    return solve(standard_problem, SolverConfig(mode="sphere_retraction", seed=8))


@pytest.fixture(scope="session")
def standard_unconstrained_solution(standard_problem):
    return solve(standard_problem, SolverConfig(mode="unconstrained", seed=8))


# one line per acceptance criterion, printed in the terminal summary so the
# verdicts are visible without ``-s``
ACCEPTANCE_LINES = {}


def record_criterion(number, title, ok, detail):
    line = f"criterion {number:>2} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])
