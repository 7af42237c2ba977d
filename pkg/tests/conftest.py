import numpy as np
import pytest

from erknwave.spectral import WaveProblem, reference_initial_u, reference_initial_v, sample_initial, symmetrize


def random_hermitian(rng, M, scale=1.0):
    """Random coefficient vector with exact Hermitian symmetry."""
    c = scale * (rng.standard_normal(2 * M) + 1j * rng.standard_normal(2 * M))
    return symmetrize(c)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def reference_problem():
    return WaveProblem.quadratic(rho=0.5, M=64)


@pytest.fixture(scope="session")
def reference_state(reference_problem):
    return sample_initial(reference_initial_u, reference_initial_v, reference_problem)


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def criterion(request):
    """``criterion(n, ok, detail)`` prints and records one PASS/FAIL line, then asserts ``ok``."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def report(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        lines.append(line)
        print(line)
        assert ok, line

    return report


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
