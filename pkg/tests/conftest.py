import numpy as np
import pytest

from memslab import checks

ACCEPTANCE_LINES: dict = {}


def record(criterion: str, results) -> None:
    ACCEPTANCE_LINES[criterion] = results


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=int):
        results = ACCEPTANCE_LINES[key]
        ok = all(r.passed for r in results)
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}")
        for r in results:
            terminalreporter.write_line("    " + r.line())


@pytest.fixture(scope="session")
def full_ensembles():
    """30000 states per rank at the acceptance seed, plus generation time."""
    return checks.full_ensembles()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_density(gen, n=None, rank=4):
    shape = (n, 4, rank) if n else (4, rank)
    g = gen.normal(size=shape) + 1j * gen.normal(size=shape)
    rho = g @ np.swapaxes(g.conj(), -1, -2)
    return rho / np.trace(rho, axis1=-2, axis2=-1)[..., None, None]


def random_unitary(gen, dim=2):
    z = (gen.normal(size=(dim, dim)) + 1j * gen.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))
