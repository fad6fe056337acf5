import numpy as np
import pytest

from kivband import Dataset, KernelSpec, RegPair, fit_kiv


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_linear_data(rng, n=50, p=3, q=4, noise=0.5):
    Z = rng.standard_normal((n, q))
    Pi = rng.standard_normal((q, p))
    X = Z @ Pi + rng.standard_normal((n, p))
    Y = X @ rng.standard_normal(p) + noise * rng.standard_normal(n)
    return Dataset(Z, X, Y)


@pytest.fixture
def linear_data(rng):
    return random_linear_data(rng)


@pytest.fixture
def poly_fit(rng):
    data = random_linear_data(rng, n=20, p=2, q=2)
    k = KernelSpec("polynomial", degree=2, offset=1.0)
    return fit_kiv(data, k, k, RegPair(0.1, 0.05))


_ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = []
    config.addinivalue_line("markers", "acceptance: gating acceptance criterion")


@pytest.fixture
def verdict(request):
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""
    lines = request.config.stash[_ACCEPTANCE]

    def record(label: str, ok: bool, detail: str) -> None:
        line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
        lines.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("[")[1].split("]")[0])):
            terminalreporter.write_line(line)
