import numpy as np
import pytest

from kivband.dgp import DgpSpec, make_h0, simulate_iv, strong_first_stage, structural_coefficients
from kivband.errors import ConfigError


@pytest.fixture(scope="module")
def big():
    spec = DgpSpec(n=100_000, rho=0.5, sigma=1.0, seed=3)
    data, h0 = simulate_iv(spec)
    return spec, data, data.Y - h0(data.X)


def corr(a, b):
    return float(np.corrcoef(a, b)[0, 1])


class TestSimulate:
    def test_instruments_exogenous(self, big):
        _, data, eps = big
        for j in range(data.Z.shape[1]):
            assert abs(corr(eps, data.Z[:, j])) < 0.02

    def test_covariates_endogenous(self, big):
        _, data, eps = big
        for j in range(data.X.shape[1]):
            assert corr(eps, data.X[:, j]) > 0.1

    def test_instruments_relevant(self, big):
        _, data, _ = big
        assert max(abs(corr(data.X[:, 0], data.Z[:, j])) for j in range(3)) > 0.2

    def test_noise_bounded(self, big):
        spec, _, eps = big
        assert np.max(np.abs(eps)) <= spec.sigma
        small, h0 = simulate_iv(DgpSpec(n=5000, sigma=0.3, seed=1))
        assert np.max(np.abs(small.Y - h0(small.X))) <= 0.3

    def test_no_endogeneity(self):
        data, h0 = simulate_iv(DgpSpec(n=100_000, rho=0.0, seed=4))
        eps = data.Y - h0(data.X)
        assert abs(corr(eps, data.X[:, 0])) < 0.02

    def test_reproducible(self):
        a, _ = simulate_iv(DgpSpec(n=50, seed=9))
        b, _ = simulate_iv(DgpSpec(n=50, seed=9))
        c, _ = simulate_iv(DgpSpec(n=50, seed=10))
        assert np.array_equal(a.Y, b.Y) and np.array_equal(a.X, b.X) and np.array_equal(a.Z, b.Z)
        assert not np.array_equal(a.Y, c.Y)

    def test_z_equals_x(self):
        data, _ = simulate_iv(DgpSpec(n=30, rho=0.0, z_equals_x=True))
        assert np.array_equal(data.Z, data.X)

    def test_shapes(self):
        data, _ = simulate_iv(DgpSpec(n=40, p=3, q=5, seed=2))
        assert data.X.shape == (40, 3) and data.Z.shape == (40, 5) and data.Y.shape == (40,)

    def test_fixed_first_stage(self):
        Pi = np.array([[1.0], [0.0]])
        data, _ = simulate_iv(DgpSpec(n=20, p=1, q=2, rho=0.0, Pi=Pi))
        assert data.X.shape == (20, 1)


class TestStructural:
    def test_default_coefficients(self):
        assert structural_coefficients(DgpSpec(p=4)).tolist() == [1.0] * 4

    def test_linear_h0(self):
        h0 = make_h0(DgpSpec(p=2, gamma=np.array([2.0, -1.0])))
        np.testing.assert_array_equal(h0(np.array([[1.0, 3.0], [0.5, 0.0]])), [-1.0, 1.0])

    def test_nonlinear_h0(self):
        h0 = make_h0(DgpSpec(kind="nonlinear", p=1))
        assert h0(np.array([[0.0]]))[0] == 0.0
        assert h0(np.array([[1.0]]))[0] == pytest.approx(np.sin(1.0) + 0.5 * np.tanh(1.0))

    def test_first_stage_singular_values(self, rng):
        s = np.linalg.svd(strong_first_stage(5, 3, rng), compute_uv=False)
        np.testing.assert_allclose(np.sort(s), [0.8, 1.0, 1.2], atol=1e-12)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"kind": "cubic"},
        {"n": 1},
        {"p": 0},
        {"rho": 1.0},
        {"rho": -0.1},
        {"sigma": 0.0},
        {"p": 2, "q": 3, "Pi": np.zeros((2, 2))},
        {"p": 2, "gamma": np.zeros(3)},
    ],
)
def test_invalid_specs(kwargs):
    with pytest.raises(ConfigError):
        DgpSpec(**kwargs)


def test_to_dict():
    d = DgpSpec(gamma=np.array([1.0, 2.0])).to_dict()
    assert d["gamma"] == [1.0, 2.0] and d["kind"] == "linear" and "Pi" not in d
