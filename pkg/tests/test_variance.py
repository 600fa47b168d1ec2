import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chainorder.counts import SymbolSequence
from chainorder.variance import (
    GPoint,
    G_curvature,
    G_grad,
    G_hess,
    G_value,
    L_grad,
    L_hess,
    L_value,
    block_moments,
    delta_variance_G,
    delta_variance_L,
    diagnose,
    total_variance,
)
from oracles import finite_difference_errors

unit = st.floats(0.01, 0.99)


def test_L_stationary_point():
    x = 1 / math.e
    assert L_value(x) == pytest.approx(-1 / math.e, abs=1e-15)
    assert L_grad(x) == pytest.approx(0.0, abs=1e-15)


def test_L_boundary_probe():
    assert L_value(1.0, check=False) == 0.0
    assert L_grad(1.0, check=False) == 1.0
    assert L_hess(1.0, check=False) == 1.0
    with pytest.raises(ValueError):
        L_value(1.0)


def test_L_derivatives_at_point_three():
    h, x = 1e-5, 0.3
    fd = (L_value(x + h) - L_value(x - h)) / (2 * h)
    assert abs(fd - L_grad(x)) <= 1e-6 * abs(L_grad(x))
    fd2 = (L_value(x + h) - 2 * L_value(x) + L_value(x - h)) / h**2
    assert abs(fd2 - L_hess(x)) <= 1e-4 * L_hess(x)  # second difference loses digits to cancellation


def test_G_examples():
    p = GPoint(0.5, 0.5, 0.5)
    assert G_value(p) == pytest.approx(0.25, abs=1e-15)
    assert G_grad(p)[0] == pytest.approx(2.0, abs=1e-15)
    q = GPoint(0.12, 0.4, 0.3)
    assert G_value(q) == pytest.approx(0.0, abs=1e-15)
    assert G_grad(q)[0] == pytest.approx(0.0, abs=1e-14)


def test_derivatives_match_finite_differences():
    worst = finite_difference_errors(points=100, step=1e-5)
    assert max(worst.values()) <= 1e-6, worst


@given(unit, unit, unit)
def test_G_hessian_symmetric(x, h, v):
    H = G_hess(GPoint(x, h, v))
    assert np.max(np.abs(H - H.T)) <= 1e-12 * max(1.0, np.max(np.abs(H)))


@given(unit, unit, unit)
def test_G_nonnegative(x, h, v):
    assert G_value(GPoint(x, h, v)) >= 0


def test_G_second_derivative_signs():
    # the curvature in h and v is positive (symbolic result)
    H = G_hess(GPoint(0.2, 0.4, 0.3))
    assert H[1, 1] == pytest.approx(2 * 0.2**2 / (0.4**3 * 0.3))
    assert H[2, 2] == pytest.approx(2 * 0.2**2 / (0.4 * 0.3**3))


@pytest.mark.parametrize("m", [2, 3, 4, 10])
def test_G_curvature_near_independence(m):
    x = 0.01
    expect = (4 + 1 / m**4 + 4 / m**3 - 8 / m) / x**2
    assert G_curvature(GPoint(x, 1 / m, m * x)) == pytest.approx(expect, rel=1e-12)


def test_G_curvature_large_alphabet_limit():
    x = 0.001
    assert G_curvature(GPoint(x, 1 / 400, 400 * x)) == pytest.approx(4 / x**2, rel=0.03)


def test_domain_checks():
    with pytest.raises(ValueError):
        GPoint(0.0, 0.5, 0.5)
    with pytest.raises(ValueError):
        GPoint(0.5, 1.0, 0.5)


class TestDeltaVariance:
    def test_zero_variance(self):
        assert delta_variance_L(0.3, 0.4, 0.0, 0.5) == 0.0
        assert delta_variance_G(0.3, 0.4, 0.0, 0.5) == 0.0

    def test_L_at_stationary_point(self):
        x = 1 / math.e
        assert delta_variance_L(x, x, 0.01, 0.3) == pytest.approx(1e-4 * math.e**2, rel=1e-12)

    def test_G_example(self):
        assert delta_variance_G(0.5, 0.5, 0.01, 0.5) == pytest.approx(0.0016, rel=1e-12)

    def test_L_grows_toward_zero(self):
        vals = [delta_variance_L(x, 0.2, 1e-4, 0.5) for x in (1e-1, 1e-2, 1e-3)]
        assert vals[0] < vals[1] < vals[2]

    def test_ratio_diverges_near_zero(self):
        # with mean = x and var = c x**2 the ratio is (1 + ln x)**2 / (4c) + 1/4
        c = 0.5
        xs = [10.0**-k for k in range(1, 13)]
        ratios = [delta_variance_L(x, x, c * x**2, 0.5) / delta_variance_G(x, x, c * x**2, 0.5)
                  for x in xs]
        for x, r in zip(xs, ratios):
            assert r == pytest.approx((1 + math.log(x)) ** 2 / (4 * c) + 0.25, rel=1e-12)
        assert all(a < b for a, b in zip(ratios, ratios[1:]))
        assert ratios[-1] > 100 * ratios[0]

    @given(unit, unit, st.floats(1e-8, 1.0), st.floats(0.01, 0.99))
    def test_positive_when_variance_positive(self, x, mean, var, c):
        assert delta_variance_L(x, mean, var, c) > 0
        assert delta_variance_G(x, mean, var, c) > 0

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            delta_variance_G(0.5, 0.5, -1.0, 0.5)
        with pytest.raises(ValueError):
            delta_variance_L(0.5, 0.5, 0.1, 1.0)


class TestTotals:
    def test_examples(self):
        assert total_variance(np.zeros((2, 2))) == 0.0
        assert total_variance(np.ones((2, 2))) == 4.0

    def test_order_independent(self):
        rng = np.random.default_rng(5)
        cells = rng.exponential(size=(7, 7))
        shuffled = rng.permutation(cells.ravel())
        assert abs(total_variance(cells) - total_variance(shuffled)) <= 1e-12

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            total_variance([[1.0, -0.1]])


class TestDiagnose:
    def sample(self, n=4000):
        rng = np.random.default_rng(8)
        return SymbolSequence(rng.integers(1, 4, size=n), 3)

    def test_block_moments_shapes(self):
        mean, var = block_moments(self.sample(), (1,), blocks=20)
        assert mean.shape == var.shape == (3, 3)
        assert mean.sum() == pytest.approx(1.0)
        assert np.all(var >= 0)

    def test_report(self):
        report = diagnose(self.sample(), (2,), blocks=20)
        assert report.per_cell_variance_L.shape == (2, 2)
        assert np.all(report.per_cell_variance_L >= 0)
        assert report.total_G == pytest.approx(report.per_cell_variance_G.sum())
        lines = report.to_csv().splitlines()
        assert lines[0] == "i,k,x,mean,var,sigma2_L,sigma2_G"
        assert len(lines) == 1 + 4 + 1

    def test_too_few_blocks(self):
        with pytest.raises(ValueError):
            block_moments(self.sample(), (1,), blocks=1)
        with pytest.raises(ValueError):
            block_moments(self.sample(n=30), (1, 2), blocks=20)
