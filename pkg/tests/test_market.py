import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from discrete_merton import (
    DegenerateError,
    Discretization,
    InputError,
    InputShapeError,
    MarketParams,
    NoisePath,
    Strategy,
    check_self_financing,
    simulate_path,
    simulate_stock,
    wealth_product_form,
)


def constant(N, a=0.07, b=0.2, u=3.5, T=None):
    T = N * 0.5 if T is None else T
    return MarketParams.constant(a, b, N), Strategy.constant(u, N), Discretization(T, N)


class TestTypes:
    def test_discretization_step(self):
        d = Discretization(1.0, 250)
        assert d.h == 0.004
        assert abs(d.h * d.N - d.T) <= math.ulp(d.T)

    @pytest.mark.parametrize("T, N", [(0.0, 1), (-1.0, 2), (1.0, 0), (1.0, 2.5)])
    def test_discretization_rejects(self, T, N):
        with pytest.raises(InputError):
            Discretization(T, N)

    def test_market_bounds_enforced(self):
        with pytest.raises(InputError):
            MarketParams([0.07, 0.5], [0.2, 0.2], bounds=(0.05, 0.1, 0.1, 0.3))
        with pytest.raises(InputShapeError):
            MarketParams([0.07, 0.07], [0.2])

    def test_market_derived_bounds(self):
        p = MarketParams([0.07, -0.09], [0.2, 0.3])
        assert p.bounds == (0.07, 0.09, 0.2, 0.3)

    def test_strategy_rejects_zero_control(self):
        with pytest.raises(InputError):
            Strategy([0.0, 1.0])

    def test_strategy_bounds_on_magnitude(self):
        s = Strategy([-2.0, 3.0], bounds=(1.0, 3.0))
        assert s.bounds == (1.0, 3.0)
        with pytest.raises(InputError):
            Strategy([4.0], bounds=(1.0, 3.0))

    def test_arrays_are_frozen(self):
        p, s, _ = constant(3)
        with pytest.raises(ValueError):
            p.a[0] = 1.0
        with pytest.raises(ValueError):
            s.u[0] = 1.0

    def test_noise_rejects_nonfinite(self):
        with pytest.raises(InputError):
            NoisePath([0.0, np.nan])


class TestRecursion:
    def test_zero_noise_two_steps(self):
        p, s, d = constant(2)
        path = simulate_path(p, s, d, 1.0, [0.0, 0.0])
        np.testing.assert_allclose(path.x, [1.0, 1.1225, 1.26000625], rtol=1e-15)
        assert path.all_positive

    def test_single_negative_step(self):
        p, _, d = constant(1, T=1.0)
        path = simulate_path(p, [1.0], d, 1.0, [-6.0])
        assert path.terminal == pytest.approx(-0.13, abs=1e-15)
        assert not path.all_positive

    def test_negative_wealth_keeps_evolving(self):
        p, _, d = constant(2, T=2.0)
        path = simulate_path(p, [1.0, 1.0], d, 1.0, [-6.0, -6.0])
        # two negative factors give positive terminal wealth; the flag still records the dip
        assert path.terminal == pytest.approx(0.0169, rel=1e-12)
        assert not path.all_positive

    def test_shape_and_value_errors(self):
        p, s, d = constant(2)
        with pytest.raises(InputShapeError):
            simulate_path(p, s, d, 1.0, [0.0])
        with pytest.raises(InputError):
            simulate_path(p, s, d, 1.0, [0.0, np.inf])
        with pytest.raises(InputError):
            simulate_path(p, s, d, -1.0, [0.0, 0.0])
        with pytest.raises(InputShapeError):
            simulate_path(p, [1.0], d, 1.0, [0.0, 0.0])

    def test_product_form_zero_noise(self):
        p, s, d = constant(2)
        assert wealth_product_form(p, s, d, 1.0, [0.0, 0.0]) == pytest.approx(1.26000625, rel=1e-15)

    def test_product_form_zero_control(self):
        p, _, d = constant(5)
        xi = np.random.default_rng(0).standard_normal(5)
        assert wealth_product_form(p, np.zeros(5), d, 2.5, xi) == 2.5

    def test_product_form_matches_recursion_n250(self):
        p, s, d = constant(250, T=1.0)
        xi = np.random.default_rng(1).standard_normal(250)
        x_rec = simulate_path(p, s, d, 1.0, xi).terminal
        assert abs(x_rec - wealth_product_form(p, s, d, 1.0, xi)) <= 1e-12 * abs(x_rec)

    def test_product_form_matches_recursion_many_paths(self):
        p, s, d = constant(52, T=1.0)
        rng = np.random.default_rng(2)
        worst = 0.0
        for xi in rng.standard_normal((10_000, 52)):
            x_rec = simulate_path(p, s, d, 1.0, xi).terminal
            worst = max(worst, abs(x_rec - wealth_product_form(p, s, d, 1.0, xi)) / abs(x_rec))
        assert worst <= 1e-12


class TestStock:
    def test_zero_noise(self):
        p, _, d = constant(2)
        np.testing.assert_allclose(simulate_stock(p, d, [0.0, 0.0]), [1.0, 1.035, 1.071225], rtol=1e-15)

    def test_negative_price_allowed(self):
        p, _, d = constant(1, T=1.0)
        assert simulate_stock(p, d, [-6.0])[1] == pytest.approx(-0.13, abs=1e-15)

    def test_stock_is_unit_control_wealth(self):
        p, _, d = constant(40, T=1.0)
        xi = np.random.default_rng(3).standard_normal(40)
        np.testing.assert_array_equal(simulate_stock(p, d, xi), simulate_path(p, np.ones(40), d, 1.0, xi).x)


class TestSelfFinancing:
    def test_zero_noise_exact(self):
        p, s, d = constant(2)
        w = simulate_path(p, s, d, 1.0, [0.0, 0.0])
        # algebraically zero; floating point leaves a few ulp of the wealth scale
        assert check_self_financing(w, simulate_stock(p, d, [0.0, 0.0]), s) <= 4 * np.spacing(w.x.max())

    def test_hand_step(self):
        # stock 1 -> 1.1 with u = 3.5: gamma = 3.5 shares, wealth gains 0.35
        x = [1.0, 1.35]
        assert check_self_financing(x, [1.0, 1.1], [3.5]) == pytest.approx(0.0, abs=1e-15)

    def test_random_paths(self):
        p, s, d = constant(52, T=1.0)
        rng = np.random.default_rng(4)
        for xi in rng.standard_normal((1000, 52)):
            w = simulate_path(p, s, d, 1.0, xi)
            viol = check_self_financing(w, simulate_stock(p, d, xi), s)
            assert viol <= 1e-10 * np.max(np.abs(w.x))

    def test_zero_price_is_degenerate(self):
        with pytest.raises(DegenerateError):
            check_self_financing([1.0, 1.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0])


noise_vectors = st.lists(st.floats(-8, 8), min_size=1, max_size=30)


@given(noise_vectors, st.floats(0.01, 100.0), st.floats(0.1, 5.0))
def test_scale_equivariance(xi, c, u):
    N = len(xi)
    p, s, d = MarketParams.constant(0.07, 0.2, N), Strategy.constant(u, N), Discretization(1.0, N)
    base = simulate_path(p, s, d, 1.0, xi).x
    scaled = simulate_path(p, s, d, c, xi).x
    np.testing.assert_allclose(scaled, c * base, rtol=1e-12, atol=1e-300)


@given(noise_vectors, st.floats(0.1, 10.0))
def test_recursion_product_equivalence(xi, u):
    N = len(xi)
    p, s, d = MarketParams.constant(0.07, 0.2, N), Strategy.constant(u, N), Discretization(1.0, N)
    x = simulate_path(p, s, d, 1.0, xi).terminal
    assert abs(x - wealth_product_form(p, s, d, 1.0, xi)) <= 1e-12 * max(abs(x), 1e-300)


@given(noise_vectors, st.floats(0.1, 10.0))
def test_negative_factor_clears_positivity_flag(xi, u):
    N = len(xi)
    p, d = MarketParams.constant(0.07, 0.2, N), Discretization(float(N), N)
    factors = 1 + d.h * u * 0.07 + d.sqrt_h * u * 0.2 * np.asarray(xi)
    path = simulate_path(p, Strategy.constant(u, N), d, 1.0, xi)
    if np.any(factors < 0):
        assert not path.all_positive
    assert path.all_positive == bool(np.all(path.x[1:] > 0))
