import math
import pytest
import numpy as np
from scipy import integrate
from hypothesis import given, settings, strategies as st

from bloheat import *

times = st.floats(min_value=1e-3, max_value=5.0)
points = st.floats(min_value=-2.0, max_value=2.0)


class TestKernels:
    @pytest.mark.parametrize('t', [1e-3, 0.1, 10.0])
    def test_heat_kernel_has_unit_mass(self, t):
        s = math.sqrt(t)
        mass, _ = integrate.quad(lambda y: heat_kernel(0.0, y, t), -40 * s, 40 * s, points=[0.0])
        assert mass == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize('s', [1e-2, 1.0])
    def test_time_derivative_kernel_has_zero_mass(self, s):
        r = math.sqrt(s)
        mass, _ = integrate.quad(lambda z: time_derivative_kernel(0.0, z, s), -40 * r, 40 * r, points=[0.0])
        assert abs(mass) < 1e-10

    def test_nonpositive_time(self):
        with pytest.raises(InputError):
            heat_kernel(0.0, 0.0, -1.0)


class TestApplyHeat:
    @given(points, times)
    @settings(max_examples=20, deadline=None)
    def test_constants_are_fixed(self, x, t):
        assert apply_heat(AnalyticFunction('Constant', c=1.0), x, t) == pytest.approx(1.0, abs=1e-10)

    @given(st.floats(min_value=0.1, max_value=2.0), points, times)
    @settings(max_examples=20, deadline=None)
    def test_gaussian_oracle(self, a, x, t):
        f = AnalyticFunction('GaussianBump', a=a)
        assert apply_heat(f, x, t) == pytest.approx(heat_gaussian_oracle(a, x, t), abs=1e-8)

    def test_gaussian_oracle_in_the_plane(self):
        f = AnalyticFunction('GaussianBump', n=2, a=0.5)
        for t in (1e-2, 0.3):
            assert apply_heat(f, (0.3, -0.2), t) == pytest.approx(heat_gaussian_oracle(0.5, (0.3, -0.2), t, 2), abs=1e-8)

    def test_semigroup_law(self):
        a, s, t, x = 0.4, 0.1, 0.25, 0.2
        evolved = AnalyticFunction('Scaled', base=AnalyticFunction('GaussianBump', a=a + t), lam=math.sqrt(a / (a + t)))
        assert apply_heat(evolved, x, s) == pytest.approx(heat_gaussian_oracle(a, x, s + t), abs=1e-6)

    def test_neglog_scale_invariance_at_origin(self):
        f = AnalyticFunction('NegLogAbs')
        u1, u2 = apply_heat(f, 0.0, 1e-2), apply_heat(f, 0.0, 1.0)
        assert u1 - u2 == pytest.approx(0.5 * math.log(100), abs=1e-8)

    def test_neglog_oracle_in_the_plane(self):
        f = AnalyticFunction('NegLogAbs', n=2)
        assert apply_heat(f, (0.0, 0.0), 0.05) == pytest.approx(heat_neglog_oracle_2d((0.0, 0.0), 0.05), abs=1e-5)

    @pytest.mark.parametrize('f,x', [(AnalyticFunction('NegLogAbs'), 0.5), (AnalyticFunction('GaussianBump', a=0.5), 0.3)])
    def test_tdt_against_difference_quotient(self, f, x):
        s = 0.05
        dl = 1e-5 * s
        fd = s * (apply_heat(f, x, s + dl) - apply_heat(f, x, s - dl)) / (2 * dl)
        assert apply_tdt_heat(f, x, s) == pytest.approx(fd, rel=1e-5, abs=1e-7)

    def test_points_match_single_calls(self):
        f = AnalyticFunction('Indicator', radius=0.5)
        X = np.array([[-0.6], [0.0], [0.45], [3.0]])
        u = apply_heat_points(f, X, 0.02)
        assert u == pytest.approx([apply_heat(f, x[0], 0.02) for x in X], abs=1e-12)

    def test_midpoint_rule_close_to_default(self):
        f = AnalyticFunction('GaussianBump', a=0.5)
        p = HeatParams(quadrature='midpoint_on_cells')
        assert apply_heat(f, 0.3, 0.1, p) == pytest.approx(heat_gaussian_oracle(0.5, 0.3, 0.1), abs=1e-5)


class TestGridHeat:
    def test_invalid_margin(self):
        d = Domain(1, 2.0, 64)
        u = apply_heat_grid(sample(AnalyticFunction('GaussianBump', a=0.2), d), 1e-3)
        assert not u.valid.all() and u.valid.any()

    def test_agrees_with_analytic(self):
        d = Domain(1, 2.0, 256)
        f = AnalyticFunction('GaussianBump', a=0.2)
        u = apply_heat_grid(sample(f, d), 1e-2)
        P = d.points()[u.valid.ravel()]
        exact = np.array([heat_gaussian_oracle(0.2, x[0], 1e-2) for x in P])
        assert np.max(np.abs(u.values[u.valid] - exact)) < 1e-3

    @pytest.mark.parametrize('s,t', [(0.05, 0.1), (0.1, 0.2), (0.2, 0.05)])
    def test_grid_semigroup_law(self, s, t):
        g = sample(AnalyticFunction('GaussianBump', a=0.2), Domain(1, 12.0, 2048))
        assert semigroup_defect(g, s, t) <= 1e-10

    @settings(max_examples=20, deadline=None)
    @given(st.floats(min_value=1e-2, max_value=1.0), st.floats(min_value=1.1, max_value=4.0))
    def test_peak_of_bump_decreases_in_time(self, t, k):
        f = AnalyticFunction('GaussianBump', a=0.3)
        assert apply_heat(f, 0.0, k * t) < apply_heat(f, 0.0, t)

    @settings(max_examples=20, deadline=None)
    @given(times)
    def test_sup_of_bounded_function_does_not_grow(self, t):
        f = AnalyticFunction('BoundedSine', amplitude=0.5, frequency=3.0)
        X = np.linspace(-2.0, 2.0, 41)[:, None]
        assert np.max(np.abs(apply_heat_points(f, X, t))) <= 0.5 + 1e-10


class TestTimeGrid:
    def test_extension_contains_original(self):
        tg = TimeGrid(1e-2, 1.0, 4)
        wide = tg.extended(1)
        assert all(any(abs(t / w - 1) < 1e-12 for w in wide) for t in tg)

    def test_bad_range(self):
        with pytest.raises(InputError):
            TimeGrid(1.0, 0.1)
