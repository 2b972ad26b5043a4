import math
import pytest
import numpy as np
from scipy import integrate
from hypothesis import given, settings, strategies as st

from bloheat import *


def gaussian_g(a, x, lo, hi):
    val, _ = integrate.quad(lambda u: tdt_gaussian_oracle(a, x, math.exp(u)) ** 2, math.log(lo), math.log(hi),
                            limit=400, epsabs=1e-14, epsrel=1e-12)
    return math.sqrt(val)


class TestGFunction:
    @pytest.mark.parametrize('f', [AnalyticFunction('Constant', c=3.0), AnalyticFunction('Linear')])
    def test_vanishes_on_harmonic_functions(self, f):
        assert g_function(f, 0.4, SquareFunctionParams(1e-3, 1e1, 8)) <= 1e-12

    @pytest.mark.parametrize('x', [0.0, 0.3, 1.2])
    def test_gaussian_oracle(self, x):
        sp = SquareFunctionParams(1e-6, 1e4, 32)
        v = g_function(AnalyticFunction('GaussianBump', a=0.5), x, sp)
        assert v == pytest.approx(gaussian_g(0.5, x, 1e-6, 1e4), rel=1e-5)

    @given(st.integers(min_value=0, max_value=32), st.integers(min_value=0, max_value=32))
    @settings(max_examples=10, deadline=None)
    def test_truncation_is_monotone_on_nodes(self, i, j):
        sp = SquareFunctionParams(1e-3, 1e1, 8)
        f = AnalyticFunction('GaussianBump', a=0.5)
        s = sp.nodes()
        lo, hi = sorted((i, j))
        assert truncated_g(f, 0.3, math.sqrt(s[lo]), sp) <= truncated_g(f, 0.3, math.sqrt(s[hi]), sp) + 1e-15

    def test_tails_reported(self):
        r = g_function(AnalyticFunction('LogAbs'), 0.5, SquareFunctionParams(1e-4, 1e2, 8), full=True)
        assert r.truncated and r.upper_tail > 0 and r.g_squared == pytest.approx(r.value ** 2)

    def test_singular_point(self):
        with pytest.raises(InputError):
            g_function(AnalyticFunction('NegLogAbs'), 0.0)

    def test_bad_range(self):
        with pytest.raises(ConfigError):
            SquareFunctionParams(1.0, 1e-2)

    def test_table_matches_pointwise(self):
        sp = SquareFunctionParams(1e-3, 1e1, 8)
        f = AnalyticFunction('GaussianBump', a=0.5)
        t = square_function_table(f, [[0.1], [0.7]], sp)
        assert t['g'].tolist() == pytest.approx([g_function(f, 0.1, sp), g_function(f, 0.7, sp)], abs=1e-10)

    @given(st.floats(min_value=0.1, max_value=4.0))
    @settings(max_examples=10, deadline=None)
    def test_positive_homogeneity(self, lam):
        sp = SquareFunctionParams(1e-3, 1e1, 8)
        f = AnalyticFunction('GaussianBump', a=0.5)
        scaled = AnalyticFunction('Scaled', base=f, lam=lam)
        assert g_function(scaled, 0.3, sp) == pytest.approx(lam * g_function(f, 0.3, sp), rel=1e-10, abs=1e-14)

    @given(st.floats(min_value=-0.5, max_value=0.5))
    @settings(max_examples=10, deadline=None)
    def test_tail_estimates_cover_one_more_octave(self, x):
        sp = SquareFunctionParams(1e-3, 1e1, 8)
        f = AnalyticFunction('GaussianBump', a=0.5)
        r = g_function(f, x, sp, full=True)
        assert s_integral(f, x, sp.s_min / 2, sp.s_min, sp) <= r.lower_tail + 1e-15
        assert s_integral(f, x, sp.s_max, 2 * sp.s_max, sp) <= r.upper_tail + 1e-15


class TestBloChecks:
    def test_g_of_bounded_sine(self):
        f = AnalyticFunction('BoundedSine', amplitude=0.5, frequency=3.0)
        r = g_blo_check(f, Domain(1, 2.0, 64), SquareFunctionParams(1e-4, 1e1, 8))
        assert r.passed and r.chain_holds and 0 < r.blo_ratio < math.inf

    def test_gsquared_of_logabs_is_finite(self):
        r = gsquared_blo_check(AnalyticFunction('LogAbs'), Domain(1, 2.0, 64), TimeGrid(1e-3, 1e-2, 4),
                               SquareFunctionParams(1e-4, 1e4, 8))
        assert 0 < r.blo_ratio < math.inf and r.heat_ratio < math.inf

    def test_needs_bmo_input(self):
        with pytest.raises(InputError):
            g_blo_check(AnalyticFunction('Linear'), Domain(1, 1.0, 16))

    def test_gsquared_restricted_to_centers(self):
        f, d = AnalyticFunction('BoundedSine', amplitude=0.5, frequency=3.0), Domain(1, 2.0, 64)
        tg, sp = TimeGrid(1e-3, 1e-2, 4), SquareFunctionParams(1e-4, 1e1, 8)
        full = gsquared_blo_check(f, d, tg, sp)
        some = gsquared_blo_check(f, d, tg, sp, centers=[(-0.5,), (0.0,), (0.5,)])
        assert some.heat_g2 <= full.heat_g2 + 1e-15 and some.blo_g2 == full.blo_g2


class TestTdtKernelBounds:
    SP = SquareFunctionParams(1e-4, 1e1, 8)

    def test_constant(self):
        r = tdt_kernel_bounds(AnalyticFunction('Constant', c=2.0), Domain(1, 2.0, 64), self.SP, rng=0)
        assert r.pointwise_constant == 0.0 and r.lipschitz_constant == 0.0

    @pytest.mark.parametrize('f', [AnalyticFunction('BoundedSine', amplitude=0.5, frequency=3.0),
                                   AnalyticFunction('GaussianBump', a=0.5)])
    def test_bounded_functions(self, f):
        r = tdt_kernel_bounds(f, Domain(1, 2.0, 64), self.SP, rng=0)
        assert r.pointwise_stable and r.lipschitz_finite
        assert 0 < r.pointwise_constant < 5

    @pytest.mark.parametrize('kind', ['LogAbs', 'NegLogAbs'])
    def test_logarithms(self, kind):
        r = tdt_kernel_bounds(AnalyticFunction(kind), Domain(1, 2.0, 64), self.SP, rng=0)
        assert r.lipschitz_finite and 0 < r.pointwise_constant < 5
        assert set(r.witness) == {'x', 'z', 's'} and r.witness['x'] != r.witness['z']

    def test_seeded_pairs_are_reproducible(self):
        f, d = AnalyticFunction('NegLogAbs'), Domain(1, 2.0, 64)
        a, b = tdt_kernel_bounds(f, d, self.SP, pairs=50, rng=7), tdt_kernel_bounds(f, d, self.SP, pairs=50, rng=7)
        assert a.lipschitz_constant == b.lipschitz_constant and a.witness == b.witness

    def test_bad_pair_count(self):
        with pytest.raises(InputError):
            tdt_kernel_bounds(AnalyticFunction('NegLogAbs'), Domain(1, 2.0, 64), self.SP, pairs=0)

    def test_needs_bmo_input(self):
        with pytest.raises(InputError):
            tdt_kernel_bounds(AnalyticFunction('Linear'), Domain(1, 1.0, 16), self.SP)
