import math
import pytest
import numpy as np
import pandas as pd
from hypothesis import given, settings, strategies as st

from bloheat import *

NEGLOG = AnalyticFunction('NegLogAbs')


class TestHeatSolution:
    @pytest.mark.parametrize('f', [AnalyticFunction('Indicator', radius=0.5),
                                   AnalyticFunction('BoundedSine', amplitude=0.5, frequency=3.0)])
    @pytest.mark.parametrize('t', [1e-3, 0.1])
    def test_maximum_principle(self, f, t):
        assert maximum_principle(f, solve_heat(f, t, Domain(1, 2.0, 64)))

    def test_slice_agrees_with_pointwise(self):
        s = solve_heat(AnalyticFunction('Indicator', radius=0.5), 0.05, Domain(1, 2.0, 32))
        assert s.deviation() < 1e-12

    def test_range_of_unbounded_function(self):
        with pytest.raises(InputError):
            value_range(NEGLOG)

    def test_residual_is_small(self):
        r = heat_residual(AnalyticFunction('GaussianBump', a=0.5), Domain(1, 2.0, 64), 0.05)
        assert r.max_residual < 1e-2 * r.scale and r.cells == 62

    def test_residual_rejects_large_delta(self):
        with pytest.raises(InputError):
            heat_residual(AnalyticFunction('GaussianBump', a=0.5), Domain(1, 1.0, 8), 0.1, delta=0.2)


class TestRegularity:
    @given(st.floats(min_value=-1.0, max_value=1.0), st.floats(min_value=1e-3, max_value=0.5))
    @settings(max_examples=15, deadline=None)
    def test_oscillation_dominates_defect(self, x, t):
        assert oscillation(NEGLOG, x, t) >= regularity_defect(NEGLOG, x, t) - 1e-12

    @pytest.mark.parametrize('x0,t', [(0.0, 1e-2), (0.3, 1e-3), (1.0, 0.1)])
    def test_oscillation_chain(self, x0, t):
        assert oscillation_chain(NEGLOG, x0, t).holds

    def test_sweep_columns(self):
        tab = pde_sweep(NEGLOG, [-0.5, 0.0, 0.5], TimeGrid(1e-2, 1e-1, 4))
        assert list(tab.columns) == ['x', 't', 'defect', 'oscillation']
        assert len(tab) == 3 * len(TimeGrid(1e-2, 1e-1, 4))
        assert (tab['oscillation'] >= tab['defect']).all()

    def test_sweep_in_the_plane(self):
        tab = pde_sweep(AnalyticFunction('NegLogAbs', n=2), [(0.1, 0.1)], TimeGrid(1e-2, 1e-1, 4))
        assert list(tab.columns) == ['x', 'y', 't', 'defect', 'oscillation']

    def test_sweep_needs_centers(self):
        with pytest.raises(InputError):
            pde_sweep(NEGLOG, [], TimeGrid(1e-2, 1e-1, 4))


class TestMidpointChain:
    def test_seeded_runs_are_identical(self):
        a = midpoint_chain(NEGLOG, 0.2, 0.01, pairs=25, rng=7)
        b = midpoint_chain(NEGLOG, 0.2, 0.01, pairs=25, rng=7)
        pd.testing.assert_frame_equal(a, b)

    def test_bound_holds(self):
        t = midpoint_chain(NEGLOG, 0.0, 0.04, pairs=50, rng=1)
        assert t['holds'].all() and (t['lattice_bound'] >= 0).all()

    def test_in_the_plane(self):
        t = midpoint_chain(AnalyticFunction('NegLogAbs', n=2), (0.1, -0.1), 0.01, pairs=10,
                           rng=np.random.default_rng(2))
        assert len(t) == 10 and t['holds'].all()
