import math
import pytest
import numpy as np
from hypothesis import given, settings, strategies as st

from bloheat import *

NEGLOG = AnalyticFunction('NegLogAbs')


@pytest.fixture(scope='module')
def neglog_grid():
    return sample(NEGLOG, Domain(1, 4.0, 1024))


class TestBloNorm:
    def test_constant_is_zero(self):
        g = sample(AnalyticFunction('Constant', n=2, c=5.0), Domain(2, 1.0, 16))
        assert blo_norm(g).value == 0.0 and bmo_norm(g).value == 0.0

    def test_neglog_against_oracle(self, neglog_grid):
        est = blo_norm(neglog_grid, mode='exact')
        assert est.value == pytest.approx(neglog_blo_norm_oracle(), rel=0.02)
        b = Ball(est.witness['center'], est.witness['radius'])
        assert NEGLOG.ball_mean(b) - NEGLOG.infimum_on_ball(b) == pytest.approx(est.value, abs=1e-12)

    def test_bmo_at_most_twice_blo(self, neglog_grid):
        assert bmo_norm(neglog_grid).value <= 2 * blo_norm(neglog_grid).value

    def test_reflection_changes_blo_not_bmo(self, neglog_grid):
        flipped = neglog_grid.with_values(-neglog_grid.values, 'negated')
        assert bmo_norm(flipped).value == pytest.approx(bmo_norm(neglog_grid).value, abs=1e-12)
        assert blo_norm(flipped).value > blo_norm(neglog_grid).value

    def test_empty_family(self):
        with pytest.raises(InputError):
            blo_norm(NEGLOG, [])

    def test_witness_recomputes_value(self):
        g = sample(AnalyticFunction('Indicator', radius=0.5), Domain(1, 2.0, 128))
        est = blo_norm(g)
        b = Ball(est.witness['center'], est.witness['radius'])
        assert mean_over_ball(g, b) - essinf_over_ball(g, b) == pytest.approx(est.value, abs=1e-12)


class TestHeatDefect:
    @given(st.floats(min_value=-1.0, max_value=1.0), st.floats(min_value=1e-3, max_value=1.0))
    @settings(max_examples=15, deadline=None)
    def test_nonnegative(self, x, t):
        assert heat_defect(NEGLOG, x, t) >= 0

    def test_detail_minimizer_in_ball(self):
        v, z = heat_defect_detail(NEGLOG, 0.2, 0.04)
        assert abs(z[0] - 0.2) <= 0.2 + 1e-12 and v >= 0

    def test_functional_witness(self):
        est = heat_blo_functional(NEGLOG, TimeGrid(1e-2, 1e-1, 4), [(-0.1,), (0.0,), (0.1,)])
        assert est.value == pytest.approx(heat_defect(NEGLOG, est.witness['x'], est.witness['t']), abs=1e-14)

    def test_nonpositive_time(self):
        with pytest.raises(InputError):
            heat_defect(NEGLOG, 0.1, 0.0)

    def test_grid_functional_of_neglog_is_bounded(self):
        est = heat_blo_functional_grid(sample(NEGLOG, Domain(1, 2.0, 256)), TimeGrid(1e-3, 1e-2, 4))
        assert 0 < est.value < neglog_blo_norm_oracle()

    @given(st.floats(min_value=-1.0, max_value=1.0), st.floats(min_value=1e-3, max_value=1.0))
    @settings(max_examples=15, deadline=None)
    def test_bounded_by_twice_the_sup_norm(self, x, t):
        for f in (AnalyticFunction('BoundedSine', amplitude=0.5, frequency=3.0),
                  AnalyticFunction('Indicator', center=0.2, radius=0.3)):
            assert heat_defect(f, x, t) <= 2 * f.sup_norm() + 1e-12


class TestInvariances:
    BALLS = [Ball.from_interval(-1, 3), Ball.from_interval(0.5, 2), Ball(0.1, 0.05), Ball(-0.4, 0.7)]

    @given(st.floats(min_value=-2.0, max_value=2.0))
    @settings(max_examples=15, deadline=None)
    def test_shift(self, h):
        shifted = AnalyticFunction('Shifted', base=NEGLOG, h=h)
        moved = [Ball(b.center[0] + h, b.radius) for b in self.BALLS]
        assert blo_norm(shifted, moved).value == pytest.approx(blo_norm(NEGLOG, self.BALLS).value, abs=1e-10)

    @given(st.floats(min_value=-10.0, max_value=10.0))
    @settings(max_examples=15, deadline=None)
    def test_adding_a_constant(self, c):
        g = sample(AnalyticFunction('Indicator', radius=0.5), Domain(1, 2.0, 128))
        assert blo_norm(g.with_values(g.values + c, 'plus c')).value == pytest.approx(blo_norm(g).value, abs=1e-12)

    @given(st.floats(min_value=0.0, max_value=10.0))
    @settings(max_examples=15, deadline=None)
    def test_positive_homogeneity(self, lam):
        g = sample(AnalyticFunction('Indicator', radius=0.5), Domain(1, 2.0, 128))
        est = blo_norm(g.with_values(lam * g.values, 'scaled'))
        assert est.value == pytest.approx(lam * blo_norm(g).value, rel=1e-12, abs=1e-14)

    def test_scaled_kind_in_exact_mode(self):
        scaled = AnalyticFunction('Scaled', base=NEGLOG, lam=2.5)
        assert blo_norm(scaled, self.BALLS).value == pytest.approx(2.5 * blo_norm(NEGLOG, self.BALLS).value, rel=1e-12)


class TestPerturbation:
    @given(st.floats(min_value=-3.0, max_value=3.0))
    @settings(max_examples=10, deadline=None)
    def test_constant_perturbation_has_no_effect(self, c):
        balls = [Ball.from_interval(-1, 3), Ball.from_interval(0.5, 2)]
        r = perturbation_check(NEGLOG, AnalyticFunction('Constant', c=c), balls)
        assert r.lhs == pytest.approx(r.blo_f, abs=1e-12) and r.passed

    def test_sine_perturbation(self):
        d = Domain(1, 2.0, 16)
        r = perturbation_check(NEGLOG, AnalyticFunction('BoundedSine', amplitude=0.5, frequency=3.0),
                               enumerate_balls(d, dyadic_radii(d)))
        assert r.passed and r.slack >= 0

    def test_grid_mode(self):
        r = perturbation_check(NEGLOG, AnalyticFunction('Indicator', center=0.5, radius=0.25), mode='grid',
                               domain=Domain(1, 2.0, 128))
        assert r.passed

    def test_unbounded_perturbation(self):
        with pytest.raises(InputError):
            perturbation_check(NEGLOG, AnalyticFunction('LogAbs'), [Ball(0.5, 0.25)])


class TestDivergence:
    def test_logabs_grows(self):
        t = divergence_sequence(AnalyticFunction('LogAbs'), [2 ** j for j in range(1, 11)])
        assert np.all(np.diff(t['defect']) > 0) and t['defect'].iloc[-1] > 5.0

    def test_neglog_stays_bounded(self):
        t = divergence_sequence(NEGLOG, [2 ** j for j in range(1, 11)])
        assert t['defect'].max() <= 2

    def test_extension_drift(self):
        assert extension_drift(1.0, 1.04) == pytest.approx(0.04)
