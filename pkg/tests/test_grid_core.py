import math
import pytest
import numpy as np
from hypothesis import given, settings, strategies as st

from bloheat import *


class TestDomain:
    def test_cells_avoid_axes(self):
        d = Domain(2, 1.0, 8)
        assert not np.any(d.points() == 0)

    @pytest.mark.parametrize('N', [0, 3, -4, 2.0, True])
    def test_bad_cell_count(self, N):
        with pytest.raises(InputError):
            Domain(1, 1.0, N)

    def test_refine_doubles(self):
        assert Domain(1, 2.0, 16).refine().N == 32


class TestBallScan:
    @pytest.mark.parametrize('n', [1, 2])
    def test_agrees_with_single_ball_operations(self, n):
        d = Domain(n, 1.0, 16)
        g = sample(AnalyticFunction('GaussianBump', n=n, a=0.3), d)
        t = ball_scan(g, 0.25)
        for _, row in t.iterrows():
            b = ball_of_row(row, n)
            assert row['mean'] == pytest.approx(mean_over_ball(g, b), abs=1e-12)
            assert row['min'] == essinf_over_ball(g, b)

    def test_exact_mode_uses_interval_means(self):
        f = AnalyticFunction('NegLogAbs')
        g = sample(f, Domain(1, 1.0, 32))
        t = ball_scan(g, 0.25, mode='exact')
        for _, row in t.iterrows():
            b = ball_of_row(row, 1)
            assert row['mean'] == pytest.approx(f.ball_mean(b), abs=1e-12)
            assert row['min'] == pytest.approx(f.infimum_on_ball(b), abs=1e-14)

    def test_table_matches_enumeration(self):
        d = Domain(1, 2.0, 64)
        g = sample(AnalyticFunction('Linear'), d)
        assert len(ball_table(g)) == len(enumerate_balls(d, dyadic_radii(d)))

    def test_no_admissible_ball(self):
        g = sample(AnalyticFunction('Linear'), Domain(1, 1.0, 8))
        with pytest.raises(InputError):
            ball_scan(g, 1.0)


class TestBallOperations:
    @given(st.floats(min_value=-0.5, max_value=0.5), st.floats(min_value=0.05, max_value=0.4))
    @settings(max_examples=30)
    def test_mean_at_least_infimum(self, c, r):
        g = sample(AnalyticFunction('NegLogAbs'), Domain(1, 1.0, 64))
        b = Ball(c, r)
        assert mean_over_ball(g, b) >= essinf_over_ball(g, b)

    def test_ball_without_samples(self):
        g = sample(AnalyticFunction('Linear'), Domain(1, 1.0, 4))
        with pytest.raises(InputError):
            mean_over_ball(g, Ball(0.0, 0.1))

    def test_cell_averages_of_constant(self):
        g = cell_averages(AnalyticFunction('Constant', n=2, c=2.5), Domain(2, 1.0, 8))
        assert np.allclose(g.values, 2.5, atol=1e-14)

    def test_mean_field_matches_scan(self):
        d = Domain(1, 1.0, 32)
        g = sample(AnalyticFunction('GaussianBump', a=0.2), d)
        m = mean_field(g, 0.125)
        t = ball_scan(g, 0.125)
        ok = np.isfinite(m)
        assert np.allclose(m[ok], t['mean'].values, atol=1e-14)

    def test_linear_radii(self):
        assert linear_radii(Domain(1, 1.0, 16), 0.5) == pytest.approx((0.125, 0.25, 0.375, 0.5))


class TestAdmissibleBalls:
    @pytest.mark.parametrize('N,radii,count', [(4, {0.25}, 2), (8, {0.125, 0.25}, 10)])
    def test_enumeration_counts(self, N, radii, count):
        assert len(enumerate_balls(Domain(1, 1.0, N), radii)) == count

    def test_member_cells_stay_inside(self):
        d = Domain(1, 1.0, 8)
        for b in enumerate_balls(d, {0.125, 0.25}):
            lo, hi = b.interval
            assert -d.L < lo - 0.5 * d.h and hi + 0.5 * d.h < d.L

    def test_mask(self):
        assert admissible_centers(Domain(1, 1.0, 8), 0.25).tolist() == [False, False, True, True, True, True, False, False]
        assert admissible_centers(Domain(2, 1.0, 8), 0.0).shape == (8, 8)

    def test_margin_shrinks_the_mask(self):
        d = Domain(1, 1.0, 16)
        assert admissible_centers(d, 0.125, margin=0.25).sum() < admissible_centers(d, 0.125).sum()


class TestRefinement:
    @given(st.floats(min_value=0.5, max_value=2.0))
    @settings(max_examples=10, deadline=None)
    def test_grid_mean_converges_monotonically(self, a):
        f = AnalyticFunction('GaussianBump', a=a)
        b = Ball.from_interval(0.0, 0.5)
        exact = f.ball_mean(b)
        d, errors = Domain(1, 1.0, 16), []
        for _ in range(4):
            errors.append(abs(mean_over_ball(sample(f, d), b) - exact))
            d = d.refine()
        assert all(e1 <= e0 + 1e-12 for e0, e1 in zip(errors, errors[1:]))
        assert errors[-1] < errors[0] / 16
