import math
import pytest
import numpy as np
from hypothesis import given, settings, strategies as st

from bloheat import *

NEGLOG = AnalyticFunction('NegLogAbs')


class TestMaximalFunctions:
    def test_hl_dominates_the_weight(self):
        w = WeightFunction(NEGLOG, 0.5)
        balls = [Ball(0.3, 0.1), Ball(0.2, 0.25), Ball(0.0, 0.5)]
        assert hl_maximal(w.analytic, 0.3, balls) >= w.evaluate(0.3)

    def test_no_ball_contains_point(self):
        with pytest.raises(InputError):
            bennett_maximal(NEGLOG, 2.0, [Ball(0.0, 0.5)])

    def test_scan_dominates_samples(self):
        g = sample(AnalyticFunction('Linear'), Domain(1, 1.0, 64))
        m = maximal_scan(g)
        assert np.all(m.values[m.valid] >= g.values[m.valid] - 1e-14)

    @pytest.mark.parametrize('f', [AnalyticFunction('Linear'), AnalyticFunction('GaussianBump', a=0.05)])
    @pytest.mark.parametrize('signed', [True, False])
    def test_scan_dominates_samples_everywhere(self, f, signed):
        g = sample(f, Domain(1, 1.0, 64))
        m = maximal_scan(g, signed=signed)
        own = g.values if signed else np.abs(g.values)
        assert np.all(m.values[m.valid] >= own[m.valid])
        assert not m.valid[0] and not m.valid[-1]

    @given(st.floats(min_value=0.1, max_value=4.0).filter(lambda x: abs(x - 1) > 1e-3))
    @settings(max_examples=20, deadline=None)
    def test_hl_of_inverse_square_root(self, x):
        w = AnalyticFunction('PowerLawWeight', alpha=0.5)
        bound = (1 + math.sqrt(2)) / math.sqrt(x)
        best = (math.sqrt(2) - 1) ** 2 * x
        balls = [Ball.from_interval(-u * x, x * (1 + 1e-12)) for u in (0.01, 0.1, 0.5, 1.0, 3.0)]
        balls.append(Ball.from_interval(-best, x * (1 + 1e-12)))
        balls.append(Ball(x, 0.5 * x))
        assert hl_maximal(w, x, balls) == pytest.approx(bound, rel=1e-9)

    def test_bennett_functional_of_constant(self):
        est = bennett_blo_functional(AnalyticFunction('Constant', c=3.0), Domain(1, 1.0, 32))
        assert est.value == pytest.approx(0.0, abs=1e-12)

    def test_bennett_functional_finite_for_neglog(self):
        est = bennett_blo_functional(NEGLOG, Domain(1, 2.0, 256))
        assert 0 < est.value < math.inf


class TestA1Constants:
    @given(st.floats(min_value=-2.0, max_value=2.0), st.floats(min_value=0.1, max_value=2.0))
    @settings(max_examples=10, deadline=None)
    def test_constant_weight(self, c, eps):
        w = WeightFunction(AnalyticFunction('Constant', c=c), eps)
        assert a1_constant_maximal(w, Domain(1, 1.0, 16)).constant == pytest.approx(1.0, abs=1e-12)

    def test_power_half(self):
        e = a1_constant_maximal(WeightFunction(NEGLOG, 0.5), Domain(1, 1.0, 256))
        assert e.constant == pytest.approx(1 + math.sqrt(2), rel=0.03)

    @pytest.mark.parametrize('alpha', [0.25, 0.75])
    def test_heat_below_maximal(self, alpha):
        w = WeightFunction(NEGLOG, alpha)
        d = Domain(1, 1.0, 64)
        mx, heat = a1_constant_maximal(w, d), a1_constant_heat(w, TimeGrid(1e-4, 1e-1, 4), d)
        assert 1 <= heat.constant <= KAPPA * mx.constant
        assert mx.constant <= KAPPA_PRIME[1] * heat.constant

    def test_overflow_guard(self):
        with pytest.raises(NumericError):
            WeightFunction(AnalyticFunction('Constant', c=2000.0), 1.0).on(Domain(1, 1.0, 4))

    def test_nonpositive_epsilon(self):
        with pytest.raises(InputError):
            WeightFunction(NEGLOG, 0.0)


class TestNFunctional:
    def test_constant(self):
        r = n_functional(AnalyticFunction('Constant', c=1.0), [0.2, 0.5], TimeGrid(1e-2, 1e-1, 4), Domain(1, 1.0, 16))
        assert r.value <= 1e-9

    def test_degree_one_homogeneity(self):
        grid, tg, d = [0.2, 0.4, 0.6, 0.8], TimeGrid(1e-3, 1e-1, 4), Domain(1, 1.0, 32)
        base = n_functional(NEGLOG, grid, tg, d)
        scaled = n_functional(AnalyticFunction('Scaled', base=NEGLOG, lam=2.0), [e / 2 for e in grid], tg, d)
        assert scaled.value == pytest.approx(2 * base.value, abs=1e-10)

    def test_skips_non_integrable_epsilon(self):
        r = n_functional(NEGLOG, [0.5, 1.5], TimeGrid(1e-2, 1e-1, 4), Domain(1, 1.0, 16))
        assert r.epsilon_grid == [0.5]

    def test_exp_a1_finds_epsilon_for_neglog(self):
        eps, est = exp_a1_probe(NEGLOG, [0.25, 0.5], 10.0, Domain(1, 1.0, 32))
        assert eps == 0.25 and est.constant <= 10.0

    def test_exp_a1_rejects_everything_over_threshold(self):
        eps, est = exp_a1_probe(AnalyticFunction('Linear'), [5.0], 1.01, Domain(1, 1.0, 16))
        assert eps is None and hasattr(est, 'note')


class TestCharacterization:
    def test_neglog_satisfies_all_three(self):
        r = a1_characterization(NEGLOG, Domain(1, 1.0, 32), [0.25, 0.5], TimeGrid(1e-3, 1e-1, 4))
        assert r.epsilon == 0.25 and r.verdict and r.blo_norm > 0

    def test_linear_has_no_weight(self):
        r = a1_characterization(AnalyticFunction('Linear'), Domain(1, 1.0, 16), [5.0], TimeGrid(1e-2, 1e-1, 4),
                                threshold=1.01)
        assert r.epsilon is None and not r.verdict

    def test_default_epsilon_grid_respects_overflow_guard(self):
        d = Domain(1, 1.0, 16)
        grid = default_epsilon_grid(AnalyticFunction('Constant', c=70.0), d)
        assert grid[0] == pytest.approx(1e-2) and grid[-1] <= OVERFLOW_GUARD / 70.0 * (1 + 1e-12)
        assert Util.is_monotonic(grid)
