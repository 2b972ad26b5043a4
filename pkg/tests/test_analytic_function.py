import math
import pytest
from hypothesis import given, settings, strategies as st

from bloheat import *


@st.composite
def intervals(draw, case=None):
    """ ``(a, b)`` with ``a < b`` inside ``[-5, 5]``, neither end at the origin unless the case asks for it."""
    case = case or draw(st.sampled_from(['i', 'ii', 'iii']))
    length = draw(st.floats(min_value=1e-2, max_value=4.0))
    if case == 'i':
        a = draw(st.floats(min_value=1e-3, max_value=1.0))
        return a, a + length
    if case == 'ii':
        b = -draw(st.floats(min_value=1e-3, max_value=1.0))
        return b - length, b
    a = -draw(st.floats(min_value=1e-3, max_value=4.0))
    return a, draw(st.floats(min_value=1e-3, max_value=4.0))


class TestNegLogDefect:
    @given(intervals('i'))
    def test_case_i_below_one(self, ab):
        assert 0 <= neglog_interval_defect(*ab) < 1

    @given(intervals('iii'))
    def test_straddling_between_one_and_two(self, ab):
        assert 1 <= neglog_interval_defect(*ab) <= 2

    @given(intervals())
    def test_reflection(self, ab):
        a, b = ab
        assert neglog_interval_defect(a, b) == pytest.approx(neglog_interval_defect(-b, -a), abs=1e-15)

    @given(intervals())
    @settings(max_examples=50)
    def test_exact_mode_matches_closed_form(self, ab):
        f = AnalyticFunction('NegLogAbs')
        assert interval_defect(f, *ab) == pytest.approx(neglog_interval_defect(*ab), abs=1e-12)

    @given(st.floats(min_value=1e-3, max_value=100.0))
    def test_origin_interval_is_one(self, b):
        assert interval_defect(AnalyticFunction('NegLogAbs'), 0.0, b) == pytest.approx(1.0, abs=1e-12)

    def test_oracle_agrees_with_dense_scan(self):
        assert neglog_blo_norm_oracle() == pytest.approx(neglog_blo_norm_dense(), abs=1e-6)
        assert neglog_blo_norm_oracle() == pytest.approx(1.2785, abs=1e-4)

    def test_empty_interval(self):
        with pytest.raises(InputError):
            neglog_interval_defect(2.0, 2.0)


class TestAnalyticFunction:
    def test_flags_of_composites(self):
        f = AnalyticFunction('Sum', base=AnalyticFunction('NegLogAbs'),
                             bounded_part=AnalyticFunction('BoundedSine', amplitude=0.25, frequency=2))
        assert (f.is_BLO, f.is_BMO, f.is_Linfty) == (True, True, False)
        assert AnalyticFunction('Scaled', base=AnalyticFunction('LogAbs'), lam=2).flags == (False, True, False)

    def test_unknown_kind(self):
        with pytest.raises(InputError):
            AnalyticFunction('Cosine')

    def test_sum_needs_bounded_part(self):
        with pytest.raises(InputError):
            AnalyticFunction('Sum', base=AnalyticFunction('NegLogAbs'), bounded_part=AnalyticFunction('LogAbs'))

    def test_descriptor_round_trip(self):
        f = AnalyticFunction('Shifted', n=2, base=AnalyticFunction('Indicator', n=2, center=(0.5, 0), radius=0.25),
                             h=(0.1, -0.2))
        g = AnalyticFunction.from_descriptor(f.to_descriptor())
        assert g.to_descriptor() == f.to_descriptor()
        assert g.evaluate((0.6, -0.2)) == f.evaluate((0.6, -0.2))

    @given(st.floats(min_value=0.01, max_value=50.0))
    def test_neglog_mean_on_origin_interval(self, b):
        assert AnalyticFunction('NegLogAbs').ball_mean(Ball.from_interval(0, b)) == pytest.approx(1 - math.log(b))

    def test_non_integrable_exp_weight(self):
        f = AnalyticFunction('ExpWeight', base=AnalyticFunction('NegLogAbs'), epsilon=1.5)
        with pytest.raises(InputError):
            f.integrable_exactly()

    def test_logabs_infimum_at_origin(self):
        assert AnalyticFunction('LogAbs').infimum_on_ball(Ball(0.2, 0.5)) == -math.inf


class TestCellIntegrals:
    @pytest.mark.parametrize('f', [AnalyticFunction('NegLogAbs'), AnalyticFunction('LogAbs'),
                                   AnalyticFunction('PowerLawWeight', alpha=0.5)])
    @given(intervals(), st.floats(min_value=0.05, max_value=0.95))
    @settings(max_examples=30, deadline=None)
    def test_additive_over_subcells(self, f, ab, u):
        a, b = ab
        m = a + u * (b - a)
        whole = f.exact_cell_integral((a, b))
        assert f.exact_cell_integral((a, m)) + f.exact_cell_integral((m, b)) == pytest.approx(whole, rel=1e-10, abs=1e-12)

    def test_additive_in_the_plane(self):
        f = AnalyticFunction('NegLogAbs', n=2)
        whole = f.exact_cell_integral(((-0.5, 1.0), (-0.25, 0.75)))
        parts = sum(f.exact_cell_integral(c) for c in (((-0.5, 0.0), (-0.25, 0.75)), ((0.0, 1.0), (-0.25, 0.0)),
                                                       ((0.0, 1.0), (0.0, 0.75))))
        assert parts == pytest.approx(whole, rel=1e-10)
