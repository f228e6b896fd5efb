from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seebeckopt.analytic import optimal_profile, three_segment_profile
from seebeckopt.functional import EvalScheme, eval_sampled
from seebeckopt.profile import (
    Constant,
    Hyperbolic,
    Perturbation,
    PiecewiseProfile,
    ProfileError,
    SampledProfile,
    Segment,
    SeebeckBounds,
    make_sampled,
    monotone_rearrange,
    sample_piecewise,
)

positive = st.floats(min_value=1e-3, max_value=1e3, allow_nan=False)
profiles = st.lists(positive, min_size=1, max_size=40)


class TestBounds:
    def test_equal_bounds_allowed(self):
        b = SeebeckBounds(1, 1)
        assert b.degenerate and b.log_ratio == 0.0

    @pytest.mark.parametrize("lo,hi", [(0, 1), (-1, 1), (2, 1), (1, float("inf")), (float("nan"), 1)])
    def test_invalid(self, lo, hi):
        with pytest.raises(ProfileError):
            SeebeckBounds(lo, hi)


class TestMakeSampled:
    def test_constant_feasible(self):
        sp = make_sampled([1, 1, 1], SeebeckBounds(1, 2), enforce_bounds=True)
        assert sp.n_cells == 3

    def test_bound_violation_reports_index(self):
        with pytest.raises(ProfileError) as exc:
            make_sampled([1, 3, 1], SeebeckBounds(1, 2), enforce_bounds=True)
        assert exc.value.index == 1

    def test_bounds_not_enforced(self):
        assert make_sampled([2, 1], SeebeckBounds(1, 2), enforce_bounds=False).n_cells == 2

    def test_empty(self):
        with pytest.raises(ProfileError):
            make_sampled([])

    @pytest.mark.parametrize("values,index", [([1, 0], 1), ([-1, 1], 0), ([1, 1, float("nan")], 2)])
    def test_non_positive_or_non_finite(self, values, index):
        with pytest.raises(ProfileError) as exc:
            make_sampled(values)
        assert exc.value.index == index

    def test_values_are_read_only(self):
        sp = make_sampled([1.0, 2.0])
        with pytest.raises(ValueError):
            sp.values[0] = 5.0


def test_perturbation_allows_any_sign_but_not_nan():
    assert Perturbation([-1.0, 0.0, 2.0]).n_cells == 3
    with pytest.raises(ProfileError):
        Perturbation([0.0, float("inf")])


class TestPiecewise:
    def test_gap_rejected(self):
        with pytest.raises(ProfileError, match="abut"):
            PiecewiseProfile((Segment(0, 0.4, Constant(1)), Segment(0.5, 1, Constant(1))))

    def test_must_cover_unit_interval(self):
        with pytest.raises(ProfileError):
            PiecewiseProfile((Segment(0.1, 1, Constant(1)),))
        with pytest.raises(ProfileError):
            PiecewiseProfile((Segment(0, 0.9, Constant(1)),))

    def test_hyperbolic_cannot_reach_one(self):
        with pytest.raises(ProfileError, match="hyperbolic"):
            PiecewiseProfile((Segment(0, 0.5, Constant(1)), Segment(0.5, 1.0, Hyperbolic(0.5))))

    def test_zero_length_segments_dropped(self):
        pw = PiecewiseProfile(
            (Segment(0, 0.5, Constant(1)), Segment(0.5, 0.5, Hyperbolic(0.5)), Segment(0.5, 1, Constant(1)))
        )
        assert len(pw.segments) == 2

    def test_right_hand_segment_owns_shared_point(self):
        pw = PiecewiseProfile((Segment(0, 0.5, Constant(1)), Segment(0.5, 1, Constant(3))))
        assert pw(0.5) == 3.0
        assert pw.left_limit(0.5) == 1.0 and pw.right_limit(0.5) == 3.0
        assert pw(1.0) == 3.0

    @settings(max_examples=200)
    @given(st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=0, max_size=8), positive)
    def test_tiling_is_exact(self, cuts, value):
        points = [0.0, *sorted(cuts), 1.0]
        segs = tuple(Segment(a, b, Constant(value)) for a, b in zip(points, points[1:]))
        pw = PiecewiseProfile(segs)
        assert pw.segments[0].start == 0.0 and pw.segments[-1].end == 1.0
        assert sum(Fraction(s.end) - Fraction(s.start) for s in pw.segments) == 1


class TestSamplePiecewise:
    def test_constant(self):
        assert sample_piecewise(PiecewiseProfile.constant(1.0), 4).values.tolist() == [1, 1, 1, 1]

    def test_optimum_at_four_midpoints(self):
        # midpoints 0.125, 0.375 | 0.625 on q/(1-x) with q = 1/2 | 0.875
        got = sample_piecewise(optimal_profile(SeebeckBounds(1, 2)), 4).values
        np.testing.assert_allclose(got, [1, 1, 0.5 / (1 - 0.625), 2], rtol=1e-15)
        assert got[2] == pytest.approx(4 / 3, rel=1e-15)

    def test_hyperbolic_then_constant(self):
        pw = PiecewiseProfile((Segment(0, 0.5, Hyperbolic(0.5)), Segment(0.5, 1, Constant(1))))
        np.testing.assert_allclose(sample_piecewise(pw, 2).values, [2 / 3, 1], rtol=1e-15)

    @pytest.mark.parametrize("n", [0, -1, 2.5])
    def test_bad_n(self, n):
        with pytest.raises(ProfileError):
            sample_piecewise(PiecewiseProfile.constant(1.0), n)

    @given(positive, st.integers(min_value=1, max_value=500))
    def test_constant_any_n(self, c, n):
        assert np.all(sample_piecewise(PiecewiseProfile.constant(c), n).values == c)

    def test_three_segment_samples_within_bounds(self):
        b = SeebeckBounds(1.3, 7.1)
        y = sample_piecewise(three_segment_profile(0.9, b), 997).values
        assert y.min() >= b.s_lo and y.max() <= b.s_hi
        assert np.all(np.diff(y) >= 0)


class TestRearrange:
    def test_examples(self):
        assert monotone_rearrange(SampledProfile([3, 1, 2])).values.tolist() == [1, 2, 3]
        assert monotone_rearrange(SampledProfile([1, 1, 1])).values.tolist() == [1, 1, 1]

    def test_two_cell_exchange_raises_F(self):
        before = SampledProfile([2, 1])
        after = monotone_rearrange(before)
        assert after.values.tolist() == [1, 2]
        assert eval_sampled(before, EvalScheme.PAPER).ratio == 0.5
        assert eval_sampled(after, EvalScheme.PAPER).ratio == 0.75

    @given(profiles)
    def test_idempotent_and_same_multiset(self, values):
        sp = SampledProfile(values)
        once = monotone_rearrange(sp)
        assert monotone_rearrange(once) == once
        assert sorted(values) == once.values.tolist()

    @settings(max_examples=300)
    @given(profiles, st.sampled_from(list(EvalScheme)))
    def test_never_lowers_F(self, values, scheme):
        sp = SampledProfile(values)
        assert eval_sampled(monotone_rearrange(sp), scheme).ratio >= eval_sampled(sp, scheme).ratio
