#!/usr/bin/env python3
"""
Tests for wall crossing, destabilizer searches, weighted blow-ups and the
epsilon-lc certificate
"""
import os
import sys
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

# Add current directory to Python path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from invariants import beta
from model import (divisor_class_valuation, hyperplane_valuation, make_explicit_model, make_pn_model,
                   point_blowup_valuation)
from stability import (AffineInT, AlphaVerdict, BlowupCase, TInterval, admissible_interval, ample_interval,
                       beta_affine_form, destabilizer_search, epsilon_lc_certificate, epsilon_zero,
                       instability_threshold, proportional_sufficient_check, semistable_interval,
                       sufficient_alpha_verdict, weighted_blowup_discrepancy, weighted_blowup_pullback)

GRID_24 = [Fraction(k, 24) for k in range(25)]


@pytest.fixture
def radial():
    return make_pn_model(2, 3, 1, label="radial")


@pytest.fixture
def pencil():
    return make_pn_model(2, 3, -3, label="cubic pencil")


def radial_pool(model):
    """Candidates beyond the invariant line on the radial model."""
    return [
        hyperplane_valuation(model, invariant=False),
        point_blowup_valuation(model, 1, -1, 1, label="center_point"),
        point_blowup_valuation(model, 1, 1, 0, label="general_point"),
        divisor_class_valuation(model, 2, invariant=False, label="conic"),
    ]


def pencil_candidates(model):
    return [
        divisor_class_valuation(model, 3, invariant=True, label="pencil_member"),
        hyperplane_valuation(model, invariant=False),
        point_blowup_valuation(model, 1, -1, 1, label="base_point"),
        point_blowup_valuation(model, 1, 0, 0, label="node"),
    ]


class TestAffineForm:

    def test_radial_invariant_line(self, radial):
        form = beta_affine_form(hyperplane_valuation(radial, invariant=True), radial)
        assert form == AffineInT(Fraction(0), Fraction(-1, 3))

    def test_matches_direct_beta(self, radial):
        for v in radial_pool(radial):
            form = beta_affine_form(v, radial)
            for t in (Fraction(0), Fraction(1, 5), Fraction(2, 3), Fraction(1)):
                assert form(t) == beta(v, radial, t).beta, v.label

    @given(st.lists(st.fractions(min_value=0, max_value=1, max_denominator=1000), min_size=10, max_size=10))
    @settings(max_examples=20, deadline=None)
    def test_matches_direct_beta_at_random_t(self, ts):
        model = make_pn_model(2, 3, 1)
        pencil = make_pn_model(2, 3, -3)
        for v in radial_pool(model):
            form = beta_affine_form(v, model)
            for t in ts:
                assert form(t) == beta(v, model, t).beta, (v.label, t)
        # the pencil is only ample below its wall at t = 1/2
        for v in pencil_candidates(pencil):
            form = beta_affine_form(v, pencil)
            for t in ts:
                t = t * Fraction(49, 100)
                assert form(t) == beta(v, pencil, t).beta, (v.label, t)

    def test_fixed_polarization(self):
        model = make_pn_model(2, 3, 1, fixed_coefficient=3)
        line = hyperplane_valuation(model, invariant=True)
        form = beta_affine_form(line, model)
        assert form == AffineInT(Fraction(0), Fraction(-1))
        assert beta(line, model, Fraction(1, 2)).beta == Fraction(-1, 2)

    def test_needs_proportional_model(self):
        model = make_explicit_model(2, 9, 1)
        with pytest.raises(ValueError, match="proportional"):
            semistable_interval(model, [])


class TestIntervals:

    def test_ample_interval_closes_open_wall(self, pencil):
        ample = ample_interval(pencil)
        assert ample.wall == Fraction(1, 2)
        assert ample.lo == 0
        assert ample.hi == Fraction(499999, 1000000)
        assert "ampleness wall at t = 1/2" in str(ample)

    def test_ample_interval_without_wall(self, radial):
        assert ample_interval(radial) == TInterval(Fraction(0), Fraction(1))

    def test_admissible_constant_forms(self):
        ample = TInterval(Fraction(0), Fraction(1))
        assert admissible_interval(AffineInT(Fraction(1), Fraction(0)), ample) == ample
        assert admissible_interval(AffineInT(Fraction(-1), Fraction(0)), ample).empty

    def test_admissible_increasing_form(self):
        ample = TInterval(Fraction(0), Fraction(1))
        interval = admissible_interval(AffineInT(Fraction(-1, 2), Fraction(1)), ample)
        assert (interval.lo, interval.hi) == (Fraction(1, 2), Fraction(1))

    def test_intersection(self):
        a = TInterval(Fraction(0), Fraction(1, 2))
        b = TInterval(Fraction(1, 3), Fraction(1))
        assert a.intersect(b) == TInterval(Fraction(1, 3), Fraction(1, 2))
        assert a.intersect(TInterval(Fraction(3, 4), Fraction(1))).empty
        assert TInterval.nothing().is_subset_of(a)

    def test_radial_invariant_line_interval(self, radial):
        interval = semistable_interval(radial, [hyperplane_valuation(radial, invariant=True)])
        assert interval == TInterval(Fraction(0), Fraction(0))
        assert str(interval) == "[0, 0]"

    @given(st.sets(st.integers(min_value=0, max_value=3)))
    @settings(max_examples=100, deadline=None)
    def test_more_candidates_never_enlarge(self, chosen):
        model = make_pn_model(2, 3, 1)
        base = [hyperplane_valuation(model, invariant=True)]
        pool = radial_pool(model)
        smaller = semistable_interval(model, base)
        larger = semistable_interval(model, base + [pool[i] for i in sorted(chosen)])
        assert larger.is_subset_of(smaller)

    def test_empty_candidate_set_refused(self, radial):
        with pytest.raises(ValueError, match="empty candidate set"):
            semistable_interval(radial, [])

    def test_pencil_semistable_up_to_the_wall(self, pencil):
        interval = semistable_interval(pencil, pencil_candidates(pencil))
        assert interval == ample_interval(pencil)


class TestCubicPencil:

    def test_member_beta(self, pencil):
        member = pencil_candidates(pencil)[0]
        assert beta_affine_form(member, pencil) == AffineInT(Fraction(2, 3), Fraction(-1, 3))
        for k in range(8):
            t = Fraction(k, 16)
            report = beta(member, pencil, t)
            assert report.beta == (2 - t) / 3
            assert report.beta > 0

    def test_no_false_destabilizer(self, pencil):
        for k in range(50):
            verdict = destabilizer_search(pencil, pencil_candidates(pencil), Fraction(k, 100))
            assert not verdict.destabilized

    def test_past_the_wall(self, pencil):
        with pytest.raises(ValueError, match="not adjoint Fano"):
            destabilizer_search(pencil, pencil_candidates(pencil), Fraction(1, 2))


class TestDestabilizerSearch:

    def test_cubic_fourfold_grid(self):
        model = make_pn_model(4, 3, 1, hyperplane_degree=3)
        candidates = [hyperplane_valuation(model, invariant=True, label="pencil_member"),
                      hyperplane_valuation(model, invariant=False, label="hyperplane_section")]
        for t in GRID_24:
            verdict = destabilizer_search(model, candidates, t)
            assert verdict.destabilized == (t > Fraction(2, 3)), t
            if verdict.destabilized:
                assert verdict.label == "pencil_member"
                assert verdict.beta == (2 - 3 * t) / 5

    def test_most_negative_wins(self, radial):
        candidates = [hyperplane_valuation(radial, invariant=True)] + radial_pool(radial)
        verdict = destabilizer_search(radial, candidates, Fraction(1, 2))
        assert verdict.message == "destabilized by center_point with beta = -1/3"

    def test_no_destabilizer_message(self, radial):
        candidates = [hyperplane_valuation(radial, invariant=True)] + radial_pool(radial)[:3]
        verdict = destabilizer_search(radial, candidates, 0)
        assert not verdict.destabilized
        assert verdict.message == "no destabilizer among 4 candidates; delta_ub = 1"

    def test_ties_broken_by_label(self, radial):
        a = point_blowup_valuation(radial, 1, -1, 1, label="b_point")
        b = point_blowup_valuation(radial, 1, -1, 1, label="a_point")
        verdict = destabilizer_search(radial, [a, b], Fraction(1, 4))
        assert verdict.label == "a_point"

    def test_non_lc_foliation_destabilizes_near_one(self, radial):
        # a_F + epsilon = -1, so A^[t] = 2 - 3t turns negative past t = 2/3
        bad = point_blowup_valuation(radial, 1, -2, 1, label="non_lc_point")
        assert bad.A_F == -1
        candidates = radial_pool(radial) + [bad]
        for t in GRID_24:
            if t < Fraction(5, 6):
                continue
            verdict = destabilizer_search(radial, candidates, t)
            assert verdict.destabilized
            assert verdict.label == "non_lc_point"
            assert verdict.beta == -5 * t / 3
            assert beta(bad, radial, t).A < 0


class TestProportionalCriteria:

    def test_sufficient_check(self, radial, pencil):
        rows = proportional_sufficient_check(pencil, pencil_candidates(pencil)[:1])
        assert rows[0]['holds']
        assert rows[0]['ambient_term'] == Fraction(2, 3)
        assert rows[0]['foliated_term'] == 1
        rows = proportional_sufficient_check(radial, [hyperplane_valuation(radial, invariant=True)])
        assert not rows[0]['holds']

    def test_instability_threshold(self, radial, pencil):
        assert instability_threshold(radial, [hyperplane_valuation(radial, invariant=True)]) == 0
        assert instability_threshold(pencil, pencil_candidates(pencil)) is None
        fourfold = make_pn_model(4, 3, 1, hyperplane_degree=3)
        assert instability_threshold(fourfold, [hyperplane_valuation(fourfold, invariant=True)]) == Fraction(2, 3)


class TestAlphaVerdict:

    @pytest.mark.parametrize("alpha, expected", [
        (Fraction(3, 4), AlphaVerdict.UNIFORMLY_STABLE),
        (Fraction(2, 3), AlphaVerdict.SEMISTABLE),
        (Fraction(1, 3), AlphaVerdict.INCONCLUSIVE),
    ])
    def test_thresholds_in_dimension_two(self, alpha, expected):
        assert sufficient_alpha_verdict(2, alpha) is expected


class TestWeightedBlowup:

    def test_discrepancy_formula(self):
        # (1-t)(k/b + (d-1)k) + t(k/b + (r-1)k) with d=2, r=1, k=1, b=1
        assert weighted_blowup_discrepancy(2, 1, 1, 1, 0, BlowupCase.TRANSVERSE) == 2
        assert weighted_blowup_discrepancy(2, 1, 1, 1, 1, BlowupCase.TRANSVERSE) == 1
        assert weighted_blowup_discrepancy(3, 2, 1, 2, 1, BlowupCase.INVARIANT) == 2

    def test_bound_on_full_grid(self):
        ts = [Fraction(k, 4) for k in range(5)]
        for d in range(2, 7):
            for r in range(1, d + 1):
                for k in (1, 2):
                    for a in (Fraction(0), Fraction(1, 2), Fraction(1)):
                        for b in (a + Fraction(1, 4), a + 1, Fraction(10)):
                            for t in ts:
                                cases = [BlowupCase.TRANSVERSE] + ([BlowupCase.INVARIANT] if r < d else [])
                                for case in cases:
                                    result = weighted_blowup_pullback(d, r, k, b, t, case, a)
                                    assert result.bound_ok, (d, r, k, a, b, t, case)
                                    assert result.value <= k * d

    def test_rank_d_has_no_invariant_case(self):
        with pytest.raises(ValueError, match="r < d"):
            weighted_blowup_discrepancy(3, 3, 1, 1, 0, BlowupCase.INVARIANT)

    @pytest.mark.parametrize("args", [
        (2, 0, 1, 1, 0),
        (2, 3, 1, 1, 0),
        (2, 1, 0, 1, 0),
        (2, 1, 1, 0, 0),
        (2, 1, 1, 1, 2),
    ])
    def test_range_violations(self, args):
        with pytest.raises(ValueError):
            weighted_blowup_discrepancy(*args, BlowupCase.TRANSVERSE)

    def test_negative_log_discrepancy_refused(self):
        with pytest.raises(ValueError):
            weighted_blowup_pullback(2, 1, 1, 1, 0, BlowupCase.TRANSVERSE, -1)


class TestCertificate:

    def test_reference_value(self):
        assert epsilon_lc_certificate(2, 9, Fraction(1, 3), Fraction(1, 2)) == Fraction(1, 4)
        assert epsilon_zero(2, 9, Fraction(1, 3)) == Fraction(1, 4)

    def test_eps_zero_capped_at_one(self):
        assert epsilon_zero(1, 100, 1) == 1

    @given(st.integers(min_value=1, max_value=6),
           st.fractions(min_value=Fraction(1, 1000), max_value=1000, max_denominator=1000),
           st.fractions(min_value=Fraction(1, 100), max_value=Fraction(99, 100), max_denominator=100))
    @settings(max_examples=200, deadline=None)
    def test_positive_with_semistable_delta(self, d, V, t):
        eps = epsilon_lc_certificate(d, V, Fraction(1, d + 1), t)
        assert 0 < eps <= min(t, 1 - t)

    @pytest.mark.parametrize("t", [Fraction(0), Fraction(1)])
    def test_endpoints_refused(self, t):
        with pytest.raises(ValueError):
            epsilon_lc_certificate(2, 9, Fraction(1, 3), t)

    def test_bad_inputs(self):
        with pytest.raises(ValueError):
            epsilon_zero(2, 0, Fraction(1, 3))
        with pytest.raises(ValueError):
            epsilon_zero(2, 9, 0)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
