#!/usr/bin/env python3
"""
Tests for DF, Ding and J^NA of test configurations
"""
import os
import sys
from fractions import Fraction

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

# Add current directory to Python path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import config
from invariants import beta
from model import DiscrepancyData
from scenario import load_scenario
from testconfig import (FibreComponent, InconsistentDataError, TestConfigData, df, df_anti_adjoint,
                        df_from_beta, ding, fibre_lct, jna, stability_verdict)

rationals = st.fractions(min_value=-100, max_value=100, max_denominator=100)
volumes = st.fractions(min_value=Fraction(1, 100), max_value=100, max_denominator=100)
dimensions = st.integers(min_value=1, max_value=6)
parameters = st.fractions(min_value=0, max_value=1, max_denominator=100)


def anti_adjoint_data(n, V, Lbar_pow, t, lct=None, L_mu_pullback=0):
    """mu = 1 and K^[t] . Lbar^n = -Lbar^{n+1}, the L = -K^[t] situation."""
    return TestConfigData(n=n, V=V, mu=1, Lbar_pow=Lbar_pow, K_dot_L=-Lbar_pow, t=t,
                          L_mu_pullback=L_mu_pullback, lct_along_fibre=lct)


def vertical(order_fibre, order_B=0):
    return FibreComponent(DiscrepancyData("fibre", 0, 0, 0), order_B, order_fibre)


class TestDonaldsonFutaki:

    def test_formula(self):
        data = TestConfigData(n=2, V=9, mu=1, Lbar_pow=-3, K_dot_L=3, t=Fraction(1, 2))
        assert df(data) == Fraction(1, 9)
        assert df_anti_adjoint(2, 9, -3) == Fraction(1, 9)

    def test_general_slope(self):
        data = TestConfigData(n=1, V=2, mu=Fraction(1, 2), Lbar_pow=4, K_dot_L=-3, t=0)
        # (1/2 * 1/2 * 4 - 3) / 2
        assert df(data) == -1

    @given(dimensions, volumes, rationals, parameters)
    @settings(max_examples=1000, deadline=None)
    def test_anti_adjoint_specialization(self, n, V, Lbar_pow, t):
        assert df(anti_adjoint_data(n, V, Lbar_pow, t)) == df_anti_adjoint(n, V, Lbar_pow)

    def test_rejects_bad_volume(self):
        with pytest.raises(ValueError):
            df_anti_adjoint(2, 0, 1)
        with pytest.raises(ValueError):
            TestConfigData(n=2, V=-1, mu=1, Lbar_pow=0, K_dot_L=0, t=0)

    def test_rees_round_trip_on_bundled_valuations(self):
        ts = [Fraction(k, 40) for k in range(20)]
        for name in config.BUNDLED_SCENARIOS:
            scenario = load_scenario(name)
            for v in scenario.valuations.values():
                for t in ts:
                    check = df_from_beta(v, scenario.model, t)
                    assert check.df == check.beta == beta(v, scenario.model, t).beta
                    V = scenario.model.volume(t)
                    assert check.Lbar_pow == -(scenario.model.n + 1) * V * check.beta


class TestDing:

    def test_formula(self):
        data = anti_adjoint_data(2, 9, -3, Fraction(1, 2), lct=Fraction(1, 4))
        assert ding(data) == Fraction(1, 9) - Fraction(1, 4)

    def test_missing_lct(self):
        with pytest.raises(ValueError, match="missing lct"):
            ding(anti_adjoint_data(2, 9, -3, 0))

    @given(dimensions, volumes, rationals, parameters)
    @settings(max_examples=1000, deadline=None)
    def test_equals_df_on_weakly_special_data(self, n, V, Lbar_pow, t):
        data = anti_adjoint_data(n, V, Lbar_pow, t, lct=1 - t)
        assert ding(data) == df(data)

    @given(dimensions, volumes, rationals, parameters, st.fractions(min_value=0, max_value=1, max_denominator=100))
    @settings(max_examples=1000, deadline=None)
    def test_bounded_by_df(self, n, V, Lbar_pow, t, share):
        data = anti_adjoint_data(n, V, Lbar_pow, t, lct=share * (1 - t))
        assert ding(data) <= df(data)


class TestJNA:

    def test_formula(self):
        data = anti_adjoint_data(2, 9, -3, 0, L_mu_pullback=2)
        assert jna(data) == Fraction(1, 3)

    def test_negative_is_inconsistent(self):
        data = anti_adjoint_data(2, 9, 30, 0, L_mu_pullback=0)
        with pytest.raises(InconsistentDataError, match="inconsistent intersection data"):
            jna(data)


class TestFibreLct:

    def test_reduced_invariant_fibre(self):
        t = Fraction(1, 3)
        assert fibre_lct(t, [vertical(1)]) == 1 - t

    def test_non_reduced_fibre(self):
        assert fibre_lct(Fraction(1, 2), [vertical(2), vertical(1)]) == Fraction(1, 4)

    def test_with_boundary(self):
        # (A - w(B)) / w(X_0) = (1 - 1/4) / 1
        assert fibre_lct(0, [vertical(1, order_B=Fraction(1, 4))]) == Fraction(3, 4)

    def test_transverse_component(self):
        component = FibreComponent(DiscrepancyData("exc", 1, 0, 1), 0, 2)
        # A = (1-t) * 2 + t * 1 at t = 1/2 is 3/2
        assert fibre_lct(Fraction(1, 2), [component]) == Fraction(3, 4)

    def test_components_off_the_fibre_are_skipped(self):
        assert fibre_lct(0, [vertical(0, order_B=1), vertical(1)]) == 1

    def test_needs_a_fibre_component(self):
        with pytest.raises(ValueError, match="central fibre"):
            fibre_lct(0, [vertical(0)])

    def test_weakly_special_ding_matches_df(self):
        t = Fraction(1, 2)
        data = anti_adjoint_data(2, 9, -3, t, lct=fibre_lct(t, [vertical(1)]))
        assert ding(data) == df(data) == Fraction(1, 9)


class TestVerdict:

    def test_uniform_checks(self):
        data = anti_adjoint_data(2, 9, -3, Fraction(1, 2), lct=Fraction(1, 2), L_mu_pullback=0)
        verdict = stability_verdict(data, Fraction(1, 2))
        assert verdict.df_nonnegative and verdict.ding_nonnegative
        assert verdict.df_uniform and verdict.ding_uniform

    def test_without_delta_or_lct(self):
        data = anti_adjoint_data(2, 9, 3, 0)
        verdict = stability_verdict(data)
        assert not verdict.df_nonnegative
        assert verdict.ding_nonnegative is None
        assert verdict.df_uniform is None and verdict.ding_uniform is None

    @given(volumes, rationals, parameters)
    @settings(max_examples=200, deadline=None)
    def test_uniform_implies_sign(self, V, Lbar_pow, t):
        data = anti_adjoint_data(2, V, Lbar_pow, t, L_mu_pullback=max(Lbar_pow, 0))
        assume(jna(data) >= 0)
        verdict = stability_verdict(data, Fraction(1, 10))
        if verdict.df_uniform:
            assert verdict.df_nonnegative


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
