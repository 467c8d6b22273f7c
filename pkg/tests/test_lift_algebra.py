"""
Tests for the pointwise coefficient algebra.
"""
import dataclasses

import numpy as np
import pytest

from klift.errors import (
    NotPositiveDefinite,
    PositivityViolation,
    ProportionalityDomain,
    SingularDenominator,
)
from klift.lift_algebra import (
    complete_acs,
    diagonal_b,
    hermitian_d_system_residual,
    hermitian_system_residual,
    integrability_consistency,
    integrable_b,
    integrable_coefficients,
    integrable_denominator,
    kahler_mu,
    lift_coefficients_explicit,
    metric_coefficients,
    vertical_condition_residual,
)
from klift.scalar_curves import constant, exponential, poly


class TestCompleteAcs:
    """Test completion of (a1, a3, b1, b3) to an almost complex coefficient set."""

    def test_canonical(self):
        lc = complete_acs(1.0, 0.0, 0.0, 0.0, 0.7)
        assert (lc.a2, lc.b2, lc.a4, lc.b4) == (1.0, 0.0, -0.0, -0.0)

    def test_substitution(self):
        lc = complete_acs(2.0, 1.0, 0.0, 0.0, 1.0)
        assert lc.a2 == 1.0
        assert lc.b2 == 0.0
        assert lc.a4 == -1.0

    def test_radial_identity(self):
        lc = complete_acs(1.0, 0.0, 1.0, 0.0, 0.5)
        assert lc.a2 == 1.0
        assert lc.b2 == -0.5
        A1, A2, A3 = lc.radial
        assert A1 * A2 == pytest.approx(1.0 + A3**2)

    def test_random_draws_satisfy_identities(self, rng):
        for _ in range(1000):
            a1 = rng.uniform(0.1, 5.0)
            a3 = rng.uniform(-3.0, 3.0)
            b3 = rng.uniform(-3.0, 3.0)
            t = rng.uniform(0.01, 4.0)
            # choose b1 through a target a1 + 2t b1 in (0.1, 5)
            b1 = (rng.uniform(0.1, 5.0) - a1) / (2.0 * t)
            lc = complete_acs(a1, a3, b1, b3, t)
            assert max(lc.identity_residuals()) <= 1e-12
            assert lc.a4 == -lc.a3 and lc.b4 == -lc.b3

    def test_positivity(self):
        with pytest.raises(PositivityViolation):
            complete_acs(0.0, 0.0, 0.0, 0.0, 1.0)
        with pytest.raises(PositivityViolation):
            complete_acs(1.0, 0.0, -1.0, 0.0, 0.5)


class TestIntegrableB:
    """Test the b-coefficients of integrable structures."""

    def test_canonical_flat(self):
        assert integrable_b(constant(1.0), constant(0.0), 0.0, 0.8) == (0.0, 0.0, 0.0)

    def test_flat_linear_at_zero(self):
        b1, b2, b3 = integrable_b(poly(1.0, 1.0), constant(0.0), 0.0, 0.0)
        assert b1 == pytest.approx(1.0)
        assert b2 == pytest.approx(-1.0)
        assert b3 == 0.0

    def test_flat_linear_at_half(self):
        b1, b2, b3 = integrable_b(poly(1.0, 1.0), constant(0.0), 0.0, 0.5)
        assert b1 == pytest.approx(3.0)
        assert b2 == pytest.approx(-1.0 / 2.25)
        assert b3 == 0.0

    def test_sphere_reference_values(self):
        a1, a3 = poly(1.0, 1.0), poly(0.0, 1.0)
        assert integrable_denominator(a1, a3, 1.0, 0.3) == pytest.approx(0.2629586, rel=1e-6)
        b1, b2, b3 = integrable_b(a1, a3, 1.0, 0.3)
        assert b1 == pytest.approx(3.227634, rel=1e-6)
        assert b2 == pytest.approx(4.115988, rel=1e-6)
        assert b3 == pytest.approx(4.692616, rel=1e-6)

    def test_singular_denominator(self):
        # D = 1 - t for a1 = 1 + t over flat space
        with pytest.raises(SingularDenominator) as info:
            integrable_b(poly(1.0, 1.0), constant(0.0), 0.0, 1.0)
        assert info.value.denominator == 0.0

    @pytest.mark.parametrize(
        "a1,a3,c",
        [
            (poly(1.0, 1.0), poly(0.0, 1.0), 1.0),
            (exponential(1.0, 0.3), poly(0.2, -0.5), -1.0),
            (poly(2.0, 0.5, 0.1), exponential(0.5, 0.2), 0.5),
            (constant(1.5), constant(0.7), 0.0),
        ],
    )
    def test_b2_agrees_with_completion(self, a1, a3, c):
        for t in np.linspace(0.0, 0.3, 13):
            if abs(integrable_denominator(a1, a3, c, t)) <= 1e-6:
                continue
            b1, b2, b3 = integrable_b(a1, a3, c, t)
            lc = complete_acs(a1.jet(t).value, a3.jet(t).value, b1, b3, t)
            assert lc.b2 == pytest.approx(b2, rel=1e-10, abs=1e-12)

    @pytest.mark.parametrize("a1", [constant(1.0), poly(1.0, 1.0), exponential(1.0, 0.3)])
    @pytest.mark.parametrize("c", [-1.0, 0.0, 1.0])
    def test_diagonal_case_matches_closed_form(self, a1, c):
        for t in np.linspace(0.0, 0.45, 40):
            general = integrable_b(a1, constant(0.0), c, t)
            diagonal = diagonal_b(a1, c, t)
            assert general == pytest.approx(diagonal, rel=1e-12, abs=1e-12)

    def test_integrable_coefficients_are_almost_complex(self):
        lc = integrable_coefficients(poly(1.0, 1.0), poly(0.0, 1.0), 1.0, 0.2)
        assert max(lc.identity_residuals()) <= 1e-12
        assert lc.b2 == pytest.approx(integrable_b(poly(1.0, 1.0), poly(0.0, 1.0), 1.0, 0.2)[1], rel=1e-10)


class TestIntegrabilityConsistency:
    """Test the identities satisfied by the integrable family."""

    def test_canonical_flat(self):
        res = integrability_consistency(constant(1.0), constant(0.0), 0.0, 1.0)
        assert res.a2_ratio is None
        assert res.a1_derivative == 0.0
        assert res.a3_derivative == 0.0
        assert res.a2_derivative == 0.0

    def test_sphere_family(self):
        res = integrability_consistency(poly(1.0, 1.0), poly(0.0, 1.0), 1.0, 0.3)
        assert res.a2_ratio is not None
        assert res.max_applicable() <= 1e-10

    @pytest.mark.parametrize("t", [0.0, 0.05, 0.1, 0.2, 0.3])
    def test_other_families(self, t):
        res = integrability_consistency(exponential(1.0, 0.3), poly(0.2, -0.5), -1.0, t)
        assert res.max_applicable() <= 1e-10

    def test_perturbed_b1_detected(self):
        res = integrability_consistency(constant(1.0), constant(0.0), 1.0, 0.2, b1_shift=0.05)
        assert res.max_applicable() > 1e-3

    @pytest.mark.parametrize("t", [0.0, 0.1, 0.3])
    def test_vertical_condition(self, t):
        assert vertical_condition_residual(poly(1.0, 1.0), poly(0.0, 1.0), 1.0, t) <= 1e-10


class TestLiftCoefficientsExplicit:
    """Test the five-coefficient almost Kahler family."""

    def test_matches_completion(self):
        lc = lift_coefficients_explicit(poly(1.0, 1.0), constant(0.5), constant(0.2), poly(0.0, 1.0), 0.4)
        expected = complete_acs(1.4, 0.5, 0.2, 0.4, 0.4)
        assert dataclasses.astuple(lc) == pytest.approx(dataclasses.astuple(expected), rel=1e-14)

    def test_shift_applied(self):
        lc = lift_coefficients_explicit(constant(1.0), constant(0.0), constant(0.0), constant(0.0), 0.5, b1_shift=0.1)
        assert lc.b1 == pytest.approx(0.1)


class TestMetricCoefficients:
    """Test Hermitian metric coefficients by proportionality."""

    def test_canonical(self):
        mc = metric_coefficients(complete_acs(1.0, 0.0, 0.0, 0.0, 0.3), 1.0, 0.0)
        assert (mc.c1, mc.c2, mc.c3) == (1.0, 1.0, 0.0)
        assert (mc.d1, mc.d2, mc.d3) == (0.0, 0.0, 0.0)

    def test_substitution(self):
        lc = complete_acs(2.0, 1.0, 0.0, 0.0, 1.0)
        mc = metric_coefficients(lc, 3.0, 0.5)
        assert (mc.c1, mc.c2, mc.c3) == (6.0, 3.0, 3.0)
        assert (mc.d1, mc.d2, mc.d3) == (1.0, 0.5, 0.5)

    def test_radial_proportionality(self):
        lc = integrable_coefficients(poly(1.0, 1.0), poly(0.0, 1.0), 1.0, 0.15)
        mc = metric_coefficients(lc, 1.15, 1.0)
        for C, A in zip(mc.radial, lc.radial):
            assert C == pytest.approx((1.15 + 2 * 0.15 * 1.0) * A, rel=1e-12)
        assert min(mc.positivity_margins()) > 0

    def test_domain(self):
        lc = complete_acs(2.0, 1.0, 0.0, 0.0, 1.0)
        with pytest.raises(ProportionalityDomain):
            metric_coefficients(lc, 1.0, -0.6)
        with pytest.raises(ProportionalityDomain):
            metric_coefficients(lc, 0.0, 1.0)

    def test_hermitian_system(self):
        lc = complete_acs(2.0, 1.0, 0.3, -0.2, 0.4)
        assert hermitian_system_residual(lc, 2.5 * lc.a1, 2.5 * lc.a2, 2.5 * lc.a3) <= 1e-12
        assert hermitian_system_residual(lc, 2.0, 1.0, 1.0) == pytest.approx(0.0, abs=1e-12)
        assert hermitian_system_residual(lc, 4.0, 2.0, 2.0) == pytest.approx(0.0, abs=1e-12)

    def test_hermitian_system_detects_non_proportional(self):
        lc = complete_acs(1.0, 0.0, 0.0, 0.0, 0.0)
        assert hermitian_system_residual(lc, 1.1, 1.0, 0.0) == pytest.approx(0.1)

    def test_hermitian_d_system(self):
        lc = integrable_coefficients(poly(1.0, 1.0), poly(0.0, 1.0), 1.0, 0.15)
        mc = metric_coefficients(lc, 1.15, 1.0)
        assert hermitian_d_system_residual(lc, mc) <= 1e-12
        broken = dataclasses.replace(mc, d1=mc.d1 + 0.2)
        assert hermitian_d_system_residual(lc, broken) > 1e-3


class TestKahlerMu:
    """Test mu = lambda'."""

    def test_constant_lambda(self):
        assert kahler_mu(constant(1.0), 0.7) == 0.0

    def test_linear_lambda(self):
        assert kahler_mu(poly(1.0, 1.0), 2.0) == 1.0

    def test_exponential_lambda(self):
        assert kahler_mu(exponential(1.0, 0.3), 1.0) == pytest.approx(0.404958, rel=1e-6)

    def test_domain(self):
        with pytest.raises(ProportionalityDomain):
            kahler_mu(poly(1.0, -1.0), 0.4)


def test_metric_positivity_error_is_distinct():
    """Positivity of the metric has its own error type."""
    assert not issubclass(NotPositiveDefinite, ProportionalityDomain)
