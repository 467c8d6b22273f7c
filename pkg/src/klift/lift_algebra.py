"""
Pointwise coefficient algebra of general natural lifts on T*M.

An almost complex structure J of natural lift type is described by eight
functions a1..a4, b1..b4 of the energy density t; a Riemannian metric G of the
same type by c1..c3, d1..d3. This module completes partial coefficient sets,
computes the b-coefficients that make J integrable over a space form, builds
Hermitian metric coefficients by proportionality, and evaluates the algebraic
identities that relate all of them.

Everything here is scalar algebra at a single t; tensors live in
``klift.bundle_calculus``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from klift.errors import (
    NonFiniteInput,
    NotPositiveDefinite,
    PositivityViolation,
    ProportionalityDomain,
    SingularDenominator,
)
from klift.scalar_curves import ScalarCurve, eval_jet

# |D| at or below this raises SingularDenominator
DENOMINATOR_THRESHOLD = 1e-8
# |a3 + t b3| at or below this makes the a2' identity not applicable
DEGENERATE_A3_THRESHOLD = 1e-8


@dataclass(frozen=True)
class LiftCoefficients:
    """Values of a1..a4, b1..b4 at the energy density t."""

    a1: float
    a2: float
    a3: float
    a4: float
    b1: float
    b2: float
    b3: float
    b4: float
    t: float

    @property
    def radial(self) -> tuple[float, float, float]:
        """(a1 + 2t b1, a2 + 2t b2, a3 + 2t b3)."""
        s = 2.0 * self.t
        return self.a1 + s * self.b1, self.a2 + s * self.b2, self.a3 + s * self.b3

    def identity_residuals(self) -> tuple[float, float]:
        """Relative residuals of a1 a2 = 1 + a3^2 and its radial counterpart."""
        A1, A2, A3 = self.radial
        rhs0 = 1.0 + self.a3**2
        rhs1 = 1.0 + A3**2
        return abs(self.a1 * self.a2 - rhs0) / rhs0, abs(A1 * A2 - rhs1) / rhs1


@dataclass(frozen=True)
class MetricCoefficients:
    """Values of c1..c3, d1..d3 and the proportionality factors at t."""

    c1: float
    c2: float
    c3: float
    d1: float
    d2: float
    d3: float
    lam: float
    mu: float
    t: float

    @property
    def radial(self) -> tuple[float, float, float]:
        s = 2.0 * self.t
        return self.c1 + s * self.d1, self.c2 + s * self.d2, self.c3 + s * self.d3

    def positivity_margins(self) -> tuple[float, float, float]:
        C1, C2, C3 = self.radial
        return C1, C2, C1 * C2 - C3 * C3


@dataclass(frozen=True)
class IntegrableJet:
    """Inputs and outputs of the integrable b-coefficient formulas at one t."""

    t: float
    c: float
    a1: float
    a1p: float
    a2: float
    a2p: float
    a3: float
    a3p: float
    denominator: float
    b1: float
    b2: float
    b3: float


@dataclass(frozen=True)
class IntegrabilityResiduals:
    """Absolute residuals of the identities used to derive the integrable family."""

    a2_ratio: Optional[float]
    a1_derivative: float
    a3_derivative: float
    a2_derivative: float
    product_rule: float

    def as_tuple(self) -> tuple[Optional[float], float, float, float]:
        return self.a2_ratio, self.a1_derivative, self.a3_derivative, self.a2_derivative

    def max_applicable(self) -> float:
        values = [self.a1_derivative, self.a3_derivative, self.a2_derivative, self.product_rule]
        if self.a2_ratio is not None:
            values.append(self.a2_ratio)
        return max(values)


def _finite(**values: float) -> None:
    for name, v in values.items():
        if not math.isfinite(v):
            raise NonFiniteInput(f"{name} must be finite (got {v})")


def complete_acs(a1: float, a3: float, b1: float, b3: float, t: float) -> LiftCoefficients:
    """
    Complete (a1, a3, b1, b3) to a full almost complex coefficient set.

    a2 and b2 are solved from a1 a2 = 1 + a3^2 and
    (a1 + 2t b1)(a2 + 2t b2) = 1 + (a3 + 2t b3)^2; a4 = -a3, b4 = -b3.
    """
    _finite(a1=a1, a3=a3, b1=b1, b3=b3, t=t)
    if t < 0.0:
        raise NonFiniteInput(f"energy density must be nonnegative (got {t})")
    if a1 <= 0.0:
        raise PositivityViolation(f"a1 must be positive (got {a1})")
    A1 = a1 + 2.0 * t * b1
    if A1 <= 0.0:
        raise PositivityViolation(f"a1 + 2t b1 must be positive (got {A1} at t={t})")

    a2 = (1.0 + a3 * a3) / a1
    b2 = (2.0 * a3 * b3 - a2 * b1 + 2.0 * t * b3 * b3) / A1
    return LiftCoefficients(a1=a1, a2=a2, a3=a3, a4=-a3, b1=b1, b2=b2, b3=b3, b4=-b3, t=t)


def integrable_jet(
    a1: ScalarCurve,
    a3: ScalarCurve,
    c: float,
    t: float,
    threshold: float = DENOMINATOR_THRESHOLD,
) -> IntegrableJet:
    """Evaluate the integrable b-coefficients together with their inputs."""
    j1 = eval_jet(a1, t)
    j3 = eval_jet(a3, t)
    if j1.value <= 0.0:
        raise PositivityViolation(f"a1 must be positive (got {j1.value} at t={t})")

    a1v, a1p = j1.value, j1.d1
    a3v, a3p = j3.value, j3.d1
    a2 = (1.0 + a3v * a3v) / a1v
    a2p = (2.0 * a3v * a3p * a1v - (1.0 + a3v * a3v) * a1p) / (a1v * a1v)

    D = a1v - 2.0 * t * a1p - 2.0 * c * t * a2 - 4.0 * c * t * t * a2p
    if not abs(D) > threshold:
        raise SingularDenominator(f"integrability denominator D = {D:.3e} at t={t}", denominator=D)

    b1 = (2.0 * c * c * t * a2 * a2 + 2.0 * c * t * a1v * a2p + a1v * a1p - c + 3.0 * c * a3v * a3v) / D
    b2 = (
        2.0 * t * a3p * a3p
        - 2.0 * t * a1p * a2p
        + c * a2 * a2
        + 2.0 * c * t * a2 * a2p
        + a1v * a2p
    ) / D
    b3 = (a1v * a3p + 2.0 * c * a2 * a3v + 4.0 * c * t * a2p * a3v - 2.0 * c * t * a2 * a3p) / D

    return IntegrableJet(
        t=t, c=c, a1=a1v, a1p=a1p, a2=a2, a2p=a2p, a3=a3v, a3p=a3p,
        denominator=D, b1=b1, b2=b2, b3=b3,
    )


def integrable_b(
    a1: ScalarCurve,
    a3: ScalarCurve,
    c: float,
    t: float,
    threshold: float = DENOMINATOR_THRESHOLD,
) -> tuple[float, float, float]:
    """(b1, b2, b3) making J integrable over a space form of curvature c."""
    jet = integrable_jet(a1, a3, c, t, threshold)
    return jet.b1, jet.b2, jet.b3


def integrable_denominator(a1: ScalarCurve, a3: ScalarCurve, c: float, t: float) -> float:
    """D = a1 - 2t a1' - 2ct a2 - 4ct^2 a2', without raising on D = 0."""
    return integrable_jet(a1, a3, c, t, threshold=-1.0).denominator


def integrable_coefficients(
    a1: ScalarCurve,
    a3: ScalarCurve,
    c: float,
    t: float,
    threshold: float = DENOMINATOR_THRESHOLD,
    b1_shift: float = 0.0,
    b3_shift: float = 0.0,
) -> LiftCoefficients:
    """
    Full coefficient set of the integrable family at t.

    b2 is taken from the almost complex completion so that J^2 = -I holds to
    rounding; it agrees with the integrable b2 whenever the shifts are zero.
    """
    jet = integrable_jet(a1, a3, c, t, threshold)
    return complete_acs(jet.a1, jet.a3, jet.b1 + b1_shift, jet.b3 + b3_shift, t)


def lift_coefficients_explicit(
    a1: ScalarCurve,
    a3: ScalarCurve,
    b1: ScalarCurve,
    b3: ScalarCurve,
    t: float,
    b1_shift: float = 0.0,
    b3_shift: float = 0.0,
) -> LiftCoefficients:
    """Coefficient set from four freely chosen curves (the almost Kahler family)."""
    return complete_acs(
        eval_jet(a1, t).value,
        eval_jet(a3, t).value,
        eval_jet(b1, t).value + b1_shift,
        eval_jet(b3, t).value + b3_shift,
        t,
    )


def diagonal_b(
    a1: ScalarCurve, c: float, t: float, threshold: float = DENOMINATOR_THRESHOLD
) -> tuple[float, float, float]:
    """Integrable b-coefficients for a3 = 0 in their reduced closed form."""
    j1 = eval_jet(a1, t)
    a1v, a1p = j1.value, j1.d1
    den1 = a1v - 2.0 * t * a1p
    den2 = a1v * (a1v * a1v - 2.0 * c * t)
    if not (abs(den1) > threshold and abs(den2) > threshold):
        raise SingularDenominator(f"diagonal denominators vanish at t={t}", denominator=min(abs(den1), abs(den2)))
    return (a1v * a1p - c) / den1, (c - a1v * a1p) / den2, 0.0


def integrability_consistency(
    a1: ScalarCurve,
    a3: ScalarCurve,
    c: float,
    t: float,
    b1_shift: float = 0.0,
    b3_shift: float = 0.0,
) -> IntegrabilityResiduals:
    """
    Residuals of the identities the integrable b-coefficients must satisfy.

    a2' and a3' relations come from the vanishing of N_J on pairs of vertical
    and horizontal fields; ``product_rule`` is the t-derivative of a1 a2 = 1 + a3^2.
    The a2' relation divides by a3 + t b3 and is reported as None when that
    quantity vanishes.
    """
    jet = integrable_jet(a1, a3, c, t)
    lc = complete_acs(jet.a1, jet.a3, jet.b1 + b1_shift, jet.b3 + b3_shift, t)
    a1v, a2, a3v = lc.a1, lc.a2, lc.a3
    b1, b2, b3 = lc.b1, lc.b2, lc.b3
    a1p, a2p, a3p = jet.a1p, jet.a2p, jet.a3p
    A1 = a1v + 2.0 * t * b1

    s = a3v + t * b3
    a2_ratio_res: Optional[float] = None
    if abs(s) > DEGENERATE_A3_THRESHOLD:
        a2_ratio_res = abs(a2p - (a2 * a3p + 2.0 * a3v * b2 - a2 * b3) / (2.0 * s))

    return IntegrabilityResiduals(
        a2_ratio=a2_ratio_res,
        a1_derivative=abs(a1p - (a1v * b1 + c * (1.0 - 3.0 * a3v * a3v - 4.0 * t * a3v * b3)) / A1),
        a3_derivative=abs(a3p - (a1v * b3 - 2.0 * c * a2 * (a3v + t * b3)) / A1),
        a2_derivative=abs(a2p - (2.0 * a3v * b3 - a2 * b1 - c * a2 * a2) / A1),
        product_rule=abs(a1v * a2p + a1p * a2 - 2.0 * a3v * a3p),
    )


def vertical_condition_residual(a1: ScalarCurve, a3: ScalarCurve, c: float, t: float) -> float:
    """
    Scalar factor of the vertical part of N_J(d/dp_i, d/dp_j) over a space form.

    Substituting R^h_kij = c(delta^h_i g_kj - delta^h_j g_ki) collapses the
    component to (delta^h_j p_i - delta^h_i p_j) times
    a1 a2' - a1 b2 + 2t a3' b3 + c a2^2 + 2ct a2 b2.
    """
    jet = integrable_jet(a1, a3, c, t)
    return abs(
        jet.a1 * jet.a2p
        - jet.a1 * jet.b2
        + 2.0 * t * jet.a3p * jet.b3
        + c * jet.a2 * jet.a2
        + 2.0 * c * t * jet.a2 * jet.b2
    )


def metric_coefficients(lc: LiftCoefficients, lam: float, mu: float) -> MetricCoefficients:
    """
    Hermitian metric coefficients by proportionality.

    c_i = lam a_i and d_i = lam b_i + mu (a_i + 2t b_i), so that
    c_i + 2t d_i = (lam + 2t mu)(a_i + 2t b_i).
    """
    _finite(lam=lam, mu=mu)
    t = lc.t
    if lam <= 0.0 or lam + 2.0 * t * mu <= 0.0:
        raise ProportionalityDomain(
            f"need lambda > 0 and lambda + 2t mu > 0 (lambda={lam}, mu={mu}, t={t})"
        )
    A1, A2, A3 = lc.radial
    mc = MetricCoefficients(
        c1=lam * lc.a1,
        c2=lam * lc.a2,
        c3=lam * lc.a3,
        d1=lam * lc.b1 + mu * A1,
        d2=lam * lc.b2 + mu * A2,
        d3=lam * lc.b3 + mu * A3,
        lam=lam,
        mu=mu,
        t=t,
    )
    if min(mc.positivity_margins()) <= 0.0:
        raise NotPositiveDefinite(f"metric coefficients fail the positivity conditions at t={t}")
    return mc


def _homogeneous_system(a1: float, a2: float, a3: float, x1: float, x2: float, x3: float) -> float:
    e1 = (a3 * a3 - 1.0) * x1 + a1 * a1 * x2 - 2.0 * a1 * a3 * x3
    e2 = a2 * a2 * x1 + (a3 * a3 - 1.0) * x2 - 2.0 * a2 * a3 * x3
    e3 = a2 * a3 * x1 + a1 * a3 * x2 - 2.0 * a1 * a2 * x3
    return max(abs(e1), abs(e2), abs(e3))


def hermitian_system_residual(lc: LiftCoefficients, c1: float, c2: float, c3: float) -> float:
    """Largest residual of the linear system whose solutions are (c1, c2, c3) ~ (a1, a2, a3)."""
    return _homogeneous_system(lc.a1, lc.a2, lc.a3, c1, c2, c3)


def hermitian_d_system_residual(lc: LiftCoefficients, mc: MetricCoefficients) -> float:
    """Same system for the radial combinations c_i + 2t d_i against a_i + 2t b_i."""
    return _homogeneous_system(*lc.radial, *mc.radial)


def kahler_mu(lam: ScalarCurve, t: float) -> float:
    """The only mu making the fundamental 2-form closed: mu = lambda'(t)."""
    jet = eval_jet(lam, t)
    if jet.value <= 0.0 or jet.value + 2.0 * t * jet.d1 <= 0.0:
        raise ProportionalityDomain(
            f"need lambda > 0 and lambda + 2t lambda' > 0 (got {jet.value}, {jet.d1} at t={t})"
        )
    return jet.d1
