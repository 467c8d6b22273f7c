"""
Coefficient functions of the energy density t.

Every coefficient of a natural lift (a1, a3, lambda and the optional explicit
b1, b3) is a smooth function of t >= 0. The families supported here are closed
under differentiation, so values and first/second derivatives are exact:

- poly:  sum_k coeffs[k] * t**k
- exp:   A * exp(k * t)
- const: value
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Annotated, Literal, Union

import numpy as np
from numpy.polynomial import polynomial as P
from pydantic import BaseModel, ConfigDict, Field, FiniteFloat

from klift.errors import NonFiniteInput


@dataclass(frozen=True)
class CurveJet:
    """Value and first/second derivatives of a curve at one t."""

    value: float
    d1: float
    d2: float


def _require_t(t: float) -> float:
    t = float(t)
    if not math.isfinite(t) or t < 0.0:
        raise NonFiniteInput(f"energy density must be a finite nonnegative real (got {t})")
    return t


class PolynomialCurve(BaseModel):
    """Polynomial in t with coefficients in ascending degree."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    family: Literal["poly"] = "poly"
    coeffs: list[FiniteFloat] = Field(min_length=1, description="Coefficients in ascending degree")

    def jet(self, t: float) -> CurveJet:
        c = np.asarray(self.coeffs, dtype=float)
        c1 = P.polyder(c)
        c2 = P.polyder(c, 2)
        return CurveJet(float(P.polyval(t, c)), float(P.polyval(t, c1)), float(P.polyval(t, c2)))


class ExponentialCurve(BaseModel):
    """A * exp(k * t)."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    family: Literal["exp"] = "exp"
    A: FiniteFloat = Field(description="Amplitude")
    k: FiniteFloat = Field(description="Rate")

    def jet(self, t: float) -> CurveJet:
        try:
            v = self.A * math.exp(self.k * t)
        except OverflowError as e:
            raise NonFiniteInput(f"exp curve overflows at t={t}") from e
        return CurveJet(v, self.k * v, self.k * self.k * v)


class ConstantCurve(BaseModel):
    """Constant function of t."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    family: Literal["const"] = "const"
    value: FiniteFloat = Field(description="Constant value")

    def jet(self, t: float) -> CurveJet:
        return CurveJet(self.value, 0.0, 0.0)


ScalarCurve = Annotated[
    Union[PolynomialCurve, ExponentialCurve, ConstantCurve],
    Field(discriminator="family"),
]


def eval_jet(curve: ScalarCurve, t: float) -> CurveJet:
    """Evaluate value, first and second derivative of ``curve`` at ``t``."""
    t = _require_t(t)
    jet = curve.jet(t)
    if not (math.isfinite(jet.value) and math.isfinite(jet.d1) and math.isfinite(jet.d2)):
        raise NonFiniteInput(f"curve {curve.family} overflows at t={t}")
    return jet


def check_derivative_consistency(curve: ScalarCurve, t: float, h: float) -> float:
    """
    Compare the analytic derivatives against central differences.

    The first derivative is checked against central differences of the value,
    the second against central differences of the (already checked) first
    derivative. Both errors are normalized by ``1 + |value|``.

    Args:
        curve: curve under test
        t: evaluation point, must satisfy ``t >= h``
        h: finite-difference step, ``h > 0``

    Returns:
        The larger of the two normalized errors.
    """
    if not (h > 0.0 and t >= h):
        raise NonFiniteInput(f"need t >= h > 0 (got t={t}, h={h})")
    centre = eval_jet(curve, t)
    ahead = eval_jet(curve, t + h)
    behind = eval_jet(curve, t - h)

    d1_fd = (ahead.value - behind.value) / (2.0 * h)
    d2_fd = (ahead.d1 - behind.d1) / (2.0 * h)
    err = max(abs(centre.d1 - d1_fd), abs(centre.d2 - d2_fd))
    return err / (1.0 + abs(centre.value))


def constant(value: float) -> ConstantCurve:
    return ConstantCurve(value=value)


def poly(*coeffs: float) -> PolynomialCurve:
    return PolynomialCurve(coeffs=list(coeffs))


def exponential(A: float, k: float) -> ExponentialCurve:
    return ExponentialCurve(A=A, k=k)
