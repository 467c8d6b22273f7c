"""
Pointwise providers of J, G and Omega for a configured natural lift.

``NaturalLiftStructure`` turns a ``RunConfig`` (and optionally one
``Perturbation``) into functions of the chart coordinates z = (q, p) that the
numerical operators in ``klift.bundle_calculus`` can differentiate.
"""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from klift.bundle_calculus import (
    ChartPoint,
    FrameTensor,
    PointGeometry,
    acs_matrix,
    adapted_frame,
    metric_matrix,
    point_geometry,
    to_coordinate_frame,
)
from klift.config import Perturbation, PerturbationName, RunConfig
from klift.errors import KliftError, SingularDenominator
from klift.lift_algebra import (
    LiftCoefficients,
    MetricCoefficients,
    integrable_coefficients,
    integrable_denominator,
    lift_coefficients_explicit,
    metric_coefficients,
)
from klift.scalar_curves import CurveJet, eval_jet

logger = logging.getLogger(__name__)

# sampled points must keep |D| above this
SAMPLING_DENOMINATOR_THRESHOLD = 1e-6


@dataclass(frozen=True)
class PointStructure:
    """Everything assembled at one point of T*M."""

    point: ChartPoint
    geometry: PointGeometry
    lift: LiftCoefficients
    metric: MetricCoefficients
    frame: np.ndarray
    J: FrameTensor
    G: FrameTensor


class NaturalLiftStructure:
    """J, G and Omega of one run configuration, evaluated on demand."""

    def __init__(self, config: RunConfig, perturbation: Optional[Perturbation] = None):
        self.config = config
        self.perturbation = perturbation
        self.sf = config.manifold
        self.a1 = config.coefficients.a1
        self.a3 = config.coefficients.a3
        self.lam = config.metric.lambda_

        self.b1_shift = 0.0
        self.b3_shift = 0.0
        self.c1_scale = 1.0
        self.mu_shift = 0.0
        self.lambda_scale = 1.0
        if perturbation is not None:
            if perturbation.name is PerturbationName.B1:
                self.b1_shift = perturbation.delta
            elif perturbation.name is PerturbationName.B3:
                self.b3_shift = perturbation.delta
            elif perturbation.name is PerturbationName.C1_SCALE:
                self.c1_scale = perturbation.delta
            elif perturbation.name is PerturbationName.MU:
                self.mu_shift = perturbation.delta
            elif perturbation.name is PerturbationName.LAMBDA_SCALE:
                self.lambda_scale = perturbation.delta
            logger.debug(f"Structure perturbed by {perturbation.name.value}={perturbation.delta}")

    @property
    def integrable_mode(self) -> bool:
        return self.config.coefficients.integrable

    def lift_coefficients(self, t: float) -> LiftCoefficients:
        coeffs = self.config.coefficients
        if coeffs.integrable:
            return integrable_coefficients(
                self.a1, self.a3, self.sf.c, t, b1_shift=self.b1_shift, b3_shift=self.b3_shift
            )
        return lift_coefficients_explicit(
            self.a1, self.a3, coeffs.b_mode.b1, coeffs.b_mode.b3, t,
            b1_shift=self.b1_shift, b3_shift=self.b3_shift,
        )

    def denominator(self, t: float) -> Optional[float]:
        """Denominator of the integrable b-coefficients, or None for explicit b curves."""
        if not self.integrable_mode:
            return None
        return integrable_denominator(self.a1, self.a3, self.sf.c, t)

    def lambda_jet(self, t: float) -> CurveJet:
        jet = eval_jet(self.lam, t)
        s = self.lambda_scale
        return CurveJet(s * jet.value, s * jet.d1, s * jet.d2)

    def mu(self, t: float) -> float:
        policy = self.config.metric.mu
        if policy == "kahler":
            # taken from the unscaled lambda
            base = eval_jet(self.lam, t).d1
        else:
            base = eval_jet(policy, t).value
        return base + self.mu_shift

    def metric_coefficients(self, lc: LiftCoefficients) -> MetricCoefficients:
        mc = metric_coefficients(lc, self.lambda_jet(lc.t).value, self.mu(lc.t))
        if self.c1_scale != 1.0:
            mc = dataclasses.replace(mc, c1=self.c1_scale * mc.c1)
        return mc

    def at(self, pt: ChartPoint) -> PointStructure:
        geo = point_geometry(self.sf, pt)
        lc = self.lift_coefficients(geo.t)
        mc = self.metric_coefficients(lc)
        return PointStructure(
            point=pt,
            geometry=geo,
            lift=lc,
            metric=mc,
            frame=adapted_frame(self.sf, pt),
            J=acs_matrix(self.sf, pt, lc),
            G=metric_matrix(self.sf, pt, mc),
        )

    def acs_field(self, z: np.ndarray) -> np.ndarray:
        """Coordinate-frame components of J at z."""
        pt = ChartPoint.from_coords(z)
        geo = point_geometry(self.sf, pt)
        J = acs_matrix(self.sf, pt, self.lift_coefficients(geo.t))
        return to_coordinate_frame(J, adapted_frame(self.sf, pt)).components

    def metric_field(self, z: np.ndarray) -> np.ndarray:
        """Coordinate-frame components of G at z."""
        pt = ChartPoint.from_coords(z)
        geo = point_geometry(self.sf, pt)
        G = metric_matrix(self.sf, pt, self.metric_coefficients(self.lift_coefficients(geo.t)))
        return to_coordinate_frame(G, adapted_frame(self.sf, pt)).components

    def omega_field(self, z: np.ndarray) -> np.ndarray:
        """Coordinate-frame components of Omega(X, Y) = G(X, JY)."""
        return self.metric_field(z) @ self.acs_field(z)

    def admissible(self, pt: ChartPoint) -> bool:
        """Whether every coefficient constraint holds at ``pt`` with sampling margin."""
        try:
            t = point_geometry(self.sf, pt).t
            D = self.denominator(t)
            if D is not None and not abs(D) > SAMPLING_DENOMINATOR_THRESHOLD:
                raise SingularDenominator(f"|D| = {abs(D):.3e} at t={t}", denominator=D)
            self.at(pt)
        except KliftError as e:
            logger.debug(f"Rejected point {pt.to_dict()}: {e}")
            return False
        return True
