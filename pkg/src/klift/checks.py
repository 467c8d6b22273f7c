"""
Named structural checks evaluated at sample points of T*M.

Each check returns one nonnegative residual per point; ``run_suite`` compares
the worst residual against the tolerance named by ``tolerance_key``:

- curvature_identity: base curvature against the space-form formula
- almost_complex: J^2 = -I
- acs_identities: the two product identities of the almost complex coefficients
- integrability_identities: identities satisfied by the integrable b-coefficients
- nijenhuis: N_J by five-point central differences
- hermitian: G(JX, JY) = G(X, Y)
- d_omega: d Omega by five-point central differences
- d_omega_closed_form: numerical d Omega against its closed form
- nabla_j: covariant derivative of J for the Levi-Civita connection of G
"""

from __future__ import annotations

from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict

from klift.bundle_calculus import (
    ChartPoint,
    covariant_derivative_J,
    d_omega_closed_form,
    d_omega_numeric,
    hermitian_residual,
    nijenhuis,
    vertical_bracket_residual,
)
from klift.lift_algebra import integrability_consistency, integrable_jet
from klift.space_forms import curvature_identity_residual
from klift.structure import NaturalLiftStructure

# differential checks use the five-point stencil
STENCIL_ORDER = 4


class StructureCheck(BaseModel):
    """Base class for a pointwise check."""

    model_config = ConfigDict(frozen=True)

    name: str
    description: str
    tolerance_key: str

    def applies(self, structure: NaturalLiftStructure) -> bool:
        return True

    def run(self, structure: NaturalLiftStructure, pt: ChartPoint, step: float) -> float:
        """Residual of this check at ``pt``."""
        return float(self._run(structure, pt, step))

    def _run(self, structure: NaturalLiftStructure, pt: ChartPoint, step: float) -> float:
        raise NotImplementedError


class CurvatureIdentityCheck(StructureCheck):
    name: str = "curvature_identity"
    description: str = "Curvature of the base equals c(delta^h_i g_kj - delta^h_j g_ki)."
    tolerance_key: str = "curvature"

    def _run(self, structure, pt, step):
        return curvature_identity_residual(structure.sf, pt.q)


class AlmostComplexCheck(StructureCheck):
    name: str = "almost_complex"
    description: str = "J squares to minus the identity, relative to max(1, |J|^2)."
    tolerance_key: str = "algebraic"

    def _run(self, structure, pt, step):
        J = structure.at(pt).J.components
        scale = max(1.0, float(np.max(np.abs(J))) ** 2)
        return np.max(np.abs(J @ J + np.eye(J.shape[0]))) / scale


class AcsIdentitiesCheck(StructureCheck):
    name: str = "acs_identities"
    description: str = "a1 a2 = 1 + a3^2 and its radial counterpart (relative)."
    tolerance_key: str = "algebraic"

    def _run(self, structure, pt, step):
        return max(structure.at(pt).lift.identity_residuals())


class IntegrabilityIdentitiesCheck(StructureCheck):
    name: str = "integrability_identities"
    description: str = "Derivative identities and vertical bracket condition of the integrable family."
    tolerance_key: str = "identities"

    def applies(self, structure):
        return structure.integrable_mode

    def _run(self, structure, pt, step):
        ps = structure.at(pt)
        t = ps.lift.t
        proof = integrability_consistency(
            structure.a1, structure.a3, structure.sf.c, t,
            b1_shift=structure.b1_shift, b3_shift=structure.b3_shift,
        )
        jet = integrable_jet(structure.a1, structure.a3, structure.sf.c, t)
        vertical = vertical_bracket_residual(structure.sf, pt, ps.lift, jet.a2p, jet.a3p)
        return max(proof.max_applicable(), vertical)


class NijenhuisCheck(StructureCheck):
    name: str = "nijenhuis"
    description: str = "Nijenhuis tensor of J by five-point central differences."
    tolerance_key: str = "finite_difference"

    def _run(self, structure, pt, step):
        return np.max(np.abs(nijenhuis(structure.sf, structure.acs_field, pt, step, STENCIL_ORDER)))


class HermitianCheck(StructureCheck):
    name: str = "hermitian"
    description: str = "J^T G J - G, relative to max(1, |J|^2 |G|)."
    tolerance_key: str = "algebraic"

    def _run(self, structure, pt, step):
        ps = structure.at(pt)
        # J^T G J carries |J|^2 |G| worth of rounding
        scale = max(1.0, float(np.max(np.abs(ps.J.components))) ** 2 * float(np.max(np.abs(ps.G.components))))
        return hermitian_residual(ps.J, ps.G) / scale


class DOmegaCheck(StructureCheck):
    name: str = "d_omega"
    description: str = "Exterior derivative of Omega by five-point central differences."
    tolerance_key: str = "d_omega"

    def _run(self, structure, pt, step):
        return np.max(np.abs(d_omega_numeric(structure.sf, structure.omega_field, pt, step, STENCIL_ORDER)))


class DOmegaClosedFormCheck(StructureCheck):
    name: str = "d_omega_closed_form"
    description: str = "Numerical d Omega against the closed form with factor (lambda' - mu)."
    tolerance_key: str = "d_omega"

    def _run(self, structure, pt, step):
        t = structure.at(pt).lift.t
        numeric = d_omega_numeric(structure.sf, structure.omega_field, pt, step, STENCIL_ORDER)
        closed = d_omega_closed_form(structure.sf, pt, structure.lambda_jet(t), structure.mu(t))
        return np.max(np.abs(numeric - closed))


class NablaJCheck(StructureCheck):
    name: str = "nabla_j"
    description: str = "Covariant derivative of J for the Levi-Civita connection of G."
    tolerance_key: str = "nabla_j"

    def _run(self, structure, pt, step):
        return covariant_derivative_J(structure.sf, structure.acs_field, structure.metric_field, pt, step)


def get_default_checks(include_nabla_j: bool = True) -> List[StructureCheck]:
    """
    Get all structural checks in report order.

    Returns:
        List of check instances
    """
    checks: List[StructureCheck] = [
        CurvatureIdentityCheck(),
        AlmostComplexCheck(),
        AcsIdentitiesCheck(),
        IntegrabilityIdentitiesCheck(),
        NijenhuisCheck(),
        HermitianCheck(),
        DOmegaCheck(),
        DOmegaClosedFormCheck(),
    ]
    if include_nabla_j:
        checks.append(NablaJCheck())
    return checks
