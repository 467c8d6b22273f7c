"""
Base manifolds of constant sectional curvature in a conformal chart.

The metric is g_ij = delta_ij / phi(x)**2 with phi = 1 + (c/4)|x|**2, which
covers the sphere (c > 0), euclidean space (c = 0) and the hyperbolic ball
(c < 0, |x| < 2/sqrt(|c|)) with one formula. Christoffel symbols and their
derivatives are computed analytically from f = -log(phi).

Array layouts:
    gamma[k, i, j]       = Gamma^k_ij
    dgamma[l, k, i, j]   = d_l Gamma^k_ij
    riemann[h, k, i, j]  = R^h_kij   (R(d_i, d_j) d_k = R^h_kij d_h)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_serializer, model_validator

from klift.errors import NonFiniteInput, OutsideChart


class SpaceForm(BaseModel):
    """An n-dimensional space form of curvature c."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    n: int = Field(ge=3, description="Dimension of the base manifold (must exceed 2)")
    c: float = Field(allow_inf_nan=False, description="Constant sectional curvature")
    chart_radius: Optional[float] = Field(
        default=None, gt=0, description="Admissible radius of the conformal chart"
    )

    @model_validator(mode="before")
    @classmethod
    def _default_radius(cls, data: Any) -> Any:
        if isinstance(data, dict) and data.get("chart_radius") is None and "c" in data:
            try:
                c = float(data["c"])
            except (TypeError, ValueError):
                # left for field validation to report
                return data
            if math.isfinite(c):
                data = {**data, "chart_radius": 2.0 / math.sqrt(-c) if c < 0 else math.inf}
        return data

    @model_validator(mode="after")
    def _check_radius(self) -> "SpaceForm":
        # same expression as the default, so the default radius is never rejected
        if self.c < 0 and self.chart_radius > 2.0 / math.sqrt(-self.c):
            raise ValueError(
                f"chart_radius {self.chart_radius} exceeds 2/sqrt(|c|) = {2.0 / math.sqrt(-self.c)}"
            )
        return self

    @field_serializer("chart_radius")
    def _serialize_radius(self, v: Optional[float]) -> Optional[float]:
        # an unbounded chart is echoed as null and re-derived on load
        return None if v is None or math.isinf(v) else v


@dataclass(frozen=True)
class BasePointData:
    """Metric quantities at one chart point."""

    x: np.ndarray
    g: np.ndarray
    g_inv: np.ndarray
    gamma: np.ndarray


def _coords(sf: SpaceForm, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (sf.n,):
        raise OutsideChart(f"expected {sf.n} chart coordinates, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise OutsideChart(f"non-finite chart coordinates {x}")
    r = float(np.linalg.norm(x))
    if r >= sf.chart_radius:
        raise OutsideChart(f"|x| = {r:.6g} is outside the chart radius {sf.chart_radius:.6g}")
    return x


def _phi(sf: SpaceForm, x: np.ndarray) -> float:
    return 1.0 + 0.25 * sf.c * float(x @ x)


def _df(sf: SpaceForm, x: np.ndarray) -> np.ndarray:
    # gradient of f = -log(phi)
    return -0.5 * sf.c * x / _phi(sf, x)


def _ddf(sf: SpaceForm, x: np.ndarray) -> np.ndarray:
    phi = _phi(sf, x)
    return -0.5 * sf.c * np.eye(sf.n) / phi + 0.25 * sf.c**2 * np.outer(x, x) / phi**2


def metric(sf: SpaceForm, x) -> np.ndarray:
    """g_ij(x) = delta_ij / (1 + (c/4)|x|^2)^2."""
    x = _coords(sf, x)
    return np.eye(sf.n) / _phi(sf, x) ** 2


def inverse_metric(sf: SpaceForm, x) -> np.ndarray:
    x = _coords(sf, x)
    return np.eye(sf.n) * _phi(sf, x) ** 2


def christoffel(sf: SpaceForm, x) -> np.ndarray:
    """Gamma^k_ij = delta_ki f_j + delta_kj f_i - delta_ij f_k for g = exp(2f) delta."""
    x = _coords(sf, x)
    df = _df(sf, x)
    eye = np.eye(sf.n)
    return (
        np.einsum("ki,j->kij", eye, df)
        + np.einsum("kj,i->kij", eye, df)
        - np.einsum("ij,k->kij", eye, df)
    )


def christoffel_derivative(sf: SpaceForm, x) -> np.ndarray:
    """dgamma[l, k, i, j] = d_l Gamma^k_ij."""
    x = _coords(sf, x)
    ddf = _ddf(sf, x)
    eye = np.eye(sf.n)
    return (
        np.einsum("ki,jl->lkij", eye, ddf)
        + np.einsum("kj,il->lkij", eye, ddf)
        - np.einsum("ij,kl->lkij", eye, ddf)
    )


def curvature(sf: SpaceForm, x) -> np.ndarray:
    """R^h_kij = d_i Gamma^h_jk - d_j Gamma^h_ik + Gamma^h_im Gamma^m_jk - Gamma^h_jm Gamma^m_ik."""
    gamma = christoffel(sf, x)
    dgamma = christoffel_derivative(sf, x)
    return (
        np.einsum("ihjk->hkij", dgamma)
        - np.einsum("jhik->hkij", dgamma)
        + np.einsum("him,mjk->hkij", gamma, gamma)
        - np.einsum("hjm,mik->hkij", gamma, gamma)
    )


def space_form_curvature(sf: SpaceForm, x) -> np.ndarray:
    """c (delta^h_i g_kj - delta^h_j g_ki), the curvature a space form must have."""
    g = metric(sf, x)
    eye = np.eye(sf.n)
    return sf.c * (np.einsum("hi,kj->hkij", eye, g) - np.einsum("hj,ki->hkij", eye, g))


def curvature_identity_residual(sf: SpaceForm, x) -> float:
    """Largest componentwise gap between the computed curvature and the space-form formula."""
    return float(np.max(np.abs(curvature(sf, x) - space_form_curvature(sf, x))))


def energy_density(sf: SpaceForm, q, p) -> float:
    """t = (1/2) g^ik(q) p_i p_k."""
    q = _coords(sf, q)
    p = np.asarray(p, dtype=float)
    if p.shape != (sf.n,):
        raise OutsideChart(f"expected a covector with {sf.n} components, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise NonFiniteInput(f"non-finite covector {p}")
    return 0.5 * _phi(sf, q) ** 2 * float(p @ p)


def base_point(sf: SpaceForm, x) -> BasePointData:
    x = _coords(sf, x)
    return BasePointData(
        x=x,
        g=metric(sf, x),
        g_inv=inverse_metric(sf, x),
        gamma=christoffel(sf, x),
    )
