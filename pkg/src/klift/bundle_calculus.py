"""
Tensor assembly and numerical differential operators on T*M.

Conventions used throughout:

- A point of T*M is (q, p); its chart coordinates are the 2n-vector z = (q, p).
- Component arrays are 2n x 2n with horizontal indices first, then vertical:
  rows/columns 0..n-1 belong to d/dq^i (or delta/delta q^i in the adapted frame),
  rows/columns n..2n-1 to d/dp_i.
- ACS arrays hold J^a_b in row a, column b (column b is the image of the b-th
  basis field). METRIC and TWO_FORM arrays hold T(E_a, E_b).
- Derivatives are taken only in the coordinate frame, where basis fields commute.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from klift.errors import (
    CoefficientMismatch,
    FrameMismatch,
    NotPositiveDefinite,
    OutsideChart,
    SingularFrame,
    StencilOutsideChart,
)
from klift.lift_algebra import LiftCoefficients, MetricCoefficients
from klift.scalar_curves import CurveJet
from klift.space_forms import SpaceForm, base_point, curvature

# relative tolerance when matching a coefficient record to a point
T_MATCH_TOLERANCE = 1e-12

TensorField = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ChartPoint:
    """A covector p at the base point q, in induced chart coordinates."""

    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float)
        p = np.asarray(self.p, dtype=float)
        if q.ndim != 1 or q.shape != p.shape:
            raise OutsideChart(f"q and p must be vectors of equal length (got {q.shape}, {p.shape})")
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(p))):
            raise OutsideChart("chart point has non-finite coordinates")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)

    @property
    def n(self) -> int:
        return self.q.shape[0]

    @property
    def coords(self) -> np.ndarray:
        return np.concatenate([self.q, self.p])

    @classmethod
    def from_coords(cls, z: np.ndarray) -> "ChartPoint":
        z = np.asarray(z, dtype=float)
        n = z.shape[0] // 2
        return cls(q=z[:n], p=z[n:])

    def to_dict(self) -> dict[str, list[float]]:
        return {"q": self.q.tolist(), "p": self.p.tolist()}


class FrameKind(str, Enum):
    """Variance type of a 2n x 2n component array."""

    ACS = "acs"
    METRIC = "metric"
    TWO_FORM = "two_form"


class Frame(str, Enum):
    ADAPTED = "adapted"
    COORDINATE = "coordinate"


@dataclass(frozen=True)
class FrameTensor:
    """Components of J, G or Omega in a stated frame."""

    kind: FrameKind
    frame: Frame
    components: np.ndarray


@dataclass(frozen=True)
class PointGeometry:
    """Base-manifold data lifted to a point of T*M."""

    g: np.ndarray
    g_inv: np.ndarray
    gamma: np.ndarray
    u: np.ndarray  # g^{0i} = g^{ih} p_h
    gamma0: np.ndarray  # Gamma^0_ih = p_k Gamma^k_ih
    t: float


def point_geometry(sf: SpaceForm, pt: ChartPoint) -> PointGeometry:
    if pt.n != sf.n:
        raise OutsideChart(f"point has dimension {pt.n}, space form has {sf.n}")
    base = base_point(sf, pt.q)
    u = base.g_inv @ pt.p
    return PointGeometry(
        g=base.g,
        g_inv=base.g_inv,
        gamma=base.gamma,
        u=u,
        gamma0=np.einsum("k,kih->ih", pt.p, base.gamma),
        t=0.5 * float(pt.p @ u),
    )


def _check_t(geo: PointGeometry, t: float) -> None:
    if abs(t - geo.t) > T_MATCH_TOLERANCE * max(1.0, geo.t):
        raise CoefficientMismatch(f"coefficients evaluated at t={t}, point has t={geo.t}")


def adapted_frame(sf: SpaceForm, pt: ChartPoint) -> np.ndarray:
    """
    Columns are (delta/delta q^i, d/dp_i) written in the coordinate frame.

    delta/delta q^i = d/dq^i + Gamma^0_ih d/dp_h, so the matrix is
    [[I, 0], [Gamma^0, I]] with unit determinant.
    """
    geo = point_geometry(sf, pt)
    n = sf.n
    frame = np.eye(2 * n)
    frame[n:, :n] = geo.gamma0
    return frame


def acs_matrix(sf: SpaceForm, pt: ChartPoint, coeffs: LiftCoefficients) -> FrameTensor:
    """J in the adapted frame."""
    geo = point_geometry(sf, pt)
    _check_t(geo, coeffs.t)
    p, u = pt.p, geo.u
    eye = np.eye(sf.n)

    J = np.empty((2 * sf.n, 2 * sf.n))
    J[: sf.n, : sf.n] = coeffs.a4 * eye + coeffs.b4 * np.outer(u, p)
    J[sf.n :, : sf.n] = coeffs.a1 * geo.g + coeffs.b1 * np.outer(p, p)
    J[: sf.n, sf.n :] = -(coeffs.a2 * geo.g_inv + coeffs.b2 * np.outer(u, u))
    J[sf.n :, sf.n :] = coeffs.a3 * eye + coeffs.b3 * np.outer(p, u)
    return FrameTensor(FrameKind.ACS, Frame.ADAPTED, J)


def metric_matrix(sf: SpaceForm, pt: ChartPoint, mc: MetricCoefficients) -> FrameTensor:
    """G in the adapted frame; raises NotPositiveDefinite if an eigenvalue is not positive."""
    geo = point_geometry(sf, pt)
    _check_t(geo, mc.t)
    p, u = pt.p, geo.u
    eye = np.eye(sf.n)

    G = np.empty((2 * sf.n, 2 * sf.n))
    G[: sf.n, : sf.n] = mc.c1 * geo.g + mc.d1 * np.outer(p, p)
    G[sf.n :, sf.n :] = mc.c2 * geo.g_inv + mc.d2 * np.outer(u, u)
    mixed = mc.c3 * eye + mc.d3 * np.outer(u, p)
    G[sf.n :, : sf.n] = mixed
    G[: sf.n, sf.n :] = mixed.T

    smallest = float(np.linalg.eigvalsh(G)[0])
    if not smallest > 0.0:
        raise NotPositiveDefinite(f"metric has smallest eigenvalue {smallest:.3e} at t={geo.t}")
    return FrameTensor(FrameKind.METRIC, Frame.ADAPTED, G)


def omega_matrix(sf: SpaceForm, pt: ChartPoint, lam: float, mu: float) -> FrameTensor:
    """Omega(d/dp_i, delta/delta q^j) = lam delta_ij + mu g^{0i} p_j; other blocks vanish."""
    geo = point_geometry(sf, pt)
    n = sf.n
    pairing = lam * np.eye(n) + mu * np.outer(geo.u, pt.p)
    omega = np.zeros((2 * n, 2 * n))
    omega[n:, :n] = pairing
    omega[:n, n:] = -pairing.T
    return FrameTensor(FrameKind.TWO_FORM, Frame.ADAPTED, omega)


def _inverse(A: np.ndarray) -> np.ndarray:
    try:
        A_inv = np.linalg.inv(A)
    except np.linalg.LinAlgError as e:
        raise SingularFrame(f"change of basis is not invertible: {e}") from e
    if not np.all(np.isfinite(A_inv)):
        raise SingularFrame("change of basis is numerically singular")
    return A_inv


def _transform(T: np.ndarray, kind: FrameKind, A: np.ndarray, A_inv: np.ndarray) -> np.ndarray:
    if kind is FrameKind.ACS:
        return A @ T @ A_inv
    return A_inv.T @ T @ A_inv


def to_coordinate_frame(T: FrameTensor, A: np.ndarray) -> FrameTensor:
    """
    Convert adapted-frame components to the coordinate frame.

    ``A`` is the adapted frame matrix: ACS transforms as A T A^-1, bilinear forms
    as A^-T T A^-1.
    """
    if T.frame is not Frame.ADAPTED:
        raise FrameMismatch(f"expected an adapted-frame tensor, got {T.frame.value}")
    if A.shape != T.components.shape:
        raise FrameMismatch(f"frame shape {A.shape} does not match tensor shape {T.components.shape}")
    return FrameTensor(T.kind, Frame.COORDINATE, _transform(T.components, T.kind, A, _inverse(A)))


def to_adapted_frame(T: FrameTensor, A: np.ndarray) -> FrameTensor:
    if T.frame is not Frame.COORDINATE:
        raise FrameMismatch(f"expected a coordinate-frame tensor, got {T.frame.value}")
    if A.shape != T.components.shape:
        raise FrameMismatch(f"frame shape {A.shape} does not match tensor shape {T.components.shape}")
    return FrameTensor(T.kind, Frame.ADAPTED, _transform(T.components, T.kind, _inverse(A), A))


def three_form_to_coordinate_frame(T: np.ndarray, A: np.ndarray) -> np.ndarray:
    A_inv = _inverse(A)
    return np.einsum("abc,ax,by,cz->xyz", T, A_inv, A_inv, A_inv)


def central_jacobian(
    sf: SpaceForm, field: TensorField, pt: ChartPoint, h: float, order: int = 2
) -> np.ndarray:
    """
    d[a, ...] = d field / d z^a by central differences.

    The step along coordinate a is h * (1 + |z_a|). ``order=2`` uses the
    three-point stencil, ``order=4`` the five-point stencil
    (f(-2h) - 8 f(-h) + 8 f(h) - f(2h)) / 12h.
    """
    if order not in (2, 4):
        raise ValueError(f"central differences of order {order} are not available")
    z = pt.coords
    steps = h * (1.0 + np.abs(z))
    q_norm = float(np.linalg.norm(pt.q))
    if q_norm + 2.0 * float(np.max(steps[: sf.n])) >= sf.chart_radius:
        raise StencilOutsideChart(
            f"stencil around |q| = {q_norm:.6g} with step {np.max(steps):.3g} leaves the chart"
        )

    derivatives = []
    for a, step in enumerate(steps):
        shift = np.zeros_like(z)
        shift[a] = step
        first = (field(z + shift) - field(z - shift)) / (2.0 * step)
        if order == 4:
            wide = (field(z + 2.0 * shift) - field(z - 2.0 * shift)) / (4.0 * step)
            first = (4.0 * first - wide) / 3.0
        derivatives.append(first)
    return np.stack(derivatives)


def nijenhuis_from_jacobian(J: np.ndarray, dJ: np.ndarray) -> np.ndarray:
    """
    N[c, a, b] for coordinate-frame J and dJ[d, c, b] = d_d J^c_b.

    N^c_ab = J^d_a d_d J^c_b - J^d_b d_d J^c_a - J^c_d (d_a J^d_b - d_b J^d_a),
    antisymmetrized in (a, b).
    """
    N = (
        np.einsum("da,dcb->cab", J, dJ)
        - np.einsum("db,dca->cab", J, dJ)
        - np.einsum("cd,adb->cab", J, dJ)
        + np.einsum("cd,bda->cab", J, dJ)
    )
    return 0.5 * (N - np.swapaxes(N, 1, 2))


def nijenhuis(
    sf: SpaceForm, structure_field: TensorField, pt: ChartPoint, h: float, order: int = 2
) -> np.ndarray:
    """Nijenhuis tensor of a coordinate-frame J field at ``pt``."""
    J = structure_field(pt.coords)
    dJ = central_jacobian(sf, structure_field, pt, h, order)
    return nijenhuis_from_jacobian(J, dJ)


def hermitian_residual(J: FrameTensor, G: FrameTensor) -> float:
    """||J^T G J - G||_inf."""
    if J.kind is not FrameKind.ACS or G.kind is not FrameKind.METRIC:
        raise FrameMismatch(f"expected (acs, metric), got ({J.kind.value}, {G.kind.value})")
    if J.frame is not G.frame or J.components.shape != G.components.shape:
        raise FrameMismatch(
            f"J is {J.frame.value} {J.components.shape}, G is {G.frame.value} {G.components.shape}"
        )
    Jm, Gm = J.components, G.components
    return float(np.max(np.abs(Jm.T @ Gm @ Jm - Gm)))


def d_omega_numeric(
    sf: SpaceForm, omega_field: TensorField, pt: ChartPoint, h: float, order: int = 2
) -> np.ndarray:
    """(d Omega)_abc = d_a Omega_bc + d_b Omega_ca + d_c Omega_ab in the coordinate frame."""
    T = central_jacobian(sf, omega_field, pt, h, order)
    return T + np.einsum("bca->abc", T) + np.einsum("cab->abc", T)


def d_omega_closed_form(sf: SpaceForm, pt: ChartPoint, lambda_jet: CurveJet, mu: float) -> np.ndarray:
    """
    Exterior derivative of Omega from its closed form, in the coordinate frame.

    In the adapted coframe (dq, Dp) the only nonzero components are
    dOmega(d/dp_a, d/dp_b, delta/delta q^c) = (lambda' - mu)(g^{0a} delta_bc - g^{0b} delta_ac)
    and their antisymmetric permutations.
    """
    geo = point_geometry(sf, pt)
    n = sf.n
    eye = np.eye(n)
    W = (lambda_jet.d1 - mu) * (np.einsum("a,bc->abc", geo.u, eye) - np.einsum("b,ac->abc", geo.u, eye))

    T = np.zeros((2 * n, 2 * n, 2 * n))
    T[n:, n:, :n] = W
    T[n:, :n, n:] = -np.einsum("abc->acb", W)
    T[:n, n:, n:] = np.einsum("abc->cab", W)
    return three_form_to_coordinate_frame(T, adapted_frame(sf, pt))


def covariant_derivative_J(
    sf: SpaceForm,
    acs_field: TensorField,
    metric_field: TensorField,
    pt: ChartPoint,
    h: float,
) -> float:
    """
    ||nabla J||_inf for the Levi-Civita connection of G.

    Christoffel symbols of G come from central differences of the coordinate-frame
    metric; nabla_a J^b_c = d_a J^b_c + Gamma^b_ad J^d_c - Gamma^d_ac J^b_d.
    """
    z = pt.coords
    G = metric_field(z)
    smallest = float(np.linalg.eigvalsh(0.5 * (G + G.T))[0])
    if not smallest > 0.0:
        raise NotPositiveDefinite(f"metric has smallest eigenvalue {smallest:.3e}")
    G_inv = np.linalg.inv(G)
    dG = central_jacobian(sf, metric_field, pt, h)

    # Gamma[b, a, d] = 1/2 G^be (d_a G_ed + d_d G_ea - d_e G_ad)
    lowered = np.einsum("aed->ead", dG) + np.einsum("dea->ead", dG) - dG
    gamma = 0.5 * np.einsum("be,ead->bad", G_inv, lowered)

    J = acs_field(z)
    dJ = central_jacobian(sf, acs_field, pt, h)
    nabla = dJ + np.einsum("bad,dc->abc", gamma, J) - np.einsum("dac,bd->abc", gamma, J)
    return float(np.max(np.abs(nabla)))


def vertical_bracket_residual(
    sf: SpaceForm, pt: ChartPoint, lc: LiftCoefficients, a2p: float, a3p: float
) -> float:
    """
    Vertical part of N_J(d/dp_i, d/dp_j) contracted against the actual curvature.

    Returns ||K (delta^h_j p_i - delta^h_i p_j) - a2^2 g^{0k} R^h_kij
    - a2 b2 g^{0k} g^{0l} (p_j R^h_kil - p_i R^h_kjl)||_inf with
    K = a1 a2' - a1 b2 + 2t a3' b3.
    """
    geo = point_geometry(sf, pt)
    _check_t(geo, lc.t)
    R = curvature(sf, pt.q)
    p, u = pt.p, geo.u
    eye = np.eye(sf.n)

    K = lc.a1 * a2p - lc.a1 * lc.b2 + 2.0 * lc.t * a3p * lc.b3
    liouville = np.einsum("hj,i->hij", eye, p) - np.einsum("hi,j->hij", eye, p)
    contracted = np.einsum("k,hkij->hij", u, R)
    # S[h, i, j] = g^{0k} g^{0l} R^h_kil
    S = np.einsum("k,l,hkil->hi", u, u, R)
    quadratic = np.einsum("j,hi->hij", p, S) - np.einsum("i,hj->hij", p, S)

    residual = K * liouville - lc.a2**2 * contracted - lc.a2 * lc.b2 * quadratic
    return float(np.max(np.abs(residual)))
