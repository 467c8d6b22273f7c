"""
Run configuration for klift.

A run is described by a JSON document validated into ``RunConfig``:

    {
      "manifold":     {"n": 3, "c": 1.0},
      "coefficients": {"a1": {"family": "poly", "coeffs": [1, 1]},
                       "a3": {"family": "poly", "coeffs": [0, 1]},
                       "b_mode": "integrable"},
      "metric":       {"lambda": {"family": "poly", "coeffs": [1, 1]}, "mu": "kahler"},
      "sampling":     {"seed": 42, "count": 50, "q_radius": 0.4, "p_radius": 0.6}
    }

Process-wide settings (worker count, log level) come from ``KLIFT_*`` environment
variables, which may also be placed in a ``.env`` file.
"""

from __future__ import annotations

import json
import os
from enum import Enum
from pathlib import Path
from typing import Literal, Optional, Union

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    FiniteFloat,
    ValidationError,
    field_validator,
    model_validator,
)

from klift.errors import ConfigParseError
from klift.scalar_curves import ConstantCurve, ScalarCurve
from klift.space_forms import SpaceForm

CheckName = Literal[
    "curvature_identity",
    "almost_complex",
    "acs_identities",
    "integrability_identities",
    "nijenhuis",
    "hermitian",
    "d_omega",
    "d_omega_closed_form",
    "nabla_j",
]

CHECK_NAMES: tuple[str, ...] = CheckName.__args__


class ExplicitB(BaseModel):
    """Freely chosen b1, b3 curves (the almost Kahler family)."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    b1: ScalarCurve = Field(description="Coefficient b1(t)")
    b3: ScalarCurve = Field(description="Coefficient b3(t)")


class CoefficientsConfig(BaseModel):
    """Coefficients of the almost complex structure."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    a1: ScalarCurve = Field(default_factory=lambda: ConstantCurve(value=1.0), description="Coefficient a1(t), positive")
    a3: ScalarCurve = Field(default_factory=lambda: ConstantCurve(value=0.0), description="Coefficient a3(t)")
    b_mode: Union[Literal["integrable"], ExplicitB] = Field(
        default="integrable",
        description='"integrable" derives b1, b2, b3 from a1, a3 and c; otherwise explicit b1, b3 curves',
    )

    @property
    def integrable(self) -> bool:
        return self.b_mode == "integrable"


class MetricConfig(BaseModel):
    """Proportionality factors of the Hermitian metric."""

    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    lambda_: ScalarCurve = Field(
        default_factory=lambda: ConstantCurve(value=1.0),
        alias="lambda",
        description="Proportionality factor lambda(t), positive",
    )
    mu: Union[Literal["kahler"], ScalarCurve] = Field(
        default="kahler", description='"kahler" sets mu = lambda\'; otherwise an explicit curve'
    )


class SamplingPolicy(BaseModel):
    """How sample points of T*M are drawn."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    seed: int = Field(default=42, description="Seed of the point generator")
    count: int = Field(default=50, ge=1, description="Number of admissible points to draw")
    q_radius: float = Field(default=0.4, gt=0, description="Radius of the base-point ball")
    p_radius: float = Field(default=1.0, gt=0, description="Radius of the covector ball")
    boundary_margin: float = Field(default=0.01, gt=0, description="Distance kept from the chart boundary")


class Tolerances(BaseModel):
    """Pass thresholds, grouped by how the residual is produced."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    algebraic: float = Field(default=1e-12, gt=0, description="Pointwise algebra (J^2 = -I, Hermitian)")
    identities: float = Field(default=1e-10, gt=0, description="Identities of the integrable family")
    curvature: float = Field(default=1e-9, gt=0, description="Space-form curvature identity")
    finite_difference: float = Field(default=1e-5, gt=0, description="One layer of central differences")
    d_omega: float = Field(default=1e-6, gt=0, description="Exterior derivative of the fundamental form")
    nabla_j: float = Field(default=1e-4, gt=0, description="Two stacked layers of central differences")
    falsification_factor: float = Field(default=10.0, gt=1, description="Falsification floor as a multiple of tolerance")
    pass_fraction: float = Field(
        default=1.0, gt=0, le=1, description="Share of evaluated points whose residual must be within tolerance"
    )


class RunConfig(BaseModel):
    """Complete description of a verification run."""

    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    manifold: SpaceForm = Field(default_factory=lambda: SpaceForm(n=3, c=0.0), description="Base space form")
    coefficients: CoefficientsConfig = Field(default_factory=CoefficientsConfig)
    metric: MetricConfig = Field(default_factory=MetricConfig)
    sampling: SamplingPolicy = Field(default_factory=SamplingPolicy)
    tolerances: Tolerances = Field(default_factory=Tolerances)
    step: float = Field(default=5e-5, gt=0, description="Relative finite-difference step")
    checks: Optional[list[CheckName]] = Field(default=None, description="Subset of checks to run (default: all)")
    include_nabla_j: bool = Field(default=True, description="Run the covariant-derivative cross-check")

    @model_validator(mode="after")
    def _check_sampling_fits_chart(self) -> "RunConfig":
        reach = self.sampling.q_radius + self.sampling.boundary_margin
        if reach >= self.manifold.chart_radius:
            raise ValueError(
                f"q_radius + boundary_margin = {reach} must stay below the chart radius {self.manifold.chart_radius}"
            )
        return self

    def echo(self) -> dict:
        """JSON-ready copy of the configuration."""
        return self.model_dump(mode="json", by_alias=True)


class PerturbationName(str, Enum):
    """Perturbations accepted by ``falsify``."""

    B1 = "b1"
    B3 = "b3"
    C1_SCALE = "c1-scale"
    MU = "mu"
    LAMBDA_SCALE = "lambda-scale"


# check each perturbation is expected to break
PERTURBATION_TARGETS: dict[PerturbationName, str] = {
    PerturbationName.B1: "nijenhuis",
    PerturbationName.B3: "nijenhuis",
    PerturbationName.C1_SCALE: "hermitian",
    PerturbationName.MU: "d_omega",
    PerturbationName.LAMBDA_SCALE: "d_omega",
}


class Perturbation(BaseModel):
    """A single deliberate violation of one structural condition."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: PerturbationName = Field(description="Which coefficient to perturb")
    delta: FiniteFloat = Field(description="Additive shift, or factor for the *-scale perturbations")

    @model_validator(mode="after")
    def _check_scale(self) -> "Perturbation":
        if self.is_scale and self.delta <= 0:
            raise ValueError(f"{self.name.value} needs a positive factor (got {self.delta})")
        return self

    @property
    def is_scale(self) -> bool:
        return self.name in (PerturbationName.C1_SCALE, PerturbationName.LAMBDA_SCALE)

    @property
    def target(self) -> str:
        return PERTURBATION_TARGETS[self.name]

    @classmethod
    def parse(cls, text: str) -> "Perturbation":
        """Parse ``name=delta``, e.g. ``b1=+0.05`` or ``c1-scale=1.1``."""
        name, sep, value = text.partition("=")
        if not sep:
            raise ConfigParseError(f"perturbation must look like name=delta (got '{text}')")
        try:
            return cls(name=name.strip(), delta=float(value))
        except ValueError as e:
            raise ConfigParseError(f"invalid perturbation '{text}': {e}") from e


class Settings(BaseModel):
    """Process-wide settings read from the environment."""

    model_config = ConfigDict(frozen=True)

    threads: int = Field(default_factory=lambda: min(8, os.cpu_count() or 1), ge=1)
    log_level: str = Field(default="WARNING")

    @field_validator("log_level")
    @classmethod
    def _upper(cls, v: str) -> str:
        return v.upper()

    @classmethod
    def from_env(cls) -> "Settings":
        """
        Environment variables (optional):
        - KLIFT_THREADS: worker cap for point evaluation
        - KLIFT_LOG_LEVEL: logging level name
        """
        values = {}
        if os.getenv("KLIFT_THREADS"):
            values["threads"] = os.getenv("KLIFT_THREADS")
        if os.getenv("KLIFT_LOG_LEVEL"):
            values["log_level"] = os.getenv("KLIFT_LOG_LEVEL")
        try:
            return cls(**values)
        except ValidationError as e:
            raise ConfigParseError(f"invalid KLIFT_* environment: {_describe(e)}") from e


def _describe(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        path = ".".join(str(x) for x in item["loc"]) or "<root>"
        parts.append(f"{path}: {item['msg']}")
    return "; ".join(parts)


def parse_config(data: dict) -> RunConfig:
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigParseError(f"invalid configuration: {_describe(e)}") from e


def load_config(path: Union[str, Path]) -> RunConfig:
    """Read and validate a JSON run configuration."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigParseError(f"cannot read config '{path}': {e.strerror or e}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigParseError(f"{path}: line {e.lineno}, column {e.colno}: {e.msg}") from e
    if not isinstance(data, dict):
        raise ConfigParseError(f"{path}: top level must be a JSON object")
    return parse_config(data)
