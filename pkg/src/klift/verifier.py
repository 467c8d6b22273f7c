"""
Sampling, check orchestration and reporting.

``run_suite`` draws admissible points of T*M, evaluates every selected check at
every point (in a worker pool), keeps the worst residual per check and composes
the verdicts of the chain

    almost complex -> integrable -> Hermitian -> almost Kahler -> Kahler.

``falsify`` runs the suite on a deliberately perturbed structure and insists the
targeted check fails by a clear margin. ``sweep`` repeats either the pointwise
algebra over a t-grid or the whole suite over one configuration parameter.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from klift.bundle_calculus import ChartPoint
from klift.checks import StructureCheck, get_default_checks
from klift.config import (
    CHECK_NAMES,
    Perturbation,
    RunConfig,
    SamplingPolicy,
    Settings,
    parse_config,
)
from klift.errors import (
    ConfigParseError,
    ExhaustedSampling,
    KliftError,
    NonFiniteInput,
    NotPositiveDefinite,
    OutsideChart,
    PerturbationTooSmall,
    PositivityViolation,
    ProportionalityDomain,
    SingularDenominator,
)
from klift.lift_algebra import (
    hermitian_d_system_residual,
    hermitian_system_residual,
    integrability_consistency,
)
from klift.space_forms import SpaceForm
from klift.structure import NaturalLiftStructure

logger = logging.getLogger(__name__)

# a candidate draw budget of this many times the requested count
MAX_ATTEMPTS_FACTOR = 10

# numerical failures at a single point; these are counted, never fatal
# pointwise algebra that a single coefficient perturbation leaves intact
UNTARGETED_ALGEBRAIC_CHECKS = ("almost_complex", "acs_identities", "hermitian")

POINT_ERRORS = (
    SingularDenominator,
    PositivityViolation,
    ProportionalityDomain,
    NonFiniteInput,
    OutsideChart,
    NotPositiveDefinite,
)

__all__ = [
    "SamplingPolicy",
    "SampledPoints",
    "CheckResult",
    "Verdicts",
    "SamplingStats",
    "FalsificationInfo",
    "VerificationReport",
    "sample_points",
    "run_suite",
    "falsify",
    "sweep",
    "parse_range",
    "with_parameter",
]


@dataclass(frozen=True)
class SampledPoints:
    points: list[ChartPoint]
    attempts: int
    rejected: int


class CheckResult(BaseModel):
    """Worst residual of one check over all sampled points."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    name: str = Field(description="Stable check name")
    max_residual: Optional[float] = Field(description="Largest residual, null if no point was evaluated")
    tolerance: float = Field(description="Pass threshold")
    passed: bool = Field(description="Enough points within tolerance and the check is conclusive")
    worst_point: Optional[dict[str, list[float]]] = Field(description="Point attaining max_residual")
    skipped_points: int = Field(default=0, alias="skipped", description="Points where evaluation failed")
    evaluated: int = Field(default=0, description="Points where evaluation succeeded")
    points_within: int = Field(default=0, description="Evaluated points whose residual is within tolerance")
    inconclusive: bool = Field(default=False, description="More than half of the points were skipped")


class Verdicts(BaseModel):
    almost_complex: bool
    integrable: bool
    hermitian: bool
    almost_kahler: bool
    kahler: bool


class SamplingStats(BaseModel):
    requested: int
    accepted: int
    attempts: int
    rejected: int


class FalsificationInfo(BaseModel):
    perturbation: str
    target: str
    floor: float
    residual: Optional[float]
    succeeded: bool
    untargeted_algebraic_passed: Optional[bool] = None


class VerificationReport(BaseModel):
    """Result of one suite run."""

    model_config = ConfigDict(populate_by_name=True)

    config: dict[str, Any]
    checks: list[CheckResult]
    verdicts: Verdicts
    sampling: SamplingStats
    falsification: Optional[FalsificationInfo] = None

    def check(self, name: str) -> CheckResult:
        for result in self.checks:
            if result.name == name:
                return result
        raise KeyError(name)

    @property
    def all_passed(self) -> bool:
        return all(result.passed for result in self.checks)

    def to_json(self) -> str:
        return self.model_dump_json(by_alias=True, indent=2)


def _uniform_ball(rng: np.random.Generator, n: int, radius: float) -> np.ndarray:
    direction = rng.standard_normal(n)
    norm = float(np.linalg.norm(direction))
    if norm == 0.0:
        return np.zeros(n)
    return direction / norm * (radius * rng.random() ** (1.0 / n))


def sample_points(
    sf: SpaceForm,
    policy: SamplingPolicy,
    structure: Optional[NaturalLiftStructure] = None,
) -> SampledPoints:
    """
    Draw ``policy.count`` points uniformly from the q-ball times the p-ball.

    When a structure is given, points where its coefficients are inadmissible
    are rejected and counted. Raises ExhaustedSampling once more than 90% of the
    candidates have been rejected.
    """
    if policy.q_radius + policy.boundary_margin >= sf.chart_radius:
        raise OutsideChart(
            f"q_radius {policy.q_radius} + margin {policy.boundary_margin} reaches the chart radius {sf.chart_radius}"
        )
    rng = np.random.default_rng(policy.seed)
    max_attempts = MAX_ATTEMPTS_FACTOR * policy.count

    points: list[ChartPoint] = []
    attempts = 0
    rejected = 0
    while len(points) < policy.count:
        if attempts >= max_attempts:
            raise ExhaustedSampling(
                f"rejected {rejected} of {attempts} candidates, only {len(points)} of {policy.count} admissible"
            )
        attempts += 1
        pt = ChartPoint(
            q=_uniform_ball(rng, sf.n, policy.q_radius),
            p=_uniform_ball(rng, sf.n, policy.p_radius),
        )
        if structure is not None and not structure.admissible(pt):
            rejected += 1
            continue
        points.append(pt)

    logger.info(f"Sampled {len(points)} points in {attempts} attempts ({rejected} rejected)")
    return SampledPoints(points=points, attempts=attempts, rejected=rejected)


def select_checks(
    config: RunConfig,
    structure: NaturalLiftStructure,
    extra: Sequence[str] = (),
) -> list[StructureCheck]:
    checks = [c for c in get_default_checks(config.include_nabla_j) if c.applies(structure)]
    if config.checks is not None:
        wanted = set(config.checks) | set(extra)
        checks = [c for c in checks if c.name in wanted]
    return checks


def _aggregate(
    check: StructureCheck,
    tolerance: float,
    points: list[ChartPoint],
    residuals: list[Optional[float]],
    pass_fraction: float = 1.0,
) -> CheckResult:
    worst: Optional[float] = None
    worst_index: Optional[int] = None
    skipped = 0
    within = 0
    for i, value in enumerate(residuals):
        if value is None:
            skipped += 1
            continue
        if not math.isfinite(value):
            value = math.inf
        if value <= tolerance:
            within += 1
        # strict comparison: the earliest point wins ties
        if worst is None or value > worst:
            worst, worst_index = value, i

    evaluated = len(residuals) - skipped
    inconclusive = 2 * skipped > len(residuals)
    required = math.ceil(pass_fraction * evaluated - 1e-9)
    passed = not inconclusive and evaluated > 0 and within >= required
    logger.info(
        f"Check {check.name}: max residual {worst} (tolerance {tolerance:g}), "
        f"{within}/{evaluated} within, {skipped} skipped, {'passed' if passed else 'FAILED'}"
    )
    return CheckResult(
        name=check.name,
        max_residual=worst,
        tolerance=tolerance,
        passed=passed,
        worst_point=points[worst_index].to_dict() if worst_index is not None else None,
        skipped_points=skipped,
        evaluated=evaluated,
        points_within=within,
        inconclusive=inconclusive,
    )


def compose_verdicts(results: list[CheckResult]) -> Verdicts:
    """Chain the check outcomes; a check that was not run counts as not passed."""
    by_name = {r.name: r for r in results}

    def ok(name: str) -> bool:
        return name in by_name and by_name[name].passed

    almost_complex = ok("almost_complex") and ok("acs_identities")
    integrable = almost_complex and ok("curvature_identity") and ok("nijenhuis")
    if "integrability_identities" in by_name:
        integrable = integrable and ok("integrability_identities")
    hermitian = almost_complex and ok("hermitian")
    almost_kahler = hermitian and ok("d_omega")
    return Verdicts(
        almost_complex=almost_complex,
        integrable=integrable,
        hermitian=hermitian,
        almost_kahler=almost_kahler,
        kahler=integrable and almost_kahler,
    )


def run_suite(
    config: RunConfig,
    perturbation: Optional[Perturbation] = None,
    step: Optional[float] = None,
    settings: Optional[Settings] = None,
) -> VerificationReport:
    """
    Sample points and evaluate every selected check.

    Args:
        config: run configuration
        perturbation: optional deliberate violation (see ``falsify``)
        step: finite-difference step, defaults to ``config.step``
        settings: process settings, defaults to the environment

    Returns:
        VerificationReport with one CheckResult per check and the composed verdicts
    """
    settings = settings or Settings.from_env()
    step = config.step if step is None else step
    structure = NaturalLiftStructure(config, perturbation)
    checks = select_checks(config, structure, extra=[perturbation.target] if perturbation else [])
    sampled = sample_points(config.manifold, config.sampling, structure)

    def evaluate(pt: ChartPoint) -> list[Optional[float]]:
        row: list[Optional[float]] = []
        for check in checks:
            try:
                row.append(check.run(structure, pt, step))
            except POINT_ERRORS as e:
                logger.debug(f"Check {check.name} skipped at {pt.to_dict()}: {e}")
                row.append(None)
        return row

    with ThreadPoolExecutor(max_workers=settings.threads) as pool:
        rows = list(pool.map(evaluate, sampled.points))

    results = [
        _aggregate(
            check,
            getattr(config.tolerances, check.tolerance_key),
            sampled.points,
            [row[k] for row in rows],
            config.tolerances.pass_fraction,
        )
        for k, check in enumerate(checks)
    ]
    return VerificationReport(
        config=config.echo(),
        checks=results,
        verdicts=compose_verdicts(results),
        sampling=SamplingStats(
            requested=config.sampling.count,
            accepted=len(sampled.points),
            attempts=sampled.attempts,
            rejected=sampled.rejected,
        ),
    )


def falsify(
    config: RunConfig,
    perturbation: Perturbation,
    step: Optional[float] = None,
    settings: Optional[Settings] = None,
) -> VerificationReport:
    """
    Run the suite on a perturbed structure and require the targeted check to fail.

    The targeted residual must exceed ``falsification_factor`` times its tolerance;
    otherwise PerturbationTooSmall is raised with the report attached.
    """
    report = run_suite(config, perturbation, step=step, settings=settings)
    target = report.check(perturbation.target)
    floor = target.tolerance * config.tolerances.falsification_factor
    residual = target.max_residual
    succeeded = residual is not None and residual > floor

    untargeted = [
        r for r in report.checks if r.name in UNTARGETED_ALGEBRAIC_CHECKS and r.name != target.name
    ]
    untargeted_passed = all(r.passed for r in untargeted) if untargeted else None
    if untargeted_passed is False:
        logger.warning(
            f"{perturbation.name.value} also broke "
            f"{', '.join(r.name for r in untargeted if not r.passed)}"
        )

    report = report.model_copy(
        update={
            "falsification": FalsificationInfo(
                perturbation=f"{perturbation.name.value}={perturbation.delta:+g}",
                target=target.name,
                floor=floor,
                residual=residual,
                succeeded=succeeded,
                untargeted_algebraic_passed=untargeted_passed,
            )
        }
    )
    if not succeeded:
        raise PerturbationTooSmall(
            f"{perturbation.name.value}={perturbation.delta:g} left {target.name} at {residual} "
            f"(floor {floor:g})",
            report=report,
        )
    logger.info(f"Falsification succeeded: {target.name} residual {residual:.3e} > {floor:g}")
    return report


def parse_range(text: str) -> list[float]:
    """Expand ``start:stop:step`` into its grid, stop included when hit."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigParseError(f"range must look like start:stop:step (got '{text}')")
    try:
        start, stop, step = (float(x) for x in parts)
    except ValueError as e:
        raise ConfigParseError(f"range '{text}' is not numeric") from e
    if not all(math.isfinite(x) for x in (start, stop, step)):
        raise ConfigParseError(f"range '{text}' must be finite")
    if step == 0.0:
        raise ConfigParseError(f"range '{text}' has a zero step")
    if (stop - start) * step < 0:
        raise ConfigParseError(f"range '{text}' never reaches its stop")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [start + i * step for i in range(count)]


def with_parameter(config: RunConfig, path: str, value: float) -> RunConfig:
    """
    Copy of ``config`` with one numeric parameter replaced.

    ``path`` is ``c`` or a dotted curve parameter: ``a1.coeffs.1``, ``lambda.k``,
    ``a3.A``, ``mu.value``, ``b1.coeffs.0``.
    """
    data = config.model_dump(mode="python", by_alias=True)
    if path == "c":
        data["manifold"]["c"] = value
        data["manifold"]["chart_radius"] = None
        return parse_config(data)

    head, _, rest = path.partition(".")
    if head in ("a1", "a3"):
        node = data["coefficients"][head]
    elif head in ("b1", "b3"):
        if not isinstance(data["coefficients"]["b_mode"], dict):
            raise ConfigParseError(f"'{path}' needs explicit b1, b3 curves")
        node = data["coefficients"]["b_mode"][head]
    elif head in ("lambda", "mu"):
        node = data["metric"][head]
        if not isinstance(node, dict):
            raise ConfigParseError(f"'{path}' needs an explicit {head} curve")
    else:
        raise ConfigParseError(f"unknown sweep parameter '{path}'")
    if not rest:
        raise ConfigParseError(f"'{path}' must name a curve parameter, e.g. {head}.coeffs.0")

    keys = rest.split(".")
    try:
        for key in keys[:-1]:
            node = node[int(key)] if isinstance(node, list) else node[key]
        last = keys[-1]
        if isinstance(node, list):
            node[int(last)] = value
        elif last in node:
            node[last] = value
        else:
            raise KeyError(last)
    except (KeyError, IndexError, ValueError, TypeError) as e:
        raise ConfigParseError(f"'{path}' does not address a parameter of the configured curve") from e
    return parse_config(data)


def _algebra_row(structure: NaturalLiftStructure, t: float) -> dict[str, Any]:
    row: dict[str, Any] = {
        "t": t,
        "D": None,
        "acs_identities": None,
        "integrability_identities": None,
        "hermitian_system": None,
        "hermitian_d_system": None,
        "skipped": 0,
        "error": "",
    }
    try:
        row["D"] = structure.denominator(t)
        lc = structure.lift_coefficients(t)
        row["acs_identities"] = max(lc.identity_residuals())
        if structure.integrable_mode:
            row["integrability_identities"] = integrability_consistency(
                structure.a1, structure.a3, structure.sf.c, t
            ).max_applicable()
        mc = structure.metric_coefficients(lc)
        row["hermitian_system"] = hermitian_system_residual(lc, mc.c1, mc.c2, mc.c3)
        row["hermitian_d_system"] = hermitian_d_system_residual(lc, mc)
    except KliftError as e:
        row["skipped"] = 1
        row["error"] = type(e).__name__
    return row


def _suite_row(param: str, value: float, config: RunConfig, settings: Optional[Settings]) -> dict[str, Any]:
    row: dict[str, Any] = {param: value, "D": None}
    row.update({name: None for name in CHECK_NAMES})
    row.update({"skipped": 0, "rejected": 0, "error": ""})

    structure = NaturalLiftStructure(config)
    try:
        row["D"] = structure.denominator(0.5 * config.sampling.p_radius**2)
    except KliftError:
        pass
    try:
        report = run_suite(config, settings=settings)
    except (ExhaustedSampling, OutsideChart) as e:
        row["error"] = type(e).__name__
        return row
    for result in report.checks:
        row[result.name] = result.max_residual
    row["skipped"] = sum(r.skipped_points for r in report.checks)
    row["rejected"] = report.sampling.rejected
    return row


def sweep(
    config: RunConfig,
    param: str,
    values: Sequence[float],
    settings: Optional[Settings] = None,
) -> list[dict[str, Any]]:
    """
    One row per value of ``param``.

    ``t`` evaluates the pointwise coefficient algebra only; any other parameter
    re-runs the suite on the modified configuration, reporting D at
    t = p_radius^2 / 2.
    """
    if param == "t":
        structure = NaturalLiftStructure(config)
        rows = []
        for t in values:
            if t < 0:
                raise ConfigParseError(f"energy density must be nonnegative (got {t})")
            rows.append(_algebra_row(structure, t))
        return rows
    return [_suite_row(param, v, with_parameter(config, param, v), settings) for v in values]
