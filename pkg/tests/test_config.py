"""
Tests for run configuration, perturbations and environment settings.
"""
import math

import pytest
from pydantic import ValidationError

from klift.config import (
    CHECK_NAMES,
    Perturbation,
    PerturbationName,
    RunConfig,
    SamplingPolicy,
    Settings,
    load_config,
    parse_config,
)
from klift.errors import ConfigParseError
from klift.scalar_curves import ConstantCurve, PolynomialCurve


class TestRunConfig:
    """Test schema defaults and validation."""

    def test_defaults(self):
        config = RunConfig()
        assert config.manifold.n == 3 and config.manifold.c == 0.0
        assert config.coefficients.integrable
        assert config.metric.lambda_ == ConstantCurve(value=1.0)
        assert config.metric.mu == "kahler"
        assert config.sampling == SamplingPolicy(seed=42, count=50, q_radius=0.4, p_radius=1.0)
        assert config.tolerances.finite_difference == 1e-5
        assert config.step == 5e-5
        assert config.checks is None

    def test_sphere_config(self, kahler_sphere_config):
        assert kahler_sphere_config.manifold.c == 1.0
        assert math.isinf(kahler_sphere_config.manifold.chart_radius)
        assert kahler_sphere_config.coefficients.a1 == PolynomialCurve(coeffs=[1.0, 1.0])
        assert kahler_sphere_config.sampling.p_radius == 0.6

    def test_explicit_b(self, canonical_data):
        canonical_data["coefficients"]["b_mode"] = {
            "b1": {"family": "const", "value": 0.1},
            "b3": {"family": "exp", "A": 1.0, "k": -1.0},
        }
        config = parse_config(canonical_data)
        assert not config.coefficients.integrable
        assert config.coefficients.b_mode.b1 == ConstantCurve(value=0.1)

    def test_dimension_error_names_field(self, canonical_data):
        canonical_data["manifold"]["n"] = 2
        with pytest.raises(ConfigParseError, match=r"manifold\.n"):
            parse_config(canonical_data)

    def test_extra_field_rejected(self, canonical_data):
        canonical_data["sampling"]["radius"] = 1.0
        with pytest.raises(ConfigParseError, match="sampling.radius"):
            parse_config(canonical_data)

    def test_unknown_b_mode(self, canonical_data):
        canonical_data["coefficients"]["b_mode"] = "diagonal"
        with pytest.raises(ConfigParseError):
            parse_config(canonical_data)

    def test_zero_count(self, canonical_data):
        canonical_data["sampling"]["count"] = 0
        with pytest.raises(ConfigParseError, match="sampling.count"):
            parse_config(canonical_data)

    def test_q_radius_outside_hyperbolic_chart(self, canonical_data):
        canonical_data["manifold"]["c"] = -1.0
        canonical_data["sampling"]["q_radius"] = 2.0
        with pytest.raises(ConfigParseError, match="chart radius"):
            parse_config(canonical_data)

    def test_unknown_check(self, canonical_data):
        canonical_data["checks"] = ["nijenhuis", "holomorphic"]
        with pytest.raises(ConfigParseError):
            parse_config(canonical_data)

    def test_check_subset(self, canonical_data):
        canonical_data["checks"] = ["nijenhuis", "hermitian"]
        assert parse_config(canonical_data).checks == ["nijenhuis", "hermitian"]

    def test_echo_round_trip(self, kahler_sphere_config):
        echoed = kahler_sphere_config.echo()
        assert echoed["metric"]["lambda"] == {"family": "poly", "coeffs": [1.0, 1.0]}
        assert echoed["manifold"]["chart_radius"] is None
        assert parse_config(echoed) == kahler_sphere_config

    def test_check_names_are_stable(self):
        assert CHECK_NAMES == (
            "curvature_identity",
            "almost_complex",
            "acs_identities",
            "integrability_identities",
            "nijenhuis",
            "hermitian",
            "d_omega",
            "d_omega_closed_form",
            "nabla_j",
        )


class TestLoadConfig:
    """Test reading configuration files."""

    def test_load(self, write_config, canonical_data, canonical_config):
        assert load_config(write_config(canonical_data)) == canonical_config

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigParseError, match="cannot read config"):
            load_config(tmp_path / "absent.json")

    def test_malformed_json_reports_line(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{\n  "manifold": {"n": 3, "c": 0.0},\n  "sampling": {"seed": }\n}\n', encoding="utf-8")
        with pytest.raises(ConfigParseError, match="line 3"):
            load_config(path)

    def test_top_level_must_be_object(self, tmp_path):
        path = tmp_path / "list.json"
        path.write_text("[1, 2]", encoding="utf-8")
        with pytest.raises(ConfigParseError, match="JSON object"):
            load_config(path)


class TestPerturbation:
    """Test parsing of name=delta perturbations."""

    def test_additive(self):
        perturbation = Perturbation.parse("b1=+0.05")
        assert perturbation.name is PerturbationName.B1
        assert perturbation.delta == 0.05
        assert not perturbation.is_scale
        assert perturbation.target == "nijenhuis"

    @pytest.mark.parametrize(
        "text,target",
        [
            ("b3=-0.1", "nijenhuis"),
            ("c1-scale=1.1", "hermitian"),
            ("mu=0.1", "d_omega"),
            ("lambda-scale=2", "d_omega"),
        ],
    )
    def test_targets(self, text, target):
        assert Perturbation.parse(text).target == target

    def test_scale_must_be_positive(self):
        with pytest.raises(ConfigParseError):
            Perturbation.parse("c1-scale=0")

    @pytest.mark.parametrize("text", ["b1", "b2=0.1", "b1=abc", "b1=nan", "=0.1"])
    def test_invalid(self, text):
        with pytest.raises(ConfigParseError):
            Perturbation.parse(text)


class TestSettings:
    """Test environment-driven settings."""

    def test_defaults(self):
        settings = Settings.from_env()
        assert 1 <= settings.threads <= 8
        assert settings.log_level == "WARNING"

    def test_from_env(self, monkeypatch):
        monkeypatch.setenv("KLIFT_THREADS", "3")
        monkeypatch.setenv("KLIFT_LOG_LEVEL", "debug")
        settings = Settings.from_env()
        assert settings.threads == 3
        assert settings.log_level == "DEBUG"

    def test_invalid_threads(self, monkeypatch):
        monkeypatch.setenv("KLIFT_THREADS", "0")
        with pytest.raises(ConfigParseError, match="threads"):
            Settings.from_env()

    def test_direct_construction(self):
        with pytest.raises(ValidationError):
            Settings(threads=0)
