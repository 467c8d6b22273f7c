"""
klift - Kahler structures of general natural lift type on cotangent bundles.

This package builds the almost complex structure J, the metric G and the
fundamental 2-form Omega of general natural lift type on T*M over a space form,
and checks numerically each step of the chain:
- almost complex: J^2 = -I
- integrable: vanishing Nijenhuis tensor
- Hermitian: G(JX, JY) = G(X, Y)
- almost Kahler: d Omega = 0
- Kahler: integrable and almost Kahler
"""

from dotenv import load_dotenv

__version__ = "0.1.0"

from klift.config import Perturbation, RunConfig, Settings, load_config
from klift.errors import KliftError
from klift.scalar_curves import constant, eval_jet, exponential, poly
from klift.space_forms import SpaceForm
from klift.structure import NaturalLiftStructure
from klift.verifier import VerificationReport, falsify, run_suite, sweep

__all__ = [
    "KliftError",
    "NaturalLiftStructure",
    "Perturbation",
    "RunConfig",
    "Settings",
    "SpaceForm",
    "VerificationReport",
    "constant",
    "eval_jet",
    "exponential",
    "falsify",
    "load_config",
    "poly",
    "run_suite",
    "sweep",
]

load_dotenv()
