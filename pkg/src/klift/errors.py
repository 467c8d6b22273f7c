"""
Exception hierarchy for klift.

Library code raises these; only the command line front end turns them into
exit codes and "Error: ..." messages.
"""


class KliftError(Exception):
    """Base class for every error raised by klift."""


class NonFiniteInput(KliftError):
    """A scalar argument is NaN, infinite, or outside its admissible range."""


class OutsideChart(KliftError):
    """A base point lies outside the admissible radius of the conformal chart."""


class StencilOutsideChart(OutsideChart):
    """A finite-difference stencil around a point leaves the chart."""


class PositivityViolation(KliftError):
    """A coefficient that must stay positive (a1, a1 + 2t b1, ...) does not."""


class SingularDenominator(KliftError):
    """The shared denominator of the integrable b-coefficients vanishes."""

    def __init__(self, message: str, denominator: float = 0.0):
        super().__init__(message)
        self.denominator = denominator


class ProportionalityDomain(KliftError):
    """The metric proportionality factors violate lambda > 0 or lambda + 2t mu > 0."""


class CoefficientMismatch(KliftError):
    """A coefficient record was evaluated at a different energy density than the point."""


class NotPositiveDefinite(KliftError):
    """An assembled metric failed the positive-definiteness test."""


class SingularFrame(KliftError):
    """A change-of-basis matrix cannot be inverted."""


class FrameMismatch(KliftError):
    """Two frame tensors live in different frames or have incompatible shapes."""


class ExhaustedSampling(KliftError):
    """Too many sample candidates were rejected to fill the requested count."""


class PerturbationTooSmall(KliftError):
    """A falsification run did not push the targeted residual above its floor."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        # the VerificationReport of the run, still worth writing out
        self.report = report


class ConfigParseError(KliftError):
    """A run configuration could not be read or failed schema validation."""
