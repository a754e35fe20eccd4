"""Exception and warning types shared across the toolkit.

Everything derives from :class:`ProbeError` (itself a ``ValueError``) so
callers can catch domain failures with a single except clause while tests
and pipelines can still distinguish the specific condition.
"""

__all__ = [
    "ProbeError",
    "GeometryError",
    "SingularCircuitError",
    "AliasingError",
    "InsufficientWindowError",
    "NoReferenceError",
    "CalibrationError",
    "FlatResponseError",
    "UnderdeterminedError",
    "ContactError",
    "IncompressibleLimitError",
    "StiffnessError",
    "MalformedTraceError",
    "NonContactError",
    "SaturatedMeasurementError",
    "ScenarioParseError",
    "ScenarioValidationError",
    "PoorFitWarning",
]


class ProbeError(ValueError):
    """Base class for all domain errors raised by this package."""


class GeometryError(ProbeError):
    """Degenerate or inconsistent probe geometry."""


class SingularCircuitError(ProbeError):
    """Primary circuit has zero total impedance; current is undefined."""


class AliasingError(ProbeError):
    """Sample rate below twice the excitation frequency."""


class InsufficientWindowError(ProbeError):
    """Analysis window shorter than one excitation cycle."""


class NoReferenceError(ProbeError):
    """Demodulation reference carries no usable AC amplitude."""


class CalibrationError(ProbeError):
    """Calibration input unusable or result non-physical."""


class FlatResponseError(CalibrationError):
    """No linear region found: the response is flat everywhere."""


class UnderdeterminedError(CalibrationError):
    """Too few independent data points to constrain the fit."""


class ContactError(ProbeError):
    """Invalid contact-mechanics input."""


class IncompressibleLimitError(ContactError):
    """Poisson ratio at or above the incompressible limit of 0.5."""


class StiffnessError(ContactError):
    """Non-positive stiffness where a positive one is required."""


class MalformedTraceError(ProbeError):
    """Indentation trace samples are not usable (e.g. non-increasing)."""


class NonContactError(ProbeError):
    """Trace shows no contact: fitted stiffness is not positive."""


class SaturatedMeasurementError(ProbeError):
    """Effective stiffness too close to the spring rate to invert."""


class ScenarioParseError(ProbeError):
    """Scenario config file could not be parsed; message carries line info."""


class ScenarioValidationError(ProbeError):
    """Scenario config parsed but holds invalid values; message names the field."""


class PoorFitWarning(UserWarning):
    """Fit succeeded but the coefficient of determination is low."""
