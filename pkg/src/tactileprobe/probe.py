"""Static electromagnetic model of the differential-transformer probe.

The probe is a sliding ferromagnetic core inside three coaxial windings: an
AC-excited primary flanked by two secondaries, A and B. Coupling between
the primary and each secondary is modeled as the fraction of that
secondary's axial span covered by the core, scaled by one lumped gain that
absorbs turn counts, permeability and flux leakage. A series RL model of
the primary circuit converts the drive voltage into the coil current that
the coupling multiplies, so each secondary amplitude is

    v = angular_frequency * coupling_gain * coverage_fraction * current.

Positions are axial coordinates in millimetres. The bundled default
geometry is centred on the secondaries' common midpoint, which makes the
two coverage fractions equal at position zero and the signed differential
output antisymmetric about it.

All functions here are pure; inputs are immutable dataclasses, so
everything is safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GeometryError, SingularCircuitError

__all__ = [
    "SensorGeometry",
    "ExcitationConfig",
    "CircuitParams",
    "VoltagePair",
    "default_geometry",
    "default_excitation",
    "default_circuit",
    "overlap_length",
    "coupling_fraction",
    "coupling_oracle",
    "primary_current_amplitude",
    "secondary_amplitudes",
    "differential_output",
    "differential_slope",
]


@dataclass(frozen=True)
class SensorGeometry:
    """Axial layout and mechanical constants of the probe.

    Lengths are in mm. ``coil_a`` and ``coil_b`` are (start, end) axial
    intervals of the two secondary windings and must not overlap. The two
    secondaries share one turn count by construction. ``coupling_gain``
    lumps turns, permeability and leakage into a single V*s/(A*rad)
    constant. ``spring_constant`` is the return-spring rate in N/mm.
    """

    core_length: float
    coil_a: tuple[float, float]
    coil_b: tuple[float, float]
    turns_primary: int = 200
    turns_secondary: int = 400
    coupling_gain: float = 1.4e-3
    spring_constant: float = 1.3

    def __post_init__(self) -> None:
        object.__setattr__(self, "coil_a", _as_interval("coil_a", self.coil_a))
        object.__setattr__(self, "coil_b", _as_interval("coil_b", self.coil_b))
        if self.core_length <= 0:
            raise GeometryError(f"core_length must be > 0, got {self.core_length}")
        a0, a1 = self.coil_a
        b0, b1 = self.coil_b
        if not (a1 <= b0 or b1 <= a0):
            raise GeometryError(
                f"secondary coils overlap: coil_a={self.coil_a}, coil_b={self.coil_b}"
            )
        if self.turns_primary < 1:
            raise GeometryError(f"turns_primary must be >= 1, got {self.turns_primary}")
        if self.turns_secondary < 1:
            raise GeometryError(
                f"turns_secondary must be >= 1, got {self.turns_secondary}"
            )
        if self.coupling_gain <= 0:
            raise GeometryError(f"coupling_gain must be > 0, got {self.coupling_gain}")
        if self.spring_constant <= 0:
            raise GeometryError(
                f"spring_constant must be > 0, got {self.spring_constant}"
            )

    def coil_interval(self, coil: str) -> tuple[float, float]:
        """Axial (start, end) of secondary ``coil``, either ``'a'`` or ``'b'``."""
        key = coil.lower()
        if key == "a":
            return self.coil_a
        if key == "b":
            return self.coil_b
        raise GeometryError(f"unknown coil {coil!r}, expected 'a' or 'b'")

    @property
    def center(self) -> float:
        """Midpoint of the span covered by the two secondaries."""
        lo = min(self.coil_a[0], self.coil_b[0])
        hi = max(self.coil_a[1], self.coil_b[1])
        return 0.5 * (lo + hi)


def _as_interval(name: str, value: tuple[float, float]) -> tuple[float, float]:
    try:
        start, end = (float(v) for v in value)
    except (TypeError, ValueError):
        raise GeometryError(f"{name} must be a (start, end) pair, got {value!r}") from None
    if end <= start:
        raise GeometryError(f"{name} interval is degenerate: ({start}, {end})")
    return (start, end)


@dataclass(frozen=True)
class ExcitationConfig:
    """Sinusoidal drive applied to the primary winding."""

    amplitude: float  # V peak
    frequency: float  # Hz
    series_resistance: float = 0.0  # ohm, external to the coil

    def __post_init__(self) -> None:
        if self.amplitude <= 0:
            raise GeometryError(f"amplitude must be > 0, got {self.amplitude}")
        if self.frequency <= 0:
            raise GeometryError(f"frequency must be > 0, got {self.frequency}")
        if self.series_resistance < 0:
            raise GeometryError(
                f"series_resistance must be >= 0, got {self.series_resistance}"
            )


@dataclass(frozen=True)
class CircuitParams:
    """Lumped primary-circuit parameters.

    ``primary_reactance`` is the coil reactance at ``reference_frequency``
    and is scaled linearly with the actual excitation frequency. ``gain``
    is the dimensionless transfer constant of the measured output chain
    (output volts per ampere of primary current, numerically).
    """

    primary_resistance: float = 0.0  # ohm
    primary_reactance: float = 0.0  # ohm at reference_frequency
    gain: float = 0.0
    reference_frequency: float = 1000.0  # Hz

    def __post_init__(self) -> None:
        for name in ("primary_resistance", "primary_reactance", "gain"):
            value = getattr(self, name)
            if value < 0:
                raise GeometryError(f"{name} must be >= 0, got {value}")
        if self.reference_frequency <= 0:
            raise GeometryError(
                f"reference_frequency must be > 0, got {self.reference_frequency}"
            )


@dataclass(frozen=True)
class VoltagePair:
    """Induced amplitudes of the two secondary coils, in volts."""

    v_a: float
    v_b: float

    def __post_init__(self) -> None:
        if self.v_a < 0 or self.v_b < 0:
            raise GeometryError(
                f"secondary amplitudes must be >= 0, got ({self.v_a}, {self.v_b})"
            )


def default_geometry() -> SensorGeometry:
    """Probe used by the bundled scenarios: 20 mm core over two 10 mm coils."""
    return SensorGeometry(core_length=20.0, coil_a=(-12.0, -2.0), coil_b=(2.0, 12.0))


def default_excitation() -> ExcitationConfig:
    """1 kHz, 10 V drive with a 6.2 ohm series resistor."""
    return ExcitationConfig(amplitude=10.0, frequency=1000.0, series_resistance=6.2)


def default_circuit() -> CircuitParams:
    """Nominal primary-circuit lumping used by the bundled scenarios."""
    return CircuitParams(
        primary_resistance=1.0, primary_reactance=2.05, gain=7.0,
        reference_frequency=1000.0,
    )


def overlap_length(
    core_start: float, core_end: float, coil_start: float, coil_end: float
) -> float:
    """Length of the intersection of the core and coil axial intervals, mm."""
    if core_end <= core_start:
        raise GeometryError(f"degenerate core interval ({core_start}, {core_end})")
    if coil_end <= coil_start:
        raise GeometryError(f"degenerate coil interval ({coil_start}, {coil_end})")
    return max(0.0, min(core_end, coil_end) - max(core_start, coil_start))


def coupling_fraction(
    geometry: SensorGeometry, coil: str, core_position: float
) -> float:
    """Fraction of ``coil``'s span covered by the core centred at ``core_position``.

    Piecewise linear in position: constant at 1 while the core fully covers
    the coil, ramping linearly while a core edge crosses the coil span, and
    0 once they are disjoint. Positions beyond the physical travel are
    evaluated the same way; the fraction clamps naturally to [0, 1].
    """
    start, end = geometry.coil_interval(coil)
    half = 0.5 * geometry.core_length
    covered = overlap_length(core_position - half, core_position + half, start, end)
    return covered / (end - start)


def coupling_oracle(
    geometry: SensorGeometry, coil: str, core_position: float, n_slices: int
) -> float:
    """Brute-force coverage estimate used to cross-check coupling_fraction.

    Partitions the coil span into ``n_slices`` equal slices and counts slice
    midpoints lying under the core. Differs from the analytic fraction by at
    most 1/n_slices.
    """
    if n_slices < 1:
        raise ValueError(f"n_slices must be >= 1, got {n_slices}")
    start, end = geometry.coil_interval(coil)
    half = 0.5 * geometry.core_length
    width = (end - start) / n_slices
    midpoints = start + (np.arange(n_slices) + 0.5) * width
    under_core = (midpoints >= core_position - half) & (midpoints <= core_position + half)
    return float(np.count_nonzero(under_core)) / n_slices


def primary_current_amplitude(
    excitation: ExcitationConfig, circuit: CircuitParams
) -> float:
    """Peak primary current through the series RL circuit, in amperes.

    The coil reactance is scaled linearly from its reference-frequency value
    to the excitation frequency before combining with the resistances.
    """
    reactance = circuit.primary_reactance * (
        excitation.frequency / circuit.reference_frequency
    )
    resistance = excitation.series_resistance + circuit.primary_resistance
    impedance = math.hypot(resistance, reactance)
    if impedance == 0.0:
        raise SingularCircuitError(
            "total primary impedance is zero; current is unbounded"
        )
    return excitation.amplitude / impedance


def secondary_amplitudes(
    geometry: SensorGeometry,
    excitation: ExcitationConfig,
    circuit: CircuitParams,
    core_position: float,
) -> VoltagePair:
    """Induced amplitude of each secondary for a given core position."""
    current = primary_current_amplitude(excitation, circuit)
    omega = 2.0 * math.pi * excitation.frequency
    scale = omega * geometry.coupling_gain * current
    return VoltagePair(
        v_a=scale * coupling_fraction(geometry, "a", core_position),
        v_b=scale * coupling_fraction(geometry, "b", core_position),
    )


def differential_output(pair: VoltagePair, phase_sign: int | None = None) -> float:
    """Signed differential voltage, positive when the core sits toward coil A.

    With model amplitudes the sign is already carried by the difference
    ``v_a - v_b``. When the pair comes from magnitude-only measurements,
    pass ``phase_sign`` (+1 or -1, from the demodulated phase) to apply
    the measured sign to the magnitude of the difference instead.
    """
    if phase_sign is None:
        return pair.v_a - pair.v_b
    if phase_sign not in (-1, 1):
        raise ValueError(f"phase_sign must be +1 or -1, got {phase_sign!r}")
    return phase_sign * abs(pair.v_a - pair.v_b)


def differential_slope(
    geometry: SensorGeometry,
    excitation: ExcitationConfig,
    circuit: CircuitParams,
    at_position: float | None = None,
    step: float = 1e-3,
) -> float:
    """Local slope of the signed differential output, in V/mm.

    Central difference around ``at_position`` (defaults to the geometric
    center). Within the engagement range this is the ideal calibration
    constant for converting demodulated amplitude back into core position.
    """
    position = geometry.center if at_position is None else at_position
    upper = differential_output(
        secondary_amplitudes(geometry, excitation, circuit, position + step)
    )
    lower = differential_output(
        secondary_amplitudes(geometry, excitation, circuit, position - step)
    )
    return (upper - lower) / (2.0 * step)
