"""Stiffness estimation and material classification from indentation traces.

The measured quantity is the slope of a force-displacement trace, which the
series-spring contact model bounds above by the probe's spring rate. Very
stiff specimens therefore saturate: their slope approaches the spring rate
and their own stiffness becomes unresolvable. Classification consequently
happens in slope space rather than inferred-modulus space, with distances
taken on log slopes because candidate moduli span orders of magnitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .contact import IndentationTrace, Specimen, punch_stiffness, series_stiffness
from .csvio import read_csv_table
from .errors import (
    CalibrationError,
    NonContactError,
    SaturatedMeasurementError,
    StiffnessError,
)

__all__ = [
    "MaterialLibrary",
    "ClassificationResult",
    "estimate_contact_stiffness",
    "infer_specimen_stiffness",
    "classify",
    "load_material_library",
    "bundled_material_library",
]

MATERIALS_HEADER = "name,youngs_modulus_mpa"
SATURATION_TOLERANCE = 1e-3


@dataclass(frozen=True)
class MaterialLibrary:
    """Candidate materials with the contact settings used to compare them."""

    entries: tuple[tuple[str, float], ...]  # (name, Young's modulus in MPa)
    poisson_ratio: float = 0.45
    tip_radius: float = 2.0  # mm

    def __post_init__(self) -> None:
        entries = tuple((str(n), float(e)) for n, e in self.entries)
        object.__setattr__(self, "entries", entries)
        if len(entries) < 2:
            raise CalibrationError(
                f"a material library needs at least 2 entries, got {len(entries)}"
            )
        names = [name for name, _ in entries]
        if len(set(names)) != len(names):
            raise CalibrationError("material names must be distinct")
        for name, modulus in entries:
            if modulus <= 0:
                raise CalibrationError(
                    f"modulus for {name!r} must be > 0, got {modulus}"
                )
        if not (0.0 <= self.poisson_ratio < 0.5):
            raise CalibrationError(
                f"poisson_ratio must lie in [0, 0.5), got {self.poisson_ratio}"
            )
        if self.tip_radius <= 0:
            raise CalibrationError(f"tip_radius must be > 0, got {self.tip_radius}")

    def specimen(self, name: str) -> Specimen:
        """Specimen with the library's shared contact settings and default block."""
        for entry_name, modulus in self.entries:
            if entry_name == name:
                return Specimen(
                    name=name,
                    youngs_modulus=modulus,
                    poisson_ratio=self.poisson_ratio,
                )
        raise KeyError(name)

    def expected_slopes(self, k_spring: float) -> list[tuple[str, float]]:
        """Trace slope the series model predicts for each entry, N/mm."""
        slopes = []
        for name, _ in self.entries:
            k_contact = punch_stiffness(self.specimen(name), self.tip_radius)
            slopes.append((name, series_stiffness(k_spring, k_contact)))
        return slopes


@dataclass(frozen=True)
class ClassificationResult:
    """Nearest-material decision for one trace.

    ``estimated_specimen_stiffness`` is None when the trace slope saturates
    against the spring rate, in which case the specimen is only known to be
    at least as stiff as the probe can resolve.
    """

    label: str
    estimated_specimen_stiffness: float | None  # N/mm
    log_distance_margin: float

    def __post_init__(self) -> None:
        if self.log_distance_margin < 0:
            raise CalibrationError(
                f"log_distance_margin must be >= 0, got {self.log_distance_margin}"
            )


def estimate_contact_stiffness(trace: IndentationTrace) -> float:
    """Slope of the force-displacement line through the origin, N/mm."""
    displacements = trace.displacements
    forces = trace.forces
    denominator = float(np.sum(displacements**2))
    slope = float(np.sum(displacements * forces)) / denominator
    if slope <= 0:
        raise NonContactError(
            f"fitted trace slope {slope:.6g} N/mm shows no contact"
        )
    return slope


def infer_specimen_stiffness(
    k_eff: float, k_spring: float, saturation_tolerance: float = SATURATION_TOLERANCE
) -> float:
    """Invert the series model: specimen stiffness from the measured slope.

    Refuses (rather than extrapolating to a huge unstable value) when the
    measured slope is within ``saturation_tolerance`` of the spring rate.
    """
    if k_spring <= 0:
        raise StiffnessError(f"k_spring must be > 0, got {k_spring}")
    if k_eff <= 0:
        raise StiffnessError(f"k_eff must be > 0, got {k_eff}")
    if k_eff >= k_spring * (1.0 - saturation_tolerance):
        raise SaturatedMeasurementError(
            f"measured slope {k_eff:.6g} N/mm is within "
            f"{saturation_tolerance:.0e} of the spring rate {k_spring:.6g} N/mm; "
            "specimen stiffness is unresolvable"
        )
    return 1.0 / (1.0 / k_eff - 1.0 / k_spring)


def classify(
    trace: IndentationTrace, library: MaterialLibrary, k_spring: float
) -> ClassificationResult:
    """Assign the trace to the library entry with the nearest expected slope.

    Distances are absolute differences of log slopes, which makes the
    decision invariant to a common positive scaling of the trace forces and
    the candidate slopes. Ties go to the earlier library entry with a zero
    margin.
    """
    slope = estimate_contact_stiffness(trace)
    log_slope = math.log(slope)
    distances = [
        (abs(log_slope - math.log(expected)), name)
        for name, expected in library.expected_slopes(k_spring)
    ]
    ranked = sorted(range(len(distances)), key=lambda i: distances[i][0])
    best, runner_up = ranked[0], ranked[1]
    # argmin with first-entry tie-break: sorted() is stable over library order
    margin = distances[runner_up][0] - distances[best][0]

    try:
        estimated = infer_specimen_stiffness(slope, k_spring)
    except SaturatedMeasurementError:
        estimated = None

    return ClassificationResult(
        label=distances[best][1],
        estimated_specimen_stiffness=estimated,
        log_distance_margin=margin,
    )


def load_material_library(
    path: str | Path, poisson_ratio: float = 0.45, tip_radius: float = 2.0
) -> MaterialLibrary:
    """Read a (name, youngs_modulus_mpa) CSV into a library."""
    _, _, rows = read_csv_table(path, expected_header=MATERIALS_HEADER)
    entries = []
    for row in rows:
        try:
            name, modulus = row[0], float(row[1])
        except (ValueError, IndexError) as exc:
            raise CalibrationError(f"{path}: malformed material row: {exc}") from None
        entries.append((name, modulus))
    return MaterialLibrary(
        entries=tuple(entries), poisson_ratio=poisson_ratio, tip_radius=tip_radius
    )


def bundled_material_library(
    poisson_ratio: float = 0.45, tip_radius: float = 2.0
) -> MaterialLibrary:
    """The material library shipped with the package."""
    data = resources.files(__package__) / "data" / "materials.csv"
    with resources.as_file(data) as path:
        return load_material_library(path, poisson_ratio, tip_radius)
