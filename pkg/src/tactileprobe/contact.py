"""Quasi-static contact between the spring-loaded probe and a specimen.

The specimen surface is lumped into a single contact stiffness using the
rigid flat cylindrical punch on an elastic half space,

    k_contact = 2 * tip_radius * youngs_modulus / (1 - poisson_ratio**2),

with moduli in MPa and lengths in mm so stiffnesses come out in N/mm. The
probe spring and the contact then deform in series under one force, which
makes every simulated force-displacement trace a line through the origin
with slope equal to the harmonic combination of the two stiffnesses. The
finite height of real blocks is ignored; for indentations much smaller
than the block this is a documented approximation, not a fit parameter.

Traces serialize as CSV with columns (displacement_mm, force_n), a header
row, and the specimen name in a leading ``# specimen=...`` comment.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .csvio import fmt_float, read_csv_table, write_text_atomic
from .errors import (
    ContactError,
    IncompressibleLimitError,
    MalformedTraceError,
    StiffnessError,
)
from .probe import SensorGeometry

__all__ = [
    "Specimen",
    "IndentationProtocol",
    "IndentationTrace",
    "punch_stiffness",
    "series_stiffness",
    "series_equilibrium",
    "simulate_indentation",
    "write_trace_csv",
    "read_trace_csv",
]

TRACE_HEADER = "displacement_mm,force_n"


@dataclass(frozen=True)
class Specimen:
    """Elastic block under test. Modulus in MPa, dimensions in mm."""

    name: str
    youngs_modulus: float
    poisson_ratio: float = 0.45
    width: float = 30.0
    depth: float = 30.0
    height: float = 20.0

    def __post_init__(self) -> None:
        if self.youngs_modulus <= 0:
            raise ContactError(
                f"youngs_modulus must be > 0, got {self.youngs_modulus}"
            )
        if self.poisson_ratio < 0:
            raise ContactError(
                f"poisson_ratio must be >= 0, got {self.poisson_ratio}"
            )
        if self.poisson_ratio >= 0.5:
            raise IncompressibleLimitError(
                f"poisson_ratio {self.poisson_ratio} is at or above the "
                "incompressible limit 0.5"
            )
        for name in ("width", "depth", "height"):
            if getattr(self, name) <= 0:
                raise ContactError(f"{name} must be > 0, got {getattr(self, name)}")


@dataclass(frozen=True)
class IndentationProtocol:
    """Stage motion for one indentation run."""

    max_stage_displacement: float = 1.0  # mm
    n_steps: int = 100
    tip_radius: float = 2.0  # mm

    def __post_init__(self) -> None:
        if self.max_stage_displacement <= 0:
            raise ContactError(
                f"max_stage_displacement must be > 0, got "
                f"{self.max_stage_displacement}"
            )
        if self.n_steps < 2:
            raise ContactError(f"n_steps must be >= 2, got {self.n_steps}")
        if self.tip_radius <= 0:
            raise ContactError(f"tip_radius must be > 0, got {self.tip_radius}")


@dataclass(frozen=True, eq=False)
class IndentationTrace:
    """Ordered (stage displacement, force) samples from one indentation."""

    displacements: np.ndarray  # mm, strictly increasing from 0
    forces: np.ndarray  # N
    specimen_name: str = ""
    protocol: IndentationProtocol | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        displacements = np.asarray(self.displacements, dtype=float)
        forces = np.asarray(self.forces, dtype=float)
        object.__setattr__(self, "displacements", displacements)
        object.__setattr__(self, "forces", forces)
        if displacements.ndim != 1 or displacements.size < 2:
            raise MalformedTraceError("a trace needs at least 2 samples")
        if forces.shape != displacements.shape:
            raise MalformedTraceError(
                f"displacement/force length mismatch: {displacements.size} vs "
                f"{forces.size}"
            )
        if displacements[0] < 0:
            raise MalformedTraceError(
                f"displacements must start at or above 0, got {displacements[0]}"
            )
        if np.any(np.diff(displacements) <= 0):
            raise MalformedTraceError("displacements must be strictly increasing")
        if not np.all(np.isfinite(forces)):
            raise MalformedTraceError("forces must be finite")

    def __len__(self) -> int:
        return int(self.displacements.size)


def punch_stiffness(specimen: Specimen, tip_radius: float) -> float:
    """Contact stiffness of a rigid flat punch on the specimen, N/mm.

    Warns when the tip radius exceeds a tenth of the specimen's lateral
    size, where the half-space approximation starts to degrade.
    """
    if tip_radius <= 0:
        raise ContactError(f"tip_radius must be > 0, got {tip_radius}")
    if specimen.poisson_ratio >= 0.5:
        raise IncompressibleLimitError(
            f"poisson_ratio {specimen.poisson_ratio} is at or above the "
            "incompressible limit 0.5"
        )
    lateral = min(specimen.width, specimen.depth)
    if tip_radius > lateral / 10.0:
        warnings.warn(
            f"tip_radius {tip_radius} mm exceeds a tenth of the specimen's "
            f"lateral size {lateral} mm; half-space contact model degrades",
            UserWarning,
            stacklevel=2,
        )
    return (
        2.0 * tip_radius * specimen.youngs_modulus
        / (1.0 - specimen.poisson_ratio**2)
    )


def series_stiffness(k_spring: float, k_specimen: float) -> float:
    """Effective slope of two stiffnesses deforming in series, N/mm."""
    if k_spring <= 0:
        raise StiffnessError(f"k_spring must be > 0, got {k_spring}")
    if k_specimen <= 0:
        raise StiffnessError(f"k_specimen must be > 0, got {k_specimen}")
    return 1.0 / (1.0 / k_spring + 1.0 / k_specimen)


def series_equilibrium(
    k_spring: float, k_specimen: float, stage_displacement: float
) -> tuple[float, float, float]:
    """Split a stage displacement between the spring and the contact.

    Returns ``(spring_compression, indentation, force)`` with both elements
    carrying the same force and their deformations summing to the stage
    displacement.
    """
    if stage_displacement < 0:
        raise ContactError(
            f"stage_displacement must be >= 0, got {stage_displacement}"
        )
    force = series_stiffness(k_spring, k_specimen) * stage_displacement
    return force / k_spring, force / k_specimen, force


def simulate_indentation(
    geometry: SensorGeometry,
    specimen: Specimen,
    protocol: IndentationProtocol,
) -> IndentationTrace:
    """Press the probe into the specimen over equally spaced stage steps."""
    k_contact = punch_stiffness(specimen, protocol.tip_radius)
    k_eff = series_stiffness(geometry.spring_constant, k_contact)
    displacements = np.linspace(
        0.0, protocol.max_stage_displacement, protocol.n_steps
    )
    return IndentationTrace(
        displacements=displacements,
        forces=k_eff * displacements,
        specimen_name=specimen.name,
        protocol=protocol,
    )


def write_trace_csv(trace: IndentationTrace, path: str | Path) -> Path:
    """Serialize a trace with its specimen name in a comment line."""
    lines = [f"# specimen={trace.specimen_name}", TRACE_HEADER]
    lines.extend(
        f"{fmt_float(d)},{fmt_float(f)}"
        for d, f in zip(trace.displacements, trace.forces)
    )
    return write_text_atomic(path, "\n".join(lines) + "\n")


def read_trace_csv(path: str | Path) -> IndentationTrace:
    """Parse a (displacement_mm, force_n) CSV into a trace."""
    comments, _, rows = read_csv_table(path, expected_header=TRACE_HEADER)
    try:
        displacements = np.array([float(row[0]) for row in rows])
        forces = np.array([float(row[1]) for row in rows])
    except (ValueError, IndexError) as exc:
        raise MalformedTraceError(f"{path}: malformed trace row: {exc}") from None
    return IndentationTrace(
        displacements=displacements,
        forces=forces,
        specimen_name=comments.get("specimen", ""),
    )
