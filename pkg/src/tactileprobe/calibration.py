"""Least-squares calibration utilities.

Three fits cover the toolkit's needs: a plain ordinary-least-squares line
(spring constant, generic traces), a sensitivity fit that first strips the
flat plateau out of an output-voltage-vs-position sweep, and a constrained
fit of the primary-circuit transfer model

    output = gain * excitation / sqrt((series_r + primary_r)**2 + reactance**2)

to measured (resistance, excitation, output) rows. The circuit fit
minimizes the mean squared *relative* error so rows with different output
levels weigh equally, and runs a coarse grid followed by a deterministic
derivative-free pattern refinement, so repeated fits of the same rows give
identical parameters.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .csvio import read_csv_table
from .errors import (
    CalibrationError,
    FlatResponseError,
    PoorFitWarning,
    UnderdeterminedError,
)
from .probe import CircuitParams

__all__ = [
    "LineFit",
    "CircuitResponseRow",
    "fit_line",
    "calibrate_spring",
    "calibrate_sensitivity",
    "fit_circuit_params",
    "predict_circuit_output",
    "circuit_fit_objective",
    "read_circuit_rows_csv",
]

CIRCUIT_ROWS_HEADER = "resistance_ohm,excitation_v,output_v"


@dataclass(frozen=True)
class LineFit:
    """Ordinary least-squares line y = slope * x + intercept."""

    slope: float
    intercept: float
    r_squared: float
    n_points: int

    def __post_init__(self) -> None:
        if self.n_points < 2:
            raise CalibrationError(f"n_points must be >= 2, got {self.n_points}")
        if not (0.0 <= self.r_squared <= 1.0):
            raise CalibrationError(
                f"r_squared must lie in [0, 1], got {self.r_squared}"
            )

    def predict(self, x):
        return self.slope * np.asarray(x, dtype=float) + self.intercept


@dataclass(frozen=True)
class CircuitResponseRow:
    """One measured operating point of the excitation circuit."""

    series_resistance: float  # ohm
    excitation_voltage: float  # V
    measured_output: float  # V

    def __post_init__(self) -> None:
        for name in ("series_resistance", "excitation_voltage", "measured_output"):
            value = getattr(self, name)
            if value <= 0:
                raise CalibrationError(f"{name} must be > 0, got {value}")


def fit_line(points) -> LineFit:
    """Least-squares line through (x, y) points given as an (n, 2) sequence."""
    array = np.asarray(points, dtype=float)
    if array.ndim != 2 or array.shape[1] != 2:
        raise CalibrationError(
            f"points must be a sequence of (x, y) pairs, got shape {array.shape}"
        )
    if array.shape[0] < 2:
        raise CalibrationError(f"need at least 2 points, got {array.shape[0]}")
    x = array[:, 0]
    y = array[:, 1]
    if float(np.ptp(x)) == 0.0:
        raise UnderdeterminedError("all x values are identical; no line is defined")
    slope, intercept = (float(c) for c in np.polyfit(x, y, 1))
    residuals = y - (slope * x + intercept)
    ss_res = float(np.sum(residuals**2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        r_squared = 1.0
    else:
        r_squared = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return LineFit(slope, intercept, r_squared, int(array.shape[0]))


def calibrate_spring(points, min_r_squared: float = 0.99) -> float:
    """Spring rate in N/mm from (elongation, force) points.

    Issues a :class:`PoorFitWarning` when the line explains less than
    ``min_r_squared`` of the variance; raises when the slope is not a
    physical spring rate.
    """
    fit = fit_line(points)
    if fit.slope <= 0:
        raise CalibrationError(
            f"fitted spring constant {fit.slope:.6g} N/mm is not positive"
        )
    if fit.r_squared < min_r_squared:
        warnings.warn(
            f"spring fit R^2 = {fit.r_squared:.4f} is below {min_r_squared}",
            PoorFitWarning,
            stacklevel=2,
        )
    return fit.slope


def calibrate_sensitivity(
    samples, plateau_fraction: float = 0.10
) -> tuple[float, tuple[float, float]]:
    """Sensitivity in V/mm from (position, amplitude) samples.

    Marks intervals whose local slope magnitude falls below
    ``plateau_fraction`` of the largest local slope as plateau, fits a line
    through the longest contiguous non-plateau run, and returns the slope
    magnitude together with the fitted region's position bounds.
    """
    array = np.asarray(samples, dtype=float)
    if array.ndim != 2 or array.shape[1] != 2:
        raise CalibrationError(
            f"samples must be a sequence of (position, amplitude) pairs, "
            f"got shape {array.shape}"
        )
    if array.shape[0] < 4:
        raise CalibrationError(f"need at least 4 samples, got {array.shape[0]}")
    positions = array[:, 0]
    amplitudes = array[:, 1]
    if np.any(np.diff(positions) <= 0):
        raise CalibrationError("positions must be strictly increasing")

    local = np.diff(amplitudes) / np.diff(positions)
    max_slope = float(np.max(np.abs(local)))
    if max_slope == 0.0:
        raise FlatResponseError("response is constant; no linear region exists")
    ramp = np.abs(local) >= plateau_fraction * max_slope

    start, stop = _longest_true_run(ramp)
    region = array[start : stop + 2]  # intervals [start, stop] span these samples
    fit = fit_line(region)
    return abs(fit.slope), (float(positions[start]), float(positions[stop + 1]))


def _longest_true_run(mask: np.ndarray) -> tuple[int, int]:
    """First longest contiguous run of True values, as (first, last) indices."""
    best_start = best_stop = -1
    best_len = 0
    run_start = None
    for i, flag in enumerate(mask):
        if flag and run_start is None:
            run_start = i
        if (not flag or i == len(mask) - 1) and run_start is not None:
            run_stop = i if flag else i - 1
            if run_stop - run_start + 1 > best_len:
                best_len = run_stop - run_start + 1
                best_start, best_stop = run_start, run_stop
            run_start = None
    return best_start, best_stop


def predict_circuit_output(
    params: CircuitParams, series_resistance: float, excitation_voltage: float
) -> float:
    """Output voltage the fitted transfer model predicts for one row."""
    impedance = math.hypot(
        series_resistance + params.primary_resistance, params.primary_reactance
    )
    return params.gain * excitation_voltage / impedance


def circuit_fit_objective(rows, primary_resistance: float, reactance: float,
                          gain: float) -> float:
    """Mean squared relative output error of the transfer model on ``rows``."""
    resistances, excitations, outputs = _row_arrays(rows)
    predicted = gain * excitations / np.hypot(resistances + primary_resistance,
                                              reactance)
    return float(np.mean(((predicted - outputs) / outputs) ** 2))


def fit_circuit_params(
    rows,
    reference_frequency: float = 1000.0,
    grid_points: int = 61,
    bound_scale: float = 3.0,
) -> CircuitParams:
    """Constrained fit of the transfer model to measured circuit rows.

    ``rows`` are :class:`CircuitResponseRow` instances or (resistance,
    excitation, output) triples; at least three rows with three distinct
    resistances are required. Resistance and reactance are searched over
    ``[0, bound_scale * max(series_resistance)]`` on a ``grid_points``
    square grid, the transfer gain has a closed form at each grid node, and
    the best nodes seed a deterministic pattern search. The result is fully
    reproducible: no randomness is involved.
    """
    resistances, excitations, outputs = _row_arrays(rows)
    if resistances.size < 3:
        raise UnderdeterminedError(
            f"need at least 3 rows to fit 3 parameters, got {resistances.size}"
        )
    if np.unique(resistances).size < 3:
        raise UnderdeterminedError(
            "need at least 3 distinct series resistances to fit 3 parameters"
        )

    def objective(primary_r: float, reactance: float) -> tuple[float, float]:
        # Optimal gain is a 1-D least-squares problem with a closed form.
        shape = excitations / np.hypot(resistances + primary_r, reactance)
        u = shape / outputs
        gain = float(np.sum(u) / np.sum(u**2))
        return float(np.mean((gain * u - 1.0) ** 2)), gain

    bound = bound_scale * float(np.max(resistances))
    axis = np.linspace(0.0, bound, grid_points)
    scores = np.empty((grid_points, grid_points))
    for i, r in enumerate(axis):
        for j, x in enumerate(axis):
            scores[i, j] = objective(r, x)[0]

    order = np.argsort(scores, axis=None, kind="stable")
    starts = [np.unravel_index(k, scores.shape) for k in order[:5]]

    spacing = axis[1] - axis[0]
    best_point: tuple[float, float] | None = None
    best_score = math.inf
    for i, j in starts:
        point, score = _pattern_search(objective, (axis[i], axis[j]), spacing)
        if score < best_score:
            best_score = score
            best_point = point

    assert best_point is not None
    primary_r, reactance = best_point
    _, gain = objective(primary_r, reactance)
    return CircuitParams(
        primary_resistance=primary_r,
        primary_reactance=reactance,
        gain=gain,
        reference_frequency=reference_frequency,
    )


def _pattern_search(objective, start, step, min_step=1e-12, max_iter=400):
    """Compass pattern search over the non-negative quadrant."""
    point = (max(0.0, start[0]), max(0.0, start[1]))
    score = objective(*point)[0]
    for _ in range(max_iter):
        moved = False
        for dr, dx in ((step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)):
            candidate = (max(0.0, point[0] + dr), max(0.0, point[1] + dx))
            if candidate == point:
                continue
            candidate_score = objective(*candidate)[0]
            if candidate_score < score:
                point, score = candidate, candidate_score
                moved = True
        if not moved:
            step *= 0.5
            if step < min_step:
                break
    return point, score


def _row_arrays(rows) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    normalized = []
    for row in rows:
        if not isinstance(row, CircuitResponseRow):
            resistance, excitation, output = row
            row = CircuitResponseRow(float(resistance), float(excitation), float(output))
        normalized.append(
            (row.series_resistance, row.excitation_voltage, row.measured_output)
        )
    if not normalized:
        raise UnderdeterminedError("no circuit rows provided")
    array = np.asarray(normalized, dtype=float)
    return array[:, 0], array[:, 1], array[:, 2]


def read_circuit_rows_csv(path: str | Path) -> list[CircuitResponseRow]:
    """Parse (resistance_ohm, excitation_v, output_v) rows from CSV."""
    _, _, rows = read_csv_table(path, expected_header=CIRCUIT_ROWS_HEADER)
    parsed = []
    for row in rows:
        try:
            resistance, excitation, output = (float(v) for v in row)
        except (ValueError, IndexError) as exc:
            raise CalibrationError(f"{path}: malformed circuit row: {exc}") from None
        parsed.append(CircuitResponseRow(resistance, excitation, output))
    return parsed
