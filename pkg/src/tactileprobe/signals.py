"""Time-domain signal chain: synthesis, lock-in demodulation, conversion.

Turns the static probe model into sampled waveforms and back. The
demodulator is a two-phase (quadrature) lock-in: it estimates the carrier
frequency from the reference, truncates both records to a whole number of
cycles to kill spectral leakage, and correlates against in-phase and
quadrature carriers. Amplitude recovery is therefore independent of the
signal's phase offset; the phase only decides the sign.

Waveforms serialize as two-column CSV (time_s, volts) with a header row;
emitted files also carry the sample rate in a comment so a parse/serialize
round trip is byte identical.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .csvio import fmt_float, read_csv_table, write_text_atomic
from .errors import (
    AliasingError,
    CalibrationError,
    InsufficientWindowError,
    NoReferenceError,
)
from .probe import (
    CircuitParams,
    ExcitationConfig,
    SensorGeometry,
    differential_output,
    secondary_amplitudes,
)

__all__ = [
    "Waveform",
    "DemodResult",
    "synthesize",
    "demodulate",
    "position_from_differential",
    "force_from_position",
    "write_waveform_csv",
    "read_waveform_csv",
]

WAVEFORM_HEADER = "time_s,volts"


@dataclass(frozen=True, eq=False)
class Waveform:
    """Uniformly sampled voltage record."""

    sample_rate: float  # Hz
    samples: np.ndarray  # V

    def __post_init__(self) -> None:
        samples = np.asarray(self.samples, dtype=float)
        object.__setattr__(self, "samples", samples)
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be > 0, got {self.sample_rate}")
        if samples.ndim != 1 or samples.size < 2:
            raise ValueError("a waveform needs at least 2 samples in a 1-D array")

    @property
    def times(self) -> np.ndarray:
        """Sample instants in seconds, starting at zero."""
        return np.arange(self.samples.size) / self.sample_rate

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate


@dataclass(frozen=True)
class DemodResult:
    """Signed amplitude and phase recovered by the lock-in."""

    signed_amplitude: float  # V, sign carries the core-side information
    phase_offset: float  # rad relative to the reference, in (-pi, pi]

    def __post_init__(self) -> None:
        if not (-math.pi < self.phase_offset <= math.pi):
            raise ValueError(
                f"phase_offset must lie in (-pi, pi], got {self.phase_offset}"
            )


def synthesize(
    geometry: SensorGeometry,
    excitation: ExcitationConfig,
    circuit: CircuitParams,
    core_position: float,
    sample_rate: float,
    duration: float,
    noise_rms: float = 0.0,
    seed: int | None = None,
) -> tuple[Waveform, Waveform]:
    """Sample the excitation reference and the differential secondary signal.

    Returns ``(reference, differential)``. The differential record is a
    sinusoid at the excitation frequency whose signed amplitude equals the
    probe's differential output at ``core_position``, plus zero-mean white
    Gaussian noise of RMS ``noise_rms`` drawn from ``seed``. Identical
    arguments produce bit-identical waveforms.
    """
    freq = excitation.frequency
    if sample_rate < 2.0 * freq:
        raise AliasingError(
            f"sample_rate {sample_rate} Hz is below twice the excitation "
            f"frequency {freq} Hz"
        )
    if sample_rate < 10.0 * freq:
        warnings.warn(
            f"sample_rate {sample_rate} Hz is below the recommended 10x "
            f"oversampling of {freq} Hz",
            UserWarning,
            stacklevel=2,
        )
    if duration < 1.0 / freq:
        raise InsufficientWindowError(
            f"duration {duration} s covers less than one cycle at {freq} Hz"
        )
    if noise_rms < 0:
        raise ValueError(f"noise_rms must be >= 0, got {noise_rms}")
    if noise_rms > 0 and seed is None:
        raise ValueError("a seed is required when noise_rms > 0")

    n = int(round(duration * sample_rate))
    t = np.arange(n) / sample_rate
    carrier = np.sin(2.0 * math.pi * freq * t)
    reference = excitation.amplitude * carrier

    amplitude = differential_output(
        secondary_amplitudes(geometry, excitation, circuit, core_position)
    )
    differential = amplitude * carrier
    if noise_rms > 0:
        rng = np.random.default_rng(seed)
        differential = differential + rng.normal(0.0, noise_rms, n)

    return Waveform(sample_rate, reference), Waveform(sample_rate, differential)


def demodulate(signal: Waveform, reference: Waveform) -> DemodResult:
    """Quadrature lock-in of ``signal`` against ``reference``.

    Both records must share sample rate and length. The recovered magnitude
    does not depend on the signal's phase offset; the sign is positive iff
    the signal is within a quarter cycle of the reference phase.
    """
    if signal.sample_rate != reference.sample_rate:
        raise ValueError(
            f"sample rates differ: {signal.sample_rate} vs {reference.sample_rate}"
        )
    if signal.samples.size != reference.samples.size:
        raise ValueError(
            f"signal and reference lengths differ: {signal.samples.size} vs "
            f"{reference.samples.size}"
        )
    rate = signal.sample_rate
    ref_ac = reference.samples - reference.samples.mean()
    if not np.any(ref_ac != 0.0):
        raise NoReferenceError("reference waveform has no AC amplitude")

    freq = _estimate_frequency(ref_ac, rate)
    n = signal.samples.size
    whole_cycles = int(math.floor(n * freq / rate))
    if whole_cycles < 1:
        raise InsufficientWindowError("window shorter than one reference cycle")
    n_window = min(n, int(round(whole_cycles * rate / freq)))

    ref_cos, ref_sin = _quadrature_components(ref_ac[:n_window], rate, freq)
    sig_cos, sig_sin = _quadrature_components(signal.samples[:n_window], rate, freq)

    magnitude = math.hypot(sig_cos, sig_sin)
    offset = _wrap_phase(
        math.atan2(sig_cos, sig_sin) - math.atan2(ref_cos, ref_sin)
    )
    sign = 1.0 if abs(offset) <= 0.5 * math.pi else -1.0
    return DemodResult(signed_amplitude=sign * magnitude, phase_offset=offset)


def position_from_differential(
    signed_amplitude: float, sensitivity: float, center_offset: float = 0.0
) -> float:
    """Core position implied by a demodulated amplitude, in mm.

    ``sensitivity`` is the signed differential slope in V/mm from
    calibration; a zero value marks an uncalibrated probe.
    """
    if sensitivity == 0:
        raise ZeroDivisionError("sensitivity is zero: probe is uncalibrated")
    return signed_amplitude / sensitivity + center_offset


def force_from_position(displacement: float, spring_constant: float) -> float:
    """Spring force for a core displacement: force = rate * displacement."""
    if spring_constant <= 0:
        raise CalibrationError(
            f"spring_constant must be > 0, got {spring_constant}"
        )
    return spring_constant * displacement


def write_waveform_csv(waveform: Waveform, path: str | Path) -> Path:
    """Serialize a waveform as (time_s, volts) CSV with the rate in a comment."""
    lines = [f"# sample_rate_hz={fmt_float(waveform.sample_rate)}", WAVEFORM_HEADER]
    lines.extend(
        f"{fmt_float(t)},{fmt_float(v)}"
        for t, v in zip(waveform.times, waveform.samples)
    )
    return write_text_atomic(path, "\n".join(lines) + "\n")


def read_waveform_csv(path: str | Path) -> Waveform:
    """Parse a (time_s, volts) CSV; infers the rate if no comment carries it."""
    comments, _, rows = read_csv_table(path, expected_header=WAVEFORM_HEADER)
    if len(rows) < 2:
        raise ValueError(f"{path}: a waveform needs at least 2 samples")
    try:
        times = np.array([float(row[0]) for row in rows])
        volts = np.array([float(row[1]) for row in rows])
    except (ValueError, IndexError) as exc:
        raise ValueError(f"{path}: malformed waveform row: {exc}") from None
    if "sample_rate_hz" in comments:
        rate = float(comments["sample_rate_hz"])
    else:
        steps = np.diff(times)
        if np.any(steps <= 0):
            raise ValueError(f"{path}: time column must be strictly increasing")
        rate = 1.0 / float(np.mean(steps))
    return Waveform(rate, volts)


def _quadrature_components(
    samples: np.ndarray, sample_rate: float, frequency: float, start_index: int = 0
) -> tuple[float, float]:
    """Cosine/sine correlation coefficients of ``samples`` at ``frequency``.

    The record is modelled as a*cos + b*sin on the absolute time grid
    ``(start_index + i) / sample_rate``; amplitude is hypot(a, b) and phase
    (relative to a sine carrier) is atan2(a, b).
    """
    n = samples.size
    t = (start_index + np.arange(n)) / sample_rate
    arg = 2.0 * math.pi * frequency * t
    a = 2.0 * float(np.mean(samples * np.cos(arg)))
    b = 2.0 * float(np.mean(samples * np.sin(arg)))
    return a, b


def _rising_crossing_times(samples: np.ndarray, sample_rate: float) -> np.ndarray:
    """Linearly interpolated times of upward zero crossings, in seconds."""
    left = samples[:-1]
    right = samples[1:]
    mask = (left <= 0.0) & (right > 0.0)
    idx = np.nonzero(mask)[0]
    frac = -left[idx] / (right[idx] - left[idx])
    return (idx + frac) / sample_rate


def _estimate_frequency(samples: np.ndarray, sample_rate: float) -> float:
    """Carrier frequency of a clean sinusoidal record.

    Seeds from a least-squares fit through the rising zero-crossing times,
    then refines by measuring the residual phase drift between the two
    halves of the record, which is linear in the frequency error.
    """
    crossings = _rising_crossing_times(samples, sample_rate)
    if crossings.size < 2:
        raise InsufficientWindowError(
            "reference must span at least two rising zero crossings"
        )
    period = float(np.polyfit(np.arange(crossings.size), crossings, 1)[0])
    freq = 1.0 / period

    n = samples.size
    for _ in range(3):
        whole_cycles = int(math.floor(n * freq / sample_rate))
        if whole_cycles < 2:
            break
        first_cycles = whole_cycles // 2
        n1 = int(round(first_cycles * sample_rate / freq))
        n2 = min(n, int(round(whole_cycles * sample_rate / freq))) - n1
        if n1 < 2 or n2 < 2:
            break
        a1, b1 = _quadrature_components(samples[:n1], sample_rate, freq)
        a2, b2 = _quadrature_components(
            samples[n1 : n1 + n2], sample_rate, freq, start_index=n1
        )
        drift = _wrap_phase(math.atan2(a2, b2) - math.atan2(a1, b1))
        t1 = 0.5 * (n1 - 1) / sample_rate
        t2 = (n1 + 0.5 * (n2 - 1)) / sample_rate
        freq += drift / (2.0 * math.pi * (t2 - t1))
    return freq


def _wrap_phase(angle: float) -> float:
    """Wrap ``angle`` into (-pi, pi]."""
    wrapped = (angle + math.pi) % (2.0 * math.pi) - math.pi
    if wrapped <= -math.pi:
        wrapped += 2.0 * math.pi
    return wrapped
