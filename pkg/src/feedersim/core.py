"""Shared numeric types: phasors, per-unit bases, uniformly sampled series,
and the angle/difference utilities every other module builds on.

All angles in this package are radians measured in the nominal (50 Hz)
rotating frame and are kept unwrapped; wrapping happens only where a real
instrument would wrap (PMU frame emission) and is undone immediately by
consumers.
"""

from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Phasor:
    """Complex bus quantity in polar form: per-unit magnitude, unwrapped angle."""

    magnitude: float  # pu, >= 0
    angle: float      # rad, unbounded (nominal-frame deviation)

    def __post_init__(self):
        if not np.isfinite(self.magnitude) or not np.isfinite(self.angle):
            raise ValueError(f"non-finite phasor ({self.magnitude}, {self.angle})")
        if self.magnitude < 0.0:
            raise ValueError(f"phasor magnitude must be >= 0, got {self.magnitude}")

    @property
    def complex(self) -> complex:
        return self.magnitude * np.exp(1j * self.angle)


@dataclass(frozen=True)
class PerUnitBase:
    """Normalization base for one voltage zone."""

    s_base: float       # VA
    v_base: float       # V
    f0: float = 50.0    # Hz, nominal frequency

    def __post_init__(self):
        if self.s_base <= 0 or self.v_base <= 0 or self.f0 <= 0:
            raise ValueError("per-unit base quantities must be strictly positive")


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly sampled series; timestamps are implicit as t0 + k*dt."""

    t0: float              # s
    dt: float              # s, > 0
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size < 1:
            raise ValueError("values must be a 1-d array with at least one sample")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size

    @property
    def t(self) -> np.ndarray:
        """Sample timestamps in seconds."""
        return self.t0 + self.dt * np.arange(self.values.size)

    @property
    def t_end(self) -> float:
        return self.t0 + self.dt * (self.values.size - 1)


def wrap_angle(angle):
    """Wrap angle(s) to the half-open interval (-pi, pi]."""
    a = np.asarray(angle, dtype=float)
    wrapped = a - TWO_PI * np.ceil((a - np.pi) / TWO_PI)
    return float(wrapped) if np.isscalar(angle) else wrapped


def unwrap_angles(raw) -> np.ndarray:
    """Undo +-2*pi wrapping so consecutive samples differ by at most pi.

    The first sample is kept as given; each following sample is shifted by
    the multiple of 2*pi that puts its increment into (-pi, pi].
    """
    raw = np.asarray(raw, dtype=float)
    if raw.size == 0:
        raise ValueError("cannot unwrap an empty angle sequence")
    bad = np.flatnonzero(~np.isfinite(raw))
    if bad.size:
        raise ValueError(f"non-finite angle at index {bad[0]}")
    steps = np.diff(raw)
    wrapped = steps - TWO_PI * np.ceil((steps - np.pi) / TWO_PI)
    out = np.empty_like(raw)
    out[0] = raw[0]
    np.cumsum(wrapped, out=out[1:])
    out[1:] += raw[0]
    return out


def diff(series: TimeSeries) -> TimeSeries:
    """First difference, out[k] = in[k+1] - in[k]; one sample shorter, same dt."""
    if len(series) < 2:
        raise ValueError("diff needs at least two samples")
    return TimeSeries(series.t0, series.dt, np.diff(series.values))
