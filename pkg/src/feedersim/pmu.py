"""Synthetic PMU measurement chain.

Samples bus phasor timelines at the reporting rate, adds the calibrated
angle noise of the deployed sensing infrastructure (0.001 degree at one
standard deviation), wraps angles the way a real device reports them, and
estimates frequency from consecutive angle frames. Everything downstream
(all metrics) consumes these frames, never the raw simulation state.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from .core import TimeSeries, wrap_angle

F0 = 50.0                 # Hz
F_VALID_MIN = 45.0        # Hz, sanity band for estimated frequency
F_VALID_MAX = 55.0

FRAME_HEADER = ["time_s", "v_mag_pu", "theta_deg", "freq_hz", "valid"]


@dataclass(frozen=True)
class PmuConfig:
    reporting_rate: float = 50.0        # frames/s
    angle_noise_sigma_deg: float = 0.001
    noise_seed: int = 0
    location: str = "pcc"               # slack | pcc | pbc

    def __post_init__(self):
        if self.reporting_rate <= 0:
            raise ValueError("reporting_rate must be > 0")
        if self.angle_noise_sigma_deg < 0:
            raise ValueError("angle noise sigma must be >= 0")
        if self.location not in ("slack", "pcc", "pbc"):
            raise ValueError(f"unknown PMU location {self.location!r}")


@dataclass(frozen=True)
class PmuFrame:
    """One reported frame."""

    t: float          # s
    v_mag: float      # pu
    theta: float      # rad, wrapped to (-pi, pi]
    f: float          # Hz (nan until estimated)
    valid: bool


class FrameSet:
    """Column-wise container of PMU frames."""

    def __init__(self, t, v_mag, theta, f, valid):
        self.t = np.asarray(t, dtype=float)
        self.v_mag = np.asarray(v_mag, dtype=float)
        self.theta = np.asarray(theta, dtype=float)
        self.f = np.asarray(f, dtype=float)
        self.valid = np.asarray(valid, dtype=bool)
        n = self.t.size
        if not all(a.size == n for a in (self.v_mag, self.theta, self.f, self.valid)):
            raise ValueError("frame columns must have equal length")

    def __len__(self) -> int:
        return self.t.size

    def frame(self, k: int) -> PmuFrame:
        return PmuFrame(float(self.t[k]), float(self.v_mag[k]),
                        float(self.theta[k]), float(self.f[k]),
                        bool(self.valid[k]))

    def window(self, t_start: float, t_end: float) -> "FrameSet":
        """Frames with t_start <= t <= t_end (endpoints included)."""
        m = (self.t >= t_start - 1e-12) & (self.t <= t_end + 1e-12)
        return FrameSet(self.t[m], self.v_mag[m], self.theta[m],
                        self.f[m], self.valid[m])

    @property
    def dt(self) -> float:
        if len(self) < 2:
            raise ValueError("need >= 2 frames for a reporting interval")
        return float(self.t[1] - self.t[0])


def sample(v_mag: TimeSeries, theta: TimeSeries, config: PmuConfig) -> FrameSet:
    """Sample a bus timeline into PMU frames at the reporting rate.

    The simulation step must divide the reporting interval; frames land on
    t = t0 + k/reporting_rate exactly. Gaussian angle noise comes from a
    generator seeded with ``config.noise_seed``, so frames are
    deterministic per seed. Magnitude is reported noiselessly.
    """
    if v_mag.dt != theta.dt or len(v_mag) != len(theta):
        raise ValueError("magnitude and angle timelines must be aligned")
    interval = 1.0 / config.reporting_rate
    stride_f = interval / theta.dt
    stride = int(round(stride_f))
    if stride < 1 or abs(stride_f - stride) > 1e-9:
        raise ValueError(
            f"simulation step {theta.dt} s does not divide the reporting "
            f"interval {interval} s"
        )
    idx = np.arange(0, len(theta), stride)
    t = theta.t0 + idx * theta.dt
    angles = theta.values[idx].copy()
    if config.angle_noise_sigma_deg > 0.0:
        rng = np.random.default_rng(config.noise_seed)
        sigma_rad = math.radians(config.angle_noise_sigma_deg)
        angles += rng.normal(0.0, sigma_rad, angles.size)
    wrapped = wrap_angle(angles)
    n = idx.size
    return FrameSet(t, v_mag.values[idx], wrapped,
                    np.full(n, np.nan), np.ones(n, dtype=bool))


def estimate_frequency(frames: FrameSet) -> FrameSet:
    """Fill the frequency column from consecutive angle frames.

    f[k] = f0 + wrapped(theta[k] - theta[k-1]) / (2*pi*dt_report). The
    first frame has no predecessor and is marked invalid, as is any frame
    whose estimate escapes the [45, 55] Hz sanity band.
    """
    if len(frames) < 2:
        raise ValueError("need >= 2 frames to estimate frequency")
    dt = frames.dt
    steps = wrap_angle(np.diff(frames.theta))
    f = np.empty(len(frames))
    f[0] = np.nan
    f[1:] = F0 + steps / (2.0 * math.pi * dt)
    valid = frames.valid.copy()
    valid[0] = False
    with np.errstate(invalid="ignore"):
        valid &= ~((f < F_VALID_MIN) | (f > F_VALID_MAX))
    return FrameSet(frames.t, frames.v_mag, frames.theta, f, valid)


def write_frames(frames: FrameSet, path, comment: str | None = None) -> None:
    """Write frames as CSV (`time_s,v_mag_pu,theta_deg,freq_hz,valid`).

    Angles are reported in degrees. Floats use shortest round-trip
    serialization so replaying the file reproduces metrics exactly.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        fh.write(",".join(FRAME_HEADER) + "\n")
        for k in range(len(frames)):
            theta_deg = math.degrees(frames.theta[k])
            fh.write(
                f"{float(frames.t[k])!r},{float(frames.v_mag[k])!r},"
                f"{theta_deg!r},{float(frames.f[k])!r},"
                f"{1 if frames.valid[k] else 0}\n"
            )


def read_frames(path) -> FrameSet:
    """Read frames written by :func:`write_frames` (or a real recording)."""
    t, v, th, f, valid = [], [], [], [], []
    with open(path, newline="", encoding="utf-8") as fh:
        rows = csv.reader(line for line in fh if not line.lstrip().startswith("#"))
        try:
            header = [h.strip() for h in next(rows)]
        except StopIteration:
            raise ValueError(f"{path}: empty frame file") from None
        if header != FRAME_HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        for k, row in enumerate(rows, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                t.append(float(row[0]))
                v.append(float(row[1]))
                th.append(math.radians(float(row[2])))
                f.append(float(row[3]))
                valid.append(bool(int(row[4])))
            except (ValueError, IndexError):
                raise ValueError(f"{path}: row {k}: unparseable entry {row}") from None
    if not t:
        raise ValueError(f"{path}: no data rows")
    return FrameSet(t, v, th, f, valid)
