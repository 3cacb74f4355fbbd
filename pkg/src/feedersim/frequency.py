"""Bulk-grid frequency boundary condition.

The feeder does not set the system frequency; it is subjected to it. This
module provides that exogenous trajectory, either replayed from a recorded
CSV trace or synthesized as an hour-transition ramp plus colored noise, and
converts it into the slack-bus voltage angle that drives the network.
"""

import csv
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .core import TWO_PI, TimeSeries

F_NOMINAL = 50.0          # Hz
F_SANITY_MIN = 45.0       # Hz, reject traces outside this band
F_SANITY_MAX = 55.0

TRACE_HEADER = ["time_s", "frequency_hz"]


@dataclass(frozen=True)
class FrequencyTrace:
    """Uniformly sampled bulk-grid frequency trajectory in Hz."""

    series: TimeSeries

    def __post_init__(self):
        f = self.series.values
        if np.any(f < F_SANITY_MIN) or np.any(f > F_SANITY_MAX):
            k = int(np.flatnonzero((f < F_SANITY_MIN) | (f > F_SANITY_MAX))[0])
            raise ValueError(
                f"frequency sample {f[k]:.6g} Hz at index {k} out of sanity "
                f"bound [{F_SANITY_MIN}, {F_SANITY_MAX}] Hz"
            )

    def __len__(self) -> int:
        return len(self.series)

    @property
    def dt(self) -> float:
        return self.series.dt

    @property
    def values(self) -> np.ndarray:
        return self.series.values

    def resample(self, dt: float, duration: float | None = None) -> "FrequencyTrace":
        """Linear resample onto a uniform dt grid starting at t0."""
        if duration is None:
            duration = self.series.t_end - self.series.t0
        n = int(round(duration / dt)) + 1
        t_new = self.series.t0 + dt * np.arange(n)
        if t_new[-1] > self.series.t_end + 1e-9:
            raise ValueError(
                f"requested duration {duration} s exceeds trace end "
                f"{self.series.t_end - self.series.t0} s"
            )
        f_new = np.interp(t_new, self.series.t, self.series.values)
        return FrequencyTrace(TimeSeries(self.series.t0, dt, f_new))


@dataclass(frozen=True)
class SynthParams:
    """Recipe for a synthetic hour-transition trace: piecewise-linear ramp
    plus an exactly discretized Ornstein-Uhlenbeck noise term, optionally
    smoothed by a second first-order pole to band-limit the fast content."""

    duration: float               # s
    ramp_start: float = 300.0     # s
    ramp_magnitude: float = -0.05  # Hz, signed total excursion
    ramp_duration: float = 120.0  # s
    ou_sigma: float = 0.006       # Hz, stationary standard deviation
    ou_tau: float = 0.015         # s, correlation time
    ou_smooth_tau: float = 0.0    # s, extra smoothing pole (0 disables)
    seed: int = 0
    dt: float = 0.001             # s, sample step of the generated trace
    f0: float = F_NOMINAL         # Hz

    def __post_init__(self):
        if self.duration <= 0:
            raise ValueError("duration must be > 0")
        if not (0.0 <= self.ramp_start and self.ramp_start + self.ramp_duration <= self.duration):
            raise ValueError("ramp must lie within [0, duration]")
        if self.ou_sigma < 0:
            raise ValueError("ou_sigma must be >= 0")
        if self.ou_tau <= 0:
            raise ValueError("ou_tau must be > 0")
        if self.ou_smooth_tau < 0:
            raise ValueError("ou_smooth_tau must be >= 0")
        if self.dt <= 0:
            raise ValueError("dt must be > 0")


def synthesize(params: SynthParams) -> FrequencyTrace:
    """Deterministically generate f(t) = f0 + ramp(t) + noise(t).

    The noise is an Ornstein-Uhlenbeck process with the exact one-step
    transition x[k+1] = x[k]*exp(-dt/tau) + sigma*sqrt(1 - exp(-2*dt/tau))*n[k],
    n[k] standard normal from a generator seeded by ``params.seed``. When
    ``ou_smooth_tau`` > 0 the process is additionally low-passed by that
    time constant and rescaled so the stationary standard deviation stays
    ``ou_sigma``. Two calls with equal params are bit-identical.
    """
    n = int(round(params.duration / params.dt)) + 1
    t = params.dt * np.arange(n)

    ramp = np.clip((t - params.ramp_start) / max(params.ramp_duration, 1e-12), 0.0, 1.0)
    f = params.f0 + params.ramp_magnitude * ramp

    if params.ou_sigma > 0.0:
        rng = np.random.default_rng(params.seed)
        a = np.exp(-params.dt / params.ou_tau)
        b = params.ou_sigma * np.sqrt(1.0 - a * a)
        noise = rng.standard_normal(n)
        x0 = params.ou_sigma * noise[0]  # stationary start
        x, _ = lfilter([1.0], [1.0, -a], b * noise[1:], zi=np.array([a * x0]))
        x = np.concatenate(([x0], x))
        if params.ou_smooth_tau > 0.0:
            t1, t2 = params.ou_tau, params.ou_smooth_tau
            c = np.exp(-params.dt / t2)
            x, _ = lfilter([1.0 - c], [1.0, -c], x, zi=np.array([c * x[0]]))
            if abs(t1 - t2) < 1e-12:
                gain = np.sqrt(0.5)
            else:
                gain = np.sqrt(t1 / (t1 + t2))
            x /= gain
        f += x

    return FrequencyTrace(TimeSeries(0.0, params.dt, f))


def slack_angle(trace: FrequencyTrace) -> TimeSeries:
    """Slack-bus voltage angle in the nominal rotating frame.

    Trapezoidal integration of 2*pi*(f - f0), anchored at zero for the first
    sample: only deviations from nominal frequency drift the angle.
    """
    f_dev = trace.values - F_NOMINAL
    increments = 0.5 * trace.dt * (f_dev[1:] + f_dev[:-1])
    theta = np.empty(len(trace))
    theta[0] = 0.0
    np.cumsum(increments, out=theta[1:])
    theta *= TWO_PI
    return TimeSeries(trace.series.t0, trace.dt, theta)


def load_trace(path, dt: float, column_map: dict | None = None) -> FrequencyTrace:
    """Load a recorded frequency trace from CSV and resample to uniform dt.

    Expects a header row naming a monotonic time column (seconds) and a
    frequency column (Hz); defaults are ``time_s`` and ``frequency_hz``.
    Lines starting with ``#`` are ignored. Gaps wider than 10 output steps
    are rejected rather than bridged by interpolation.
    """
    cols = {"time": "time_s", "frequency": "frequency_hz"}
    if column_map:
        cols.update(column_map)

    times, freqs = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        rows = csv.reader(line for line in fh if not line.lstrip().startswith("#"))
        try:
            header = next(rows)
        except StopIteration:
            raise ValueError(f"{path}: empty trace file") from None
        header = [h.strip() for h in header]
        try:
            it = header.index(cols["time"])
            jf = header.index(cols["frequency"])
        except ValueError:
            raise ValueError(
                f"{path}: header {header} lacks columns "
                f"{cols['time']!r}/{cols['frequency']!r}"
            ) from None
        for k, row in enumerate(rows, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                t = float(row[it])
                f = float(row[jf])
            except (ValueError, IndexError):
                raise ValueError(f"{path}: row {k}: unparseable entry {row}") from None
            if not (F_SANITY_MIN <= f <= F_SANITY_MAX):
                raise ValueError(
                    f"{path}: row {k}: frequency {f} Hz out of sanity bound "
                    f"[{F_SANITY_MIN}, {F_SANITY_MAX}]"
                )
            if times and t <= times[-1]:
                raise ValueError(f"{path}: row {k}: non-monotonic time {t} s")
            if times and (t - times[-1]) >= 10.0 * dt:
                raise ValueError(
                    f"{path}: row {k}: gap of {t - times[-1]:.6g} s exceeds 10*dt"
                )
            times.append(t)
            freqs.append(f)

    if not times:
        raise ValueError(f"{path}: no data rows")

    t_arr = np.asarray(times)
    f_arr = np.asarray(freqs)
    n = int(np.floor((t_arr[-1] - t_arr[0]) / dt + 1e-9)) + 1
    t_new = t_arr[0] + dt * np.arange(n)
    f_new = np.interp(t_new, t_arr, f_arr)
    return FrequencyTrace(TimeSeries(t_arr[0], dt, f_new))


def write_trace(trace: FrequencyTrace, path, comment: str | None = None) -> None:
    """Write a trace in the same CSV format accepted by :func:`load_trace`.

    Floats are serialized with shortest round-trip precision so a
    write/load cycle is lossless (up to resampling).
    """
    t = trace.series.t
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        fh.write(",".join(TRACE_HEADER) + "\n")
        for k in range(len(trace)):
            fh.write(f"{float(t[k])!r},{float(trace.values[k])!r}\n")
