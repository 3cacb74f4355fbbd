"""Local-impact metrics computed on PMU frame streams.

Implements the quantities used to compare the two converter controls:

* ifd / freq_std: bulk-frequency statistics (these cannot see a single
  small unit's contribution; kept for completeness and as a sanity layer).
* rrocof: rate-of-change-of-frequency magnitude over a short window,
  normalized by the converter power change over the same window [Hz/s/W].
* rpadd: deviation of the inter-PMU voltage-angle difference from its
  zero-power baseline, normalized by the delivered power [deg/kW].
* empirical_cdf / dominance_report: the presentation layer, step CDFs and
  a quantile-wise comparison of two of them.

Both relative metrics discard samples whose power denominator is below a
configurable threshold (the ratio diverges at zero power); the discarded
share is always reported through ``retained_fraction``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .core import unwrap_angles, wrap_angle
from .pmu import FrameSet

F0 = 50.0  # Hz

RROCOF_WINDOW_DEFAULT = 0.06       # s
RROCOF_P_THRESHOLD_DEFAULT = 1e3   # W, on the power change over the window
RPADD_P_THRESHOLD_DEFAULT = 5e3    # W, on the delivered power


class NoActiveSamples(ValueError):
    """Every candidate sample fell below the power threshold."""


@dataclass(frozen=True)
class MetricSeries:
    """Per-sample metric values with the retention bookkeeping."""

    t: np.ndarray = field(repr=False)       # s, one per retained sample
    values: np.ndarray = field(repr=False)  # metric units, >= 0
    retained_fraction: float

    def __post_init__(self):
        if not 0.0 < self.retained_fraction <= 1.0:
            raise ValueError("retained_fraction must be in (0, 1]")
        if np.any(self.values < 0.0):
            raise ValueError("metric values are absolute by construction")

    def __len__(self) -> int:
        return self.values.size

    @property
    def median(self) -> float:
        return float(np.median(self.values))


@dataclass(frozen=True)
class Cdf:
    """Empirical step CDF: probability k/N at the k-th sorted value."""

    values: np.ndarray = field(repr=False)
    probs: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.values.size == 0:
            raise ValueError("empty CDF")
        if np.any(np.diff(self.values) < 0.0):
            raise ValueError("CDF values must be nondecreasing")

    def __len__(self) -> int:
        return self.values.size

    def quantile(self, p: float) -> float:
        """Smallest sample value v with F(v) >= p."""
        if not 0.0 < p <= 1.0:
            raise ValueError("p must be in (0, 1]")
        k = int(np.searchsorted(self.probs, p - 1e-15))
        return float(self.values[min(k, self.values.size - 1)])

    @property
    def median(self) -> float:
        return self.quantile(0.5)


def _common_frames(streams):
    n = len(streams[0])
    for s in streams[1:]:
        if len(s) != n:
            raise ValueError(
                f"frame streams must have equal length, got {[len(x) for x in streams]}"
            )
    return n


def ifd(streams: list[FrameSet], f0: float = F0) -> float:
    """Summed absolute frequency deviation across units and samples, in Hz."""
    if not streams:
        raise ValueError("need at least one frame stream")
    _common_frames(streams)
    total = 0.0
    for s in streams:
        if not np.all(s.valid):
            raise ValueError("ifd requires all frames valid; slice the streams first")
        total += float(np.sum(np.abs(s.f - f0)))
    return total


def freq_std(frames: FrameSet) -> float:
    """Population standard deviation of the valid frequency samples, in Hz."""
    f = frames.f[frames.valid]
    if f.size < 2:
        raise ValueError("need >= 2 valid frames for a standard deviation")
    return float(np.std(f))


def _aligned_power(frames: FrameSet, p_bess) -> np.ndarray:
    p = np.asarray(p_bess, dtype=float)
    if p.size != len(frames):
        raise ValueError(
            f"power series ({p.size}) not aligned to frames ({len(frames)}); "
            "resample to PMU instants first"
        )
    return p


def rrocof(frames: FrameSet, p_bess, window: float = RROCOF_WINDOW_DEFAULT,
           p_threshold: float = RROCOF_P_THRESHOLD_DEFAULT) -> MetricSeries:
    """RoCoF magnitude per unit of converter power change, in Hz/s/W.

    For each window [t_k, t_k + window]: value = |(df/window)/dP| with df
    and dP the frequency and power changes across the window. Windows with
    |dP| below ``p_threshold`` are discarded; windows touching an invalid
    frame are not candidates at all.
    """
    p = _aligned_power(frames, p_bess)
    dt = frames.dt
    steps = window / dt
    n_w = int(round(steps))
    if n_w < 1 or abs(steps - n_w) > 1e-6:
        raise ValueError(
            f"window {window} s is not an integer multiple of the reporting "
            f"interval {dt} s"
        )
    if len(frames) <= n_w:
        raise ValueError("stream shorter than one window")

    f = frames.f
    ok = frames.valid[:-n_w] & frames.valid[n_w:]
    df = f[n_w:] - f[:-n_w]
    dp = p[n_w:] - p[:-n_w]
    candidates = int(np.count_nonzero(ok))
    if candidates == 0:
        raise ValueError("no candidate windows with valid endpoints")
    keep = ok & (np.abs(dp) >= p_threshold)
    retained = int(np.count_nonzero(keep))
    if retained == 0:
        raise NoActiveSamples(
            "no active samples: converter power never changed by "
            f">= {p_threshold:.6g} W over {window} s"
        )
    values = np.abs((df[keep] / window) / dp[keep])
    return MetricSeries(t=frames.t[n_w:][keep], values=values,
                        retained_fraction=retained / candidates)


def baseline_angle(frames_pmu1: FrameSet, frames_pmu2: FrameSet,
                   window: tuple[float, float],
                   min_pairs: int = 10) -> tuple[float, float]:
    """Zero-power inter-PMU angle difference, averaged before activation.

    Returns (mean, std) in radians of unwrap(theta_pmu1 - theta_pmu2) over
    the given time window; the std is a quality indicator for the
    constant-baseline assumption.
    """
    _common_frames([frames_pmu1, frames_pmu2])
    t_a, t_b = window
    if t_b <= t_a:
        raise ValueError("baseline window must have positive length")
    m = (frames_pmu1.t >= t_a - 1e-12) & (frames_pmu1.t <= t_b + 1e-12)
    if int(np.count_nonzero(m)) < min_pairs:
        raise ValueError(
            f"baseline window [{t_a}, {t_b}] s holds fewer than "
            f"{min_pairs} frame pairs"
        )
    d = unwrap_angles(wrap_angle(frames_pmu1.theta[m] - frames_pmu2.theta[m]))
    return float(np.mean(d)), float(np.std(d))


def rpadd(frames_pmu1: FrameSet, frames_pmu2: FrameSet, p_bess,
          delta_theta_0: float,
          p_threshold: float = RPADD_P_THRESHOLD_DEFAULT,
          denominator: str = "instantaneous") -> MetricSeries:
    """Angle-difference deviation per unit of delivered power, in deg/kW.

    value_k = |d_theta_k - delta_theta_0| / |P_k| with d_theta_k the
    unwrapped inter-PMU angle difference and delta_theta_0 its zero-power
    baseline. ``denominator`` selects the power reading: "instantaneous"
    (delivered power at sample k, the default) or "differenced"
    (once-differenced power, for sensitivity analysis).
    """
    _common_frames([frames_pmu1, frames_pmu2])
    p = _aligned_power(frames_pmu1, p_bess)
    d = unwrap_angles(wrap_angle(frames_pmu1.theta - frames_pmu2.theta))
    num_deg = np.degrees(np.abs(d - delta_theta_0))

    if denominator == "instantaneous":
        denom_kw = p / 1e3
        ok = frames_pmu1.valid & frames_pmu2.valid
    elif denominator == "differenced":
        denom_kw = np.empty_like(p)
        denom_kw[0] = np.nan
        denom_kw[1:] = np.diff(p) / 1e3
        ok = frames_pmu1.valid & frames_pmu2.valid
        ok[0] = False
    else:
        raise ValueError(f"unknown denominator mode {denominator!r}")

    candidates = int(np.count_nonzero(ok))
    if candidates == 0:
        raise ValueError("no candidate samples with valid frames")
    keep = ok & (np.abs(denom_kw) >= p_threshold / 1e3)
    retained = int(np.count_nonzero(keep))
    if retained == 0:
        raise NoActiveSamples(
            f"no active samples: delivered power never reached {p_threshold:.6g} W"
        )
    values = num_deg[keep] / np.abs(denom_kw[keep])
    return MetricSeries(t=frames_pmu1.t[keep], values=values,
                        retained_fraction=retained / candidates)


def empirical_cdf(series) -> Cdf:
    """Step CDF of a metric series (or bare sample array)."""
    values = series.values if isinstance(series, MetricSeries) else np.asarray(series, float)
    if values.size == 0:
        raise ValueError("cannot build a CDF from zero samples")
    s = np.sort(values)
    probs = np.arange(1, s.size + 1) / s.size
    return Cdf(values=s, probs=probs)


def quantile_grid(n: int = 99) -> np.ndarray:
    """Evenly spaced interior probabilities, e.g. 0.01..0.99 for n=99."""
    return np.arange(1, n + 1) / (n + 1)


def dominance_report(cdf_a: Cdf, cdf_b: Cdf, grid=None) -> dict:
    """Quantile-wise comparison of two CDFs.

    Reports the fraction of grid probabilities at which the first CDF has
    the strictly smaller quantile (first-order dominance when it
    approaches 1), plus both medians and their ratio.
    """
    if grid is None:
        grid = quantile_grid()
    grid = np.asarray(grid, dtype=float)
    qa = np.array([cdf_a.quantile(p) for p in grid])
    qb = np.array([cdf_b.quantile(p) for p in grid])
    wins = int(np.count_nonzero(qa < qb))
    median_a = cdf_a.median
    median_b = cdf_b.median
    return {
        "grid_points": int(grid.size),
        "dominance_fraction": wins / grid.size,
        "median_a": median_a,
        "median_b": median_b,
        "median_ratio": median_a / median_b if median_b != 0.0 else math.inf,
    }


def write_metric_series(series: MetricSeries, path, comment: str | None = None) -> None:
    """CSV export: `time_s,value` rows plus the retained fraction."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        fh.write(f"# retained_fraction={series.retained_fraction!r}\n")
        fh.write("time_s,value\n")
        for k in range(len(series)):
            fh.write(f"{float(series.t[k])!r},{float(series.values[k])!r}\n")


def write_cdf(cdf: Cdf, path, comment: str | None = None) -> None:
    """CSV export: `value,probability` rows."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        fh.write("value,probability\n")
        for k in range(len(cdf)):
            fh.write(f"{float(cdf.values[k])!r},{float(cdf.probs[k])!r}\n")
