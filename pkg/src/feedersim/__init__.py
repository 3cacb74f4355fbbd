"""feedersim: quasi-static co-simulation of a distribution feeder hosting a
battery converter that provides frequency regulation to the bulk grid,
with a synthetic PMU measurement chain and the local-impact metric layer
used to compare grid-forming against grid-following control."""

from .core import PerUnitBase, Phasor, TimeSeries, diff, unwrap_angles, wrap_angle
from .frequency import (FrequencyTrace, SynthParams, load_trace, slack_angle,
                        synthesize, write_trace)
from .network import (BusState, FeederModel, PowerSource, SolverError,
                      VoltageSource, calibrate_sensitivity,
                      sensitivity_deg_per_kw, solve_step)
from .converter import (BessState, ConverterParams, GflState, GfrState,
                        apply_limits, gfl_droop_step, gfl_pll_step, gfr_step)
from .pmu import FrameSet, PmuConfig, PmuFrame, estimate_frequency, read_frames, sample, write_frames
from .metrics import (Cdf, MetricSeries, NoActiveSamples, baseline_angle,
                      dominance_report, empirical_cdf, freq_std, ifd, rpadd,
                      rrocof)
from .engine import (ConfigError, RunArtifacts, Scenario, replay_metrics,
                     run_comparison, run_scenario)

__version__ = "0.1.0"

__all__ = [
    "PerUnitBase", "Phasor", "TimeSeries", "diff", "unwrap_angles", "wrap_angle",
    "FrequencyTrace", "SynthParams", "load_trace", "slack_angle", "synthesize",
    "write_trace",
    "BusState", "FeederModel", "PowerSource", "SolverError", "VoltageSource",
    "calibrate_sensitivity", "sensitivity_deg_per_kw", "solve_step",
    "BessState", "ConverterParams", "GflState", "GfrState", "apply_limits",
    "gfl_droop_step", "gfl_pll_step", "gfr_step",
    "FrameSet", "PmuConfig", "PmuFrame", "estimate_frequency", "read_frames",
    "sample", "write_frames",
    "Cdf", "MetricSeries", "NoActiveSamples", "baseline_angle",
    "dominance_report", "empirical_cdf", "freq_std", "ifd", "rpadd", "rrocof",
    "ConfigError", "RunArtifacts", "Scenario", "replay_metrics",
    "run_comparison", "run_scenario",
]
