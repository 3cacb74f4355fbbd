"""Scenario orchestration.

Builds the feeder, converter and PMUs from a declarative config, runs the
fixed-step co-simulation with a control-activation event, drives the PMU
sampling and the metrics pipeline, and emits all artifacts
deterministically: identical resolved config (including every seed) gives
bit-identical outputs.
"""

import copy
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import metrics as mt
from . import pmu as pm
from ._kernel import MODE_GFL, MODE_GFR, MODE_OFF, run_time_loop
from .converter import ConverterParams
from .core import TimeSeries
from .frequency import FrequencyTrace, SynthParams, load_trace, slack_angle, synthesize
from .network import (FeederModel, SolverError, X_T1_DEFAULT,
                      calibrate_sensitivity, load_q_from_pf)

F0 = 50.0


class ConfigError(ValueError):
    """Malformed or unknown scenario configuration."""


DEFAULT_CONFIG = {
    "name": "hour-transition",
    "mode": "gfr",                      # gfr | gfl | off
    "duration_s": 600.0,
    "dt_sim_s": 0.001,
    "activation_time_s": 250.0,
    "baseline_window_s": [60.0, 240.0],
    "trace": {
        "source": "synth",              # synth | file
        "path": None,                   # CSV path when source == file
        "file_dt_s": 0.001,             # resample step for file traces
        "synth": {
            "duration_s": None,         # None: use the scenario duration
            "ramp_start_s": 300.0,
            "ramp_magnitude_hz": -0.05,
            "ramp_duration_s": 120.0,
            "ou_sigma_hz": 0.006,
            "ou_tau_s": 0.015,
            "ou_smooth_tau_s": 0.0,
            "dt_s": 0.001,
            "seed": 20260810,
        },
    },
    "feeder": {
        "x_t1_pu": X_T1_DEFAULT,
        "x_t2_pu": None,                # None: calibrate to the target below
        "sensitivity_target_deg_per_kw": 0.006,
        "load_w": 140e3,
        "load_pf": 0.95,                # inductive power factor of the load
        "pv_w": 0.0,
        "s_base_va": 720e3,
    },
    "converter": {
        "s_rated_va": 720e3,
        "e_cap_wh": 500e3,
        "droop_w_per_hz": 1.44e6,
        "p0_w": 0.0,
        "gfr_filter_cutoff_rad_per_s": 2.0 * math.pi * 5.0,
        "gfr_coupling_x_pu": 0.16,
        "gfl_pll_kp": 3.5,
        "gfl_pll_ki": 6.0,
        "gfl_lag_tau_s": 0.02,
        "deadband_hz": 0.0,
        "soc_initial": 0.5,
        "soc_min": 0.1,
        "soc_max": 0.9,
    },
    "pmu": {
        "reporting_rate_hz": 50.0,
        "angle_noise_sigma_deg": 0.001,
        "seed_slack": 101,
        "seed_pcc": 102,
        "seed_pbc": 103,
    },
    "metrics": {
        "rrocof_window_s": 0.06,
        "rrocof_threshold_w": 1000.0,
        "rpadd_threshold_w": 5000.0,
        "rpadd_denominator": "instantaneous",
        "quantile_grid_points": 99,
    },
}


def _merge(default, user, path=""):
    out = copy.deepcopy(default)
    for key, uval in user.items():
        if key not in default:
            raise ConfigError(f"unknown config key {path + key!r}")
        dval = default[key]
        if isinstance(dval, dict):
            if not isinstance(uval, dict):
                raise ConfigError(f"config key {path + key!r} must be a mapping")
            out[key] = _merge(dval, uval, path + key + ".")
        else:
            out[key] = copy.deepcopy(uval)
    return out


@dataclass(frozen=True)
class Scenario:
    """A fully resolved, hashable run description."""

    config: dict = field(repr=False)

    @classmethod
    def from_dict(cls, user: dict | None = None) -> "Scenario":
        resolved = _merge(DEFAULT_CONFIG, user or {})
        scenario = cls(config=resolved)
        scenario.validate()
        return scenario

    @classmethod
    def from_json(cls, path) -> "Scenario":
        with open(path, encoding="utf-8") as fh:
            try:
                user = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        if not isinstance(user, dict):
            raise ConfigError(f"{path}: top level must be a JSON object")
        return cls.from_dict(user)

    def with_overrides(self, **top_level) -> "Scenario":
        cfg = copy.deepcopy(self.config)
        cfg.update(top_level)
        return Scenario.from_dict(cfg)

    def validate(self) -> None:
        c = self.config
        if c["mode"] not in ("gfr", "gfl", "off"):
            raise ConfigError(f"mode must be gfr|gfl|off, got {c['mode']!r}")
        if c["duration_s"] <= 0 or c["dt_sim_s"] <= 0:
            raise ConfigError("duration_s and dt_sim_s must be > 0")
        if c["dt_sim_s"] > 2e-3:
            raise ConfigError("dt_sim_s must be <= 2 ms for stable explicit "
                              "controller integration")
        interval = 1.0 / c["pmu"]["reporting_rate_hz"]
        ratio = interval / c["dt_sim_s"]
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            raise ConfigError(
                f"dt_sim_s {c['dt_sim_s']} must divide the PMU reporting "
                f"interval {interval}"
            )
        a, b = c["baseline_window_s"]
        if not (0.0 <= a < b):
            raise ConfigError("baseline window must satisfy 0 <= start < end")
        if c["mode"] != "off" and b >= c["activation_time_s"]:
            raise ConfigError("baseline window must end before activation_time_s")
        if c["trace"]["source"] not in ("synth", "file"):
            raise ConfigError("trace.source must be synth|file")
        if c["trace"]["source"] == "file" and not c["trace"]["path"]:
            raise ConfigError("trace.source=file requires trace.path")
        if c["metrics"]["rpadd_denominator"] not in ("instantaneous", "differenced"):
            raise ConfigError("rpadd_denominator must be instantaneous|differenced")
        for key in ("rrocof_threshold_w", "rpadd_threshold_w"):
            if c["metrics"][key] < 0:
                raise ConfigError(f"metrics.{key} must be >= 0")

    @property
    def hash(self) -> str:
        canonical = json.dumps(self.config, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()

    @property
    def run_id(self) -> str:
        return f"{self.config['name']}-{self.config['mode']}-{self.hash[:12]}"

    # typed builders -----------------------------------------------------

    def build_trace(self) -> FrequencyTrace:
        t = self.config["trace"]
        if t["source"] == "file":
            return load_trace(t["path"], dt=t["file_dt_s"])
        s = t["synth"]
        duration = s["duration_s"] if s["duration_s"] is not None else self.config["duration_s"]
        return synthesize(SynthParams(
            duration=duration,
            ramp_start=s["ramp_start_s"],
            ramp_magnitude=s["ramp_magnitude_hz"],
            ramp_duration=s["ramp_duration_s"],
            ou_sigma=s["ou_sigma_hz"],
            ou_tau=s["ou_tau_s"],
            ou_smooth_tau=s["ou_smooth_tau_s"],
            seed=s["seed"],
            dt=s["dt_s"],
        ))

    def build_feeder(self) -> FeederModel:
        f = self.config["feeder"]
        base = FeederModel(
            x_t1=f["x_t1_pu"],
            x_t2=f["x_t2_pu"] if f["x_t2_pu"] is not None else 0.0754,
            load_p=f["load_w"],
            load_q=load_q_from_pf(f["load_w"], f["load_pf"]),
            pv_p=f["pv_w"],
            s_base=f["s_base_va"],
        )
        if f["x_t2_pu"] is not None:
            return base
        x2 = calibrate_sensitivity(f["sensitivity_target_deg_per_kw"], base)
        return FeederModel(base.x_t1, x2, base.load_p, base.load_q,
                           base.pv_p, base.s_base)

    def build_converter(self) -> ConverterParams:
        c = self.config["converter"]
        return ConverterParams(
            s_rated=c["s_rated_va"],
            e_cap=c["e_cap_wh"],
            droop_d=c["droop_w_per_hz"],
            p0=c["p0_w"],
            gfr_power_filter_cutoff=c["gfr_filter_cutoff_rad_per_s"],
            gfr_coupling_x=c["gfr_coupling_x_pu"],
            gfl_pll_kp=c["gfl_pll_kp"],
            gfl_pll_ki=c["gfl_pll_ki"],
            gfl_current_lag_tau=c["gfl_lag_tau_s"],
            deadband=c["deadband_hz"],
            soc_min=c["soc_min"],
            soc_max=c["soc_max"],
        )

    def pmu_configs(self) -> dict[str, pm.PmuConfig]:
        p = self.config["pmu"]
        return {
            loc: pm.PmuConfig(
                reporting_rate=p["reporting_rate_hz"],
                angle_noise_sigma_deg=p["angle_noise_sigma_deg"],
                noise_seed=p[f"seed_{loc}"],
                location=loc,
            )
            for loc in ("slack", "pcc", "pbc")
        }


@dataclass
class RunArtifacts:
    """Everything one scenario run produces, in memory."""

    scenario: Scenario
    scenario_hash: str
    trace: FrequencyTrace
    dt: float
    t: np.ndarray = field(repr=False)
    theta_slack: np.ndarray = field(repr=False)
    theta_pcc: np.ndarray = field(repr=False)
    v_pcc: np.ndarray = field(repr=False)
    theta_pbc: np.ndarray = field(repr=False)
    v_pbc: np.ndarray = field(repr=False)
    p_bess_w: np.ndarray = field(repr=False)
    p_g_w: np.ndarray = field(repr=False)
    f_ctrl_hz: np.ndarray = field(repr=False)
    soc: np.ndarray = field(repr=False)
    flags: np.ndarray = field(repr=False)
    max_residual_pu: float
    frames: dict = field(repr=False)          # location -> FrameSet (f estimated)
    p_at_frames_w: np.ndarray = field(repr=False)
    delta_theta0_rad: float
    delta_theta0_std_rad: float
    rrocof: mt.MetricSeries | None
    rpadd: mt.MetricSeries | None
    cdf_rrocof: mt.Cdf | None
    cdf_rpadd: mt.Cdf | None
    summary: dict
    out_dir: Path | None = None


def _metric_summary(series: mt.MetricSeries | None, error: str | None) -> dict:
    if series is None:
        return {"error": error, "samples": 0}
    return {
        "median": series.median,
        "mean": float(np.mean(series.values)),
        "p90": float(np.quantile(series.values, 0.9)),
        "samples": len(series),
        "retained_fraction": series.retained_fraction,
    }


def run_scenario(scenario: Scenario, out_dir=None) -> RunArtifacts:
    """Execute one scenario end to end.

    Sequential loop over t in [0, duration) at dt_sim: slack angle from the
    trace, controller ODE step, algebraic network solve, record; then PMU
    sampling, frequency estimation and the metric pipeline. Raises
    :class:`SolverError` with the failing timestamp if the network becomes
    infeasible.
    """
    cfg = scenario.config
    dt = cfg["dt_sim_s"]
    duration = cfg["duration_s"]
    mode = {"off": MODE_OFF, "gfr": MODE_GFR, "gfl": MODE_GFL}[cfg["mode"]]

    trace = scenario.build_trace().resample(dt, duration)
    theta_s = slack_angle(trace).values
    n = theta_s.size
    t = dt * np.arange(n)

    feeder = scenario.build_feeder()
    conv = scenario.build_converter()
    sb = feeder.s_base

    act_idx = n + 1 if cfg["mode"] == "off" else int(math.ceil(
        cfg["activation_time_s"] / dt - 1e-9))

    th1 = np.empty(n)
    v1 = np.empty(n)
    th2 = np.empty(n)
    v2 = np.empty(n)
    p_bess = np.empty(n)
    p_g = np.empty(n)
    f_ctrl = np.empty(n)
    soc = np.empty(n)
    flags = np.zeros(n, dtype=np.int8)

    status, fail_idx, max_res = run_time_loop(
        theta_s, dt, mode, act_idx,
        feeder.x_t1, feeder.x_t2, feeder.load_p / sb, feeder.load_q / sb,
        feeder.pv_p / sb,
        conv.gfr_coupling_x, 1.0, conv.gfr_power_filter_cutoff,
        conv.droop_d / sb, conv.p0 / sb,
        conv.gfl_pll_kp, conv.gfl_pll_ki, conv.gfl_current_lag_tau,
        conv.deadband,
        conv.s_rated / sb, conv.e_cap * 3600.0 / sb,
        cfg["converter"]["soc_initial"], conv.soc_min, conv.soc_max,
        th1, v1, th2, v2, p_bess, p_g, f_ctrl, soc, flags,
    )
    if status != 0:
        raise SolverError(
            f"network solve failed at t = {fail_idx * dt:.6f} s "
            f"(step {fail_idx}, residual {max_res:.3e} pu); last state: "
            f"theta_pcc={th1[max(fail_idx - 1, 0)]:.6f} rad, "
            f"p_bess={p_bess[max(fail_idx - 1, 0)] * sb:.1f} W",
            residual=max_res,
        )
    p_bess *= sb
    p_g *= sb

    # measurement chain
    pmu_cfgs = scenario.pmu_configs()
    ones = np.ones(n)
    timelines = {
        "slack": (ones, theta_s),
        "pcc": (v1, th1),
        "pbc": (v2, th2),
    }
    frames = {}
    for loc, (mag, ang) in timelines.items():
        fs = pm.sample(TimeSeries(0.0, dt, mag), TimeSeries(0.0, dt, ang),
                       pmu_cfgs[loc])
        frames[loc] = pm.estimate_frequency(fs)

    stride = int(round(1.0 / (cfg["pmu"]["reporting_rate_hz"] * dt)))
    p_at_frames = p_bess[::stride]

    # zero-power baseline, then metrics on the post-activation window
    d_theta0, d_theta0_std = mt.baseline_angle(
        frames["pcc"], frames["pbc"], tuple(cfg["baseline_window_s"]))

    t_frames = frames["pcc"].t
    if cfg["mode"] == "off":
        analysis = t_frames >= cfg["baseline_window_s"][1]
    else:
        analysis = t_frames >= cfg["activation_time_s"] - 1e-12

    def sliced(loc):
        fs = frames[loc]
        return pm.FrameSet(fs.t[analysis], fs.v_mag[analysis],
                           fs.theta[analysis], fs.f[analysis],
                           fs.valid[analysis])

    f_pcc = sliced("pcc")
    f_pbc = sliced("pbc")
    p_slice = p_at_frames[analysis]

    mcfg = cfg["metrics"]
    rrocof_series = rpadd_series = None
    rrocof_err = rpadd_err = None
    try:
        rrocof_series = mt.rrocof(f_pcc, p_slice,
                                  window=mcfg["rrocof_window_s"],
                                  p_threshold=mcfg["rrocof_threshold_w"])
    except (mt.NoActiveSamples, ValueError) as exc:
        rrocof_err = str(exc)
    try:
        rpadd_series = mt.rpadd(f_pcc, f_pbc, p_slice, d_theta0,
                                p_threshold=mcfg["rpadd_threshold_w"],
                                denominator=mcfg["rpadd_denominator"])
    except (mt.NoActiveSamples, ValueError) as exc:
        rpadd_err = str(exc)

    cdf_rrocof = mt.empirical_cdf(rrocof_series) if rrocof_series is not None else None
    cdf_rpadd = mt.empirical_cdf(rpadd_series) if rpadd_series is not None else None

    # bulk statistics over frames valid in all three streams
    all_valid = (frames["slack"].valid & frames["pcc"].valid
                 & frames["pbc"].valid & analysis)

    def valid_slice(loc):
        fs = frames[loc]
        return pm.FrameSet(fs.t[all_valid], fs.v_mag[all_valid],
                           fs.theta[all_valid], fs.f[all_valid],
                           fs.valid[all_valid])

    streams = [valid_slice(loc) for loc in ("slack", "pcc", "pbc")]
    ifd_hz = mt.ifd(streams)
    freq_std_hz = mt.freq_std(streams[1])

    # conservation bookkeeping
    e_ws = conv.e_cap * 3600.0
    soc0 = cfg["converter"]["soc_initial"]
    drawn = float(np.sum(p_bess) * dt)
    soc_residual = abs((soc[-1] - soc0) + drawn / e_ws)
    soc_residual_rel = soc_residual / max(abs(drawn) / e_ws, 1e-30)
    balance = np.max(np.abs(p_g - (p_bess + feeder.pv_p - feeder.load_p))) / sb
    if balance > 1e-6:
        raise SolverError(
            f"lossless power balance violated ({balance:.3e} pu); "
            "the network solution cannot be trusted", residual=balance)

    summary = {
        "scenario_hash": scenario.hash,
        "name": cfg["name"],
        "mode": cfg["mode"],
        "duration_s": duration,
        "dt_sim_s": dt,
        "feeder": {
            "x_t1_pu": feeder.x_t1,
            "x_t2_pu": feeder.x_t2,
            "sensitivity_target_deg_per_kw":
                cfg["feeder"]["sensitivity_target_deg_per_kw"],
        },
        "baseline": {
            "delta_theta0_deg": math.degrees(d_theta0),
            "delta_theta0_std_deg": math.degrees(d_theta0_std),
        },
        "bulk": {"ifd_hz": ifd_hz, "freq_std_hz": freq_std_hz},
        "rrocof_hz_per_s_per_w": _metric_summary(rrocof_series, rrocof_err),
        "rpadd_deg_per_kw": _metric_summary(rpadd_series, rpadd_err),
        "power": {
            "p_bess_final_w": float(p_bess[-1]),
            "p_bess_absmax_w": float(np.max(np.abs(p_bess))),
            "soc_final": float(soc[-1]),
        },
        "conservation": {
            "max_newton_residual_pu": max_res,
            "max_power_balance_error_pu": float(balance),
            "soc_energy_residual_rel": float(soc_residual_rel),
        },
    }

    artifacts = RunArtifacts(
        scenario=scenario, scenario_hash=scenario.hash, trace=trace, dt=dt,
        t=t, theta_slack=theta_s, theta_pcc=th1, v_pcc=v1, theta_pbc=th2,
        v_pbc=v2, p_bess_w=p_bess, p_g_w=p_g, f_ctrl_hz=f_ctrl, soc=soc,
        flags=flags, max_residual_pu=max_res, frames=frames,
        p_at_frames_w=p_at_frames, delta_theta0_rad=d_theta0,
        delta_theta0_std_rad=d_theta0_std, rrocof=rrocof_series,
        rpadd=rpadd_series, cdf_rrocof=cdf_rrocof, cdf_rpadd=cdf_rpadd,
        summary=summary,
    )
    if out_dir is not None:
        write_artifacts(artifacts, out_dir)
    return artifacts


def write_json(obj, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_artifacts(artifacts: RunArtifacts, out_dir) -> Path:
    """Write the per-run artifact directory, named by the scenario hash."""
    run_dir = Path(out_dir) / artifacts.scenario.run_id
    run_dir.mkdir(parents=True, exist_ok=True)
    tag = f"scenario={artifacts.scenario_hash}"

    write_json(artifacts.scenario.config, run_dir / "config.json")
    write_json(artifacts.summary, run_dir / "summary.json")

    for loc, name in (("slack", "pmu0_slack"), ("pcc", "pmu1_pcc"),
                      ("pbc", "pmu2_pbc")):
        pm.write_frames(artifacts.frames[loc], run_dir / f"frames_{name}.csv",
                        comment=tag)

    rate = artifacts.scenario.config["pmu"]["reporting_rate_hz"]
    stride = int(round(1.0 / (rate * artifacts.dt)))
    with open(run_dir / "telemetry.csv", "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# {tag}\n")
        fh.write("time_s,p_bess_w,p_g_w,f_converter_hz,soc,flags\n")
        for k in range(0, len(artifacts.t), stride):
            fh.write(
                f"{float(artifacts.t[k])!r},{float(artifacts.p_bess_w[k])!r},"
                f"{float(artifacts.p_g_w[k])!r},{float(artifacts.f_ctrl_hz[k])!r},"
                f"{float(artifacts.soc[k])!r},{int(artifacts.flags[k])}\n"
            )

    if artifacts.rrocof is not None:
        mt.write_metric_series(artifacts.rrocof, run_dir / "rrocof.csv", comment=tag)
        mt.write_cdf(artifacts.cdf_rrocof, run_dir / "cdf_rrocof.csv", comment=tag)
    if artifacts.rpadd is not None:
        mt.write_metric_series(artifacts.rpadd, run_dir / "rpadd.csv", comment=tag)
        mt.write_cdf(artifacts.cdf_rpadd, run_dir / "cdf_rpadd.csv", comment=tag)

    artifacts.out_dir = run_dir
    return run_dir


def run_comparison(scenario: Scenario, out_dir=None) -> dict:
    """Run the identical scenario in both converter modes and compare.

    The trace and all measurement-noise seeds are shared, so the two runs
    differ only in the control law. Returns the comparison report; also
    writes it (plus both run directories) when ``out_dir`` is given.
    """
    runs = {}
    for mode in ("gfr", "gfl"):
        runs[mode] = run_scenario(scenario.with_overrides(mode=mode), out_dir)

    gfr, gfl = runs["gfr"], runs["gfl"]
    grid = mt.quantile_grid(scenario.config["metrics"]["quantile_grid_points"])

    report = {
        "scenario_name": scenario.config["name"],
        "mode_hashes": {m: runs[m].scenario_hash for m in runs},
        "gfr_summary": gfr.summary,
        "gfl_summary": gfl.summary,
    }
    if gfr.cdf_rrocof is not None and gfl.cdf_rrocof is not None:
        report["rrocof_dominance"] = mt.dominance_report(
            gfr.cdf_rrocof, gfl.cdf_rrocof, grid)
    else:
        report["rrocof_dominance"] = {"error": "missing rrocof samples"}
    if gfr.rpadd is not None and gfl.rpadd is not None:
        report["rpadd_comparison"] = {
            "median_gfr": gfr.rpadd.median,
            "median_gfl": gfl.rpadd.median,
            "gfr_greater": bool(gfr.rpadd.median > gfl.rpadd.median),
        }
    else:
        report["rpadd_comparison"] = {"error": "missing rpadd samples"}

    if out_dir is not None:
        write_json(report, Path(out_dir) / "comparison.json")
    return report


def replay_metrics(run_dir) -> dict:
    """Recompute the metric layer from a run directory's CSV artifacts.

    Reads the PMU frame files and the frame-aligned power telemetry, then
    reruns baseline, rrocof and rpadd with the thresholds echoed in the
    run's config. This is also the path for feeding real PMU recordings
    through the metrics engine.
    """
    run_dir = Path(run_dir)
    scenario = Scenario.from_json(run_dir / "config.json")
    cfg = scenario.config

    f_pcc_all = pm.read_frames(run_dir / "frames_pmu1_pcc.csv")
    f_pbc_all = pm.read_frames(run_dir / "frames_pmu2_pbc.csv")

    p = []
    with open(run_dir / "telemetry.csv", encoding="utf-8") as fh:
        rows = [ln for ln in fh if not ln.startswith("#")]
    header = rows[0].strip().split(",")
    ip = header.index("p_bess_w")
    for ln in rows[1:]:
        p.append(float(ln.split(",")[ip]))
    p = np.asarray(p)

    d_theta0, d_theta0_std = mt.baseline_angle(
        f_pcc_all, f_pbc_all, tuple(cfg["baseline_window_s"]))

    analysis = f_pcc_all.t >= cfg["activation_time_s"] - 1e-12

    def sl(fs):
        return pm.FrameSet(fs.t[analysis], fs.v_mag[analysis],
                           fs.theta[analysis], fs.f[analysis],
                           fs.valid[analysis])

    f_pcc, f_pbc = sl(f_pcc_all), sl(f_pbc_all)
    p_slice = p[analysis]

    mcfg = cfg["metrics"]
    out = {
        "scenario_hash": scenario.hash,
        "delta_theta0_deg": math.degrees(d_theta0),
        "delta_theta0_std_deg": math.degrees(d_theta0_std),
    }
    try:
        series = mt.rrocof(f_pcc, p_slice, window=mcfg["rrocof_window_s"],
                           p_threshold=mcfg["rrocof_threshold_w"])
        out["rrocof_hz_per_s_per_w"] = _metric_summary(series, None)
        out["rrocof_values"] = series.values
    except (mt.NoActiveSamples, ValueError) as exc:
        out["rrocof_hz_per_s_per_w"] = {"error": str(exc), "samples": 0}
    try:
        series = mt.rpadd(f_pcc, f_pbc, p_slice, d_theta0,
                          p_threshold=mcfg["rpadd_threshold_w"],
                          denominator=mcfg["rpadd_denominator"])
        out["rpadd_deg_per_kw"] = _metric_summary(series, None)
        out["rpadd_values"] = series.values
    except (mt.NoActiveSamples, ValueError) as exc:
        out["rpadd_deg_per_kw"] = {"error": str(exc), "samples": 0}
    return out
