"""Command-line front end.

Verbs: synth-trace, calibrate, run, compare, replay-metrics. Exit status
0 on success, 1 on a domain error (solver failure, bad trace, bad
config), 2 on usage errors. All randomness comes from seeds in the config
file (overridable with --seed); there is no wall-clock entropy anywhere.
"""

import argparse
import json
import math
import sys
from pathlib import Path

from .engine import (ConfigError, Scenario, replay_metrics, run_comparison,
                     run_scenario, write_json)
from .frequency import SynthParams, synthesize, write_trace
from .network import SolverError, calibrate_sensitivity


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="feedersim",
        description=("Feeder co-simulation of a battery converter providing "
                     "frequency regulation, with PMU-based local-impact metrics."),
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", type=Path, required=config_required,
                       help="scenario config JSON")
        p.add_argument("--out", type=Path, default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="override the trace seed")
        p.add_argument("--mode", choices=["gfr", "gfl", "off"], default=None,
                       help="override the converter mode")
        p.add_argument("--quiet", action="store_true", help="suppress the summary")

    p = sub.add_parser("synth-trace", help="synthesize a frequency trace CSV")
    common(p, config_required=False)

    p = sub.add_parser("calibrate",
                       help="solve for the reactance matching the angle sensitivity")
    common(p, config_required=False)
    p.add_argument("--target", type=float, default=0.006,
                   help="sensitivity target in deg/kW (default 0.006)")

    p = sub.add_parser("run", help="run one scenario and write its artifacts")
    common(p)

    p = sub.add_parser("compare",
                       help="run the same scenario in both modes and compare")
    common(p)

    p = sub.add_parser("replay-metrics",
                       help="recompute metrics from a previous run's PMU CSVs")
    p.add_argument("--run-dir", type=Path, required=True,
                   help="artifact directory of a previous run")
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--quiet", action="store_true")
    return parser


def _load_scenario(args) -> Scenario:
    scenario = Scenario.from_json(args.config)
    overrides = {}
    if args.mode is not None:
        overrides["mode"] = args.mode
    if overrides:
        scenario = scenario.with_overrides(**overrides)
    if args.seed is not None:
        cfg = json.loads(json.dumps(scenario.config))
        cfg["trace"]["synth"]["seed"] = args.seed
        scenario = Scenario.from_dict(cfg)
    return scenario


def _say(args, msg: str) -> None:
    if not args.quiet:
        print(msg)


def _print_run_summary(args, summary: dict) -> None:
    base = summary["baseline"]
    _say(args, f"scenario {summary['name']} [{summary['mode']}] "
               f"hash {summary['scenario_hash'][:12]}")
    _say(args, f"  baseline angle difference: {base['delta_theta0_deg']:.4f} deg "
               f"(std {base['delta_theta0_std_deg']:.5f} deg)")
    for key, label, unit in (("rrocof_hz_per_s_per_w", "rrocof", "Hz/s/W"),
                             ("rpadd_deg_per_kw", "rpadd", "deg/kW")):
        m = summary[key]
        if "error" in m:
            _say(args, f"  {label}: {m['error']}")
        else:
            _say(args, f"  {label}: median {m['median']:.6g} {unit} over "
                       f"{m['samples']} samples "
                       f"(retained {m['retained_fraction']:.1%})")
    _say(args, f"  ifd {summary['bulk']['ifd_hz']:.4f} Hz, "
               f"freq std {summary['bulk']['freq_std_hz'] * 1e3:.3f} mHz")


def _cmd_synth_trace(args) -> int:
    if args.config is not None:
        scenario = _load_scenario(args)
        trace = scenario.build_trace()
        name = scenario.config["name"]
    else:
        params = SynthParams(duration=600.0,
                             seed=args.seed if args.seed is not None else 0)
        trace = synthesize(params)
        name = "default"
    out = args.out or Path(".")
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"trace_{name}.csv"
    write_trace(trace, path)
    _say(args, f"wrote {len(trace)} samples to {path}")
    return 0


def _cmd_calibrate(args) -> int:
    if args.config is not None:
        scenario = _load_scenario(args)
        feeder = scenario.build_feeder()
        x2 = feeder.x_t2
        target = scenario.config["feeder"]["sensitivity_target_deg_per_kw"]
    else:
        target = args.target
        x2 = calibrate_sensitivity(target)
    _say(args, f"x_t2 = {x2:.6f} pu for {target} deg/kW "
               f"(small-signal estimate {target * math.pi / 180.0 * 720:.6f} pu)")
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        write_json({"target_deg_per_kw": target, "x_t2_pu": x2},
                   args.out / "calibration.json")
    return 0


def _cmd_run(args) -> int:
    scenario = _load_scenario(args)
    artifacts = run_scenario(scenario, out_dir=args.out)
    _print_run_summary(args, artifacts.summary)
    if artifacts.out_dir is not None:
        _say(args, f"artifacts in {artifacts.out_dir}")
    return 0


def _cmd_compare(args) -> int:
    scenario = _load_scenario(args)
    report = run_comparison(scenario, out_dir=args.out)
    for mode in ("gfr", "gfl"):
        _print_run_summary(args, report[f"{mode}_summary"])
    dom = report["rrocof_dominance"]
    if "error" in dom:
        _say(args, f"rrocof dominance: {dom['error']}")
    else:
        _say(args, f"rrocof: gfr below gfl at {dom['dominance_fraction']:.1%} "
                   f"of quantiles, median ratio {dom['median_ratio']:.3f}")
    rp = report["rpadd_comparison"]
    if "error" in rp:
        _say(args, f"rpadd comparison: {rp['error']}")
    else:
        _say(args, f"rpadd medians: gfr {rp['median_gfr']:.6g} vs "
                   f"gfl {rp['median_gfl']:.6g} deg/kW")
    if args.out is not None:
        _say(args, f"comparison report in {Path(args.out) / 'comparison.json'}")
    return 0


def _cmd_replay(args) -> int:
    result = replay_metrics(args.run_dir)
    result_out = {k: v for k, v in result.items() if not k.endswith("_values")}
    _say(args, json.dumps(result_out, indent=2, sort_keys=True))
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        write_json(result_out, args.out / "replayed_metrics.json")
    return 0


_COMMANDS = {
    "synth-trace": _cmd_synth_trace,
    "calibrate": _cmd_calibrate,
    "run": _cmd_run,
    "compare": _cmd_compare,
    "replay-metrics": _cmd_replay,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.verb](args)
    except (ConfigError, SolverError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
