import filecmp
import json
import math
from pathlib import Path

import numpy as np
import pytest

from feedersim.converter import BessState, GflState, GfrState, apply_limits, gfl_droop_step, gfl_pll_step, gfr_step
from feedersim.core import Phasor
from feedersim.engine import ConfigError, Scenario, replay_metrics, run_comparison, run_scenario
from feedersim.network import PowerSource, VoltageSource, solve_step


def short_config(**over):
    cfg = {
        "name": "short",
        "duration_s": 30.0,
        "dt_sim_s": 0.001,
        "activation_time_s": 8.0,
        "baseline_window_s": [2.0, 7.0],
        "trace": {"synth": {"ramp_start_s": 10.0, "ramp_duration_s": 5.0,
                            "ramp_magnitude_hz": -0.05, "ou_sigma_hz": 0.004,
                            "ou_tau_s": 0.015, "seed": 99}},
    }
    cfg.update(over)
    return cfg


def flat_offset_config(offset_hz=-0.05, **over):
    cfg = short_config(**over)
    cfg["trace"] = {"synth": {"ramp_start_s": 0.0, "ramp_duration_s": 0.001,
                              "ramp_magnitude_hz": offset_hz, "ou_sigma_hz": 0.0}}
    return cfg


class TestScenarioConfig:
    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown config key 'frobnicate'"):
            Scenario.from_dict({"frobnicate": 1})

    def test_unknown_nested_key_rejected(self):
        with pytest.raises(ConfigError, match="converter.typo"):
            Scenario.from_dict({"converter": {"typo": 2.0}})

    def test_baseline_must_precede_activation(self):
        with pytest.raises(ConfigError, match="before activation"):
            Scenario.from_dict({"activation_time_s": 100.0,
                                "baseline_window_s": [60.0, 120.0]})

    def test_step_must_divide_reporting_interval(self):
        with pytest.raises(ConfigError, match="divide"):
            Scenario.from_dict({"dt_sim_s": 0.0015})

    def test_step_too_large_for_integration(self):
        with pytest.raises(ConfigError, match="2 ms"):
            Scenario.from_dict({"dt_sim_s": 0.004})

    def test_bad_mode(self):
        with pytest.raises(ConfigError, match="mode"):
            Scenario.from_dict({"mode": "both"})

    def test_hash_stable_and_sensitive(self):
        a = Scenario.from_dict(short_config())
        b = Scenario.from_dict(short_config())
        c = Scenario.from_dict(short_config(duration_s=31.0))
        assert a.hash == b.hash
        assert a.hash != c.hash

    def test_from_json(self, tmp_path):
        path = tmp_path / "scenario.json"
        path.write_text(json.dumps(short_config()))
        assert Scenario.from_json(path).hash == Scenario.from_dict(short_config()).hash

    def test_bad_json_rejected(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{nope")
        with pytest.raises(ConfigError, match="invalid JSON"):
            Scenario.from_json(path)


class TestRunScenario:
    def test_null_scenario(self):
        cfg = flat_offset_config(0.0, mode="off")
        cfg["trace"]["synth"]["ou_sigma_hz"] = 0.0
        cfg["pmu"] = {"angle_noise_sigma_deg": 0.0}
        art = run_scenario(Scenario.from_dict(cfg))
        assert art.summary["bulk"]["ifd_hz"] == pytest.approx(0.0, abs=1e-9)
        assert "error" in art.summary["rrocof_hz_per_s_per_w"]
        assert "no active samples" in art.summary["rrocof_hz_per_s_per_w"]["error"]
        assert np.all(art.p_bess_w == 0.0)
        d = np.degrees(art.theta_pcc - art.theta_pbc)
        assert np.std(d) < 1e-9

    @pytest.mark.parametrize("mode", ["gfr", "gfl"])
    def test_flat_offset_droop_and_angle(self, mode):
        art = run_scenario(Scenario.from_dict(flat_offset_config(mode=mode)))
        assert art.p_bess_w[-1] == pytest.approx(72e3, rel=5e-3)
        moved = abs(math.degrees(art.theta_pcc[-1] - art.theta_pbc[-1])
                    - math.degrees(art.delta_theta0_rad))
        assert moved == pytest.approx(72.0 * 0.006, rel=0.02)

    def test_power_balance_every_step(self):
        art = run_scenario(Scenario.from_dict(short_config(mode="gfr")))
        feeder = art.scenario.build_feeder()
        err = np.abs(art.p_g_w - (art.p_bess_w + feeder.pv_p - feeder.load_p))
        assert float(np.max(err)) / feeder.s_base < 1e-8
        assert art.max_residual_pu < 1e-10

    def test_soc_bookkeeping(self):
        art = run_scenario(Scenario.from_dict(flat_offset_config(mode="gfr")))
        e_ws = 500e3 * 3600.0
        drawn = float(np.sum(art.p_bess_w) * art.dt)
        assert (0.5 - art.soc[-1]) * e_ws == pytest.approx(drawn, rel=1e-9)

    def test_determinism_bit_identical(self, tmp_path):
        sc = Scenario.from_dict(short_config(mode="gfr"))
        a = run_scenario(sc, out_dir=tmp_path / "a")
        b = run_scenario(sc, out_dir=tmp_path / "b")
        files_a = sorted(p.name for p in a.out_dir.iterdir())
        files_b = sorted(p.name for p in b.out_dir.iterdir())
        assert files_a == files_b
        for name in files_a:
            assert filecmp.cmp(a.out_dir / name, b.out_dir / name, shallow=False), name

    def test_artifacts_carry_hash(self, tmp_path):
        sc = Scenario.from_dict(short_config(mode="gfl"))
        art = run_scenario(sc, out_dir=tmp_path)
        assert sc.hash[:12] in art.out_dir.name
        for csv in art.out_dir.glob("*.csv"):
            first = csv.read_text().splitlines()[0]
            assert sc.hash in first, csv.name
        summary = json.loads((art.out_dir / "summary.json").read_text())
        assert summary["scenario_hash"] == sc.hash

    def test_artifact_csv_headers(self, tmp_path):
        sc = Scenario.from_dict(short_config(mode="gfr"))
        art = run_scenario(sc, out_dir=tmp_path)
        heads = {
            "frames_pmu1_pcc.csv": "time_s,v_mag_pu,theta_deg,freq_hz,valid",
            "telemetry.csv": "time_s,p_bess_w,p_g_w,f_converter_hz,soc,flags",
            "rrocof.csv": "time_s,value",
            "rpadd.csv": "time_s,value",
            "cdf_rrocof.csv": "value,probability",
            "cdf_rpadd.csv": "value,probability",
        }
        for name, header in heads.items():
            lines = (art.out_dir / name).read_text().splitlines()
            data = [ln for ln in lines if not ln.startswith("#")]
            assert data[0] == header, name

    def test_config_echo_reusable(self, tmp_path):
        sc = Scenario.from_dict(short_config(mode="gfl"))
        art = run_scenario(sc, out_dir=tmp_path)
        again = Scenario.from_json(art.out_dir / "config.json")
        assert again.hash == sc.hash


class TestKernelMatchesLibrary:
    """The compiled loop must reproduce the pure-Python module semantics."""

    def _python_loop(self, scenario):
        cfg = scenario.config
        dt = cfg["dt_sim_s"]
        trace = scenario.build_trace().resample(dt, cfg["duration_s"])
        from feedersim.frequency import slack_angle
        theta_s = slack_angle(trace).values
        feeder = scenario.build_feeder()
        conv = scenario.build_converter()
        act_idx = int(math.ceil(cfg["activation_time_s"] / dt - 1e-9))

        mode = cfg["mode"]
        gfr = GfrState(theta_c=theta_s[0])
        gfl = GflState(theta_pll=theta_s[0])
        bess = BessState(cfg["converter"]["soc_initial"])
        state = None
        p_prev = 0.0
        p_hist, th1_hist, th2_hist = [], [], []
        warm = None
        for k in range(len(theta_s)):
            slack = Phasor(1.0, theta_s[k])
            active = k >= act_idx
            if mode == "gfl":
                v_prev = state.v_pbc if state is not None else Phasor(1.0, theta_s[0])
                gfl = gfl_pll_step(gfl, v_prev.magnitude, v_prev.angle, dt, conv)
                if active:
                    gfl = gfl_droop_step(gfl, dt, conv)
                    p_act, bess = apply_limits(gfl.p_out, bess, dt, conv)
                else:
                    p_act = 0.0
                boundary = PowerSource(p_act)
            else:
                if active:
                    gfr = gfr_step(gfr, p_prev, dt, conv)
                    boundary = VoltageSource(1.0, gfr.theta_c, conv.gfr_coupling_x)
                else:
                    th2 = state.v_pbc.angle if state is not None else theta_s[0]
                    gfr = GfrState(theta_c=th2, p_filt=0.0)
                    boundary = PowerSource(0.0)
            state = solve_step(feeder, slack, boundary, initial=warm)
            warm = (state.v_pcc.angle, state.v_pcc.magnitude,
                    state.v_pbc.angle, state.v_pbc.magnitude)
            p_prev = state.p_bess
            p_hist.append(state.p_bess)
            th1_hist.append(state.v_pcc.angle)
            th2_hist.append(state.v_pbc.angle)
        return np.array(p_hist), np.array(th1_hist), np.array(th2_hist)

    @pytest.mark.parametrize("mode", ["gfr", "gfl"])
    def test_trajectories_match(self, mode):
        cfg = short_config(mode=mode, duration_s=3.0, activation_time_s=1.0)
        cfg["baseline_window_s"] = [0.2, 0.9]
        cfg["trace"]["synth"]["ramp_start_s"] = 1.5
        cfg["trace"]["synth"]["ramp_duration_s"] = 1.0
        sc = Scenario.from_dict(cfg)
        art = run_scenario(sc)
        p, th1, th2 = self._python_loop(sc)
        np.testing.assert_allclose(art.p_bess_w, p, atol=1e-6)
        np.testing.assert_allclose(art.theta_pcc, th1, atol=1e-12)
        np.testing.assert_allclose(art.theta_pbc, th2, atol=1e-12)


class TestTransientOrdering:
    def test_gfr_responds_before_gfl_on_step(self, tmp_path):
        # frequency step: 63% of the droop response arrives strictly
        # earlier in grid-forming mode on the default parameter set
        dt = 0.001
        t = np.arange(0, 16.0 + dt / 2, dt)
        f = np.where(t < 8.0, 50.0, 49.95)
        path = tmp_path / "step.csv"
        with open(path, "w") as fh:
            fh.write("time_s,frequency_hz\n")
            for k in range(t.size):
                fh.write(f"{float(t[k])!r},{float(f[k])!r}\n")
        t63 = {}
        for mode in ("gfr", "gfl"):
            sc = Scenario.from_dict({
                "mode": mode, "duration_s": 16.0, "activation_time_s": 4.0,
                "baseline_window_s": [1.0, 3.0],
                "trace": {"source": "file", "path": str(path)},
                "pmu": {"angle_noise_sigma_deg": 0.0},
            })
            art = run_scenario(sc)
            assert art.p_bess_w[-1] == pytest.approx(72e3, rel=5e-3)
            t63[mode] = float(np.argmax(art.p_bess_w > 0.63 * 72e3)) * dt
        assert t63["gfr"] < t63["gfl"]


class TestGoldenBenchmark:
    def test_summary_matches_committed_values(self):
        golden = json.loads(
            (Path(__file__).parent / "golden_benchmark.json").read_text())
        sc = Scenario.from_dict({})
        assert sc.hash == golden["scenario_hash"], \
            "default scenario changed; regenerate the golden file deliberately"
        for mode in ("gfr", "gfl"):
            art = run_scenario(sc.with_overrides(mode=mode))
            want = golden[mode]
            assert art.rrocof.median == pytest.approx(
                want["rrocof_median"], rel=1e-9)
            assert art.rrocof.retained_fraction == pytest.approx(
                want["rrocof_retained_fraction"], rel=1e-9)
            assert art.rpadd.median == pytest.approx(
                want["rpadd_median"], rel=1e-9)
            assert art.summary["baseline"]["delta_theta0_deg"] == pytest.approx(
                want["delta_theta0_deg"], rel=1e-9)
            assert art.summary["bulk"]["ifd_hz"] == pytest.approx(
                want["ifd_hz"], rel=1e-9)
            assert art.summary["power"]["soc_final"] == pytest.approx(
                want["soc_final"], rel=1e-9)


class TestComparison:
    def test_report_structure_and_shared_seeds(self):
        sc = Scenario.from_dict(short_config())
        report = run_comparison(sc)
        assert report["gfr_summary"]["mode"] == "gfr"
        assert report["gfl_summary"]["mode"] == "gfl"
        assert set(report["mode_hashes"]) == {"gfr", "gfl"}
        assert "dominance_fraction" in report["rrocof_dominance"]
        assert "median_gfr" in report["rpadd_comparison"]
        # both runs consumed the same trace: identical baseline window stats
        assert report["gfr_summary"]["baseline"]["delta_theta0_deg"] == \
            pytest.approx(report["gfl_summary"]["baseline"]["delta_theta0_deg"],
                          abs=1e-12)

    def test_comparison_artifact(self, tmp_path):
        sc = Scenario.from_dict(short_config())
        run_comparison(sc, out_dir=tmp_path)
        report = json.loads((tmp_path / "comparison.json").read_text())
        assert "rrocof_dominance" in report
        assert len(list(tmp_path.iterdir())) == 3  # two run dirs + report


class TestReplay:
    def test_roundtrip_reproduces_metrics(self, tmp_path):
        sc = Scenario.from_dict(short_config(mode="gfr"))
        art = run_scenario(sc, out_dir=tmp_path)
        replayed = replay_metrics(art.out_dir)
        assert replayed["scenario_hash"] == sc.hash
        assert replayed["delta_theta0_deg"] == pytest.approx(
            math.degrees(art.delta_theta0_rad), rel=1e-12, abs=1e-12)
        np.testing.assert_allclose(replayed["rrocof_values"],
                                   art.rrocof.values, rtol=1e-12)
        np.testing.assert_allclose(replayed["rpadd_values"],
                                   art.rpadd.values, rtol=1e-12)
