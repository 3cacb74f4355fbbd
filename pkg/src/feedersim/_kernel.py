"""Compiled fixed-step time loop.

One scenario is one strictly sequential loop: advance the slack angle,
advance the active controller, solve the network algebraically, record.
The controller math mirrors the pure-Python transitions in
:mod:`feedersim.converter` (cross-checked by tests); the network solve is
the same Newton routine the library API uses.
"""

import math

from numba import njit

from .network import _newton_3bus

TWO_PI = 2.0 * math.pi
F0 = 50.0

MODE_OFF = 0
MODE_GFR = 1
MODE_GFL = 2

FLAG_PLL_FROZEN = 1
FLAG_SOC_TRIPPED = 2

NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 50
PLL_MIN_VOLTAGE = 0.1


@njit(cache=True)
def _wrap(a):
    return a - TWO_PI * math.ceil((a - math.pi) / TWO_PI)


@njit(cache=True)
def run_time_loop(theta_slack, dt, mode, act_idx,
                  x1, x2, load_pu, load_q_pu, pv_pu,
                  xf, e_mag, w_filt, d_pu, p0_pu,
                  kp, ki, lag_tau, deadband_hz,
                  s_rated_pu, e_cap_pu_s, soc0, soc_min, soc_max,
                  th1_out, v1_out, th2_out, v2_out,
                  p_bess_out, p_g_out, f_ctrl_out, soc_out, flags_out):
    """Run the full co-simulation loop; returns (status, fail_idx, max_residual).

    All powers are pu on the feeder base; ``d_pu`` is the droop in pu/Hz
    and ``e_cap_pu_s`` the battery capacity in pu-seconds. status 0 means
    the whole horizon solved; 1 means Newton failed at ``fail_idx``.
    """
    n = theta_slack.shape[0]
    p_fixed = pv_pu - load_pu
    q_fixed = -load_q_pu

    # The network is solved in the slack-relative frame: the nominal-frame
    # angle drifts without bound when the grid is off-frequency, and that
    # drift would otherwise eat the precision budget of the small upstream
    # reactance. Recorded angles are shifted back to the nominal frame.
    th1 = 0.0
    v1 = 1.0
    th2 = 0.0
    v2 = 1.0

    # grid-forming state (nominal frame)
    theta_c = theta_slack[0]
    p_filt = 0.0

    # grid-following state (nominal frame)
    theta_pll = theta_slack[0]
    omega = 0.0
    integ = 0.0
    p_out = 0.0

    soc = soc0
    p_conv_prev = 0.0
    gfr_live = True
    max_res = 0.0
    ths_prev = theta_slack[0]  # measurements lag the solve by one step

    for k in range(n):
        ths = theta_slack[k]
        active = k >= act_idx
        flags = 0

        use_emf = False
        theta_c_k = 0.0
        p2 = p_fixed
        p_act = 0.0

        if mode == MODE_GFL:
            # PLL listens from t0; injection starts at activation
            if v2 >= PLL_MIN_VOLTAGE:
                err = _wrap(th2 + ths_prev - theta_pll)
                integ += ki * err * dt
                omega = kp * err + integ
                theta_pll += omega * dt
            else:
                flags |= FLAG_PLL_FROZEN
            if active:
                f_dev = omega / TWO_PI
                if abs(f_dev) <= deadband_hz:
                    f_eff = 0.0
                else:
                    f_eff = f_dev - math.copysign(deadband_hz, f_dev)
                p_cmd = p0_pu - d_pu * f_eff
                a = dt / lag_tau
                if a > 1.0:
                    a = 1.0
                p_out += a * (p_cmd - p_out)
                # nameplate and energy-window limits
                upper = (soc - soc_min) * e_cap_pu_s / dt
                if upper > s_rated_pu:
                    upper = s_rated_pu
                elif upper < -s_rated_pu:
                    upper = -s_rated_pu
                lower = -(soc_max - soc) * e_cap_pu_s / dt
                if lower < -s_rated_pu:
                    lower = -s_rated_pu
                elif lower > s_rated_pu:
                    lower = s_rated_pu
                p_act = p_out
                if p_act > upper:
                    p_act = upper
                if p_act < lower:
                    p_act = lower
                soc -= p_act * dt / e_cap_pu_s
            p2 = p_fixed + p_act
            f_ctrl = F0 + omega / TWO_PI

        elif mode == MODE_GFR:
            if active and gfr_live:
                a = dt * w_filt
                if a > 1.0:
                    a = 1.0
                p_filt += a * (p_conv_prev - p_filt)
                if p_filt > s_rated_pu:
                    p_filt = s_rated_pu
                elif p_filt < -s_rated_pu:
                    p_filt = -s_rated_pu
                theta_c -= dt * TWO_PI * (p_filt - p0_pu) / d_pu
                use_emf = True
                theta_c_k = theta_c - ths
            else:
                # locked to the measured PBC angle so activation is bumpless
                theta_c = th2 + ths_prev
                p_filt = 0.0
                if not gfr_live:
                    flags |= FLAG_SOC_TRIPPED
            f_ctrl = F0 - (p_filt - p0_pu) / d_pu

        else:
            f_ctrl = F0

        th1, v1, th2, v2, iters, res, cflag = _newton_3bus(
            0.0, 1.0, x1, x2, p2, q_fixed,
            use_emf, e_mag, theta_c_k, xf,
            th1, v1, th2, v2, NEWTON_TOL, NEWTON_MAX_ITER,
        )
        if cflag != 0:
            return 1, k, res
        if res > max_res:
            max_res = res

        if use_emf:
            p_conv = e_mag * v2 * math.sin(theta_c_k - th2) / xf
            soc -= p_conv * dt / e_cap_pu_s
            if soc <= soc_min or soc >= soc_max:
                if soc < soc_min:
                    soc = soc_min
                if soc > soc_max:
                    soc = soc_max
                gfr_live = False
                flags |= FLAG_SOC_TRIPPED
        else:
            p_conv = p_act

        th1_out[k] = th1 + ths
        v1_out[k] = v1
        th2_out[k] = th2 + ths
        v2_out[k] = v2
        p_bess_out[k] = p_conv
        p_g_out[k] = v1 * math.sin(th1) / x1
        f_ctrl_out[k] = f_ctrl
        soc_out[k] = soc
        flags_out[k] = flags

        p_conv_prev = p_conv
        ths_prev = ths

    return 0, n - 1, max_res
