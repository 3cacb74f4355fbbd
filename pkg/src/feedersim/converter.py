"""Battery converter control laws and nameplate limits.

Two realizations of frequency regulation through a 720 kVA / 500 kWh
battery:

* grid-forming: the converter behaves as a voltage source; a single-loop
  angle droop integrates the power-frequency droop to the internal voltage
  angle, with a first-order filter on the measured power. No inner
  voltage/current loops and no virtual-inertia term: this is the minimal
  realization that exhibits voltage-source behavior.
* grid-following: a synchronous-reference-frame PLL estimates the PBC
  voltage angle and frequency; an outer droop computes the power command,
  which the current control tracks through a first-order actuation lag.

Both converge to the same steady-state droop P = p0 - D*(f - f0); they
differ in how fast the power follows the grid.
"""

import math
from dataclasses import dataclass, replace

from .core import wrap_angle

TWO_PI = 2.0 * math.pi
F0 = 50.0  # Hz

PLL_MIN_VOLTAGE = 0.1  # pu, below this the PLL freezes


@dataclass(frozen=True)
class ConverterParams:
    s_rated: float = 720e3            # VA
    e_cap: float = 500e3              # Wh
    droop_d: float = 1.44e6           # W/Hz, maximum feasible droop
    p0: float = 0.0                   # W, power setpoint
    gfr_power_filter_cutoff: float = TWO_PI * 5.0  # rad/s
    gfr_coupling_x: float = 0.16      # pu on s_rated, LCL coupling reactance
    gfl_pll_kp: float = 3.5           # 1/s, PLL proportional gain
    gfl_pll_ki: float = 6.0           # 1/s^2, PLL integral gain
    gfl_current_lag_tau: float = 0.02  # s, actuation lag
    deadband: float = 0.0             # Hz, droop deadband
    soc_min: float = 0.1
    soc_max: float = 0.9

    def __post_init__(self):
        if min(self.s_rated, self.e_cap, self.droop_d) <= 0:
            raise ValueError("s_rated, e_cap and droop_d must be > 0")
        if min(self.gfr_power_filter_cutoff, self.gfl_current_lag_tau,
               self.gfr_coupling_x) <= 0:
            raise ValueError("filter cutoffs, lags and coupling must be > 0")
        if not 0.0 <= self.soc_min < self.soc_max <= 1.0:
            raise ValueError("need 0 <= soc_min < soc_max <= 1")


@dataclass(frozen=True)
class GfrState:
    """Grid-forming internal state."""

    theta_c: float = 0.0     # rad, internal voltage angle (nominal frame)
    p_filt: float = 0.0      # W, low-pass filtered measured power
    e_mag: float = 1.0       # pu, fixed internal voltage magnitude


@dataclass(frozen=True)
class GflState:
    """Grid-following internal state."""

    theta_pll: float = 0.0        # rad, PLL angle (nominal frame)
    omega_pll: float = 0.0        # rad/s, estimated speed deviation
    pll_integrator: float = 0.0   # rad/s
    p_cmd: float = 0.0            # W, droop output
    p_out: float = 0.0            # W, injection after actuation lag
    pll_frozen: bool = False      # telemetry: held on undervoltage


@dataclass(frozen=True)
class BessState:
    """Battery energy bookkeeping."""

    soc: float = 0.5  # fraction of e_cap


def gfr_step(state: GfrState, p_meas: float, dt: float,
             params: ConverterParams) -> GfrState:
    """Advance the grid-forming angle droop by one step.

    The filtered power drives the internal frequency f_c = f0 -
    (p_filt - p0)/droop_d, integrated to the voltage angle in the nominal
    frame. With the grid at a constant frequency offset df the delivered
    power settles at p0 - droop_d*df. Explicit integration is stable for
    steps up to 2 ms at the supported gain range.
    """
    if dt > 2e-3:
        raise ValueError(f"step {dt} s too large for explicit integration "
                         "(needs dt <= 2 ms)")
    a = min(dt * params.gfr_power_filter_cutoff, 1.0)
    p_filt = state.p_filt + a * (p_meas - state.p_filt)
    p_filt = max(-params.s_rated, min(params.s_rated, p_filt))
    theta_c = state.theta_c - dt * TWO_PI * (p_filt - params.p0) / params.droop_d
    return GfrState(theta_c=theta_c, p_filt=p_filt, e_mag=state.e_mag)


def gfr_frequency(state: GfrState, params: ConverterParams) -> float:
    """Converter frequency implied by the angle droop, in Hz."""
    return F0 - (state.p_filt - params.p0) / params.droop_d


def gfl_pll_step(state: GflState, v_mag: float, theta_g: float, dt: float,
                 params: ConverterParams) -> GflState:
    """Track the PBC voltage angle with a PI synchronous-reference PLL.

    Below PLL_MIN_VOLTAGE the loop holds its state and flags the freeze;
    angle tracking is meaningless on a collapsed voltage.
    """
    if v_mag < PLL_MIN_VOLTAGE:
        return replace(state, pll_frozen=True)
    err = wrap_angle(theta_g - state.theta_pll)
    integ = state.pll_integrator + params.gfl_pll_ki * err * dt
    omega = params.gfl_pll_kp * err + integ
    theta = state.theta_pll + omega * dt
    return replace(state, theta_pll=theta, omega_pll=omega,
                   pll_integrator=integ, pll_frozen=False)


def pll_frequency(state: GflState) -> float:
    """PLL frequency estimate in Hz."""
    return F0 + state.omega_pll / TWO_PI


def apply_deadband(f_dev: float, deadband: float) -> float:
    """Effective frequency deviation after the droop deadband."""
    if abs(f_dev) <= deadband:
        return 0.0
    return f_dev - math.copysign(deadband, f_dev)


def gfl_droop_step(state: GflState, dt: float,
                   params: ConverterParams) -> GflState:
    """Compute the droop power command and advance the actuation lag."""
    f_dev = apply_deadband(state.omega_pll / TWO_PI, params.deadband)
    p_cmd = params.p0 - params.droop_d * f_dev
    a = min(dt / params.gfl_current_lag_tau, 1.0)
    p_out = state.p_out + a * (p_cmd - state.p_out)
    return replace(state, p_cmd=p_cmd, p_out=p_out)


def apply_limits(p_requested: float, bess: BessState, dt: float,
                 params: ConverterParams) -> tuple[float, BessState]:
    """Clamp a power request to the nameplate and battery energy window.

    Positive power injects toward the grid and discharges the battery.
    Near a state-of-charge bound the power is cut to exactly deplete (or
    fill) to the bound within the step, so the energy integral and the
    state of charge remain consistent. Idempotent: re-applying the
    returned power to the original state changes nothing.
    """
    e_ws = params.e_cap * 3600.0  # Wh -> J
    if dt > 0:
        p_dis_max = (bess.soc - params.soc_min) * e_ws / dt
        p_chg_max = (params.soc_max - bess.soc) * e_ws / dt
    else:
        p_dis_max = math.inf
        p_chg_max = math.inf
    # energy-window bounds, themselves never beyond the nameplate (a state
    # of charge outside the window pushes back at most at rated power)
    upper = max(-params.s_rated, min(params.s_rated, p_dis_max))
    lower = max(-params.s_rated, min(params.s_rated, -p_chg_max))
    p_actual = max(lower, min(upper, p_requested))
    soc = bess.soc - p_actual * dt / e_ws
    return p_actual, BessState(soc=soc)
