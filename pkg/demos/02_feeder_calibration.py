"""Calibrate the feeder to the published angle sensitivity.

The only metric-relevant network parameter that is publicly known is the
angle displacement per unit of injected power, 0.006 degree/kW between
the 21 kV and 0.3 kV measurement points. This script solves for the
series reactance that reproduces it, then sweeps injection to show the
(nearly linear) angle characteristic and the detectability figures.
"""

import math

import numpy as np
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from feedersim import (FeederModel, Phasor, PowerSource, calibrate_sensitivity,
                       sensitivity_deg_per_kw, solve_step)

TARGET = 0.006  # deg/kW

x2 = calibrate_sensitivity(TARGET)
feeder = FeederModel(x_t2=x2)
small_signal = TARGET * math.pi / 180.0 * 720.0
print(f"calibrated x_t2:      {x2:.6f} pu (small-signal seed {small_signal:.6f})")
print(f"achieved sensitivity: {abs(sensitivity_deg_per_kw(feeder)):.6f} deg/kW")

slack = Phasor(1.0, 0.0)
base = solve_step(feeder, slack, PowerSource(0.0))
d0 = math.degrees(base.v_pcc.angle - base.v_pbc.angle)
print(f"zero-power baseline:  {d0:.4f} deg "
      f"(140 kW of building load through the same path)")

powers = np.linspace(-300e3, 300e3, 61)
deltas = []
for p in powers:
    st = solve_step(feeder, slack, PowerSource(p))
    deltas.append(math.degrees(st.v_pcc.angle - st.v_pbc.angle))
deltas = np.array(deltas)

for p_kw in (14.4, 144.0):
    st = solve_step(feeder, slack, PowerSource(p_kw * 1e3))
    moved = abs(math.degrees(st.v_pcc.angle - st.v_pbc.angle) - d0)
    print(f"injecting {p_kw:6.1f} kW moves the angle difference by {moved:.4f} deg")
print("(14.4 kW is the droop response at the 10 mHz deadband edge; its "
      "0.086 deg displacement is 86x the 0.001 deg measurement noise)")

fig, ax = plt.subplots(figsize=(7, 4.5))
ax.plot(powers / 1e3, deltas, lw=1.5)
ax.axhline(d0, color="k", ls=":", lw=0.8)
ax.set_xlabel("converter injection [kW]")
ax.set_ylabel("angle difference 21 kV - 0.3 kV [deg]")
ax.set_title(f"calibrated feeder: {TARGET} deg/kW around the baseline")
fig.tight_layout()
fig.savefig("feeder_calibration.png", dpi=130)
print("wrote feeder_calibration.png")
