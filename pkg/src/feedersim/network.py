"""Quasi-static phasor model of the radial feeder.

Topology (lossless, positive-sequence, all reactances in pu on ``s_base``):

    slack (50 kV) --x_t1-- PCC (21 kV) --x_t2-- PBC (0.3 kV)

The aggregated building load, the PV plant and the battery converter all
attach at the PBC bus; the converter either fixes an internal voltage
phasor behind its coupling reactance (grid-forming) or injects a commanded
power (grid-following). The network is solved algebraically at every
simulation step by Newton-Raphson in polar form.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .core import Phasor, PerUnitBase

S_BASE_DEFAULT = 720e3       # VA, converter nameplate; conditions the Jacobian near 1 pu

# Voltage zone bases (50 kV / 21 kV / 0.3 kV), shared nominal frequency.
DEFAULT_BASES = (
    PerUnitBase(S_BASE_DEFAULT, 50e3),
    PerUnitBase(S_BASE_DEFAULT, 21e3),
    PerUnitBase(S_BASE_DEFAULT, 300.0),
)

# Upstream transformer default: 0.05 pu on its 20 MVA nameplate.
X_T1_DEFAULT = 0.05 * (S_BASE_DEFAULT / 20e6)

NEWTON_TOL = 1e-12           # pu mismatch; comfortably under the 1e-10 contract
NEWTON_MAX_ITER = 50


class SolverError(RuntimeError):
    """Raised when the power-flow iteration fails to converge."""

    def __init__(self, message, residual=math.nan, iterations=0):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


LOAD_PF_DEFAULT = 0.95  # building loads are not purely active


def load_q_from_pf(load_p: float, pf: float) -> float:
    """Reactive consumption implied by an inductive power factor."""
    if not 0.0 < pf <= 1.0:
        raise ValueError("power factor must be in (0, 1]")
    return load_p * math.tan(math.acos(pf))


@dataclass(frozen=True)
class FeederModel:
    """Series reactances plus the fixed PBC-side load and PV injection."""

    x_t1: float = X_T1_DEFAULT   # pu, slack to PCC
    x_t2: float = 0.0754         # pu, PCC to PBC (calibrated in practice)
    load_p: float = 140e3        # W, consumption (positive) at the PBC bus
    load_q: float = load_q_from_pf(140e3, LOAD_PF_DEFAULT)  # var, consumption
    pv_p: float = 0.0            # W, injection at the PBC bus
    s_base: float = S_BASE_DEFAULT
    bases: tuple = field(default=DEFAULT_BASES, repr=False)

    def __post_init__(self):
        if self.x_t1 <= 0 or self.x_t2 <= 0:
            raise ValueError("transformer reactances must be > 0")
        if self.s_base <= 0:
            raise ValueError("s_base must be > 0")


@dataclass(frozen=True)
class VoltageSource:
    """Grid-forming boundary: internal EMF behind a coupling reactance."""

    e_mag: float                 # pu
    theta: float                 # rad, nominal frame
    x_coupling: float = 0.1      # pu on s_base


@dataclass(frozen=True)
class PowerSource:
    """Grid-following boundary: commanded converter injection at the PBC bus."""

    p: float                     # W, positive injects toward the PCC
    q: float = 0.0               # var, held at zero


@dataclass(frozen=True)
class BusState:
    """One converged network solution."""

    v_slack: Phasor
    v_pcc: Phasor
    v_pbc: Phasor
    p_g: float        # W through T1, positive when the feeder exports to the grid
    p_bess: float     # W delivered by the converter into the PBC bus
    p_load: float     # W consumed by the building load
    residual: float   # pu, final mismatch norm
    iterations: int


@njit(cache=True)
def _newton_3bus(theta_s, v_s, x1, x2, p2_spec, q2_spec,
                 use_emf, e_mag, theta_c, xf,
                 th1, v1, th2, v2, tol, max_iter):
    """Newton-Raphson on (th1, v1, th2, v2) for the 3-bus chain.

    Bus 1 (PCC) has zero injection; bus 2 (PBC) has the specified PQ
    injection and, when ``use_emf``, an additional branch to the fixed
    internal phasor (e_mag, theta_c) through xf. Returns the solution,
    iteration count and final mismatch; flag 0 means converged.
    """
    res = 1e30
    for it in range(max_iter):
        s1 = math.sin(th1 - theta_s)
        c1 = math.cos(th1 - theta_s)
        s12 = math.sin(th1 - th2)
        c12 = math.cos(th1 - th2)

        p1 = v1 * v_s * s1 / x1 + v1 * v2 * s12 / x2
        q1 = (v1 * v1 - v1 * v_s * c1) / x1 + (v1 * v1 - v1 * v2 * c12) / x2
        p2 = -v2 * v1 * s12 / x2
        q2 = (v2 * v2 - v2 * v1 * c12) / x2

        # Jacobian d(calc)/d(th1, v1, th2, v2)
        j = np.empty((4, 4))
        j[0, 0] = v1 * v_s * c1 / x1 + v1 * v2 * c12 / x2
        j[0, 1] = v_s * s1 / x1 + v2 * s12 / x2
        j[0, 2] = -v1 * v2 * c12 / x2
        j[0, 3] = v1 * s12 / x2

        j[1, 0] = v1 * v_s * s1 / x1 + v1 * v2 * s12 / x2
        j[1, 1] = (2.0 * v1 - v_s * c1) / x1 + (2.0 * v1 - v2 * c12) / x2
        j[1, 2] = -v1 * v2 * s12 / x2
        j[1, 3] = -v1 * c12 / x2

        j[2, 0] = -v2 * v1 * c12 / x2
        j[2, 1] = -v2 * s12 / x2
        j[2, 2] = v2 * v1 * c12 / x2
        j[2, 3] = -v1 * s12 / x2

        j[3, 0] = v2 * v1 * s12 / x2
        j[3, 1] = -v2 * c12 / x2
        j[3, 2] = -v2 * v1 * s12 / x2
        j[3, 3] = (2.0 * v2 - v1 * c12) / x2

        if use_emf:
            s2c = math.sin(th2 - theta_c)
            c2c = math.cos(th2 - theta_c)
            p2 += v2 * e_mag * s2c / xf
            q2 += (v2 * v2 - v2 * e_mag * c2c) / xf
            j[2, 2] += v2 * e_mag * c2c / xf
            j[2, 3] += e_mag * s2c / xf
            j[3, 2] += v2 * e_mag * s2c / xf
            j[3, 3] += (2.0 * v2 - e_mag * c2c) / xf

        f = np.empty(4)
        f[0] = -p1
        f[1] = -q1
        f[2] = p2_spec - p2
        f[3] = q2_spec - q2

        res = max(abs(f[0]), abs(f[1]), abs(f[2]), abs(f[3]))
        if res < tol:
            return th1, v1, th2, v2, it, res, 0

        # 4x4 Gaussian elimination with partial pivoting
        a = np.empty((4, 5))
        a[:, :4] = j
        a[:, 4] = f
        singular = False
        for col in range(4):
            piv = col
            best = abs(a[col, col])
            for r in range(col + 1, 4):
                if abs(a[r, col]) > best:
                    best = abs(a[r, col])
                    piv = r
            if best < 1e-14:
                singular = True
                break
            if piv != col:
                for c in range(5):
                    tmp = a[col, c]
                    a[col, c] = a[piv, c]
                    a[piv, c] = tmp
            for r in range(col + 1, 4):
                m = a[r, col] / a[col, col]
                for c in range(col, 5):
                    a[r, c] -= m * a[col, c]
        if singular:
            return th1, v1, th2, v2, it, res, 2

        dx = np.empty(4)
        for r in range(3, -1, -1):
            acc = a[r, 4]
            for c in range(r + 1, 4):
                acc -= a[r, c] * dx[c]
            dx[r] = acc / a[r, r]

        th1 += dx[0]
        v1 += dx[1]
        th2 += dx[2]
        v2 += dx[3]

    return th1, v1, th2, v2, max_iter, res, 1


def solve_step(feeder: FeederModel, v_slack: Phasor, boundary,
               initial=None) -> BusState:
    """Solve the feeder for one time step.

    ``boundary`` is either a :class:`VoltageSource` (grid-forming) or a
    :class:`PowerSource` (grid-following). Raises :class:`SolverError`
    carrying the last residual if Newton does not converge within
    ``NEWTON_MAX_ITER`` iterations (infeasible operating point).
    """
    sb = feeder.s_base
    p_fixed = (feeder.pv_p - feeder.load_p) / sb
    q_fixed = -feeder.load_q / sb
    if isinstance(boundary, PowerSource):
        use_emf = False
        e_mag = 1.0
        theta_c = 0.0
        xf = 1.0
        p2 = p_fixed + boundary.p / sb
        q2 = q_fixed + boundary.q / sb
    elif isinstance(boundary, VoltageSource):
        use_emf = True
        e_mag = boundary.e_mag
        theta_c = boundary.theta
        xf = boundary.x_coupling
        if xf <= 0:
            raise ValueError("coupling reactance must be > 0")
        p2 = p_fixed
        q2 = q_fixed
    else:
        raise TypeError(f"unsupported converter boundary {type(boundary).__name__}")

    # solve in the slack-relative frame: angles stay small there, which
    # keeps the residual floor far below the tolerance even after hours
    # of accumulated nominal-frame drift
    if initial is None:
        th1 = th2 = 0.0
        v1 = v2 = 1.0
    else:
        th1, v1, th2, v2 = initial
        th1 -= v_slack.angle
        th2 -= v_slack.angle

    theta_c_rel = theta_c - v_slack.angle
    th1, v1, th2, v2, iters, res, flag = _newton_3bus(
        0.0, v_slack.magnitude, feeder.x_t1, feeder.x_t2,
        p2, q2, use_emf, e_mag, theta_c_rel, xf,
        th1, v1, th2, v2, NEWTON_TOL, NEWTON_MAX_ITER,
    )
    if flag != 0:
        raise SolverError(
            f"power flow did not converge after {iters} iterations "
            f"(residual {res:.3e} pu); operating point likely infeasible",
            residual=res, iterations=iters,
        )

    p_g = v1 * v_slack.magnitude * math.sin(th1) / feeder.x_t1 * sb
    if use_emf:
        p_bess = e_mag * v2 * math.sin(theta_c_rel - th2) / xf * sb
    else:
        p_bess = boundary.p
    th1 += v_slack.angle
    th2 += v_slack.angle
    return BusState(
        v_slack=v_slack,
        v_pcc=Phasor(v1, th1),
        v_pbc=Phasor(v2, th2),
        p_g=p_g,
        p_bess=p_bess,
        p_load=feeder.load_p,
        residual=res,
        iterations=iters,
    )


def two_bus_receiving_voltage(v_send: complex, x: float, p_drawn: float,
                              q_drawn: float) -> complex:
    """Closed-form receiving-end voltage of a single lossless branch.

    Solves V_r for a PQ demand (p_drawn, q_drawn) in pu fed from ``v_send``
    through reactance ``x``; returns the high-voltage root. Used as the
    independent oracle for the Newton solver.
    """
    u = abs(v_send)
    half = u * u - 2.0 * x * q_drawn
    disc = half * half - 4.0 * x * x * (p_drawn * p_drawn + q_drawn * q_drawn)
    if disc < 0.0:
        raise SolverError("two-bus problem infeasible (negative discriminant)")
    y = 0.5 * (half + math.sqrt(disc))
    v_frame = (y + x * q_drawn - 1j * x * p_drawn) / u
    return v_frame * v_send / u


def delta_theta(state: BusState) -> float:
    """Inter-PMU angle difference theta_PCC - theta_PBC in radians."""
    return state.v_pcc.angle - state.v_pbc.angle


def sensitivity_deg_per_kw(feeder: FeederModel, probe_p: float = 1e3) -> float:
    """Numeric d(delta_theta)/dP at zero converter power, in deg/kW.

    Central difference of the full solver around the feeder's configured
    operating point (load and PV as given, converter power +-probe_p).
    """
    slack = Phasor(1.0, 0.0)
    hi = delta_theta(solve_step(feeder, slack, PowerSource(+probe_p)))
    lo = delta_theta(solve_step(feeder, slack, PowerSource(-probe_p)))
    return (hi - lo) / (2.0 * probe_p) * (180.0 / math.pi) * 1e3


def calibrate_sensitivity(target_deg_per_kw: float,
                          feeder: FeederModel | None = None,
                          rated_p: float | None = None,
                          tol: float = 1e-4) -> float:
    """Find x_t2 so the converter-power-to-angle sensitivity matches target.

    The returned reactance reproduces ``target_deg_per_kw`` (magnitude of
    d(delta_theta)/dP at the zero-converter-power operating point) within
    ``tol`` relative, iterating Newton-style on the solver itself. Raises
    if the target would require more than pi/4 of angle at rated power.
    """
    if target_deg_per_kw <= 0:
        raise ValueError("sensitivity target must be > 0")
    if feeder is None:
        feeder = FeederModel()
    if rated_p is None:
        rated_p = feeder.s_base

    # small-signal seed: delta ~ P * x at |V| = 1 pu
    x2 = target_deg_per_kw * (math.pi / 180.0) * (feeder.s_base / 1e3) / 1.0
    if (rated_p / feeder.s_base) * x2 >= math.sin(math.pi / 4.0):
        raise SolverError(
            f"target {target_deg_per_kw} deg/kW requires an angle beyond pi/4 "
            f"at rated power {rated_p:.3g} W"
        )

    for _ in range(20):
        trial = FeederModel(feeder.x_t1, x2, feeder.load_p, feeder.load_q,
                            feeder.pv_p, feeder.s_base, feeder.bases)
        s = abs(sensitivity_deg_per_kw(trial))
        if abs(s - target_deg_per_kw) <= tol * target_deg_per_kw:
            return x2
        x2 *= target_deg_per_kw / s
    raise SolverError("sensitivity calibration did not converge")
