"""Two-priority tracking controller for thrust-tilting VTOL vehicles.

The actuation is a thrust of magnitude T along the body direction u (force
-T u), a body torque, and the tilt rate of u inside the body frame, with the
hard actuator constraint sqrt(u1^2 + u2^2) <= delta (tilt cone of half-angle
asin(delta) about the body vertical).

The cascade runs in four stages per control step:

1. Primary objective (velocity or position tracking). From the force
   setpoint F = m g e3 + F_a1 - m a_r (position mode adds bounded integral
   and position feedback terms) it derives the thrust setpoint pair
   (T_r, u_r) = (|F|, F/|F|) and outputs the thrust magnitude T_bar and the
   *inertial* angular velocity omega_u that the thrust direction must track:

       T_bar   = T_r (u . u_r) + k1 m (u . v_err)
       omega_u = (k2 m / T_r) u x v_err
               + (k3 + k3_adapt)/(1 + u . u_r)^2 u x u_r
               - u x (u x (u_r x du_r/dt))
       k3_adapt = 2 dT_r/dt (1 + u . u_r) / T_r

   The monitored Lyapunov function
   L = T_r^2 (1 - u . u_r)/(k2 m^2) + |v_err|^2/2 then satisfies
   dL/dt = -(k3/k2)(T_r/m)^2 |u x u_r|^2/(1 + u . u_r)^2 - k1 (u . v_err)^2
   along the ideal loop, which the tests check by finite differences.

2. Secondary objective: a body angular velocity omega_star asking the body
   to hold a direction or a full attitude. It is expendable.

3. Tilt stage. The identity omega_u = omega_u_body + omega - u (u . omega)
   splits the inertial rate of u between tilt motion inside the body frame
   and body rotation. The stage first asks the tilt to realize whatever the
   secondary objective leaves over, saturates the commanded tilt through

       du12/dt = -k_u u12 + k_u sat_delta(u12 + du12*/dt / k_u)

   (forward-invariant on |u12| <= delta for any demand, transparent whenever
   the argument is inside the cone), and then recomputes the body rate so
   the identity, hence the primary objective, holds exactly even while
   saturated: priority is structural, not tuned.

4. Inner torque loop tracking the composed body-rate command, either the
   reduced form -k_omega I (omega - omega*) + omega x I omega* or the full
   feedback-linearizing form with feedforward and disturbance
   pre-compensation.

Frames: omega_u from stage 1 is an inertial-frame vector; stages 3-4 work in
body coordinates (conversion through R^T). The rates dT_r/dt and du_r/dt are
not fully available analytically in closed loop; the force-setpoint rate is
assembled from the exactly known reference-jerk part plus first-order
filtered finite differences of the residual terms (ControllerState carries
the filter). Every op also accepts exact rates so tests can separate the law
from the estimator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import AntipodalDirectionError, SingularThrustError
from .geom import cross, norm, rotation_error_vector, sat_vec, unit
from .plant import Environment, VehicleParams, VehicleState, aero_force
from .reference import ReferenceSample

__all__ = [
    "Gains",
    "ControllerState",
    "PrimaryCommand",
    "SecondaryCommand",
    "TiltCommand",
    "TorqueMode",
    "EPS_FORCE",
    "EPS_DIR",
    "soft_saturation",
    "rate_estimates",
    "force_rate_estimate",
    "command_rate",
    "velocity_command",
    "position_command",
    "direction_objective",
    "attitude_objective",
    "tilt_rate_command",
    "body_torque",
]

# force setpoints below this are treated as singular (thrust direction undefined) [N]
EPS_FORCE = 1e-3
# guard band on 1 + u . u_r before the alignment gain blows up
EPS_DIR = 1e-6

_E3 = np.array((0.0, 0.0, 1.0))


@dataclass
class Gains:
    """Controller gains and limits.

    k1 [1/s] velocity feedback along u; k2 [1/s^2] and k3 [1/s] velocity and
    alignment feedback shaping omega_u; k4 [1/s] secondary-objective
    stiffness; k_int weights the bounded velocity integral z; beta [1/s^2]
    and sat_level [m/s^2] are the slope and ceiling of the bounded position
    feedback; k_z, k_zdot, zddot_max, z_span parameterize the bounded
    integrator; k_u [1/s] the tilt servo; k_omega [1/s] the torque loop;
    tau_f [s] the rate-estimate filter constant; omega_max [rad/s] the
    secondary-command clamp.
    """

    k1: float = 1.2
    k2: float = 0.34
    k3: float = 12.8
    k4: float = 10.0
    k_int: float = 1.0
    beta: float = 0.36
    sat_level: float = 6.0
    k_z: float = 4.0
    k_zdot: float = 4.0
    zddot_max: float = 0.5
    z_span: float = 1.0
    k_u: float = 16.0
    k_omega: float = 20.0
    tau_f: float = 0.02
    omega_max: float = 50.0

    def __post_init__(self):
        positive = (
            "k1", "k2", "k3", "k4", "beta", "sat_level", "k_z", "k_zdot",
            "zddot_max", "z_span", "k_u", "k_omega", "tau_f", "omega_max",
        )
        for name in positive:
            if getattr(self, name) <= 0.0:
                raise ValueError(f"gain {name} must be positive")
        if self.k_int < 0.0:
            raise ValueError("k_int must be non-negative")


@dataclass
class ControllerState:
    """Mutable controller memory: integrator and rate-filter states."""

    z: np.ndarray = field(default_factory=lambda: np.zeros(3))
    z_dot: np.ndarray = field(default_factory=lambda: np.zeros(3))
    thrust_rate: float = 0.0
    dir_rate: np.ndarray = field(default_factory=lambda: np.zeros(3))
    prev_thrust_setpoint: float | None = None
    prev_dir_setpoint: np.ndarray | None = None
    force_residual_rate: np.ndarray = field(default_factory=lambda: np.zeros(3))
    prev_force_residual: np.ndarray | None = None
    omega_cmd_rate: np.ndarray = field(default_factory=lambda: np.zeros(3))
    prev_omega_cmd: np.ndarray | None = None

    def __post_init__(self):
        self.z = np.asarray(self.z, dtype=float)
        self.z_dot = np.asarray(self.z_dot, dtype=float)


@dataclass
class PrimaryCommand:
    """Output of the primary objective: thrust plus required inertial rate of u."""

    thrust_bar: float
    omega_u: np.ndarray  # inertial frame [rad/s]
    thrust_setpoint: float  # T_r = |F| [N]
    dir_setpoint: np.ndarray  # u_r = F/|F|, inertial unit vector
    velocity_error: np.ndarray  # error the law acted on (includes integral shift)
    lyapunov: float
    lyapunov_rate: float


@dataclass
class SecondaryCommand:
    """Body angular-velocity wish of the secondary objective."""

    omega_star: np.ndarray  # body frame [rad/s]
    clamped: bool = False


@dataclass
class TiltCommand:
    """Composed actuation of the tilt stage, all body frame."""

    tilt_rate: np.ndarray  # du/dt command handed to the plant [1/s]
    omega_cmd: np.ndarray  # body angular-velocity command [rad/s]
    omega_u_body: np.ndarray  # rate of u inside the body frame [rad/s]
    saturated: bool
    priority_residual: float  # ||identity defect||, ~1e-16 by construction


class TorqueMode(Enum):
    """Inner torque law: REDUCED drops feedforward and disturbance terms."""

    REDUCED = "reduced"
    FULL = "full"


def soft_saturation(y, slope: float, level: float):
    """Bounded feedback slope*y / sqrt(slope^2 |y|^2 / level^2 + 1).

    Linear with gain `slope` near the origin, magnitude < `level` always.
    """
    y = np.asarray(y, dtype=float)
    q = slope * slope * float(y @ y) / (level * level)
    s = (slope / math.sqrt(q + 1.0)) * y
    # round-off can graze the asymptote for huge |y|; keep the bound strict
    lvl2 = level * level
    while float(s @ s) >= lvl2:
        s = s * (1.0 - 2.3e-16)
    return s


def rate_estimates(
    cstate: ControllerState,
    thrust_setpoint: float,
    dir_setpoint: np.ndarray,
    dt: float,
    tau_f: float,
):
    """Filtered finite-difference rates of (T_r, u_r).

    First call primes the filter and returns zero rates. The direction rate
    is projected onto the tangent plane of u_r so downstream cross products
    see a geometrically consistent derivative. Mutates cstate.
    """
    if cstate.prev_thrust_setpoint is None:
        cstate.prev_thrust_setpoint = thrust_setpoint
        cstate.prev_dir_setpoint = dir_setpoint.copy()
        return 0.0, np.zeros(3)
    alpha = min(1.0, dt / tau_f)
    raw_t = (thrust_setpoint - cstate.prev_thrust_setpoint) / dt
    cstate.thrust_rate += alpha * (raw_t - cstate.thrust_rate)
    raw_u = (dir_setpoint - cstate.prev_dir_setpoint) / dt
    dr = cstate.dir_rate + alpha * (raw_u - cstate.dir_rate)
    dr = dr - dir_setpoint * float(dir_setpoint @ dr)
    cstate.dir_rate = dr
    cstate.prev_thrust_setpoint = thrust_setpoint
    cstate.prev_dir_setpoint = dir_setpoint.copy()
    return cstate.thrust_rate, dr.copy()


def force_rate_estimate(
    cstate: ControllerState,
    residual_force: np.ndarray,
    known_rate: np.ndarray,
    dt: float,
    tau_f: float,
):
    """Rate of the force setpoint, jerk-sharpened.

    The setpoint splits into a part whose derivative is known in closed form
    (gravity is constant, the reference acceleration differentiates to the
    jerk) and a residual (aero compensation and feedback terms) that only
    admits numerical differentiation. Filtering just the residual keeps the
    estimate sharp where the setpoint moves fast. First call primes the
    residual filter and returns the known rate alone. Mutates cstate.
    """
    if cstate.prev_force_residual is None:
        cstate.prev_force_residual = residual_force.copy()
        return known_rate.copy()
    alpha = min(1.0, dt / tau_f)
    raw = (residual_force - cstate.prev_force_residual) / dt
    cstate.force_residual_rate = cstate.force_residual_rate + alpha * (
        raw - cstate.force_residual_rate
    )
    cstate.prev_force_residual = residual_force.copy()
    return known_rate + cstate.force_residual_rate


def command_rate(cstate: ControllerState, omega_cmd: np.ndarray, dt: float, tau_f: float):
    """Filtered finite-difference rate of the body-rate command (FULL torque mode)."""
    if cstate.prev_omega_cmd is None:
        cstate.prev_omega_cmd = omega_cmd.copy()
        return np.zeros(3)
    alpha = min(1.0, dt / tau_f)
    raw = (omega_cmd - cstate.prev_omega_cmd) / dt
    cstate.omega_cmd_rate = cstate.omega_cmd_rate + alpha * (raw - cstate.omega_cmd_rate)
    cstate.prev_omega_cmd = omega_cmd.copy()
    return cstate.omega_cmd_rate.copy()


def _primary_from_force(
    force,
    residual_force,
    known_force_rate,
    vel_err,
    state: VehicleState,
    params: VehicleParams,
    gains: Gains,
    cstate: ControllerState,
    dt: float,
    rates,
) -> PrimaryCommand:
    t_set = norm(force)
    if t_set <= EPS_FORCE:
        raise SingularThrustError(
            f"force setpoint {t_set!r} N below {EPS_FORCE!r} N; direction undefined"
        )
    u_set = force / t_set
    u_in = state.attitude @ state.u
    c = float(u_in @ u_set)
    if c <= -1.0 + EPS_DIR:
        raise AntipodalDirectionError(
            f"thrust direction antipodal to setpoint (u.u_r = {c!r})"
        )
    if rates is None:
        df = force_rate_estimate(
            cstate, residual_force, known_force_rate, dt, gains.tau_f
        )
        t_rate = float(u_set @ df)
        u_set_rate = (df - u_set * t_rate) / t_set
    else:
        t_rate, u_set_rate = rates

    m = params.mass
    uv = float(u_in @ vel_err)
    thrust_bar = t_set * c + gains.k1 * m * uv

    k3_adapt = 2.0 * t_rate * (1.0 + c) / t_set
    one_c2 = (1.0 + c) * (1.0 + c)
    align = cross(u_in, u_set)
    ff = cross(u_set, u_set_rate)
    omega_u = (
        (gains.k2 * m / t_set) * cross(u_in, vel_err)
        + ((gains.k3 + k3_adapt) / one_c2) * align
        - cross(u_in, cross(u_in, ff))
    )

    tm2 = (t_set / m) ** 2
    lyap = tm2 * (1.0 - c) / gains.k2 + 0.5 * float(vel_err @ vel_err)
    lyap_rate = (
        -(gains.k3 / gains.k2) * tm2 * float(align @ align) / one_c2
        - gains.k1 * uv * uv
    )
    return PrimaryCommand(
        thrust_bar=thrust_bar,
        omega_u=omega_u,
        thrust_setpoint=t_set,
        dir_setpoint=u_set,
        velocity_error=vel_err,
        lyapunov=lyap,
        lyapunov_rate=lyap_rate,
    )


def velocity_command(
    state: VehicleState,
    ref: ReferenceSample,
    env: Environment,
    params: VehicleParams,
    gains: Gains,
    cstate: ControllerState,
    dt: float,
    rates=None,
) -> PrimaryCommand:
    """Primary objective, velocity-tracking form.

    `rates` optionally supplies exact (dT_r/dt, du_r/dt); default is the
    filtered estimator in cstate. dt is the control interval (filter and
    integrator sample time).
    """
    u_in = state.attitude @ state.u
    f_a1, _ = aero_force(state.velocity, u_in, env, params)
    m = params.mass
    force = m * params.gravity * _E3 + f_a1 - m * ref.acceleration
    vel_err = state.velocity - ref.velocity
    return _primary_from_force(
        force, f_a1, -m * ref.jerk, vel_err, state, params, gains, cstate, dt, rates
    )


def _z_accel(z, z_dot, pos_err, gains: Gains):
    # bounded-integrator law: keeps |z| and the correction acceleration bounded
    inner = sat_vec(z + pos_err / gains.k_z, gains.z_span)
    return -gains.k_zdot * z_dot + sat_vec(gains.k_z * (inner - z), 0.5 * gains.zddot_max)


def position_command(
    state: VehicleState,
    ref: ReferenceSample,
    env: Environment,
    params: VehicleParams,
    gains: Gains,
    cstate: ControllerState,
    dt: float,
    rates=None,
) -> PrimaryCommand:
    """Primary objective, position-tracking form.

    Wraps the velocity law around the shifted error v_err + k_int dz/dt and
    augments the force setpoint with the bounded position feedback
    soft_saturation(pos_err + k_int z) and the integrator acceleration
    k_int d2z/dt2. The integrator state (z, dz/dt) advances by one control
    interval per call (RK4 with the position error frozen).
    """
    pos_err = state.position - ref.position
    z, z_dot = cstate.z, cstate.z_dot
    z_acc = _z_accel(z, z_dot, pos_err, gains)

    u_in = state.attitude @ state.u
    f_a1, _ = aero_force(state.velocity, u_in, env, params)
    m = params.mass
    xi = pos_err + gains.k_int * z
    residual = (
        f_a1
        + m * gains.k_int * z_acc
        + m * soft_saturation(xi, gains.beta, gains.sat_level)
    )
    force = m * params.gravity * _E3 - m * ref.acceleration + residual
    vel_err = state.velocity - ref.velocity + gains.k_int * z_dot

    h2 = 0.5 * dt
    k1z, k1d = z_dot, z_acc
    k2z = z_dot + h2 * k1d
    k2d = _z_accel(z + h2 * k1z, k2z, pos_err, gains)
    k3z = z_dot + h2 * k2d
    k3d = _z_accel(z + h2 * k2z, k3z, pos_err, gains)
    k4z = z_dot + dt * k3d
    k4d = _z_accel(z + dt * k3z, k4z, pos_err, gains)
    cstate.z = z + (dt / 6.0) * (k1z + 2.0 * (k2z + k3z) + k4z)
    cstate.z_dot = z_dot + (dt / 6.0) * (k1d + 2.0 * (k2d + k3d) + k4d)

    return _primary_from_force(
        force, residual, -m * ref.jerk, vel_err, state, params, gains, cstate, dt, rates
    )


def direction_objective(
    state: VehicleState, target, gains: Gains, yaw_rate: float = 0.0
) -> SecondaryCommand:
    """Secondary objective: align the body vertical with an inertial direction.

    omega* = k4/(1 + k . target)^2 k x target + yaw_rate k, expressed in body
    coordinates (k is the body vertical e3 there). The free spin component
    about k defaults to zero. Near-antipodal targets are clamped to
    omega_max and flagged rather than raised: the secondary objective is
    expendable by design.
    """
    eta_b = state.attitude.T @ unit(np.asarray(target, dtype=float))
    c = eta_b[2]
    den = (1.0 + c) * (1.0 + c)
    clamped = False
    if 1.0 + c <= EPS_DIR:
        w = np.array((0.0, 0.0, yaw_rate))
        clamped = True
    else:
        w = np.array(
            (-gains.k4 * eta_b[1] / den, gains.k4 * eta_b[0] / den, yaw_rate)
        )
    n = norm(w)
    if n > gains.omega_max:
        w = w * (gains.omega_max / n)
        clamped = True
    return SecondaryCommand(omega_star=w, clamped=clamped)


def attitude_objective(
    state: VehicleState, target_attitude, gains: Gains
) -> SecondaryCommand:
    """Secondary objective: full attitude hold.

    omega* = -k4 tan(theta/2) n with theta n the rotation vector of
    R_target^T R. tan(theta/2) diverges toward theta = pi, so the command is
    clamped to omega_max and flagged there (the antipodal attitude is an
    unstable equilibrium of the closed loop, never an error).
    """
    r_err = np.asarray(target_attitude, dtype=float).T @ state.attitude
    rv = rotation_error_vector(r_err)
    theta = norm(rv)
    if theta < 1e-12:
        return SecondaryCommand(omega_star=np.zeros(3))
    w = (-gains.k4 * math.tan(0.5 * min(theta, math.pi - 1e-9)) / theta) * rv
    clamped = False
    n = norm(w)
    if n > gains.omega_max:
        w = w * (gains.omega_max / n)
        clamped = True
    return SecondaryCommand(omega_star=w, clamped=clamped)


def tilt_rate_command(
    state: VehicleState,
    primary: PrimaryCommand,
    secondary: SecondaryCommand,
    params: VehicleParams,
    gains: Gains,
) -> TiltCommand:
    """Tilt stage: saturate the tilt, re-split rates so the primary holds.

    Asks the tilt to produce omega_u minus whatever body rotation the
    secondary objective contributes transverse to u, saturates that demand
    inside the cone |u12| <= delta, then recomposes the body-rate command
    from the *saturated* tilt rate. The identity
    omega_u = u x du/dt + omega - u (u . omega) holds exactly either way;
    only the secondary objective degrades.
    """
    u = state.u
    w_ui = state.attitude.T @ primary.omega_u
    ws = secondary.omega_star
    uws = u[0] * ws[0] + u[1] * ws[1] + u[2] * ws[2]
    w_ub_star = w_ui - (ws - u * uws)
    ud_star = cross(w_ub_star, u)

    delta = params.tilt_sin_limit
    a0 = u[0] + ud_star[0] / gains.k_u
    a1 = u[1] + ud_star[1] / gains.k_u
    an = math.hypot(a0, a1)
    saturated = an > delta
    if saturated:
        s = delta / an
        a0 *= s
        a1 *= s
    ud0 = gains.k_u * (a0 - u[0])
    ud1 = gains.k_u * (a1 - u[1])
    ud2 = -(u[0] * ud0 + u[1] * ud1) / u[2]
    tilt_rate = np.array((ud0, ud1, ud2))

    w_ub = cross(u, tilt_rate)
    omega_cmd = w_ui - w_ub + u * uws
    ucmd = u[0] * omega_cmd[0] + u[1] * omega_cmd[1] + u[2] * omega_cmd[2]
    residual = norm(w_ub + omega_cmd - u * ucmd - w_ui)
    return TiltCommand(
        tilt_rate=tilt_rate,
        omega_cmd=omega_cmd,
        omega_u_body=w_ub,
        saturated=saturated,
        priority_residual=residual,
    )


def body_torque(
    state: VehicleState,
    omega_cmd: np.ndarray,
    params: VehicleParams,
    gains: Gains,
    mode: TorqueMode = TorqueMode.REDUCED,
    omega_cmd_dot=None,
    disturbance_estimate=None,
):
    """Inner loop: torque tracking the body-rate command.

    REDUCED:  Gamma = -k_omega I (omega - omega*) + omega x I omega*
    FULL:     adds I domega*/dt feedforward and subtracts a disturbance
              torque estimate; with exact values the tracking error decays
              as |I (omega - omega*)| ~ exp(-k_omega t).
    """
    w = state.omega
    iw_cmd = params.inertia @ omega_cmd
    gamma = -gains.k_omega * (params.inertia @ (w - omega_cmd)) + cross(w, iw_cmd)
    if mode is TorqueMode.FULL:
        if omega_cmd_dot is not None:
            gamma = gamma + params.inertia @ omega_cmd_dot
        if disturbance_estimate is not None:
            gamma = gamma - disturbance_estimate
    return gamma
