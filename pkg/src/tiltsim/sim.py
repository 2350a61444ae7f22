"""Closed-loop simulation engine and telemetry.

`run` advances the plant at the configured step dt, recomputing the control
cascade every `control_decimation` steps (commands are zero-order held in
between, like a discrete flight controller in front of a faster physics
engine). The plant always receives the wrench the rotors can actually
produce: the allocation stage clips per-rotor and the achieved wrench, not
the ideal command, drives the dynamics.

Telemetry is column-oriented (preallocated arrays, one row per plant step
plus the final state) and serializes to CSV with a fixed column order, so
two runs of the same config produce byte-identical files.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from . import plant
from .allocation import RotorCommand, allocate
from .config import ScenarioConfig
from .controller import (
    ControllerState,
    Gains,
    PrimaryCommand,
    SecondaryCommand,
    TiltCommand,
    TorqueMode,
    attitude_objective,
    body_torque,
    command_rate,
    direction_objective,
    position_command,
    tilt_rate_command,
    velocity_command,
)
from .errors import SimulationError, TiltSimError
from .plant import Environment, PlantInput, VehicleParams, VehicleState

__all__ = [
    "TelemetryLog",
    "Metrics",
    "StepCommands",
    "SimResult",
    "run",
    "metrics",
    "write_csv",
    "IdealRun",
    "run_ideal_velocity_loop",
]

CSV_COLUMNS = (
    "t",
    "x1", "x2", "x3",
    "xr1", "xr2", "xr3",
    "ex1", "ex2", "ex3",
    "v1", "v2", "v3",
    "ev1", "ev2", "ev3",
    "tilt_deg",
    "incl_deg",
    "thrust",
    "torque1", "torque2", "torque3",
    "rotor_sq1", "rotor_sq2", "rotor_sq3", "rotor_sq4",
    "lyap",
    "lyap_rate",
    "saturated",
    "feasible",
)


@dataclass
class TelemetryLog:
    """Column-oriented run history; one row per logged step."""

    t: np.ndarray
    position: np.ndarray  # (n, 3)
    position_ref: np.ndarray
    velocity: np.ndarray
    velocity_ref: np.ndarray
    tilt_deg: np.ndarray
    inclination_deg: np.ndarray
    thrust: np.ndarray
    torque: np.ndarray  # (n, 3)
    rotor_speed_sq: np.ndarray  # (n, 4)
    lyapunov: np.ndarray
    lyapunov_rate: np.ndarray
    saturated: np.ndarray  # bool
    feasible: np.ndarray  # bool

    def __len__(self):
        return self.t.shape[0]

    @property
    def position_err(self):
        return self.position - self.position_ref

    @property
    def velocity_err(self):
        return self.velocity - self.velocity_ref


@dataclass
class Metrics:
    """Summary statistics; errors and inclination are evaluated after the
    transient window, the tilt maximum over the whole run (the bound is a
    hard constraint at all times)."""

    duration: float
    dt: float
    n_steps: int
    runtime_s: float
    transient: float
    max_tilt_deg: float
    max_inclination_deg: float
    max_pos_err: float
    rms_pos_err: float
    final_pos_err: float
    mean_speed: float
    mean_axis_speed: float
    saturation_duty: float


class StepCommands(NamedTuple):
    """Everything the cascade produced at one control step."""

    primary: PrimaryCommand
    secondary: SecondaryCommand
    tilt: TiltCommand
    rotor: RotorCommand
    plant_input: PlantInput


@dataclass
class SimResult:
    config: ScenarioConfig
    log: TelemetryLog
    metrics: Metrics
    final_state: VehicleState
    controller_state: ControllerState


def _alloc_log(n: int) -> TelemetryLog:
    return TelemetryLog(
        t=np.zeros(n),
        position=np.zeros((n, 3)),
        position_ref=np.zeros((n, 3)),
        velocity=np.zeros((n, 3)),
        velocity_ref=np.zeros((n, 3)),
        tilt_deg=np.zeros(n),
        inclination_deg=np.zeros(n),
        thrust=np.zeros(n),
        torque=np.zeros((n, 3)),
        rotor_speed_sq=np.zeros((n, 4)),
        lyapunov=np.zeros(n),
        lyapunov_rate=np.zeros(n),
        saturated=np.zeros(n, dtype=bool),
        feasible=np.ones(n, dtype=bool),
    )


def run(cfg: ScenarioConfig, probe: Callable | None = None) -> SimResult:
    """Execute one scenario.

    `probe(i, t, state, commands, cstate)` is called at every control step
    right after the cascade runs; tests use it to watch internal quantities
    that telemetry does not carry. Controller and plant failures are
    re-raised as SimulationError tagged with the simulation time.
    """
    params = cfg.vehicle.to_params()
    gains = cfg.gains.to_gains()
    env = cfg.to_environment()
    state = cfg.initial.to_state()
    state.validate(params)
    cstate = ControllerState()
    ref_fn = cfg.reference.to_fn()
    torque_mode = cfg.to_torque_mode()
    primary_fn = position_command if cfg.mode == "position" else velocity_command

    if cfg.secondary.mode == "attitude":
        target_r = np.asarray(cfg.secondary.target_attitude, dtype=float)
        secondary_fn = lambda st: attitude_objective(st, target_r, gains)
    else:
        target_dir = np.asarray(cfg.secondary.target_direction, dtype=float)
        yaw_rate = cfg.secondary.yaw_rate
        secondary_fn = lambda st: direction_objective(st, target_dir, gains, yaw_rate)

    dt = cfg.dt
    decim = cfg.control_decimation
    dt_ctrl = dt * decim
    n = int(round(cfg.duration / dt))
    log = _alloc_log(n + 1)
    cmds: StepCommands | None = None

    t0 = time.perf_counter()
    for i in range(n + 1):
        t = i * dt
        ref = ref_fn(t)
        try:
            if i % decim == 0 or i == n:
                prim = primary_fn(state, ref, env, params, gains, cstate, dt_ctrl)
                sec = secondary_fn(state)
                tilt = tilt_rate_command(state, prim, sec, params, gains)
                u_in = state.attitude @ state.u
                _, f2 = plant.aero_force(state.velocity, u_in, env, params)
                thrust_des = prim.thrust_bar + f2
                if torque_mode is TorqueMode.FULL:
                    wdot = command_rate(cstate, tilt.omega_cmd, dt_ctrl, gains.tau_f)
                    dist = None
                    if params.parasitic_pivot_torque:
                        dist = plant.parasitic_torque(
                            state, PlantInput(max(thrust_des, 0.0), np.zeros(3)), params
                        )
                    gamma = body_torque(
                        state, tilt.omega_cmd, params, gains, torque_mode, wdot, dist
                    )
                else:
                    gamma = body_torque(state, tilt.omega_cmd, params, gains)
                rotor = allocate(thrust_des, gamma, state.u, params)
                inp = PlantInput(
                    thrust=rotor.thrust_achieved,
                    torque=rotor.torque_achieved,
                    tilt_rate=tilt.tilt_rate,
                )
                cmds = StepCommands(prim, sec, tilt, rotor, inp)
                if probe is not None:
                    probe(i, t, state, cmds, cstate)
            _log_row(log, i, t, state, ref, cmds)
            if i < n:
                # u_dot3 is the dependent coordinate; re-solve it at the
                # current tilt so a command held across decimated plant steps
                # stays tangent to the sphere
                td = cmds.plant_input.tilt_rate
                td[2] = -(state.u[0] * td[0] + state.u[1] * td[1]) / state.u[2]
                state = plant.step(state, cmds.plant_input, env, params, dt, t)
        except TiltSimError as err:
            raise SimulationError(f"t = {t:.4f} s: {err}") from err
    runtime = time.perf_counter() - t0

    m = metrics(log, runtime_s=runtime, dt=dt)
    return SimResult(
        config=cfg, log=log, metrics=m, final_state=state, controller_state=cstate
    )


def _log_row(log, i, t, state, ref, cmds: StepCommands):
    log.t[i] = t
    log.position[i] = state.position
    log.position_ref[i] = ref.position
    log.velocity[i] = state.velocity
    log.velocity_ref[i] = ref.velocity
    log.tilt_deg[i] = math.degrees(
        math.asin(min(1.0, math.hypot(state.u[0], state.u[1])))
    )
    # inclination: angle between the body vertical and the true vertical
    log.inclination_deg[i] = math.degrees(
        math.acos(max(-1.0, min(1.0, state.attitude[2][2])))
    )
    log.thrust[i] = cmds.plant_input.thrust
    log.torque[i] = cmds.plant_input.torque
    log.rotor_speed_sq[i] = cmds.rotor.rotor_speed_sq
    log.lyapunov[i] = cmds.primary.lyapunov
    log.lyapunov_rate[i] = cmds.primary.lyapunov_rate
    log.saturated[i] = cmds.tilt.saturated
    log.feasible[i] = cmds.rotor.feasible


def metrics(
    log: TelemetryLog,
    transient: float = 5.0,
    runtime_s: float = float("nan"),
    dt: float = float("nan"),
) -> Metrics:
    """Summarize a run; post-transient statistics use t >= transient."""
    if len(log) == 0:
        raise ValueError("empty log")
    t = log.t
    sel = t >= min(transient, t[-1] if len(t) else 0.0)
    err = log.position_err
    err_n = np.sqrt((err * err).sum(axis=1))
    speed = np.hypot(log.velocity[:, 0], log.velocity[:, 1])
    post = err_n[sel]
    vsel = log.velocity[sel]
    return Metrics(
        duration=float(t[-1]) if len(t) else 0.0,
        dt=dt,
        n_steps=len(t),
        runtime_s=runtime_s,
        transient=transient,
        max_tilt_deg=float(log.tilt_deg.max()),
        max_inclination_deg=float(log.inclination_deg[sel].max()),
        max_pos_err=float(post.max()),
        rms_pos_err=float(np.sqrt(np.mean(post * post))),
        final_pos_err=float(err_n[-1]),
        mean_speed=float(speed[sel].mean()),
        mean_axis_speed=float(
            np.abs(vsel[:, 0]).mean() + np.abs(vsel[:, 1]).mean()
        ),
        saturation_duty=float(log.saturated[sel].mean()),
    )


def write_csv(log: TelemetryLog, path, decimate: int = 1) -> None:
    """Serialize telemetry with the fixed column set; floats use shortest
    round-trip formatting so identical runs give byte-identical files."""
    if decimate < 1:
        raise ValueError("decimate must be >= 1")
    err = log.position_err
    verr = log.velocity_err
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for i in range(0, len(log), decimate):
            row = [repr(float(log.t[i]))]
            for block in (
                log.position[i], log.position_ref[i], err[i],
                log.velocity[i], verr[i],
            ):
                row.extend(repr(float(x)) for x in block)
            row.append(repr(float(log.tilt_deg[i])))
            row.append(repr(float(log.inclination_deg[i])))
            row.append(repr(float(log.thrust[i])))
            row.extend(repr(float(x)) for x in log.torque[i])
            row.extend(repr(float(x)) for x in log.rotor_speed_sq[i])
            row.append(repr(float(log.lyapunov[i])))
            row.append(repr(float(log.lyapunov_rate[i])))
            row.append(int(log.saturated[i]))
            row.append(int(log.feasible[i]))
            w.writerow(row)


@dataclass
class IdealRun:
    """History of an ideal-inner-loop velocity-tracking rollout."""

    t: np.ndarray
    lyapunov: np.ndarray
    lyapunov_rate: np.ndarray
    vel_err_norm: np.ndarray
    align: np.ndarray  # u . u_r
    velocity: np.ndarray
    u: np.ndarray


def run_ideal_velocity_loop(
    v0,
    u0,
    ref_fn,
    params: VehicleParams,
    gains: Gains,
    duration: float,
    dt: float,
    env: Environment | None = None,
    rates_fn=None,
) -> IdealRun:
    """Velocity tracking with the inner loops replaced by their ideals.

    The body-rate and tilt stages are assumed perfect, so the thrust
    direction u (kept here as an inertial vector: the rollout carries no
    attitude) rotates exactly at the commanded omega_u, zero-order held over
    each step, and the velocity sees m dv/dt = m g e3 + F_a1 - T_bar u.
    This isolates the primary law: its Lyapunov function must decrease along
    these trajectories. `rates_fn(t, ref, velocity) -> (dT_r/dt, du_r/dt)`
    optionally supplies exact setpoint rates; default is the filtered
    estimator.
    """
    from .geom import exp_so3, unit

    env = env or Environment()
    n = int(round(duration / dt))
    out = IdealRun(
        t=np.zeros(n + 1),
        lyapunov=np.zeros(n + 1),
        lyapunov_rate=np.zeros(n + 1),
        vel_err_norm=np.zeros(n + 1),
        align=np.zeros(n + 1),
        velocity=np.zeros((n + 1, 3)),
        u=np.zeros((n + 1, 3)),
    )
    state = VehicleState(
        position=np.zeros(3),
        velocity=np.asarray(v0, dtype=float),
        attitude=np.identity(3),
        omega=np.zeros(3),
        u=unit(np.asarray(u0, dtype=float)),
    )
    cstate = ControllerState()
    g_e3 = np.array((0.0, 0.0, params.gravity))
    m = params.mass
    for i in range(n + 1):
        t = i * dt
        ref = ref_fn(t)
        rates = None if rates_fn is None else rates_fn(t, ref, state.velocity)
        prim = velocity_command(state, ref, env, params, gains, cstate, dt, rates)
        verr = state.velocity - ref.velocity
        out.t[i] = t
        out.lyapunov[i] = prim.lyapunov
        out.lyapunov_rate[i] = prim.lyapunov_rate
        out.vel_err_norm[i] = math.sqrt(float(verr @ verr))
        out.align[i] = float(state.u @ prim.dir_setpoint)
        out.velocity[i] = state.velocity
        out.u[i] = state.u
        if i == n:
            break
        # u rotates exactly under the held omega_u command
        e_half = exp_so3(prim.omega_u * (0.5 * dt))
        u_a = state.u
        u_b = e_half @ u_a
        u_c = e_half @ u_b

        def vdot(v, u_dir):
            f1, _ = plant.aero_force(v, u_dir, env, params)
            return g_e3 + (f1 - prim.thrust_bar * u_dir) / m

        v = state.velocity
        k1 = vdot(v, u_a)
        k2 = vdot(v + 0.5 * dt * k1, u_b)
        k3 = vdot(v + 0.5 * dt * k2, u_b)
        k4 = vdot(v + dt * k3, u_c)
        state.velocity = v + (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
        state.u = unit(u_c)
    return out
