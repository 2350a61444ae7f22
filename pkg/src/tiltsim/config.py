"""Scenario configuration: validated schema, JSON round-trip, presets.

A scenario file is a JSON object with exactly the keys of ScenarioConfig
(unknown keys are rejected at every nesting level, and validation reports
every violation at once, not just the first). The same models serve as the
request schema of the HTTP service. Conversion helpers turn the validated
schema into the runtime types of the plant/controller modules.
"""

from __future__ import annotations

import json
import math
from functools import partial
from pathlib import Path
from typing import Annotated, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from . import reference
from .controller import Gains, TorqueMode
from .plant import Environment, VehicleParams, VehicleState

__all__ = [
    "VehicleConfig",
    "GainsConfig",
    "LissajousRef",
    "HoverRef",
    "ConstantVelocityRef",
    "SecondaryConfig",
    "InitialConfig",
    "ScenarioConfig",
    "load_config",
    "save_config",
    "preset",
    "PRESET_NAMES",
]

Vec3 = Annotated[list[float], Field(min_length=3, max_length=3)]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class VehicleConfig(_Strict):
    """Physical vehicle model; inertia is the body-frame diagonal [kg m^2]."""

    mass: float = 1.5
    inertia_diag: Vec3 = [0.028, 0.028, 0.06]
    pivot_offset: float = 0.05
    arm_length: float = 0.2
    tilt_sin_limit: float = 0.5
    c_drag: float = 0.0092
    c_induced: float = 0.025
    thrust_coeff: float = 1e-5
    yaw_torque_coeff: float = 1e-6
    gravity: float = 9.81
    parasitic_pivot_torque: bool = True

    def to_params(self) -> VehicleParams:
        return VehicleParams(
            mass=self.mass,
            inertia=np.diag(self.inertia_diag),
            pivot_offset=self.pivot_offset,
            arm_length=self.arm_length,
            tilt_sin_limit=self.tilt_sin_limit,
            c_drag=self.c_drag,
            c_induced=self.c_induced,
            thrust_coeff=self.thrust_coeff,
            yaw_torque_coeff=self.yaw_torque_coeff,
            gravity=self.gravity,
            parasitic_pivot_torque=self.parasitic_pivot_torque,
        )


class GainsConfig(_Strict):
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

    def to_gains(self) -> Gains:
        return Gains(**self.model_dump())


class LissajousRef(_Strict):
    """Figure-eight x = amp_x sin(rate t), y = amp_y sin(2 rate t)."""

    kind: Literal["lissajous"] = "lissajous"
    rate: float = 2.0 * math.pi / 15.0
    amp_x: float = 5.0
    amp_y: float = 5.0

    def to_fn(self):
        return partial(
            reference.lissajous, rate=self.rate, amp_x=self.amp_x, amp_y=self.amp_y
        )


class HoverRef(_Strict):
    kind: Literal["hover"] = "hover"
    point: Vec3 = [0.0, 0.0, 0.0]

    def to_fn(self):
        return partial(reference.hover, point=tuple(self.point))


class ConstantVelocityRef(_Strict):
    kind: Literal["constant_velocity"] = "constant_velocity"
    velocity: Vec3 = [0.0, 0.0, 0.0]
    start: Vec3 = [0.0, 0.0, 0.0]

    def to_fn(self):
        return partial(
            reference.constant_velocity,
            velocity=tuple(self.velocity),
            start=tuple(self.start),
        )


ReferenceConfig = Annotated[
    Union[LissajousRef, HoverRef, ConstantVelocityRef], Field(discriminator="kind")
]


class SecondaryConfig(_Strict):
    """Secondary objective: hold a full attitude or just a body-vertical direction."""

    mode: Literal["attitude", "direction"] = "attitude"
    # attitude mode: target rotation matrix (body -> inertial), row-major
    target_attitude: list[Vec3] = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    # direction mode: inertial direction for the body vertical, plus free spin rate
    target_direction: Vec3 = [0.0, 0.0, 1.0]
    yaw_rate: float = 0.0

    @field_validator("target_attitude")
    @classmethod
    def _attitude_orthonormal(cls, v):
        r = np.asarray(v, dtype=float)
        if r.shape != (3, 3) or not np.allclose(r.T @ r, np.identity(3), atol=1e-6):
            raise ValueError("target_attitude must be a 3x3 rotation matrix")
        return v

    @field_validator("target_direction")
    @classmethod
    def _direction_unit(cls, v):
        n = math.sqrt(sum(x * x for x in v))
        if abs(n - 1.0) > 1e-6:
            raise ValueError("target_direction must be a unit vector")
        return v


class InitialConfig(_Strict):
    position: Vec3 = [0.0, 0.0, 0.0]
    velocity: Vec3 = [0.0, 0.0, 0.0]
    attitude: list[Vec3] = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    omega: Vec3 = [0.0, 0.0, 0.0]
    u: Vec3 = [0.0, 0.0, 1.0]

    @field_validator("attitude")
    @classmethod
    def _attitude_orthonormal(cls, v):
        r = np.asarray(v, dtype=float)
        if r.shape != (3, 3) or not np.allclose(r.T @ r, np.identity(3), atol=1e-6):
            raise ValueError("attitude must be a 3x3 rotation matrix")
        return v

    def to_state(self) -> VehicleState:
        return VehicleState(
            position=np.array(self.position),
            velocity=np.array(self.velocity),
            attitude=np.array(self.attitude, dtype=float),
            omega=np.array(self.omega),
            u=np.array(self.u),
        )


class ScenarioConfig(_Strict):
    """Complete description of one simulation run."""

    name: str = "scenario"
    duration: float = 10.0
    dt: float = 1e-3
    control_decimation: int = 1
    mode: Literal["position", "velocity"] = "position"
    torque_mode: Literal["reduced", "full"] = "reduced"
    wind: Vec3 = [0.0, 0.0, 0.0]
    vehicle: VehicleConfig = VehicleConfig()
    gains: GainsConfig = GainsConfig()
    reference: ReferenceConfig = LissajousRef()
    secondary: SecondaryConfig = SecondaryConfig()
    initial: InitialConfig = InitialConfig()

    @field_validator("duration", "dt")
    @classmethod
    def _positive(cls, v, info):
        if v <= 0.0:
            raise ValueError(f"{info.field_name} must be positive")
        return v

    @field_validator("control_decimation")
    @classmethod
    def _decim(cls, v):
        if v < 1:
            raise ValueError("control_decimation must be >= 1")
        return v

    @model_validator(mode="after")
    def _tilt_step_contraction(self):
        # forward invariance of the tilt cone needs k_u * control interval <= 1
        if self.gains.k_u * self.dt * self.control_decimation > 1.0:
            raise ValueError(
                "k_u * dt * control_decimation must be <= 1 "
                "(tilt servo would overshoot its own cone)"
            )
        return self

    def to_environment(self) -> Environment:
        return Environment(wind=np.array(self.wind))

    def to_torque_mode(self) -> TorqueMode:
        return TorqueMode(self.torque_mode)


def load_config(path) -> ScenarioConfig:
    """Parse and validate a scenario file; raises with every violation listed."""
    text = Path(path).read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as err:
        raise ValueError(f"{path}: not valid JSON ({err})") from err
    return ScenarioConfig.model_validate(raw)


def save_config(cfg: ScenarioConfig, path) -> None:
    Path(path).write_text(cfg.model_dump_json(indent=2) + "\n")


def _sim1() -> ScenarioConfig:
    """Moderate figure-eight: 15 s laps, tilt stays inside the cone."""
    a = 2.0 * math.pi / 15.0
    return ScenarioConfig(
        name="sim1",
        duration=30.0,
        reference=LissajousRef(rate=a),
        initial=InitialConfig(position=[0.0, 0.5, 0.0], velocity=[5 * a, 10 * a, 0.0]),
        # pivot moment is realized through the rotor allocation, not re-injected
        vehicle=VehicleConfig(parasitic_pivot_torque=False),
    )


def _sim2() -> ScenarioConfig:
    """Aggressive figure-eight: 10 s laps, tilt saturates twice per lap."""
    a = math.pi / 5.0
    cfg = _sim1()
    return cfg.model_copy(
        update={
            "name": "sim2",
            "duration": 20.0,
            "reference": LissajousRef(rate=a),
            "initial": InitialConfig(
                position=[0.0, 0.5, 0.0], velocity=[5 * a, 10 * a, 0.0]
            ),
        }
    )


_PRESETS = {"sim1": _sim1, "sim2": _sim2}
PRESET_NAMES = tuple(_PRESETS)


def preset(name: str) -> ScenarioConfig:
    """Built-in benchmark scenario by name ('sim1' or 'sim2')."""
    try:
        return _PRESETS[name]()
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; have {sorted(_PRESETS)}") from None
