"""Simulation library for VTOL vehicles with a tiltable thrust direction.

Plant, two-priority tracking controller (velocity/position primary,
direction/attitude secondary), rotor allocation, scenario configuration,
closed-loop simulation with telemetry, plus a CLI and an HTTP service on
top. See the README for frames and conventions.
"""

__version__ = "0.1.0"

from .allocation import RotorCommand, allocate, build_allocation_matrix
from .config import (
    PRESET_NAMES,
    ScenarioConfig,
    load_config,
    preset,
    save_config,
)
from .controller import (
    ControllerState,
    Gains,
    PrimaryCommand,
    SecondaryCommand,
    TiltCommand,
    TorqueMode,
    attitude_objective,
    body_torque,
    direction_objective,
    position_command,
    tilt_rate_command,
    velocity_command,
)
from .errors import (
    AntipodalDirectionError,
    IntegrationError,
    SimulationError,
    SingularThrustError,
    SingularTiltError,
    TiltSimError,
)
from .plant import Environment, PlantInput, VehicleParams, VehicleState
from .reference import ReferenceSample, constant_velocity, hover, lissajous
from .sim import Metrics, SimResult, TelemetryLog, metrics, run, write_csv

__all__ = [
    "__version__",
    "RotorCommand",
    "allocate",
    "build_allocation_matrix",
    "PRESET_NAMES",
    "ScenarioConfig",
    "load_config",
    "preset",
    "save_config",
    "ControllerState",
    "Gains",
    "PrimaryCommand",
    "SecondaryCommand",
    "TiltCommand",
    "TorqueMode",
    "attitude_objective",
    "body_torque",
    "direction_objective",
    "position_command",
    "tilt_rate_command",
    "velocity_command",
    "AntipodalDirectionError",
    "IntegrationError",
    "SimulationError",
    "SingularThrustError",
    "SingularTiltError",
    "TiltSimError",
    "Environment",
    "PlantInput",
    "VehicleParams",
    "VehicleState",
    "ReferenceSample",
    "constant_velocity",
    "hover",
    "lissajous",
    "Metrics",
    "SimResult",
    "TelemetryLog",
    "metrics",
    "run",
    "write_csv",
]
