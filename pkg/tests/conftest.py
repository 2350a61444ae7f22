"""Shared fixtures.

The two benchmark scenarios are expensive (tens of seconds together), so they
run once per session with a recording probe attached; both the unit tests and
the acceptance gate read from the same results.
"""

from dataclasses import dataclass, field

import numpy as np
import pytest

from tiltsim.config import ScenarioConfig, ConstantVelocityRef, SecondaryConfig, preset
from tiltsim.sim import SimResult, run


@dataclass
class ProbeRecord:
    """Extrema of quantities the telemetry log does not carry."""

    max_priority_residual: float = 0.0
    max_unit_defect: float = 0.0
    max_z: float = 0.0
    n_control_steps: int = 0
    saturated_steps: list = field(default_factory=list)

    def __call__(self, i, t, state, cmds, cstate):
        self.n_control_steps += 1
        if cmds.tilt.priority_residual > self.max_priority_residual:
            self.max_priority_residual = cmds.tilt.priority_residual
        defect = abs(float(state.u @ state.u) ** 0.5 - 1.0)
        if defect > self.max_unit_defect:
            self.max_unit_defect = defect
        zn = float(cstate.z @ cstate.z) ** 0.5
        if zn > self.max_z:
            self.max_z = zn
        if cmds.tilt.saturated:
            self.saturated_steps.append(t)


def _probed(cfg: ScenarioConfig) -> tuple[SimResult, ProbeRecord]:
    probe = ProbeRecord()
    return run(cfg, probe=probe), probe


@pytest.fixture(scope="session")
def sim1_run() -> tuple[SimResult, ProbeRecord]:
    return _probed(preset("sim1"))


@pytest.fixture(scope="session")
def sim2_run() -> tuple[SimResult, ProbeRecord]:
    return _probed(preset("sim2"))


@pytest.fixture(scope="session")
def cruise_run() -> tuple[SimResult, ProbeRecord]:
    """Velocity-mode crosswind cruise: exercises the velocity primary law,
    the direction-mode secondary objective, and nonzero wind in one run."""
    cfg = ScenarioConfig(
        name="cruise",
        duration=8.0,
        mode="velocity",
        wind=[1.0, 0.5, 0.0],
        reference=ConstantVelocityRef(velocity=[4.0, 0.0, 0.0]),
        secondary=SecondaryConfig(mode="direction"),
        initial={"velocity": [4.0, 0.0, 0.0]},
    )
    return _probed(cfg)


@pytest.fixture(scope="session")
def all_runs(sim1_run, sim2_run, cruise_run):
    return {"sim1": sim1_run, "sim2": sim2_run, "cruise": cruise_run}


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260815)
