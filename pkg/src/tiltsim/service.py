"""HTTP face of the simulator.

A small FastAPI app exposing the presets and a run endpoint. The request
reuses ScenarioConfig, so the service validates exactly what the library
validates; responses are plain JSON (metrics always, telemetry on request,
optionally decimated, columns in CSV order).

    GET  /health
    GET  /presets
    GET  /presets/{name}
    POST /simulations

Scenario validation problems surface as 422 (FastAPI's request validation),
failures inside a run (singular thrust, integration blow-up) as 400 with the
time-stamped reason.
"""

from __future__ import annotations

import dataclasses

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, ConfigDict, model_validator

from . import __version__
from .config import PRESET_NAMES, ScenarioConfig, preset
from .errors import TiltSimError
from .sim import CSV_COLUMNS, TelemetryLog, run

__all__ = [
    "SimulationRequest",
    "MetricsModel",
    "TelemetryModel",
    "SimulationResponse",
    "create_app",
    "app",
]


class SimulationRequest(BaseModel):
    """Run either a named preset or an inline scenario, exactly one of the two."""

    model_config = ConfigDict(extra="forbid")

    preset: str | None = None
    config: ScenarioConfig | None = None
    include_telemetry: bool = False
    telemetry_decimation: int = 1

    @model_validator(mode="after")
    def _one_source(self):
        if (self.preset is None) == (self.config is None):
            raise ValueError("provide exactly one of 'preset' or 'config'")
        if self.telemetry_decimation < 1:
            raise ValueError("telemetry_decimation must be >= 1")
        return self


class MetricsModel(BaseModel):
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


class TelemetryModel(BaseModel):
    columns: list[str]
    rows: list[list[float]]


class SimulationResponse(BaseModel):
    name: str
    metrics: MetricsModel
    telemetry: TelemetryModel | None = None


def _telemetry_rows(log: TelemetryLog, decimate: int) -> list[list[float]]:
    table = np.column_stack(
        (
            log.t,
            log.position,
            log.position_ref,
            log.position_err,
            log.velocity,
            log.velocity_err,
            log.tilt_deg,
            log.inclination_deg,
            log.thrust,
            log.torque,
            log.rotor_speed_sq,
            log.lyapunov,
            log.lyapunov_rate,
            log.saturated.astype(float),
            log.feasible.astype(float),
        )
    )
    return table[::decimate].tolist()


def create_app() -> FastAPI:
    app = FastAPI(title="tiltsim", version=__version__)

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.get("/presets")
    def presets():
        return {"presets": list(PRESET_NAMES)}

    @app.get("/presets/{name}")
    def preset_config(name: str) -> ScenarioConfig:
        try:
            return preset(name)
        except KeyError as err:
            raise HTTPException(status_code=404, detail=str(err)) from None

    @app.post("/simulations")
    def simulate(req: SimulationRequest) -> SimulationResponse:
        if req.preset is not None:
            try:
                cfg = preset(req.preset)
            except KeyError as err:
                raise HTTPException(status_code=404, detail=str(err)) from None
        else:
            cfg = req.config
        try:
            result = run(cfg)
        except TiltSimError as err:
            raise HTTPException(status_code=400, detail=str(err)) from None
        telemetry = None
        if req.include_telemetry:
            telemetry = TelemetryModel(
                columns=list(CSV_COLUMNS),
                rows=_telemetry_rows(result.log, req.telemetry_decimation),
            )
        return SimulationResponse(
            name=cfg.name,
            metrics=MetricsModel(**dataclasses.asdict(result.metrics)),
            telemetry=telemetry,
        )

    return app


app = create_app()
