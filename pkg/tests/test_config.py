"""Scenario configuration: schema strictness, validators, presets, files."""

import json

import numpy as np
import pytest
from pydantic import ValidationError

from tiltsim.config import (
    PRESET_NAMES,
    GainsConfig,
    ScenarioConfig,
    SecondaryConfig,
    VehicleConfig,
    load_config,
    preset,
    save_config,
)
from tiltsim.plant import VehicleParams


class TestSchema:
    def test_minimal(self):
        cfg = ScenarioConfig(name="x")
        assert cfg.dt == 1e-3 and cfg.mode == "position"

    def test_unknown_top_level_key_rejected(self):
        with pytest.raises(ValidationError):
            ScenarioConfig.model_validate({"name": "x", "bogus": 1})

    def test_unknown_nested_key_rejected(self):
        with pytest.raises(ValidationError):
            ScenarioConfig.model_validate({"name": "x", "gains": {"k1": 1.0, "bogus": 2}})

    def test_multiple_violations_reported_together(self):
        with pytest.raises(ValidationError) as exc:
            ScenarioConfig.model_validate({"name": "x", "duration": -1.0, "dt": 0.0})
        assert len(exc.value.errors()) >= 2

    @pytest.mark.parametrize(
        "patch",
        [
            {"mode": "warp"},
            {"torque_mode": "medium"},
            {"control_decimation": 0},
            {"duration": 0.0},
            {"reference": {"kind": "spiral"}},
            {"secondary": {"mode": "attitude", "target_attitude": [[1, 0, 0], [0, 1, 0], [0, 0, 2]]}},
            {"secondary": {"target_direction": [0.0, 0.0, 2.0]}},
            {"initial": {"attitude": [[1, 1, 0], [0, 1, 0], [0, 0, 1]]}},
        ],
    )
    def test_rejected_values(self, patch):
        with pytest.raises(ValidationError):
            ScenarioConfig.model_validate({"name": "x", **patch})

    def test_tilt_integrator_stability_coupling(self):
        # explicit-Euler forward invariance of the tilt loop needs
        # k_u * (control interval) <= 1
        ScenarioConfig(name="x", dt=0.05, gains=GainsConfig(k_u=16.0))  # 0.8 ok
        with pytest.raises(ValidationError):
            ScenarioConfig(name="x", dt=0.05, control_decimation=2, gains=GainsConfig(k_u=16.0))

    def test_conversion_to_runtime_types(self):
        params = VehicleConfig().to_params()
        assert isinstance(params, VehicleParams)
        defaults = VehicleParams()
        assert params.mass == defaults.mass
        np.testing.assert_array_equal(params.inertia, defaults.inertia)
        gains = GainsConfig(k1=2.0).to_gains()
        assert gains.k1 == 2.0

    def test_secondary_accepts_valid_rotation(self):
        r = [[0, -1, 0], [1, 0, 0], [0, 0, 1]]
        SecondaryConfig(mode="attitude", target_attitude=r)


class TestPresets:
    def test_names_stable(self):
        assert "sim1" in PRESET_NAMES and "sim2" in PRESET_NAMES

    def test_unknown_preset(self):
        with pytest.raises(KeyError):
            preset("nope")

    def test_presets_differ_only_where_meant(self):
        s1, s2 = preset("sim1"), preset("sim2")
        assert s1.duration == 30.0 and s2.duration == 20.0
        assert s1.mode == s2.mode == "position"
        assert s2.reference.rate > s1.reference.rate  # faster lap
        assert s1.gains == s2.gains

    def test_preset_returns_fresh_copy(self):
        a = preset("sim1")
        a.duration = 1.0
        assert preset("sim1").duration == 30.0


class TestFiles:
    def test_save_load_round_trip(self, tmp_path):
        cfg = preset("sim2")
        path = tmp_path / "cfg.json"
        save_config(cfg, path)
        assert load_config(path) == cfg

    def test_load_rejects_bad_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(ValueError, match="not valid JSON"):
            load_config(path)

    def test_load_rejects_unknown_keys(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"name": "x", "typo_key": 1}))
        with pytest.raises(ValidationError):
            load_config(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_config(tmp_path / "absent.json")
