"""Command-line front end.

Thin client of the library: every subcommand builds a ScenarioConfig, calls
sim.run, and writes artifacts. No physics or policy lives here.

    tiltsim run CONFIG.json [--out DIR] [--dt X] [--duration X] [--csv-decimate N]
    tiltsim paper-sim1 [...]        # moderate figure-eight benchmark
    tiltsim paper-sim2 [...]        # aggressive figure-eight benchmark
    tiltsim sweep --param gains.k2 --values 0.2,0.34,0.5 (CONFIG.json | --preset NAME)
    tiltsim serve [--host H] [--port P]

Each run writes <out>/telemetry.csv, <out>/metrics.json and the resolved
<out>/config.json, and prints a summary. Exit codes: 0 success, 1 run
failed, 2 bad configuration or usage.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from pathlib import Path

from pydantic import ValidationError

from .config import PRESET_NAMES, ScenarioConfig, load_config, preset, save_config
from .errors import TiltSimError
from .sim import SimResult, run, write_csv

__all__ = ["main"]


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="tiltsim",
        description="VTOL thrust-tilting control simulator",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def add_run_flags(sp, with_config):
        if with_config:
            sp.add_argument("config", help="scenario JSON file")
        sp.add_argument("--out", default=None, help="output directory (default: scenario name)")
        sp.add_argument("--dt", type=float, default=None, help="override step size [s]")
        sp.add_argument("--duration", type=float, default=None, help="override duration [s]")
        sp.add_argument(
            "--csv-decimate", type=int, default=1,
            help="keep every Nth telemetry row in the CSV",
        )

    add_run_flags(sub.add_parser("run", help="run a scenario file"), True)
    for name, blurb in (
        ("paper-sim1", "benchmark: moderate figure-eight, tilt inside the cone"),
        ("paper-sim2", "benchmark: aggressive figure-eight, tilt saturating"),
    ):
        add_run_flags(sub.add_parser(name, help=blurb), False)

    sw = sub.add_parser("sweep", help="run a scenario over a list of parameter values")
    sw.add_argument("config", nargs="?", default=None, help="scenario JSON file")
    sw.add_argument("--preset", default=None, choices=PRESET_NAMES, help="built-in scenario")
    sw.add_argument("--param", required=True, help="dotted path, e.g. gains.k2")
    sw.add_argument("--values", required=True, help="comma-separated values")
    sw.add_argument("--out", default=None, help="output directory (default: sweep_<param>)")
    add_serve = sub.add_parser("serve", help="start the HTTP service")
    add_serve.add_argument("--host", default="127.0.0.1")
    add_serve.add_argument("--port", type=int, default=8000)
    return p


def _apply_overrides(cfg: ScenarioConfig, args) -> ScenarioConfig:
    update = {}
    if args.dt is not None:
        update["dt"] = args.dt
    if args.duration is not None:
        update["duration"] = args.duration
    if not update:
        return cfg
    return ScenarioConfig.model_validate({**cfg.model_dump(), **update})


def _summary(result: SimResult) -> str:
    m = result.metrics
    limit_deg = math.degrees(math.asin(result.config.vehicle.tilt_sin_limit))
    return "\n".join(
        (
            f"{result.config.name}: {m.duration:g} s simulated in {m.runtime_s:.2f} s"
            f" ({m.n_steps - 1} steps)",
            f"  max tilt          {m.max_tilt_deg:7.2f} deg (limit {limit_deg:.2f})",
            f"  max inclination   {m.max_inclination_deg:7.3f} deg (after {m.transient:g} s)",
            f"  position error    {m.max_pos_err:7.3f} m max, {m.rms_pos_err:.3f} m rms",
            f"  mean ground speed {m.mean_speed:7.2f} m/s ({m.mean_axis_speed:.2f} m/s per-axis)",
            f"  saturation duty   {100.0 * m.saturation_duty:7.1f} %",
        )
    )


def _write_artifacts(result: SimResult, out: Path, csv_decimate: int) -> None:
    out.mkdir(parents=True, exist_ok=True)
    write_csv(result.log, out / "telemetry.csv", decimate=csv_decimate)
    (out / "metrics.json").write_text(
        json.dumps(dataclasses.asdict(result.metrics), indent=2) + "\n"
    )
    save_config(result.config, out / "config.json")


def _cmd_run(cfg: ScenarioConfig, args) -> int:
    cfg = _apply_overrides(cfg, args)
    if args.csv_decimate < 1:
        print("error: --csv-decimate must be >= 1", file=sys.stderr)
        return 2
    result = run(cfg)
    out = Path(args.out) if args.out else Path(cfg.name)
    _write_artifacts(result, out, args.csv_decimate)
    print(_summary(result))
    print(f"  artifacts in      {out}/")
    return 0


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _set_path(tree: dict, dotted: str, value) -> None:
    keys = dotted.split(".")
    node = tree
    for k in keys[:-1]:
        if not isinstance(node.get(k), dict):
            raise ValueError(f"no such config section: {dotted!r}")
        node = node[k]
    if keys[-1] not in node:
        raise ValueError(f"no such config field: {dotted!r}")
    node[keys[-1]] = value


def _cmd_sweep(args) -> int:
    if (args.config is None) == (args.preset is None):
        print("error: sweep needs a config file or --preset (not both)", file=sys.stderr)
        return 2
    base = load_config(args.config) if args.config else preset(args.preset)
    values = [_parse_value(v) for v in args.values.split(",") if v != ""]
    if not values:
        print("error: --values is empty", file=sys.stderr)
        return 2
    out = Path(args.out) if args.out else Path(f"sweep_{args.param.replace('.', '_')}")

    records = []
    print(f"sweep {args.param} over {values} ({base.name})")
    for v in values:
        tree = base.model_dump()
        _set_path(tree, args.param, v)
        cfg = ScenarioConfig.model_validate(tree)
        result = run(cfg)
        m = result.metrics
        records.append({"param": args.param, "value": v, "metrics": dataclasses.asdict(m)})
        print(
            f"  {args.param}={v}: max tilt {m.max_tilt_deg:.2f} deg, "
            f"max |x err| {m.max_pos_err:.3f} m, rms {m.rms_pos_err:.3f} m, "
            f"saturation {100.0 * m.saturation_duty:.1f} %"
        )
    out.mkdir(parents=True, exist_ok=True)
    (out / "sweep.json").write_text(json.dumps(records, indent=2) + "\n")
    print(f"  results in {out}/sweep.json")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(load_config(args.config), args)
        if args.command == "paper-sim1":
            return _cmd_run(preset("sim1"), args)
        if args.command == "paper-sim2":
            return _cmd_run(preset("sim2"), args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "serve":
            import uvicorn

            uvicorn.run("tiltsim.service:app", host=args.host, port=args.port)
            return 0
    except (ValidationError, ValueError, KeyError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except TiltSimError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
