"""TOML run configuration with strict key checking.

Sections and defaults (``auto`` means derived from the other values):

    [grid]    n (required), physical_size = 1000.0, boundary = "noflux"
    [params]  q (required), alpha1 (required), nu1 = 1000.0, c1 = 0.0, c2 = 0.0,
              l0 = physical_size / 2, basin_profile = "disk"
    [run]     t_end = 10.0, dt = "auto", snapshot_every = 1.0,
              blowup_threshold = "auto", seed = 0, zone_floor = 1e-6, threads = 1
    [spiral]  m = 1, amplitude = "auto", core_width = "auto", humidity = 1.0,
              noise_eps = 0.0
    [stack]   layers = 6, dz_m = 500.0, nu1_ratio = 2.0, layer_workers = 1
    [[layer]] z_m (required per block), nu1_factor = 1.0, q_factor = 1.0, humidity = 1.0
    [output]  snapshots = true, series = true, report = true, images = false

[[layer]] blocks, when present, replace the ramp described by [stack].
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .core import Boundary, GridSpec, Params
from .initcond import SpiralSpec
from .integrator import RunConfig
from .stack import LayerProfile, ramp_profiles


class ConfigError(ValueError):
    pass


REQUIRED = object()
AUTO = "auto"

SCHEMA = {
    "grid": {"n": REQUIRED, "physical_size": 1000.0, "boundary": "noflux"},
    "params": {"q": REQUIRED, "alpha1": REQUIRED, "nu1": 1000.0, "c1": 0.0, "c2": 0.0,
               "l0": AUTO, "basin_profile": "disk"},
    "run": {"t_end": 10.0, "dt": AUTO, "snapshot_every": 1.0, "blowup_threshold": AUTO,
            "seed": 0, "zone_floor": 1e-6, "threads": 1},
    "spiral": {"m": 1, "amplitude": AUTO, "core_width": AUTO, "humidity": 1.0,
               "noise_eps": 0.0},
    "stack": {"layers": 6, "dz_m": 500.0, "nu1_ratio": 2.0, "layer_workers": 1},
    "output": {"snapshots": True, "series": True, "report": True, "images": False},
}
LAYER_SCHEMA = {"z_m": REQUIRED, "nu1_factor": 1.0, "q_factor": 1.0, "humidity": 1.0}


@dataclass
class Config:
    grid: GridSpec
    params: Params
    run: RunConfig
    spiral: SpiralSpec
    threads: int = 1
    layers: list = field(default_factory=list)
    layer_workers: int = 1
    output: dict = field(default_factory=dict)


def _fill(name, table, schema):
    if not isinstance(table, dict):
        raise ConfigError(f"[{name}] must be a table")
    unknown = sorted(set(table) - set(schema))
    if unknown:
        raise ConfigError(f"unknown key(s) in [{name}]: {', '.join(unknown)}")
    out = {}
    for key, default in schema.items():
        if key in table:
            out[key] = table[key]
        elif default is REQUIRED:
            raise ConfigError(f"missing required key {name}.{key}")
        else:
            out[key] = default
    return out


def _opt(v):
    return None if v == AUTO else v


def parse(text: str) -> Config:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"invalid TOML: {e}") from None
    unknown = sorted(set(raw) - set(SCHEMA) - {"layer"})
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(unknown)}")
    s = {name: _fill(name, raw.get(name, {}), schema) for name, schema in SCHEMA.items()}
    layer_tables = raw.get("layer", [])
    if not isinstance(layer_tables, list):
        raise ConfigError("layers must be given as [[layer]] blocks")
    layers = [_fill("layer", t, LAYER_SCHEMA) for t in layer_tables]
    try:
        g, p, r, sp, st = s["grid"], s["params"], s["run"], s["spiral"], s["stack"]
        grid = GridSpec(int(g["n"]), float(g["physical_size"]), Boundary.parse(g["boundary"]))
        l0 = grid.physical_size / 2 if p["l0"] == AUTO else p["l0"]
        params = Params(nu1=p["nu1"], q=p["q"], alpha1=p["alpha1"], c1=p["c1"], c2=p["c2"],
                        l0=l0, basin_profile=p["basin_profile"])
        params.check_grid(grid)
        run = RunConfig(t_end=float(r["t_end"]), dt=_opt(r["dt"]),
                        snapshot_every=_opt(r["snapshot_every"]),
                        blowup_threshold=_opt(r["blowup_threshold"]),
                        seed=int(r["seed"]), zone_floor=float(r["zone_floor"]))
        spiral = SpiralSpec(m=sp["m"], amplitude=_opt(sp["amplitude"]),
                            core_width=_opt(sp["core_width"]), humidity=float(sp["humidity"]),
                            noise_eps=float(sp["noise_eps"]), seed=run.seed)
        if layers:
            profiles = [LayerProfile(**{k: float(v) for k, v in t.items()}) for t in layers]
        else:
            profiles = ramp_profiles(int(st["layers"]), float(st["dz_m"]), float(st["nu1_ratio"]))
        threads = int(r["threads"])
        layer_workers = int(st["layer_workers"])
        if threads < 1 or layer_workers < 1:
            raise ValueError("thread counts must be >= 1")
    except (TypeError, ValueError, KeyError) as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(str(e)) from None
    return Config(grid, params, run, spiral, threads, profiles, layer_workers, s["output"])


def load(path) -> Config:
    try:
        with open(path, "rb") as fh:
            text = fh.read().decode("utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    return parse(text)
