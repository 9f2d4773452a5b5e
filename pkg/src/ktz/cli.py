"""Command line entry point: run, stack, classify, analyze, render."""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import config as cfgmod
from . import formats, thermo
from .initcond import make_spiral
from .integrator import Status, diagnostics, run
from .morphology import SolverFail, morphology_reports
from .regime import classify
from .stack import run_stack

EXIT_OK, EXIT_CONFIG, EXIT_DIVERGED, EXIT_SOLVER = 0, 1, 2, 3


def _err(msg):
    print(f"ktz: {msg}", file=sys.stderr)


def _parser():
    ap = argparse.ArgumentParser(prog="ktz", description="2D vortex amplitude-equation runs")
    ap.add_argument("command", choices=["run", "stack", "classify", "analyze", "render"])
    ap.add_argument("snapshots", nargs="*", help="snapshot files for analyze/render")
    ap.add_argument("--config", type=Path)
    ap.add_argument("--out-dir", type=Path)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--threads", type=int)
    ap.add_argument("--snapshot-every", type=float)
    return ap


def _load(args):
    if args.config is None:
        raise cfgmod.ConfigError("--config is required")
    cfg = cfgmod.load(args.config)
    try:
        if args.seed is not None:
            cfg.run = replace(cfg.run, seed=args.seed)
            cfg.spiral = replace(cfg.spiral, seed=args.seed)
        if args.snapshot_every is not None:
            cfg.run = replace(cfg.run, snapshot_every=args.snapshot_every)
    except ValueError as e:
        raise cfgmod.ConfigError(str(e)) from None
    if args.threads is not None:
        if args.threads < 1:
            raise cfgmod.ConfigError("--threads must be >= 1")
        cfg.threads = args.threads
    return cfg


def _out_dir(args) -> Path:
    if args.out_dir is not None:
        return args.out_dir
    return Path(os.environ.get("KTZ_OUT_DIR", "ktz_out"))


def _snapshot_paths(args, out):
    if args.snapshots:
        return [Path(p) for p in args.snapshots]
    return sorted((out / "snapshots").glob("snap_*.ktz"))


def _report_text(field, params, zone_floor):
    return formats.morphology_text(morphology_reports(field, params, zone_floor),
                                   field.time, params.l0)


def cmd_run(args, cfg):
    out = _out_dir(args)
    out.mkdir(parents=True, exist_ok=True)
    try:
        initial = make_spiral(cfg.grid, cfg.spiral, cfg.params)
    except ValueError as e:
        raise cfgmod.ConfigError(str(e)) from None
    outcome = run(initial, cfg.params, cfg.run, cfg.threads)
    o = cfg.output
    if o["snapshots"]:
        (out / "snapshots").mkdir(exist_ok=True)
        for i, f in enumerate(outcome.snapshots):
            formats.write_snapshot(out / "snapshots" / f"snap_{i:05d}.ktz", f)
    if o["series"]:
        (out / "series.csv").write_text(formats.series_csv(outcome.series), newline="")
    final = outcome.snapshots[-1]
    if o["images"]:
        _render([final], cfg.params, out / "images", start=len(outcome.snapshots) - 1)
    print(f"status {outcome.status.value}")
    if outcome.status is Status.BLOWUP:
        print(f"t_blow {outcome.t_blow!r}\nmax_amp {outcome.max_amp!r}")
    if outcome.status is Status.DIVERGED:
        _err(f"run diverged at dt {outcome.dt_final!r}")
        return EXIT_DIVERGED
    if o["report"] and outcome.status is Status.COMPLETED:
        text = _report_text(final, cfg.params, cfg.run.zone_floor)
        (out / "report.txt").write_text(text)
        sys.stdout.write(text)
    return EXIT_OK


def cmd_stack(args, cfg):
    out = _out_dir(args)
    out.mkdir(parents=True, exist_ok=True)
    column = run_stack(cfg.grid, cfg.params, cfg.run, cfg.layers, cfg.spiral,
                       cfg.threads, cfg.layer_workers)
    text = formats.column_text(column)
    (out / "column.csv").write_text(text)
    for layer in column.per_layer:
        d = out / f"layer_{layer.index:02d}"
        d.mkdir(exist_ok=True)
        if cfg.output["snapshots"]:
            formats.write_snapshot(d / "final.ktz", layer.outcome.snapshots[-1])
        if cfg.output["series"]:
            (d / "series.csv").write_text(formats.series_csv(layer.outcome.series), newline="")
        if cfg.output["report"] and layer.reports:
            final = layer.outcome.snapshots[-1]
            (d / "report.txt").write_text(
                formats.morphology_text(layer.reports, final.time, layer.params.l0))
    sys.stdout.write(text)
    if any(r.status is Status.DIVERGED for r in column.per_layer):
        _err("at least one layer diverged")
        return EXIT_DIVERGED
    return EXIT_OK


def cmd_classify(args, cfg):
    rep = classify(cfg.params, cfg.spiral.m)
    print("\n".join(rep.lines()))
    return EXIT_OK


def cmd_analyze(args, cfg):
    out = _out_dir(args)
    paths = _snapshot_paths(args, out)
    if not paths:
        raise cfgmod.ConfigError(f"no snapshots found under {out / 'snapshots'}")
    fields = [formats.read_snapshot(p) for p in paths]
    rows = [diagnostics(f, cfg.params, cfg.run.zone_floor) for f in fields]
    dest = out / "analysis"
    dest.mkdir(parents=True, exist_ok=True)
    (dest / "series.csv").write_text(formats.series_csv(rows), newline="")
    text = _report_text(fields[-1], cfg.params, cfg.run.zone_floor)
    (dest / "report.txt").write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


def _render(fields, params, dest: Path, start=0):
    dest.mkdir(parents=True, exist_ok=True)
    for i, f in enumerate(fields, start):
        (dest / f"amp_{i:05d}.ppm").write_bytes(formats.amplitude_ppm(f))
        if params is not None:
            ef = thermo.entropy_fields(f, params)
            (dest / f"sdot_{i:05d}.ppm").write_bytes(formats.diverging_ppm(ef.s_dot))


def cmd_render(args, cfg):
    out = _out_dir(args)
    paths = _snapshot_paths(args, out)
    if not paths:
        raise cfgmod.ConfigError(f"no snapshots found under {out / 'snapshots'}")
    _render([formats.read_snapshot(p) for p in paths], cfg.params if cfg else None,
            out / "images")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "stack": cmd_stack, "classify": cmd_classify,
            "analyze": cmd_analyze, "render": cmd_render}


def main(argv=None) -> int:
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_CONFIG
    try:
        # render works from snapshots alone; entropy images need the config
        cfg = None if args.command == "render" and args.config is None else _load(args)
        return COMMANDS[args.command](args, cfg)
    except cfgmod.ConfigError as e:
        _err(f"config error: {e}")
        return EXIT_CONFIG
    except formats.FormatError as e:
        _err(f"bad input file: {e}")
        return EXIT_CONFIG
    except SolverFail as e:
        _err(f"pressure solve failed: {e}")
        return EXIT_SOLVER
    except OSError as e:
        _err(str(e))
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
