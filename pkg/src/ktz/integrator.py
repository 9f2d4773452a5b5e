"""Classical RK4 time stepping with blow-up detection and snapshot schedule."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .core import GridSpec, Params, RhsKernel, VelocityField
from . import thermo

DT_FLOOR_DIVISOR = 64
DT_GUARD = 1.5


class StepUnstable(ArithmeticError):
    """A time step produced non-finite values."""


def auto_dt(grid: GridSpec, params: Params) -> float:
    return 0.2 * grid.dx**2 / (4.0 * params.nu1 * math.sqrt(1.0 + params.c1**2))


class Status(enum.Enum):
    COMPLETED = "Completed"
    BLOWUP = "BlowUp"
    DIVERGED = "Diverged"


@dataclass
class RunConfig:
    t_end: float
    dt: float | None = None  # None resolves to auto_dt
    snapshot_every: float | None = None  # None means t_end
    blowup_threshold: float | None = None
    seed: int = 0
    zone_floor: float = 1e-6  # relative to the plateau entropy scale q^2/alpha1

    def __post_init__(self):
        if not self.t_end >= 0:
            raise ValueError("t_end must be >= 0")
        if self.dt is not None and not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.snapshot_every is not None:
            if not self.snapshot_every > 0:
                raise ValueError("snapshot_every must be positive")
            if self.dt is not None and self.snapshot_every < self.dt:
                raise ValueError("snapshot_every must be >= dt")
        if self.blowup_threshold is not None and not self.blowup_threshold > 0:
            raise ValueError("blowup_threshold must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    def resolve_dt(self, grid, params) -> float:
        return auto_dt(grid, params) if self.dt is None else float(self.dt)

    def resolve_threshold(self, params) -> float:
        if self.blowup_threshold is not None:
            return float(self.blowup_threshold)
        if params.q > 0 and params.alpha1 > 0:
            return 1e3 * math.sqrt(params.q / params.alpha1)
        return 1e3


@dataclass
class RunOutcome:
    status: Status
    snapshots: list = field(default_factory=list)
    series: list = field(default_factory=list)  # rows of SERIES_COLUMNS
    t_blow: float | None = None
    max_amp: float | None = None
    dt_final: float | None = None


SERIES_COLUMNS = ("t", "max_amp", "zone_area_m2", "zone_diameter_m", "s_dot_total")


def diagnostics(f: VelocityField, params: Params, zone_floor: float = 1e-6):
    with np.errstate(over="ignore", invalid="ignore"):  # blow-up states may overflow
        ef = thermo.entropy_fields(f, params)
        floor = zone_floor * thermo.entropy_scale(params)
        area, diameter = thermo.zone_area(ef, floor)
        s_total = float(np.sum(ef.s_dot) * f.grid.dx**2)
    return (f.time, f.max_amplitude(), area, diameter, s_total)


class Stepper:
    """RK4 stepper bound to one grid/parameter set; owns its work arrays."""

    def __init__(self, grid: GridSpec, params: Params, workers: int = 1):
        self.grid = grid
        self.params = params
        self.kernel = RhsKernel(grid, params, workers)
        self.auto = auto_dt(grid, params)
        shape = (grid.n, grid.n)
        self._k = [(np.empty(shape), np.empty(shape)) for _ in range(4)]

    def close(self):
        self.kernel.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def advance(self, re, im, dt):
        f = self.kernel
        (k1r, k1i), (k2r, k2i), (k3r, k3i), (k4r, k4i) = self._k
        h2 = 0.5 * dt
        # overflow is caught below and reported as StepUnstable
        with np.errstate(over="ignore", invalid="ignore"):
            f(re, im, k1r, k1i)
            f(re + h2 * k1r, im + h2 * k1i, k2r, k2i)
            f(re + h2 * k2r, im + h2 * k2i, k3r, k3i)
            f(re + dt * k3r, im + dt * k3i, k4r, k4i)
            s = dt / 6.0
            new_re = re + s * ((k1r + k4r) + 2.0 * (k2r + k3r))
            new_im = im + s * ((k1i + k4i) + 2.0 * (k2i + k3i))
        if not (np.isfinite(new_re).all() and np.isfinite(new_im).all()):
            raise StepUnstable(f"non-finite values after step dt={dt:g}")
        return new_re, new_im

    def step(self, field: VelocityField, dt: float) -> VelocityField:
        re, im = self.advance(field.re, field.im, dt)
        return VelocityField(field.grid, re, im, field.time + dt)


def step(field: VelocityField, params: Params, dt: float, workers: int = 1) -> VelocityField:
    """Advance ``field`` by one RK4 step of size ``dt``."""
    limit = DT_GUARD * auto_dt(field.grid, params)
    if not 0 < dt <= limit:
        raise ValueError(f"dt={dt:g} outside (0, {limit:g}]")
    with Stepper(field.grid, params, workers) as stepper:
        return stepper.step(field, dt)


def _segment_times(t0, t_end, every):
    k = 1
    times = []
    while True:
        t = t0 + k * every
        if t >= t_end - 1e-12 * max(1.0, abs(t_end)):
            break
        times.append(t)
        k += 1
    times.append(t_end)
    return times


def run(initial: VelocityField, params: Params, cfg: RunConfig, workers: int = 1) -> RunOutcome:
    """Integrate from ``initial`` to ``initial.time + cfg.t_end``.

    A step that produces non-finite values is retried from the last good
    state with half the step, down to auto_dt/64; past that the run is
    Diverged.  Crossing the blow-up threshold ends the run as BlowUp with the
    offending state as the final snapshot.
    """
    grid = initial.grid
    params.check_grid(grid)
    if not initial.is_finite():
        raise ValueError("initial field is not finite")
    dt = cfg.resolve_dt(grid, params)
    threshold = cfg.resolve_threshold(params)
    t0 = initial.time
    t_end = t0 + cfg.t_end
    every = cfg.snapshot_every or cfg.t_end or 1.0

    def record(f):
        out.snapshots.append(f)
        out.series.append(diagnostics(f, params, cfg.zone_floor))

    out = RunOutcome(Status.COMPLETED)
    record(initial.copy())
    if initial.max_amplitude() >= threshold:
        out.status, out.t_blow, out.max_amp = Status.BLOWUP, t0, initial.max_amplitude()
        out.dt_final = dt
        return out

    with Stepper(grid, params, workers) as stepper:
        floor = stepper.auto / DT_FLOOR_DIVISOR
        re, im, t = initial.re, initial.im, t0
        for t_snap in (_segment_times(t0, t_end, every) if cfg.t_end > 0 else []):
            while t < t_snap:
                remaining = t_snap - t
                h = remaining if remaining <= dt * (1 + 1e-9) else dt
                try:
                    re_new, im_new = stepper.advance(re, im, h)
                except StepUnstable:
                    if dt / 2 < floor:
                        out.status = Status.DIVERGED
                        out.dt_final = dt
                        return out
                    dt /= 2
                    continue
                re, im = re_new, im_new
                t = t_snap if h == remaining else t + h
                amp = float(np.max(np.hypot(re, im)))
                if amp >= threshold:
                    record(VelocityField(grid, re, im, t))
                    out.status, out.t_blow, out.max_amp = Status.BLOWUP, t, amp
                    out.dt_final = dt
                    return out
            record(VelocityField(grid, re, im, t))
    out.dt_final = dt
    return out
