"""Layered column: independent horizontal layers with height-dependent
viscosity, source strength and humidity."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

from .core import GridSpec, Params
from .initcond import SpiralSpec, make_spiral
from .integrator import RunConfig, RunOutcome, Status, run
from .morphology import MorphologyReport, morphology_reports
from . import thermo


@dataclass(frozen=True)
class LayerProfile:
    z_m: float
    nu1_factor: float = 1.0
    q_factor: float = 1.0
    humidity: float = 1.0

    def __post_init__(self):
        if not (self.nu1_factor > 0 and self.q_factor > 0):
            raise ValueError("layer factors must be positive")
        if not 0.0 <= self.humidity <= 1.0:
            raise ValueError("humidity must lie in [0, 1]")


@dataclass
class LayerResult:
    index: int
    z_m: float
    params: Params
    outcome: RunOutcome
    zone_area: float
    reports: list | None  # MorphologyReport per mode, None when no zone

    @property
    def status(self) -> Status:
        return self.outcome.status

    @property
    def morphology(self) -> MorphologyReport | None:
        return self.reports[0] if self.reports else None


@dataclass
class ColumnReport:
    per_layer: list
    top_of_vortex_m: float | None


def ramp_profiles(layers: int, dz_m: float, nu1_ratio: float = 2.0, humidity=None):
    """Equally spaced layers whose viscosity grows by ``nu1_ratio`` per layer."""
    hum = [1.0] * layers if humidity is None else list(humidity)
    return [LayerProfile(z_m=i * dz_m, nu1_factor=nu1_ratio**i, humidity=hum[i])
            for i in range(layers)]


def layer_params(base: Params, profile: LayerProfile) -> Params:
    return replace(base, nu1=base.nu1 * profile.nu1_factor, q=base.q * profile.q_factor)


def run_layer(index, grid, base, cfg, profile, spiral, workers=1) -> LayerResult:
    params = layer_params(base, profile)
    spec = replace(spiral, humidity=profile.humidity, seed=spiral.seed + index)
    # the spiral amplitude follows the base plateau, humidity scales it per layer
    initial = make_spiral(grid, spec, base)
    outcome = run(initial, params, cfg, workers)
    final = outcome.snapshots[-1]
    area = 0.0
    reports = None
    if outcome.status is Status.COMPLETED:
        ef = thermo.entropy_fields(final, params)
        area, _ = thermo.zone_area(ef, cfg.zone_floor * thermo.entropy_scale(params))
        if area > 0:
            reports = morphology_reports(final, params, cfg.zone_floor)
    return LayerResult(index, profile.z_m, params, outcome, area, reports)


def run_stack(grid: GridSpec, base: Params, cfg: RunConfig, profiles, spiral: SpiralSpec,
              workers: int = 1, layer_workers: int = 1) -> ColumnReport:
    """Run every layer independently and aggregate by height.

    Layer i uses seed ``spiral.seed + i``.  A BlowUp or Diverged layer is
    recorded and the rest of the column still runs.
    """
    profiles = list(profiles)
    if not profiles:
        raise ValueError("stack needs at least one layer")
    zs = [p.z_m for p in profiles]
    if any(b <= a for a, b in zip(zs, zs[1:])):
        raise ValueError("layer heights must be strictly increasing")
    jobs = [(i, grid, base, cfg, prof, spiral, workers) for i, prof in enumerate(profiles)]
    if layer_workers > 1:
        with ThreadPoolExecutor(layer_workers) as pool:
            results = list(pool.map(lambda a: run_layer(*a), jobs))
    else:
        results = [run_layer(*a) for a in jobs]
    results.sort(key=lambda r: r.z_m)
    organized = [r.z_m for r in results if r.zone_area > 0]
    return ColumnReport(results, max(organized) if organized else None)
