"""Initial fields: seeded spirals, plane waves, and the winding-number probe."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Boundary, GridSpec, Params, VelocityField


class NonPeriodicGrid(ValueError):
    pass


class SingularLoop(ValueError):
    """The probe loop passes through (or too near) an amplitude zero."""


WINDING_RESIDUAL = 0.05
MIN_LOOP_SAMPLES = 64


@dataclass
class SpiralSpec:
    m: int = 1
    amplitude: float | None = None  # None: sqrt(q/alpha1) from the run parameters
    core_width: float | None = None  # meters; None: 4 dx
    humidity: float = 1.0
    noise_eps: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if int(self.m) != self.m:
            raise ValueError("m must be an integer")
        self.m = int(self.m)
        if self.amplitude is not None and self.amplitude < 0:
            raise ValueError("amplitude must be >= 0")
        if self.core_width is not None and not self.core_width > 0:
            raise ValueError("core_width must be positive")
        if not 0.0 <= self.humidity <= 1.0:
            raise ValueError("humidity must lie in [0, 1]")
        if self.noise_eps < 0:
            raise ValueError("noise_eps must be >= 0")

    def resolved_amplitude(self, params: Params | None) -> float:
        if self.amplitude is not None:
            return float(self.amplitude)
        if params is None or params.plateau() == 0.0:
            raise ValueError("amplitude needs q > 0 and alpha1 > 0 when not given")
        return params.plateau()


def make_spiral(grid: GridSpec, spec: SpiralSpec, params: Params | None = None) -> VelocityField:
    """humidity * A * tanh(r / w) * exp(i m theta) about the domain centre,
    plus complex noise of modulus noise_eps * A with uniform random phase."""
    amp = spec.resolved_amplitude(params)
    width = spec.core_width if spec.core_width is not None else 4.0 * grid.dx
    r, theta = grid.polar()
    phi = (spec.humidity * amp) * np.tanh(r / width) * np.exp(1j * spec.m * theta)
    if spec.noise_eps > 0:
        rng = np.random.default_rng(spec.seed)
        phase = rng.uniform(0.0, 2.0 * np.pi, size=(grid.n, grid.n))
        phi = phi + (spec.noise_eps * amp) * np.exp(1j * phase)
    return VelocityField.from_complex(grid, phi)


def make_plane_wave(grid: GridSpec, k_index, amplitude: float = 1.0) -> VelocityField:
    if grid.boundary is not Boundary.PERIODIC:
        raise NonPeriodicGrid("plane waves need a periodic grid")
    k1, k2 = k_index
    X, Y = grid.mesh()
    L = grid.physical_size
    return VelocityField.from_complex(grid, amplitude * np.exp(2j * np.pi * (k1 * X + k2 * Y) / L))


def sample(a: np.ndarray, grid: GridSpec, x, y) -> np.ndarray:
    """Bilinear interpolation of a cell-centred plane at points (x, y)."""
    n = grid.n
    u = np.asarray(x, dtype=float) / grid.dx - 0.5
    v = np.asarray(y, dtype=float) / grid.dx - 0.5
    if grid.boundary is Boundary.PERIODIC:
        i0 = np.floor(u).astype(int)
        j0 = np.floor(v).astype(int)
        fu, fv = u - i0, v - j0
        i0, j0 = i0 % n, j0 % n
        i1, j1 = (i0 + 1) % n, (j0 + 1) % n
    else:
        u = np.clip(u, 0.0, n - 1.0)
        v = np.clip(v, 0.0, n - 1.0)
        i0 = np.minimum(np.floor(u).astype(int), n - 2)
        j0 = np.minimum(np.floor(v).astype(int), n - 2)
        fu, fv = u - i0, v - j0
        i1, j1 = i0 + 1, j0 + 1
    return ((1 - fv) * ((1 - fu) * a[j0, i0] + fu * a[j0, i1])
            + fv * ((1 - fu) * a[j1, i0] + fu * a[j1, i1]))


def loop_samples(radius: float, dx: float) -> int:
    return max(MIN_LOOP_SAMPLES, 4 * math.ceil(2 * math.pi * radius / dx))


def winding(field: VelocityField, loop_radius: float, center=None) -> float:
    """Unrounded winding number of the phase around a circle."""
    grid = field.grid
    cx, cy = grid.center if center is None else center
    if grid.boundary is not Boundary.PERIODIC:
        lo, hi = 0.5 * grid.dx, grid.physical_size - 0.5 * grid.dx
        if min(cx - loop_radius, cy - loop_radius) < lo or max(cx + loop_radius, cy + loop_radius) > hi:
            raise ValueError("loop leaves the domain")
    k = loop_samples(loop_radius, grid.dx)
    ang = 2 * np.pi * np.arange(k) / k
    x = cx + loop_radius * np.cos(ang)
    y = cy + loop_radius * np.sin(ang)
    z = sample(field.re, grid, x, y) + 1j * sample(field.im, grid, x, y)
    mod = np.abs(z)
    scale = max(field.max_amplitude(), np.finfo(float).tiny)
    if not np.all(mod > 1e-9 * scale):
        raise SingularLoop(f"amplitude vanishes on the loop of radius {loop_radius:g}")
    dphase = np.angle(np.roll(z, -1) / z)
    if np.max(np.abs(dphase)) > 0.5 * np.pi:
        raise SingularLoop("phase jumps by more than pi/2 between loop samples")
    return float(np.sum(dphase) / (2 * np.pi))


def measure_charge(field: VelocityField, loop_radius: float, center=None) -> int:
    """Topological charge (phase winding) inside a circle of ``loop_radius``."""
    w = winding(field, loop_radius, center)
    m = round(w)
    if abs(w - m) >= WINDING_RESIDUAL:
        raise SingularLoop(f"winding {w:.3f} is not near an integer; change the radius")
    return int(m)
