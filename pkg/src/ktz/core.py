"""Discrete field, model parameters and the right-hand side of the
Kuramoto-Tsuzuki (complex Ginzburg-Landau) equation

    dPhi/dt = nu1 (1 + i c1) lap(Phi) + q Phi - alpha1 (1 + i c2) |Phi|^2 Phi

for the complex horizontal velocity Phi = vx + i vy.

The grid is cell centred: cell (j, i) (row j along y, column i along x)
sits at ((i + 1/2) dx, (j + 1/2) dx).  Real and imaginary parts are kept
in separate planes so the stencil kernel works on plain float arrays.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import _kernel


class Boundary(enum.Enum):
    NO_FLUX = 0
    PERIODIC = 1

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "").replace("_", "")
        if key in ("noflux", "0"):
            return cls.NO_FLUX
        if key in ("periodic", "1"):
            return cls.PERIODIC
        raise ValueError(f"unknown boundary mode {value!r}")


class BasinProfile(enum.Enum):
    UNIFORM = "uniform"
    DISK = "disk"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(f"unknown basin profile {value!r}") from None


@dataclass(frozen=True)
class GridSpec:
    n: int
    physical_size: float
    boundary: Boundary = Boundary.NO_FLUX

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 16 or self.n % 2:
            raise ValueError(f"n must be an even integer >= 16, got {self.n}")
        if not self.physical_size > 0:
            raise ValueError("physical_size must be positive")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "physical_size", float(self.physical_size))
        object.__setattr__(self, "boundary", Boundary.parse(self.boundary))

    @property
    def dx(self) -> float:
        return self.physical_size / self.n

    @property
    def center(self) -> tuple[float, float]:
        return (0.5 * self.physical_size, 0.5 * self.physical_size)

    def axis(self) -> np.ndarray:
        """Cell-centre coordinates along one axis, in meters."""
        return (np.arange(self.n) + 0.5) * self.dx

    def mesh(self):
        """(X, Y) coordinate planes indexed [row=y, col=x]."""
        a = self.axis()
        return np.meshgrid(a, a, indexing="xy")

    def polar(self, center=None):
        """Radius and polar angle of every cell about ``center``."""
        cx, cy = self.center if center is None else center
        X, Y = self.mesh()
        return np.hypot(X - cx, Y - cy), np.arctan2(Y - cy, X - cx)


@dataclass
class VelocityField:
    grid: GridSpec
    re: np.ndarray
    im: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        shape = (self.grid.n, self.grid.n)
        self.re = np.ascontiguousarray(self.re, dtype=np.float64)
        self.im = np.ascontiguousarray(self.im, dtype=np.float64)
        if self.re.shape != shape or self.im.shape != shape:
            raise ValueError(f"field planes must have shape {shape}")
        self.time = float(self.time)

    @classmethod
    def from_complex(cls, grid, phi, time=0.0):
        phi = np.asarray(phi, dtype=np.complex128)
        return cls(grid, phi.real.copy(), phi.imag.copy(), time)

    @classmethod
    def zeros(cls, grid, time=0.0):
        return cls(grid, np.zeros((grid.n, grid.n)), np.zeros((grid.n, grid.n)), time)

    @property
    def phi(self) -> np.ndarray:
        return self.re + 1j * self.im

    def amplitude(self) -> np.ndarray:
        return np.hypot(self.re, self.im)

    def max_amplitude(self) -> float:
        return float(np.max(np.hypot(self.re, self.im)))

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.re).all() and np.isfinite(self.im).all())

    def copy(self):
        return VelocityField(self.grid, self.re.copy(), self.im.copy(), self.time)


@dataclass(frozen=True)
class Params:
    """Dimensionless coefficients of the layer equation.

    ``c1`` and ``c2`` are the ratios nu2/nu1 and alpha2/alpha1, so the
    imaginary coefficients are never stored on their own.  ``alpha1 = 0``
    gives the linear equation used by validation runs; ``alpha1 < 0`` turns
    the cubic sink into a source and models the peaking (blow-up) regime.
    """

    nu1: float
    q: float
    alpha1: float
    c1: float = 0.0
    c2: float = 0.0
    l0: float = 500.0
    basin_profile: BasinProfile = BasinProfile.UNIFORM

    def __post_init__(self):
        object.__setattr__(self, "basin_profile", BasinProfile.parse(self.basin_profile))
        for name in ("nu1", "q", "alpha1", "c1", "c2", "l0"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, value)
        if self.nu1 <= 0:
            raise ValueError("nu1 must be positive")
        if self.l0 <= 0:
            raise ValueError("l0 must be positive")

    @property
    def nu2(self) -> float:
        return self.nu1 * self.c1

    @property
    def alpha2(self) -> float:
        return self.alpha1 * self.c2

    def plateau(self) -> float:
        """Homogeneous saturation amplitude sqrt(q/alpha1), 0 if none."""
        if self.q > 0 and self.alpha1 > 0:
            return math.sqrt(self.q / self.alpha1)
        return 0.0

    def check_grid(self, grid: GridSpec):
        if self.basin_profile is BasinProfile.DISK and self.l0 > grid.physical_size:
            raise ValueError("Disk basin requires l0 <= physical_size")

    def with_(self, **changes):
        return replace(self, **changes)


def source_coefficient(params: Params, x, y, grid: GridSpec):
    """Local linear source rate q(x, y).

    Uniform: q everywhere.  Disk: q inside r = l0/2, -|q| outside, joined
    by a tanh step whose argument runs from -1 to 1 across 4 dx.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if params.basin_profile is BasinProfile.UNIFORM:
        return np.full(np.broadcast(x, y).shape, params.q)[()]
    cx, cy = grid.center
    r = np.hypot(x - cx, y - cy)
    half_width = 2.0 * grid.dx
    w = 0.5 * (1.0 + np.tanh((r - 0.5 * params.l0) / half_width))
    q_in, q_out = params.q, -abs(params.q)
    return (q_in + (q_out - q_in) * w)[()]


def source_map(params: Params, grid: GridSpec) -> np.ndarray:
    X, Y = grid.mesh()
    return np.asarray(source_coefficient(params, X, Y, grid), dtype=float).reshape(grid.n, grid.n)


def pad(a: np.ndarray, boundary: Boundary) -> np.ndarray:
    # cell-centred mirror: the ghost cell copies its neighbour, zero normal flux
    return np.pad(a, 1, mode="wrap" if boundary is Boundary.PERIODIC else "edge")


def _lap_rows(P, r0, r1, inv_dx2):
    # rows [r0, r1) of the interior; P is the padded array
    c = P[r0 + 1:r1 + 1, 1:-1]
    return ((P[r0 + 1:r1 + 1, :-2] + P[r0 + 1:r1 + 1, 2:])
            + (P[r0:r1, 1:-1] + P[r0 + 2:r1 + 2, 1:-1]) - 4.0 * c) * inv_dx2


def laplacian(a: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Five-point Laplacian of a real plane."""
    return _lap_rows(pad(a, grid.boundary), 0, grid.n, 1.0 / grid.dx**2)


def row_blocks(n: int, workers: int):
    workers = max(1, min(int(workers), n))
    edges = np.linspace(0, n, workers + 1).round().astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


class RhsKernel:
    """Evaluates the equation's right-hand side on split planes.

    Work is split into row blocks; every cell is computed by the same
    sequence of float operations whatever the block layout, so results do
    not depend on ``workers``.
    """

    def __init__(self, grid: GridSpec, params: Params, workers: int = 1, backend=None):
        params.check_grid(grid)
        self.grid = grid
        self.params = params
        if backend is None:
            backend = "numba" if _kernel.rhs_rows is not None else "numpy"
        if backend not in ("numba", "numpy"):
            raise ValueError(f"unknown backend {backend!r}")
        if backend == "numba" and _kernel.rhs_rows is None:
            raise RuntimeError("numba is not installed")
        self.backend = backend
        self.qmap = source_map(params, grid)
        self.inv_dx2 = 1.0 / grid.dx**2
        self.blocks = row_blocks(grid.n, workers)
        self._pool = ThreadPoolExecutor(len(self.blocks)) if len(self.blocks) > 1 else None

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def _block(self, Pr, Pi, re, im, out_r, out_i, r0, r1):
        p = self.params
        lr = _lap_rows(Pr, r0, r1, self.inv_dx2)
        li = _lap_rows(Pi, r0, r1, self.inv_dx2)
        a = re[r0:r1]
        b = im[r0:r1]
        q = self.qmap[r0:r1]
        mod2 = a * a + b * b
        sink = p.alpha1 * mod2
        out_r[r0:r1] = p.nu1 * (lr - p.c1 * li) + q * a - sink * (a - p.c2 * b)
        out_i[r0:r1] = p.nu1 * (li + p.c1 * lr) + q * b - sink * (b + p.c2 * a)

    def _block_jit(self, re, im, out_r, out_i, r0, r1):
        p = self.params
        _kernel.rhs_rows(re, im, self.qmap, out_r, out_i, r0, r1, p.nu1, p.c1, p.alpha1, p.c2,
                         self.inv_dx2, self.grid.boundary is Boundary.PERIODIC)

    def __call__(self, re, im, out_r=None, out_i=None):
        n = self.grid.n
        out_r = np.empty((n, n)) if out_r is None else out_r
        out_i = np.empty((n, n)) if out_i is None else out_i
        if self.backend == "numba":
            re = np.ascontiguousarray(re, dtype=np.float64)
            im = np.ascontiguousarray(im, dtype=np.float64)
            fn, args = self._block_jit, (re, im, out_r, out_i)
        else:
            fn = self._block
            args = (pad(re, self.grid.boundary), pad(im, self.grid.boundary), re, im, out_r, out_i)
        if self._pool is None:
            fn(*args, 0, n)
        else:
            futures = [self._pool.submit(fn, *args, r0, r1) for r0, r1 in self.blocks]
            for f in futures:
                f.result()
        return out_r, out_i


def rhs(field: VelocityField, params: Params, workers: int = 1, backend=None) -> np.ndarray:
    """Time derivative of ``field`` as a complex n x n array."""
    with RhsKernel(field.grid, params, workers, backend) as kernel:
        dr, di = kernel(field.re, field.im)
    return dr + 1j * di
