"""Core geometry, pressure reconstruction and Table-1 style reports."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .core import Boundary, GridSpec, Params, VelocityField, source_map
from .initcond import SingularLoop, measure_charge, sample
from . import thermo

INNER_FRACTION = 0.5
OUTER_FRACTION = 0.9
PLATEAU_ANNULUS = (0.3, 0.4)  # in units of l0
RING_LEVELS = (0.10, 0.01)
POISSON_RTOL = 1e-8


class MorphologyError(Exception):
    pass


class AmbiguousCore(MorphologyError):
    def __init__(self, candidates):
        self.candidates = [tuple(map(float, c)) for c in candidates]
        super().__init__(f"{len(self.candidates)} phase singularities: {self.candidates}")


class NoPlateau(MorphologyError):
    pass


class NoDepression(MorphologyError):
    pass


class SolverFail(MorphologyError):
    pass


class Mode(enum.Enum):
    NP_VELOCITY = "NP_velocity"
    NP_PRESSURE = "NP_pressure"
    P_PRESSURE = "P_pressure"


@dataclass
class CoreGeometry:
    center: tuple
    inner_d: float
    outer_d: float
    plateau: float


@dataclass
class PressureField:
    grid: GridSpec
    p: np.ndarray
    grad_p: np.ndarray  # (2, n, n): x and y components


@dataclass
class MorphologyReport:
    mode: Mode
    zone_diameter_m: float | None
    inner_core_diameter_m: float | None
    outer_core_diameter_m: float | None
    pressure_ring_width_m: float | None
    charge: int | None
    core_center: tuple | None


# --- geometry helpers ------------------------------------------------------

def singularities(field: VelocityField, center=None, radius=None):
    """Centres of grid plaquettes around which the phase winds, with charges."""
    z = field.phi
    if field.grid.boundary is Boundary.PERIODIC:
        z = np.pad(z, ((0, 1), (0, 1)), mode="wrap")
    a, b, c, d = z[:-1, :-1], z[:-1, 1:], z[1:, 1:], z[1:, :-1]
    with np.errstate(invalid="ignore", divide="ignore"):
        w = (np.angle(b / a) + np.angle(c / b) + np.angle(d / c) + np.angle(a / d)) / (2 * np.pi)
    charge = np.rint(np.nan_to_num(w)).astype(int)
    js, is_ = np.nonzero(charge)
    dx = field.grid.dx
    pts = [((i + 1) * dx, (j + 1) * dx, int(charge[j, i])) for j, i in zip(js, is_)]
    if radius is not None:
        cx, cy = field.grid.center if center is None else center
        pts = [p for p in pts if np.hypot(p[0] - cx, p[1] - cy) <= radius]
    return pts


def _refine_minimum(mod2, grid, x0, y0):
    # least-squares paraboloid of |Phi|^2 on the 4x4 block around (x0, y0)
    dx = grid.dx
    i0 = int(round(x0 / dx)) - 2
    j0 = int(round(y0 / dx)) - 2
    if i0 < 0 or j0 < 0 or i0 + 4 > grid.n or j0 + 4 > grid.n:
        return x0, y0
    jj, ii = np.mgrid[j0:j0 + 4, i0:i0 + 4]
    u = (ii + 0.5) * dx - x0
    v = (jj + 0.5) * dx - y0
    A = np.stack([np.ones(16), u.ravel(), v.ravel(), u.ravel()**2, (u * v).ravel(), v.ravel()**2], 1)
    coef = np.linalg.lstsq(A, mod2[j0:j0 + 4, i0:i0 + 4].ravel(), rcond=None)[0]
    H = np.array([[2 * coef[3], coef[4]], [coef[4], 2 * coef[5]]])
    if np.linalg.det(H) <= 0 or H[0, 0] <= 0:
        return x0, y0
    du, dv = np.linalg.solve(H, -coef[1:3])
    if max(abs(du), abs(dv)) > dx:
        return x0, y0
    return x0 + du, y0 + dv


def find_center(field: VelocityField, params: Params):
    """Phase singularity of the vortex, or the amplitude minimum if none."""
    grid = field.grid
    cands = singularities(field, radius=0.5 * params.l0)
    mod2 = field.re**2 + field.im**2
    if len(cands) > 1:
        raise AmbiguousCore([(x, y) for x, y, _ in cands])
    if cands:
        x0, y0 = cands[0][:2]
    else:
        r, _ = grid.polar()
        m = np.where(r <= 0.5 * params.l0, mod2, np.inf)
        j, i = np.unravel_index(np.argmin(m), m.shape)
        x0, y0 = (i + 0.5) * grid.dx, (j + 0.5) * grid.dx
    return _refine_minimum(mod2, grid, x0, y0)


def radial_profile(a: np.ndarray, grid: GridSpec, center, r_max: float, step=None):
    """Azimuthal mean of ``a`` on circles about ``center`` (bilinear samples).

    A complex ``a`` is interpolated as such and the modulus averaged, so a
    phase singularity reads as a true zero.
    """
    step = 0.25 * grid.dx if step is None else step
    radii = np.arange(0.0, r_max + 0.5 * step, step)
    k = 256
    ang = 2 * np.pi * (np.arange(k) + 0.5) / k
    cx, cy = center
    x = cx + radii[:, None] * np.cos(ang)[None, :]
    y = cy + radii[:, None] * np.sin(ang)[None, :]
    if np.iscomplexobj(a):
        vals = np.abs(sample(a.real, grid, x, y) + 1j * sample(a.imag, grid, x, y))
    else:
        vals = sample(a, grid, x, y)
    return radii, vals.mean(axis=1)


def first_crossing(radii, prof, level, start=0.0, rising=True):
    """Smallest radius >= start where ``prof`` reaches ``level`` (linear interp)."""
    g = (prof - level) if rising else (level - prof)
    idx = np.nonzero(radii >= start)[0]
    if len(idx) == 0:
        return None
    if g[idx[0]] >= 0:
        return float(radii[idx[0]])
    for j in idx[1:]:
        if g[j] >= 0:
            t = g[j - 1] / (g[j - 1] - g[j])
            return float(radii[j - 1] + t * (radii[j] - radii[j - 1]))
    return None


def annulus_median(a, grid, center, l0):
    a = np.abs(a) if np.iscomplexobj(a) else a
    r, _ = grid.polar(center)
    lo, hi = PLATEAU_ANNULUS
    sel = (r >= lo * l0) & (r <= hi * l0)
    if not sel.any():
        raise NoPlateau("plateau annulus holds no cells")
    return float(np.median(a[sel]))


def profile_core(a, grid, center, l0, floor, inner=INNER_FRACTION, outer=OUTER_FRACTION):
    """Inner/outer diameters where the azimuthal mean of ``a`` first reaches
    ``inner`` / ``outer`` times its plateau (median over the 0.3..0.4 l0 annulus)."""
    plateau = annulus_median(a, grid, center, l0)
    if not plateau > floor:
        raise NoPlateau(f"plateau {plateau:.3g} is below the noise floor {floor:.3g}")
    radii, prof = radial_profile(a, grid, center, PLATEAU_ANNULUS[1] * l0)
    r_in = first_crossing(radii, prof, inner * plateau)
    r_out = first_crossing(radii, prof, outer * plateau)
    if r_in is None or r_out is None:
        raise NoPlateau("profile never reaches the core thresholds")
    return CoreGeometry(tuple(center), 2 * r_in, 2 * r_out, plateau)


def _noise_floor(field, params):
    ref = params.plateau() or field.max_amplitude()
    return 1e-3 * ref


def core_geometry(field: VelocityField, params: Params, inner=INNER_FRACTION,
                  outer=OUTER_FRACTION) -> CoreGeometry:
    center = find_center(field, params)
    return profile_core(field.phi, field.grid, center, params.l0,
                        _noise_floor(field, params), inner, outer)


# --- pressure --------------------------------------------------------------

def _dirichlet_laplacian(grid: GridSpec):
    # cell-centred 5-point operator with p = 0 on the domain walls (ghost = -p)
    n = grid.n
    main = -2.0 * np.ones(n)
    main[0] = main[-1] = -3.0
    off = np.ones(n - 1)
    T = sp.diags([off, main, off], [-1, 0, 1])
    I = sp.identity(n)
    return ((sp.kron(I, T) + sp.kron(T, I)) / grid.dx**2).tocsc()


_LAPLACE_CACHE: dict = {}


def _poisson_lu(grid):
    key = (grid.n, grid.physical_size)
    if key not in _LAPLACE_CACHE:
        A = _dirichlet_laplacian(grid)
        _LAPLACE_CACHE[key] = (A, spla.splu(A))
    return _LAPLACE_CACHE[key]


def divergence(gx, gy, grid):
    # centred differences; outside values mirror the boundary cell
    Gx = np.pad(gx, 1, mode="edge")
    Gy = np.pad(gy, 1, mode="edge")
    h = 2.0 * grid.dx
    return (Gx[1:-1, 2:] - Gx[1:-1, :-2]) / h + (Gy[2:, 1:-1] - Gy[:-2, 1:-1]) / h


def solve_poisson(rhs_plane: np.ndarray, grid: GridSpec) -> np.ndarray:
    A, lu = _poisson_lu(grid)
    b = rhs_plane.ravel()
    if not np.any(b):
        return np.zeros_like(rhs_plane)
    x = lu.solve(b)
    res = np.linalg.norm(A @ x - b) / np.linalg.norm(b)
    if not res < POISSON_RTOL:
        raise SolverFail(f"Poisson residual {res:.2e} above {POISSON_RTOL:g}")
    return x.reshape(rhs_plane.shape)


def pressure_np(field: VelocityField, params: Params) -> PressureField:
    """Nonpotential pressure: the gradient opposes the net source force
    q Phi - alpha1 (1 + i c2)|Phi|^2 Phi, and p solves lap p = div grad_p
    with p = 0 on the walls."""
    grid = field.grid
    q = source_map(params, grid)
    mod2 = field.re**2 + field.im**2
    s = params.alpha1 * mod2
    fx = q * field.re - s * (field.re - params.c2 * field.im)
    fy = q * field.im - s * (field.im + params.c2 * field.re)
    gx, gy = -fx, -fy
    p = solve_poisson(divergence(gx, gy, grid), grid)
    return PressureField(grid, p, np.stack([gx, gy]))


def pressure_p(field: VelocityField) -> PressureField:
    """Potential (Bernoulli) pressure -|Phi|^2/2, zero median on the boundary ring."""
    grid = field.grid
    p = -0.5 * (field.re**2 + field.im**2)
    edge = np.concatenate([p[0], p[-1], p[1:-1, 0], p[1:-1, -1]])
    p = p - np.median(edge)
    gx, gy = thermo.gradient(p, grid)
    return PressureField(grid, p, np.stack([gx, gy]))


def pressure_ring_width(pf: PressureField, core_center, start_radius: float = 0.0,
                        r_max: float | None = None) -> float:
    """Radial width of the band, outward of ``start_radius``, where the
    azimuthal-mean pressure deviation falls from 10 % to 1 % of the largest
    deviation anywhere in the field."""
    grid = pf.grid
    dp_max = float(np.max(np.abs(pf.p)))
    if dp_max < 1e-12:
        raise NoDepression("pressure field carries no depression")
    if r_max is None:
        cx, cy = core_center
        r_max = min(cx, cy, grid.physical_size - cx, grid.physical_size - cy) - 0.5 * grid.dx
    radii, prof = radial_profile(pf.p, grid, core_center, r_max)
    prof = np.abs(prof)
    outside = radii >= start_radius
    if not outside.any():
        raise NoDepression("start radius lies outside the domain")
    peak = radii[outside][int(np.argmax(prof[outside]))]
    hi_level, lo_level = RING_LEVELS
    r_hi = first_crossing(radii, prof, hi_level * dp_max, peak, rising=False)
    if r_hi is None:
        raise NoDepression("depression does not relax to 10 % within the domain")
    r_lo = first_crossing(radii, prof, lo_level * dp_max, r_hi, rising=False)
    if r_lo is None:
        raise NoDepression("depression does not relax to 1 % within the domain")
    return r_lo - r_hi


# --- reports ---------------------------------------------------------------

def _depression_profile(pf: PressureField, center):
    # pressure drop relative to the calm centre, as a plane
    p_c = float(sample(pf.p, pf.grid, np.array([center[0]]), np.array([center[1]]))[0])
    return np.maximum(p_c - pf.p, 0.0)


def _safe(fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except (MorphologyError, thermo.EmptyZone, SingularLoop, ValueError):
        return None


def _charge(field, center, outer_d):
    if outer_d is None:
        return None
    return _safe(measure_charge, field, outer_d, center)


def morphology_reports(field: VelocityField, params: Params, zone_floor: float = 1e-6):
    """One report per mode (NP velocity, NP pressure, P pressure).

    Quantities that cannot be measured on this snapshot are None.
    """
    grid = field.grid
    ef = thermo.entropy_fields(field, params)
    zone = _safe(thermo.zone_boundary, ef, zone_floor * thermo.entropy_scale(params))
    try:
        center = find_center(field, params)
    except AmbiguousCore:
        center = None
    reports = []

    np_field = pressure_np(field, params)
    p_field = pressure_p(field)

    geo = None
    if center is not None:
        geo = _safe(profile_core, field.phi, grid, center, params.l0,
                    _noise_floor(field, params))
    reports.append(_report(Mode.NP_VELOCITY, field, center, geo,
                           zone.diameter if zone else None, np_field))

    for mode, pf in ((Mode.NP_PRESSURE, np_field), (Mode.P_PRESSURE, p_field)):
        geo = zone_d = None
        if center is not None:
            dep = _depression_profile(pf, center)
            geo = _safe(profile_core, dep, grid, center, params.l0, 1e-12)
            # zone: equivalent circle of the cells carrying > 10 % of the peak |grad p|
            g = np.hypot(pf.grad_p[0], pf.grad_p[1])
            gmax = float(np.max(g))
            if gmax > 1e-12:
                area = float(np.count_nonzero(g > RING_LEVELS[0] * gmax)) * grid.dx**2
                zone_d = 2.0 * np.sqrt(area / np.pi)
        reports.append(_report(mode, field, center, geo, zone_d, pf))
    return reports


def _report(mode, field, center, geo, zone_d, pf):
    inner = outer = ring = None
    if geo is not None:
        inner, outer = geo.inner_d, geo.outer_d
        ring = _safe(pressure_ring_width, pf, center, 0.5 * outer)
    return MorphologyReport(mode, zone_d, inner, outer, ring,
                            _charge(field, center, outer) if center else None,
                            tuple(center) if center else None)
