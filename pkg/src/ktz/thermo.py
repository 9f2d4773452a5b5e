"""Entropy budget of a layer and the self-organization zone.

The rates follow from the amplitude energy budget

    d(|Phi|^2 / 2)/dt = q|Phi|^2 - nu1 |grad Phi|^2 - alpha1 |Phi|^4 + div(flux)

Dissipative terms (viscous and cubic sink) make up the entropy production
sigma_i >= 0; the source term is the external entropy flow
sigma_e = -q_local |Phi|^2, negative wherever momentum is pumped in.  This
is a model closure built from the energy budget above.
The self-organization zone is the set of cells where the total rate
s_dot = sigma_e + sigma_i is negative.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Boundary, GridSpec, Params, VelocityField, pad, source_map


class EmptyZone(Exception):
    """No cell has s_dot below the zone threshold."""


@dataclass
class EntropyFields:
    grid: GridSpec
    sigma_i: np.ndarray
    sigma_e: np.ndarray
    s_dot: np.ndarray
    time: float = 0.0


def gradient(a: np.ndarray, grid: GridSpec):
    """Centred differences (d/dx, d/dy) using the grid's boundary mode."""
    P = pad(a, grid.boundary)
    h = 2.0 * grid.dx
    return (P[1:-1, 2:] - P[1:-1, :-2]) / h, (P[2:, 1:-1] - P[:-2, 1:-1]) / h


def grad_sq(field: VelocityField) -> np.ndarray:
    rx, ry = gradient(field.re, field.grid)
    ix, iy = gradient(field.im, field.grid)
    return (rx * rx + ry * ry) + (ix * ix + iy * iy)


def entropy_fields(field: VelocityField, params: Params) -> EntropyFields:
    mod2 = field.re * field.re + field.im * field.im
    q = source_map(params, field.grid)
    # a negative alpha1 is a cubic source: it belongs to the external flow
    sink = max(params.alpha1, 0.0)
    pump = min(params.alpha1, 0.0)
    sigma_i = params.nu1 * grad_sq(field) + sink * (mod2 * mod2)
    sigma_e = -q * mod2 + pump * (mod2 * mod2)
    return EntropyFields(field.grid, sigma_i, sigma_e, sigma_e + sigma_i, field.time)


def entropy_scale(params: Params) -> float:
    """Magnitude of the source and sink rates on the homogeneous plateau."""
    if params.q > 0 and params.alpha1 > 0:
        return params.q**2 / params.alpha1
    return abs(params.q) if params.q != 0 else 1.0


def zone_mask(ef: EntropyFields, floor: float = 0.0) -> np.ndarray:
    return ef.s_dot < -floor


def zone_area(ef: EntropyFields, floor: float = 0.0):
    """(area in m^2, equivalent-circle diameter in m); zeros for an empty zone."""
    area = float(np.count_nonzero(zone_mask(ef, floor))) * ef.grid.dx**2
    return area, 2.0 * np.sqrt(area / np.pi)


@dataclass
class Zone:
    segments: np.ndarray  # (k, 2, 2) contour segments [[x0, y0], [x1, y1]] in meters
    area: float
    diameter: float

    def radii(self, center) -> np.ndarray:
        cx, cy = center
        pts = self.segments.reshape(-1, 2)
        return np.hypot(pts[:, 0] - cx, pts[:, 1] - cy)


# edges of a cell square: 0 bottom (v00-v10), 1 right (v10-v11),
# 2 top (v01-v11), 3 left (v00-v01); corner bits 1=v00, 2=v10, 4=v11, 8=v01
_CASES = {
    1: [(3, 0)], 2: [(0, 1)], 3: [(3, 1)], 4: [(1, 2)],
    6: [(0, 2)], 7: [(3, 2)], 8: [(2, 3)], 9: [(2, 0)],
    11: [(2, 1)], 12: [(1, 3)], 13: [(1, 0)], 14: [(0, 3)],
}
# saddles: (centre inside, centre outside)
_SADDLE = {
    5: ([(0, 1), (2, 3)], [(3, 0), (1, 2)]),
    10: ([(3, 0), (1, 2)], [(0, 1), (2, 3)]),
}


def marching_squares(values: np.ndarray, grid: GridSpec, level: float = 0.0) -> np.ndarray:
    """Linear-interpolated contour segments of ``values`` at ``level``.

    Sample points are the cell centres; a corner is "inside" when its value
    is below ``level``.  Returns an array of shape (k, 2, 2) in meters.
    """
    v = np.asarray(values, dtype=float) - level
    if grid.boundary is Boundary.PERIODIC:
        v = np.pad(v, ((0, 1), (0, 1)), mode="wrap")
    n_y, n_x = v.shape
    v00 = v[:-1, :-1]
    v10 = v[:-1, 1:]
    v11 = v[1:, 1:]
    v01 = v[1:, :-1]
    code = ((v00 < 0) * 1 + (v10 < 0) * 2 + (v11 < 0) * 4 + (v01 < 0) * 8).astype(np.int8)
    dx = grid.dx
    segs = []
    js, is_ = np.nonzero((code != 0) & (code != 15))
    for j, i in zip(js.tolist(), is_.tolist()):
        c = int(code[j, i])
        a, b, cc, d = v00[j, i], v10[j, i], v11[j, i], v01[j, i]
        if c in _SADDLE:
            centre = 0.25 * ((a + b) + (cc + d))
            pairs = _SADDLE[c][0 if centre < 0 else 1]
        else:
            pairs = _CASES[c]
        x0 = (i + 0.5) * dx
        y0 = (j + 0.5) * dx
        for e0, e1 in pairs:
            segs.append((_edge_point(e0, a, b, cc, d, x0, y0, dx),
                         _edge_point(e1, a, b, cc, d, x0, y0, dx)))
    if not segs:
        return np.zeros((0, 2, 2))
    return np.asarray(segs, dtype=float)


def _frac(p, q):
    return p / (p - q)


def _edge_point(e, a, b, c, d, x0, y0, dx):
    if e == 0:
        return (x0 + _frac(a, b) * dx, y0)
    if e == 1:
        return (x0 + dx, y0 + _frac(b, c) * dx)
    if e == 2:
        return (x0 + _frac(d, c) * dx, y0 + dx)
    return (x0, y0 + _frac(a, d) * dx)


def zone_boundary(ef: EntropyFields, floor: float = 0.0) -> Zone:
    """Contour s_dot = -floor and the area where s_dot < -floor.

    Raises EmptyZone when no cell qualifies.
    """
    if not (np.isfinite(ef.s_dot).all()):
        raise ValueError("entropy fields are not finite")
    area, diameter = zone_area(ef, floor)
    if area == 0.0:
        raise EmptyZone("no cell with negative total entropy rate")
    segments = marching_squares(ef.s_dot, ef.grid, level=-floor)
    return Zone(segments, area, diameter)
