"""On-disk formats: KTZ1 snapshots, CSV series, P6 rasters, text reports."""

from __future__ import annotations

import csv
import io
import struct
from pathlib import Path

import numpy as np

from .core import Boundary, GridSpec, VelocityField
from .integrator import SERIES_COLUMNS

MAGIC = b"KTZ1"
_HEADER = struct.Struct("<4sIddB")


class FormatError(ValueError):
    pass


def snapshot_bytes(field: VelocityField) -> bytes:
    g = field.grid
    head = _HEADER.pack(MAGIC, g.n, g.physical_size, field.time, g.boundary.value)
    body = np.empty((g.n, g.n, 2), dtype="<f8")
    body[..., 0] = field.re
    body[..., 1] = field.im
    return head + body.tobytes()


def parse_snapshot(data: bytes) -> VelocityField:
    if len(data) < _HEADER.size:
        raise FormatError("snapshot shorter than its header")
    magic, n, size, time, boundary = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    expected = _HEADER.size + 16 * n * n
    if len(data) != expected:
        raise FormatError(f"snapshot has {len(data)} bytes, expected {expected}")
    try:
        grid = GridSpec(n, size, Boundary(boundary))
    except ValueError as e:
        raise FormatError(str(e)) from None
    body = np.frombuffer(data, dtype="<f8", offset=_HEADER.size).reshape(n, n, 2)
    return VelocityField(grid, body[..., 0].copy(), body[..., 1].copy(), time)


def write_snapshot(path, field: VelocityField):
    Path(path).write_bytes(snapshot_bytes(field))


def read_snapshot(path) -> VelocityField:
    return parse_snapshot(Path(path).read_bytes())


def series_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(SERIES_COLUMNS)
    for row in rows:
        w.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def read_series(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != SERIES_COLUMNS:
        raise FormatError("series header mismatch")
    return [tuple(float(v) for v in r) for r in rows[1:]]


# --- rasters ---------------------------------------------------------------

def _ppm(rgb: np.ndarray) -> bytes:
    # row 0 of the image is the top of the domain (largest y)
    rgb = np.ascontiguousarray(np.flipud(rgb).astype(np.uint8))
    h, w, _ = rgb.shape
    return f"P6\n{w} {h}\n255\n".encode("ascii") + rgb.tobytes()


def amplitude_ppm(field: VelocityField) -> bytes:
    amp = field.amplitude()
    top = float(amp.max())
    v = np.zeros_like(amp) if top == 0 else amp / top
    g = np.rint(255.0 * v)
    return _ppm(np.stack([g, g, g], axis=-1))


def diverging_ppm(values: np.ndarray) -> bytes:
    """Blue below zero, white at zero, red above; symmetric scale."""
    s = float(np.max(np.abs(values)))
    t = np.zeros_like(values) if s == 0 else np.clip(values / s, -1.0, 1.0)
    neg = np.minimum(t, 0.0)
    pos = np.maximum(t, 0.0)
    r = np.rint(255.0 * (1.0 + neg))
    g = np.rint(255.0 * (1.0 + neg - pos))
    b = np.rint(255.0 * (1.0 - pos))
    return _ppm(np.stack([r, g, b], axis=-1))


def parse_ppm(data: bytes):
    """(width, height, pixels) of a binary P6 image; raises FormatError."""
    tokens = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FormatError("truncated PPM header")
        tokens.append(data[start:pos])
    if tokens[0] != b"P6":
        raise FormatError("not a P6 image")
    w, h, maxval = (int(t) for t in tokens[1:])
    if maxval != 255:
        raise FormatError("only 8-bit P6 is produced here")
    pos += 1  # single whitespace before the raster
    body = data[pos:]
    if len(body) != 3 * w * h:
        raise FormatError(f"raster holds {len(body)} bytes, expected {3 * w * h}")
    return w, h, np.frombuffer(body, dtype=np.uint8).reshape(h, w, 3)


# --- reports ---------------------------------------------------------------

ROW_LABELS = (
    "Self-organization zone diameter d, m",
    "Inner core diameter, m",
    "Outer core diameter, m",
    "Width of the pressure equalization ring to atmospheric pressure, m",
)


def _fmt(v):
    return "n/a" if v is None else f"{v:.1f}"


def morphology_text(reports, time: float, l0: float) -> str:
    """Plain-text morphology table: one row per length, columns NP, NP, P."""
    width = max(len(s) for s in ROW_LABELS) + 2
    head = reports[0]
    charge = "n/a" if head.charge is None else str(head.charge)
    centre = "n/a" if head.core_center is None else "{:.1f}, {:.1f}".format(*head.core_center)
    lines = [
        "Spatial characteristics of the vortex",
        f"t = {time!r}",
        f"basin diameter l0, m = {l0:.1f}",
        f"topological charge m = {charge}",
        f"core center, m = {centre}",
        "",
        "Flow type".ljust(width) + "".join(f"{c:>12}" for c in ("NP", "NP", "P")),
        "Characteristics".ljust(width) + "".join(f"{c:>12}" for c in ("v*", "grad p*", "grad p*")),
    ]
    fields = ("zone_diameter_m", "inner_core_diameter_m", "outer_core_diameter_m",
              "pressure_ring_width_m")
    for label, name in zip(ROW_LABELS, fields):
        lines.append(label.ljust(width) + "".join(f"{_fmt(getattr(r, name)):>12}" for r in reports))
    return "\n".join(lines) + "\n"


def column_text(column) -> str:
    lines = ["z_m,status,zone_area_m2,zone_diameter_m,inner_core_m,outer_core_m,ring_width_m,charge"]
    for layer in column.per_layer:
        rep = layer.morphology
        vals = [rep.zone_diameter_m, rep.inner_core_diameter_m, rep.outer_core_diameter_m,
                rep.pressure_ring_width_m] if rep else [None] * 4
        charge = "" if rep is None or rep.charge is None else str(rep.charge)
        lines.append(",".join([repr(float(layer.z_m)), layer.status.value, repr(layer.zone_area)]
                              + ["" if v is None else repr(float(v)) for v in vals] + [charge]))
    top = column.top_of_vortex_m
    lines.append(f"# top_of_vortex_m = {'none' if top is None else repr(float(top))}")
    return "\n".join(lines) + "\n"
