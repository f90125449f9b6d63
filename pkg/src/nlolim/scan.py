"""Rectangular parameter scans of the three-level limit formulas.

Rows are evaluated independently (optionally on a thread pool) and written
back by index, so the table never depends on the worker count.
"""
from __future__ import annotations

import io as _io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from nlolim import __version__
from nlolim.io import dumps, fmt, parse
from nlolim.threelevel import (
    _beta_peak_raw,
    _gamma00_raw,
    _gamma10_raw,
    normalizer,
)
from nlolim.units import SCHEMA

LAMBDA_FLOOR = 2.0 / 3.0
DEFAULT_RANGE = (LAMBDA_FLOOR, 2.0)
DEFAULT_GRID = 201


@dataclass
class ScanTable:
    axis1_name: str
    axis1: np.ndarray
    axis2_name: str
    axis2: np.ndarray
    columns: dict  # name -> (len(axis1), len(axis2)) float array; first is primary
    mask: np.ndarray  # bool, same shape
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        shape = (len(self.axis1), len(self.axis2))
        for name, arr in self.columns.items():
            if np.shape(arr) != shape:
                raise ValueError(f"column {name} has shape {np.shape(arr)}, expected {shape}")
        if np.shape(self.mask) != shape:
            raise ValueError("mask shape mismatch")

    @property
    def value_name(self) -> str:
        return next(iter(self.columns))

    @property
    def values(self) -> np.ndarray:
        return self.columns[self.value_name]

    def to_csv(self) -> str:
        buf = _io.StringIO()
        buf.write(f"# {json.dumps({'schema': SCHEMA, **self.metadata}, sort_keys=True)}\n")
        names = [self.axis1_name, self.axis2_name, *self.columns, "valid", "mask"]
        buf.write(",".join(names) + "\n")
        primary = self.values
        for i, a in enumerate(self.axis1):
            for j, b in enumerate(self.axis2):
                row = [fmt(a), fmt(b)]
                row += [fmt(col[i, j]) for col in self.columns.values()]
                row += [fmt(bool(np.isfinite(primary[i, j]))), fmt(bool(self.mask[i, j]))]
                buf.write(",".join(row) + "\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ScanTable":
        lines = text.splitlines()
        meta = json.loads(lines[0][2:])
        meta.pop("schema", None)
        names = lines[1].split(",")
        rows = [ln.split(",") for ln in lines[2:] if ln]
        a1 = list(dict.fromkeys(r[0] for r in rows))
        a2 = list(dict.fromkeys(r[1] for r in rows))
        shape = (len(a1), len(a2))
        cols = {}
        for k, name in enumerate(names[2:-2], start=2):
            cols[name] = np.array([parse(r[k]) for r in rows]).reshape(shape)
        mask = np.array([r[-1] == "1" for r in rows]).reshape(shape)
        return cls(names[0], np.array([float(v) for v in a1]), names[1],
                   np.array([float(v) for v in a2]), cols, mask, meta)

    def to_json(self) -> str:
        return dumps({
            "metadata": self.metadata,
            "axis1": {"name": self.axis1_name, "values": self.axis1},
            "axis2": {"name": self.axis2_name, "values": self.axis2},
            "columns": self.columns,
            "mask": self.mask,
        })

    @classmethod
    def from_json(cls, text: str) -> "ScanTable":
        d = json.loads(text)
        cols = {k: np.array([[math.nan if v is None else v for v in row] for row in c], dtype=float)
                for k, c in d["columns"].items()}
        return cls(d["axis1"]["name"], np.array(d["axis1"]["values"], dtype=float),
                   d["axis2"]["name"], np.array(d["axis2"]["values"], dtype=float),
                   cols, np.array(d["mask"], dtype=bool), d["metadata"])


def _grid_axis(rng, n) -> np.ndarray:
    lo, hi = rng
    if n < 2:
        raise ValueError("grid needs at least 2 points per axis")
    return np.linspace(float(lo), float(hi), int(n))


def _rows(fn, axis1, threads: int) -> np.ndarray:
    """Stack fn(a) for every a in axis1, in axis order whatever the pool does."""
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(fn, axis1))
    else:
        rows = [fn(a) for a in axis1]
    return np.array(rows)


def _meta(command, normalization, fixed, family) -> dict:
    return {
        "command": command,
        "formula_family": family,
        "normalization": normalization,
        "fixed": fixed,
        "version": __version__,
    }


def scan_beta(l10: float = 0.0, l00_range=DEFAULT_RANGE, l11_range=DEFAULT_RANGE,
              grid_n: int = DEFAULT_GRID, normalization: str = "family", threads: int = 1) -> ScanTable:
    """Intrinsic corrected beta at X = 3^(-1/4), E = 0 over (l00, l11).

    The mask marks cells whose intrinsic value is <= -1, i.e. opposite in
    sign to and at least as large as the non-relativistic limit.
    """
    if normalization not in ("family", "published"):
        raise ValueError(f"unknown normalization {normalization!r}")
    l00 = _grid_axis(l00_range, grid_n)
    l11 = _grid_axis(l11_range, grid_n)
    den = {m: normalizer("beta", mode=m) for m in ("family", "published")}

    def row(a):
        h = math.sqrt(1.5 * a - 1) if 1.5 * a - 1 >= 0 else math.nan
        v = _beta_peak_raw(h, a, l11, l10)
        v = np.where(l11 * 1.5 - 1 >= -1e-14, v, math.nan)
        return v

    raw = _rows(row, l00, threads)
    fam, pub = raw / den["family"], raw / den["published"]
    primary, other = (fam, pub) if normalization == "family" else (pub, fam)
    with np.errstate(invalid="ignore"):
        mask = primary <= -1.0
    cols = {"beta_int": primary, f"beta_int_{'published' if normalization == 'family' else 'family'}": other,
            "beta": raw}
    return ScanTable("l00", l00, "l11", l11, cols, mask,
                     _meta("three-level scan-beta", normalization,
                           {"l10": l10, "X": "3^(-1/4)", "E": 0.0,
                            "l00_range": list(map(float, l00_range)),
                            "l11_range": list(map(float, l11_range)), "grid_n": grid_n},
                           "beta_prime_at_peak"))


def scan_gamma_max(l10: float = 0.0, l00_range=DEFAULT_RANGE, l11_range=DEFAULT_RANGE,
                   grid_n: int = DEFAULT_GRID, threads: int = 1) -> ScanTable:
    """Corrected gamma at X = 0, E = 0 divided by the upper limit."""
    l00 = _grid_axis(l00_range, grid_n)
    l11 = _grid_axis(l11_range, grid_n)
    den = normalizer("gamma-upper", mode="published")
    raw = _rows(lambda a: _gamma00_raw(a, l11, l10), l00, threads)
    val = raw / den
    with np.errstate(invalid="ignore"):
        mask = np.abs(val) > 1.0
    return ScanTable("l00", l00, "l11", l11, {"gamma_int": val, "gamma": raw}, mask,
                     _meta("three-level scan-gamma-max", "published", {
                         "l10": l10, "X": 0.0, "E": 0.0,
                         "l00_range": list(map(float, l00_range)),
                         "l11_range": list(map(float, l11_range)), "grid_n": grid_n},
                         "gamma_prime_00"))


def scan_gamma_min(l00_range=DEFAULT_RANGE, l10_range=(0.0, 0.5), grid_n: int = DEFAULT_GRID,
                   threads: int = 1) -> ScanTable:
    """Corrected gamma at X = 1, E = 0 over (l00, l10).

    Primary column divides by |gamma_min| (identity point -> -1); the
    ``gamma_int_upper`` column divides by gamma_max (identity point -> -1/4).
    """
    l00 = _grid_axis(l00_range, grid_n)
    l10 = _grid_axis(l10_range, grid_n)
    lower = normalizer("gamma-lower", mode="published")
    upper = normalizer("gamma-upper", mode="published")
    raw = _rows(lambda a: _gamma10_raw(a, l10), l00, threads)
    val = raw / lower
    with np.errstate(invalid="ignore"):
        mask = val > 0.0
    return ScanTable("l00", l00, "l10", l10,
                     {"gamma_int": val, "gamma_int_upper": raw / upper, "gamma": raw}, mask,
                     _meta("three-level scan-gamma-min", "gamma-lower", {
                         "X": 1.0, "E": 0.0,
                         "l00_range": list(map(float, l00_range)),
                         "l10_range": list(map(float, l10_range)), "grid_n": grid_n},
                         "gamma_prime_10"))


def curve_to_csv(cols: dict, metadata: dict) -> str:
    buf = _io.StringIO()
    buf.write(f"# {json.dumps({'schema': SCHEMA, **metadata}, sort_keys=True)}\n")
    names = list(cols)
    buf.write(",".join(names) + "\n")
    for i in range(len(cols[names[0]])):
        buf.write(",".join(fmt(cols[n][i]) for n in names) + "\n")
    return buf.getvalue()
