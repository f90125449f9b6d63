"""Finite-difference bound states of 1D Hamiltonians, with and without the
lowest-order relativistic (p^4 and Darwin) corrections.

The kinetic operator is the three-point second difference with Dirichlet
walls at the grid ends, so the non-relativistic problem is symmetric
tridiagonal.  The p^4 term is the square of that operator (pentadiagonal).
Wavefunctions are stored on the full grid, normalized so that the
trapezoidal integral of psi^2 is one.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eig_banded, eigh_tridiagonal

from nlolim.spectral import Spectrum
from nlolim.units import C_AU, HBAR

TAIL_FRACTION = 0.01
TAIL_TOLERANCE = 1e-8
COLLAPSE_TOLERANCE = 1e-6


class SolverError(RuntimeError):
    pass


class InsufficientBoundStates(SolverError):
    pass


class SpectrumCollapseWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class GridSpec:
    x_min: float = -10.0
    x_max: float = 10.0
    n_points: int = 2001

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise ValueError("x_min must be below x_max")
        if self.n_points < 50:
            raise ValueError("n_points must be at least 50")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_points)

    def to_dict(self) -> dict:
        return {"x_min": self.x_min, "x_max": self.x_max, "n_points": self.n_points}


_KINDS = {
    "harmonic": ("omega",),
    "box": ("width",),
    "polynomial": ("coefficients",),
    "soft_coulomb": ("z", "softening"),
    "tabulated": ("x", "v"),
}


@dataclass(frozen=True)
class PotentialSpec:
    """Declarative 1D potential.  ``params`` keys depend on ``kind``:

    ========== ============================
    harmonic   omega
    box        width (hard walls at +-width/2)
    polynomial coefficients, ascending powers
    soft_coulomb z, softening
    tabulated  x, v (linear interpolation)
    ========== ============================
    """

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown potential kind {self.kind!r}")
        missing = [k for k in _KINDS[self.kind] if k not in self.params]
        if missing:
            raise ValueError(f"{self.kind} potential needs {', '.join(missing)}")

    @classmethod
    def harmonic(cls, omega: float = 1.0) -> "PotentialSpec":
        return cls("harmonic", {"omega": float(omega)})

    @classmethod
    def box(cls, width: float) -> "PotentialSpec":
        return cls("box", {"width": float(width)})

    @classmethod
    def polynomial(cls, coefficients) -> "PotentialSpec":
        return cls("polynomial", {"coefficients": [float(c) for c in coefficients]})

    @classmethod
    def soft_coulomb(cls, z: float = 1.0, softening: float = 1.0) -> "PotentialSpec":
        return cls("soft_coulomb", {"z": float(z), "softening": float(softening)})

    @classmethod
    def tabulated(cls, x, v) -> "PotentialSpec":
        return cls("tabulated", {"x": [float(a) for a in x], "v": [float(b) for b in v]})

    @classmethod
    def from_dict(cls, d: dict) -> "PotentialSpec":
        d = dict(d)
        kind = d.pop("kind")
        d.pop("grid", None)
        return cls(kind, d)

    def to_dict(self) -> dict:
        return {"kind": self.kind, **self.params}

    def default_grid(self, n_points: int = 2001) -> GridSpec:
        if self.kind == "box":
            w = self.params["width"]
            return GridSpec(-w / 2, w / 2, n_points)
        return GridSpec(-10.0, 10.0, n_points)

    def __call__(self, x, mass: float = 1.0) -> np.ndarray:
        """V(x); ``inf`` marks hard-wall nodes."""
        x = np.asarray(x, dtype=float)
        p = self.params
        if self.kind == "harmonic":
            return 0.5 * mass * p["omega"] ** 2 * x**2
        if self.kind == "box":
            half = p["width"] / 2
            # grid nodes sitting on the wall count as wall
            tol = 1e-12 * max(1.0, half)
            return np.where(np.abs(x) < half - tol, 0.0, np.inf)
        if self.kind == "polynomial":
            return np.polynomial.polynomial.polyval(x, p["coefficients"])
        if self.kind == "soft_coulomb":
            return -p["z"] / np.sqrt(x**2 + p["softening"] ** 2)
        return np.interp(x, p["x"], p["v"])


def second_derivative(f: np.ndarray, dx: float) -> np.ndarray:
    """Central second difference with zero (Dirichlet) values beyond the ends."""
    g = np.zeros_like(f)
    g[1:-1] = f[2:] - 2.0 * f[1:-1] + f[:-2]
    g[0] = f[1] - 2.0 * f[0]
    g[-1] = f[-2] - 2.0 * f[-1]
    return g / dx**2


def potential_curvature(v: np.ndarray, dx: float) -> np.ndarray:
    """V'' by central differences; zero wherever a neighbour is a hard wall.

    Endpoints copy their inner neighbour (wavefunctions vanish there anyway).
    """
    if v.size < 3:
        raise ValueError("V'' needs at least 3 grid points")
    d2 = np.zeros_like(v)
    with np.errstate(invalid="ignore"):
        d2[1:-1] = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / dx**2
    d2[0], d2[-1] = d2[1], d2[-2]
    d2[~np.isfinite(d2)] = 0.0
    return d2


@dataclass(frozen=True)
class Eigensystem:
    eigenvalues: np.ndarray
    wavefunctions: np.ndarray  # (n_states, n_points)
    grid: GridSpec
    potential: PotentialSpec
    mode: str = "nonrel"
    c: float = math.inf
    mass: float = 1.0
    flags: tuple = ()

    @property
    def n_states(self) -> int:
        return self.eigenvalues.size

    def overlap(self) -> np.ndarray:
        psi = self.wavefunctions
        return psi @ psi.T * self.grid.dx


def _interior(v: np.ndarray) -> np.ndarray:
    inside = np.isfinite(v)
    inside[0] = inside[-1] = False
    idx = np.flatnonzero(inside)
    if idx.size == 0 or idx[-1] - idx[0] + 1 != idx.size:
        raise SolverError("allowed region must be one contiguous interval")
    return idx


def _finish(vals, vecs, idx, grid, n_states, pot, check_tails) -> tuple[np.ndarray, np.ndarray]:
    if vals.size < n_states:
        raise InsufficientBoundStates(f"only {vals.size} states on this grid, asked for {n_states}")
    psi = np.zeros((n_states, grid.n_points))
    psi[:, idx] = vecs[:, :n_states].T / math.sqrt(grid.dx)
    for row in psi:
        # deterministic phase: first appreciable lobe positive
        big = np.flatnonzero(np.abs(row) > 1e-3 * np.abs(row).max())
        if row[big[0]] < 0:
            row *= -1.0
    if check_tails:
        k = max(2, int(TAIL_FRACTION * grid.n_points))
        tail = (psi[:, :k] ** 2).sum(axis=1) + (psi[:, -k:] ** 2).sum(axis=1)
        tail *= grid.dx
        bad = np.flatnonzero(tail > TAIL_TOLERANCE)
        if bad.size:
            raise InsufficientBoundStates(
                f"state {bad[0]} leaks to the grid edge (tail probability {tail[bad[0]]:.2e});"
                " widen the grid or ask for fewer states"
            )
    return vals[:n_states].copy(), psi


def solve_nonrel(pot: PotentialSpec, grid: GridSpec | None = None, n_states: int = 10,
                 m: float = 1.0) -> Eigensystem:
    grid = grid or pot.default_grid()
    v = pot(grid.x, m)
    idx = _interior(v)
    if n_states > idx.size:
        raise InsufficientBoundStates(f"grid has {idx.size} interior nodes, asked for {n_states}")
    t = HBAR**2 / (2.0 * m * grid.dx**2)
    d = 2.0 * t + v[idx]
    e = np.full(idx.size - 1, -t)
    try:
        vals, vecs = eigh_tridiagonal(d, e, select="i", select_range=(0, n_states - 1))
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"tridiagonal eigensolver failed: {exc}") from exc
    vals, psi = _finish(vals, vecs, idx, grid, n_states, pot, pot.kind != "box")
    vals.setflags(write=False)
    psi.setflags(write=False)
    return Eigensystem(vals, psi, grid, pot, "nonrel", math.inf, m)


def kinetic_p4_expectation(psi: np.ndarray, dx: float) -> np.ndarray:
    """<n|p^4|n> = ||p^2 psi_n||^2 with the discrete p^2 = -hbar^2 d^2/dx^2."""
    p2psi = -HBAR**2 * np.array([second_derivative(row, dx) for row in psi])
    return (p2psi**2).sum(axis=1) * dx


def solve_rel(pot: PotentialSpec, grid: GridSpec | None = None, n_states: int = 10,
              m: float = 1.0, c: float = C_AU, mode: str = "perturbative") -> Eigensystem:
    """Bound states of p^2/2m - p^4/8m^3c^2 + V + hbar^2 V''/8m^2c^2.

    ``mode="perturbative"`` keeps the non-relativistic wavefunctions and adds
    first-order energy shifts; ``mode="direct"`` diagonalizes the banded
    quartic Hamiltonian.  The quartic operator is unbounded below on fine
    grids, so any level that drops below min(V) is flagged as collapse.
    """
    if c <= 0:
        raise ValueError("speed of light must be positive")
    grid = grid or pot.default_grid()
    if mode == "perturbative":
        base = solve_nonrel(pot, grid, n_states, m)
        psi = base.wavefunctions
        dx = grid.dx
        p4 = kinetic_p4_expectation(psi, dx)
        v2 = potential_curvature(pot(grid.x, m), dx)
        darwin = (psi**2 * v2).sum(axis=1) * dx
        shift = -p4 / (8 * m**3 * c**2) + HBAR**2 * darwin / (8 * m**2 * c**2)
        vals = base.eigenvalues + shift
        flags = _collapse_flags(vals, pot(grid.x, m))
        vals.setflags(write=False)
        return Eigensystem(vals, psi, grid, pot, "perturbative", c, m, flags)
    if mode != "direct":
        raise ValueError(f"unknown mode {mode!r}")

    v = pot(grid.x, m)
    idx = _interior(v)
    n = idx.size
    if n_states > n:
        raise InsufficientBoundStates(f"grid has {n} interior nodes, asked for {n_states}")
    t = HBAR**2 / (2.0 * m * grid.dx**2)
    # T = t*tridiag(-1, 2, -1); T^2 = t^2*pentadiag(1, -4, 6, -4, 1) with edge fixes
    q = t**2 / (2.0 * m * c**2)
    v2 = potential_curvature(v, grid.dx)[idx]
    diag = 2 * t + v[idx] + HBAR**2 * v2 / (8 * m**2 * c**2) - q * np.full(n, 6.0)
    diag[0] += q
    diag[-1] += q
    band = np.zeros((3, n))
    band[0] = diag
    band[1, :-1] = -t + 4 * q
    band[2, :-2] = -q
    try:
        vals, vecs = eig_banded(band, lower=True, select="i", select_range=(0, n_states - 1))
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"banded eigensolver failed: {exc}") from exc
    flags = _collapse_flags(vals, v)
    # collapsed spectra are grid noise; the edge-leak test would only mask the flag
    vals, psi = _finish(vals, vecs, idx, grid, n_states, pot, pot.kind != "box" and not flags)
    vals.setflags(write=False)
    psi.setflags(write=False)
    return Eigensystem(vals, psi, grid, pot, "direct", c, m, flags)


def _collapse_flags(vals: np.ndarray, v: np.ndarray) -> tuple:
    vmin = float(np.min(v[np.isfinite(v)]))
    low = np.flatnonzero(vals < vmin - COLLAPSE_TOLERANCE)
    if low.size:
        warnings.warn(
            f"{low.size} level(s) below min(V) = {vmin:g}: discretized p^4 spectrum collapse",
            SpectrumCollapseWarning,
            stacklevel=3,
        )
        return ("spectrum-collapse",)
    return ()


def spectrum_from_eigensystem(es: Eigensystem, n_states: int | None = None,
                              charge: float = 1.0) -> Spectrum:
    n = es.n_states if n_states is None else n_states
    if n > es.n_states:
        raise ValueError(f"asked for {n} states, eigensystem has {es.n_states}")
    psi = es.wavefunctions[:n]
    x = es.grid.x
    m = (psi * x) @ psi.T * es.grid.dx
    m = 0.5 * (m + m.T)
    e = es.eigenvalues[:n] - es.eigenvalues[0]
    return Spectrum(e, m, charge=charge, mass=es.mass)


def p2_matrix(es: Eigensystem, n_states: int | None = None) -> np.ndarray:
    n = es.n_states if n_states is None else n_states
    psi = es.wavefunctions[:n]
    d2 = np.array([second_derivative(row, es.grid.dx) for row in psi])
    a = -HBAR**2 * (psi @ d2.T) * es.grid.dx
    return 0.5 * (a + a.T)
