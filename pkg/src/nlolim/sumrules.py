"""One-dimensional TRK sum rules with the lowest-order relativistic
correction factors lambda_kn, and two routes to those factors.

``lambda_from_p2`` inverts <k|p^2|n> = 2 m^2 c^2 (delta_kn - lambda_kn) and is
the reference route.  ``lambda_direct`` integrates the square-root form on
the grid; its argument can go negative in classically forbidden regions,
where it is clamped to zero and the clamped weight is reported.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from nlolim.eigensolver import Eigensystem, PotentialSpec, p2_matrix, potential_curvature
from nlolim.spectral import Spectrum
from nlolim.units import HBAR

CLAMP_REPORT_THRESHOLD = 1e-6


class ForbiddenRegionWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class LambdaMatrix:
    values: np.ndarray
    c: float = math.inf

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError("lambda matrix must be square")
        if not np.array_equal(v, v.T):
            raise ValueError("lambda matrix must be symmetric")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def identity(cls, n: int) -> "LambdaMatrix":
        return cls(np.eye(n), math.inf)

    def __getitem__(self, kn):
        return float(self.values[kn])

    @property
    def size(self) -> int:
        return self.values.shape[0]

    def to_dict(self) -> dict:
        return {"c": None if math.isinf(self.c) else self.c, "values": self.values.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "LambdaMatrix":
        c = d.get("c")
        return cls(np.array(d["values"], dtype=float), math.inf if c is None else float(c))


@dataclass(frozen=True)
class LambdaSet:
    """The four correction factors the three-level closed forms use."""

    l00: float = 1.0
    l11: float = 1.0
    l10: float = 0.0
    l20: float = 0.0

    @classmethod
    def identity(cls) -> "LambdaSet":
        return cls()

    def to_matrix(self, offdiag_scale: float = 1.0) -> LambdaMatrix:
        """3x3 matrix; lambda_22 = 1 and lambda_21 = 0 (neither enters the ansatz).

        The closed-form (1,0) and (2,0) rules carry twice the general
        left-hand side, so the matrix the general TRK residual needs for an
        ansatz spectrum is ``to_matrix(offdiag_scale=0.5)``.
        """
        v = np.eye(3)
        v[0, 0], v[1, 1] = self.l00, self.l11
        v[1, 0] = v[0, 1] = offdiag_scale * self.l10
        v[2, 0] = v[0, 2] = offdiag_scale * self.l20
        return LambdaMatrix(v)

    def as_dict(self) -> dict:
        return {"l00": self.l00, "l11": self.l11, "l10": self.l10, "l20": self.l20}


def _check_index(n_levels: int, *idx: int) -> None:
    for i in idx:
        if not 0 <= i < n_levels:
            raise IndexError(f"state index {i} outside 0..{n_levels - 1}")


def trk_lhs(s: Spectrum, k: int, n: int, L: int | None = None) -> float:
    """sum_{l<L} x_kl x_ln [E_l - (E_k + E_n)/2]."""
    _check_index(s.n_levels, k, n)
    L = s.n_levels if L is None else L
    if not 1 <= L <= s.n_levels:
        raise IndexError(f"truncation L={L} outside 1..{s.n_levels}")
    e = s.energies
    x = s.moments
    terms = x[k, :L] * x[:L, n] * (e[:L] - 0.5 * (e[k] + e[n]))
    return math.fsum(terms)


def trk_rhs_rel(lam: LambdaMatrix, k: int, n: int, m: float = 1.0) -> float:
    _check_index(lam.size, k, n)
    return HBAR**2 / m * (1.5 * lam.values[k, n] - (1.0 if k == n else 0.0))


def trk_rhs_nonrel(k: int, n: int, m: float = 1.0) -> float:
    return HBAR**2 / (2 * m) if k == n else 0.0


def trk_residual(s: Spectrum, lam: LambdaMatrix, k: int, n: int, L: int | None = None) -> float:
    return trk_lhs(s, k, n, L) - trk_rhs_rel(lam, k, n, s.mass)


def lambda_from_p2(p2, c: float, m: float = 1.0) -> LambdaMatrix:
    p2 = np.asarray(p2, dtype=float)
    if c <= 0:
        raise ValueError("speed of light must be positive")
    if p2.ndim != 2 or p2.shape[0] != p2.shape[1]:
        raise ValueError("p^2 matrix must be square")
    scale = max(1.0, float(np.abs(p2).max()))
    if not np.allclose(p2, p2.T, rtol=0, atol=1e-10 * scale):
        raise ValueError("p^2 matrix is not symmetric")
    p2 = 0.5 * (p2 + p2.T)
    lam = np.eye(p2.shape[0]) - p2 / (2.0 * m**2 * c**2)
    return LambdaMatrix(lam, c)


def lambda_matrix(es: Eigensystem, n_states: int | None = None, c: float | None = None) -> LambdaMatrix:
    """Reference lambda matrix of an eigensystem (p^2 route)."""
    c = es.c if c is None else c
    if math.isinf(c):
        return LambdaMatrix.identity(es.n_states if n_states is None else n_states)
    return lambda_from_p2(p2_matrix(es, n_states), c, es.mass)


def lambda_direct(es: Eigensystem, potential: PotentialSpec | None, n: int, k: int,
                  c: float, full_output: bool = False):
    """<k| sqrt(1 - 2(E_n - V)/mc^2 + hbar^2 V''/4m^3c^4) |n> by trapezoidal quadrature.

    Negative arguments are clamped to zero.  When the clamped region carries
    more than 1e-6 of the |psi_k psi_n| weight a ForbiddenRegionWarning is
    issued; ``full_output=True`` also returns that fraction.
    """
    _check_index(es.n_states, n, k)
    potential = potential or es.potential
    grid = es.grid
    if grid.n_points < 3:
        raise ValueError("grid too coarse for V''")
    m = es.mass
    v = potential(grid.x, m)
    v2 = potential_curvature(v, grid.dx)
    pk, pn = es.wavefunctions[k], es.wavefunctions[n]
    weight = np.abs(pk * pn)
    live = weight > 0
    if math.isinf(c):
        root = np.ones_like(v)
    else:
        arg = np.ones_like(v)
        with np.errstate(invalid="ignore"):
            arg[live] = (1.0 - 2.0 * (es.eigenvalues[n] - v[live]) / (m * c**2)
                         + HBAR**2 * v2[live] / (4.0 * m**3 * c**4))
        root = np.sqrt(np.clip(arg, 0.0, None))
        clamped = live & (arg < 0)
        frac = weight[clamped].sum() / weight.sum() if weight.sum() else 0.0
    value = math.fsum(pk * root * pn) * grid.dx
    frac = 0.0 if math.isinf(c) else float(frac)
    if frac > CLAMP_REPORT_THRESHOLD:
        warnings.warn(
            f"lambda_direct({k},{n}): clamped region carries {frac:.2e} of the weight",
            ForbiddenRegionWarning,
            stacklevel=2,
        )
    return (value, frac) if full_output else value
