"""Sum-over-states static responses for a truncated one-dimensional spectrum.

Energies are stored as transition energies E_n0 above the ground state, so
only differences ever enter the sums.  All accumulation goes through
:func:`math.fsum`, which is exactly rounded; the two sums making up the
second hyperpolarizability cancel almost completely for near-linear systems
and naive summation loses that cancellation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Spectrum:
    """Energy ladder plus position matrix of a truncated quantum system.

    ``energies[n]`` is E_n - E_0 (so ``energies[0] == 0``) and
    ``moments[i, j]`` is <i|x|j>, diagonal included.
    """

    energies: np.ndarray
    moments: np.ndarray
    charge: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        e = _frozen(self.energies)
        x = _frozen(self.moments)
        object.__setattr__(self, "energies", e)
        object.__setattr__(self, "moments", x)
        if e.ndim != 1 or e.size < 2:
            raise ValueError("need a ground state and at least one excited state")
        if x.shape != (e.size, e.size):
            raise ValueError(f"moments shape {x.shape} does not match {e.size} levels")
        if e[0] != 0.0:
            raise ValueError("energies[0] must be exactly 0 (energies are E_n0)")
        if not np.all(np.diff(e) > 0):
            raise ValueError("energies must be strictly increasing")
        if not np.all(np.isfinite(x)):
            raise ValueError("moments must be finite")
        if not np.array_equal(x, x.T):
            raise ValueError("moments must be symmetric (real transition moments)")

    @property
    def n_levels(self) -> int:
        return self.energies.size

    @property
    def n_excited(self) -> int:
        return self.energies.size - 1

    def barred(self) -> np.ndarray:
        """Moment matrix with the ground-state expectation removed from the diagonal."""
        xb = np.array(self.moments)
        xb[np.diag_indices_from(xb)] -= self.moments[0, 0]
        return xb

    def shifted(self, d: float) -> "Spectrum":
        """Same system with the coordinate origin moved by ``-d``."""
        x = np.array(self.moments)
        x[np.diag_indices_from(x)] += d
        return Spectrum(self.energies, x, self.charge, self.mass)


@dataclass(frozen=True)
class Coefficients:
    alpha: float
    beta: float
    gamma: float


def barred_moment(s: Spectrum, i: int, j: int) -> float:
    n = s.n_levels
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"state index ({i}, {j}) outside 0..{n - 1}")
    if i == j:
        return float(s.moments[i, i] - s.moments[0, 0])
    return float(s.moments[i, j])


def alpha_sos(s: Spectrum) -> float:
    x0 = s.moments[0, 1:]
    return 2.0 * s.charge**2 * math.fsum(x0 * x0 / s.energies[1:])


def beta_sos(s: Spectrum) -> float:
    x0 = s.moments[0, 1:]
    xb = s.barred()[1:, 1:]
    e = s.energies[1:]
    u = x0 / e
    terms = u[:, None] * xb * u[None, :]
    return 3.0 * s.charge**3 * math.fsum(terms.ravel())


def gamma_sos(s: Spectrum) -> float:
    x0 = s.moments[0, 1:]
    xb = s.barred()[1:, 1:]
    e = s.energies[1:]
    u = x0 / e
    inv_e = 1.0 / e
    # n,l,k term: u_n xb_nl / E_l xb_lk u_k
    left = u[:, None] * xb * inv_e[None, :]
    first = left[:, :, None] * xb[None, :, :] * u[None, None, :]
    f = x0 * x0
    second = (f / (e * e))[:, None] * (f / e)[None, :]
    return 4.0 * s.charge**4 * math.fsum(
        np.concatenate([first.ravel(), -second.ravel()])
    )


def coefficients(s: Spectrum) -> Coefficients:
    return Coefficients(alpha_sos(s), beta_sos(s), gamma_sos(s))
