"""Three-level model of hydrogen-like ions with multiplet-averaged fine
structure and momentum-based correction factors.

Levels are indexed from 0 (principal quantum number N = n + 1).  The two
excited levels of the model are 2p and 3p; the whole dipole strength is
placed in 1s-2p and 1s-3p, split in the ratio of the exact hydrogen
oscillator strengths.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from nlolim.sumrules import LambdaSet
from nlolim.threelevel import DomainError, ThreeLevelPoint, gamma3l_nonrel, gamma3l_rel
from nlolim.units import ALPHA_FS

VALID_J = (0.5, 1.5, 2.5)

# (n, ((j, weight), ...)); weights 2j + 1 over the levels each transition reaches
GROUND = (0, ((0.5, 2.0),))
FIRST_EXCITED = (1, ((0.5, 2.0), (1.5, 4.0)))
SECOND_EXCITED = (2, ((1.5, 4.0), (2.5, 6.0)))

LAMBDA_VARIANTS = ("trk", "literal")


class ValidityWarning(UserWarning):
    pass


def oscillator_strength_1s_np(n_upper: int) -> float:
    """Exact hydrogen f(1s -> Np), N = ``n_upper`` >= 2 (principal number)."""
    N = n_upper
    if N < 2:
        raise ValueError("upper principal number must be >= 2")
    return 2**8 * N**5 * (N - 1) ** (2 * N - 4) / (3 * (N + 1) ** (2 * N + 4))


def x_fraction() -> float:
    """X for the model: sqrt of the 1s-2p share of the 1s-2p + 1s-3p strength."""
    f2 = oscillator_strength_1s_np(2)
    f3 = oscillator_strength_1s_np(3)
    return math.sqrt(f2 / (f2 + f3))


def _check_j(j: float) -> None:
    if j not in VALID_J:
        raise ValueError(f"j must be one of {VALID_J}, got {j}")


def fine_structure_shift(z: int, n: int, j: float, alpha_fs: float = ALPHA_FS) -> float:
    """Order (Z alpha)^4 Dirac correction to the Bohr level, hartree."""
    _check_j(j)
    N = n + 1
    return -(z**4) * alpha_fs**2 / (2 * N**4) * (N / (j + 0.5) - 0.75)


def level_energy(z: int, n: int, j: float, alpha_fs: float = ALPHA_FS) -> float:
    N = n + 1
    return -(z**2) / (2 * N**2) + fine_structure_shift(z, n, j, alpha_fs)


def hlike_p2(z: int, n: int, j: float, v_nn: float | None = None,
             alpha_fs: float = ALPHA_FS) -> float:
    """Diagonal <p^2> of level (n, j) in the published approximate form."""
    _check_j(j)
    N = n + 1
    if v_nn is None:
        v_nn = -(z**2) / N**2
    fs = z**4 * alpha_fs**2 / N**2 * (2 / ((1 + 2 * j) * N) - 3 / (4 * N**2))
    return fs - z**2 / N**2 - 2 * v_nn


def _averaged(fn, z, level, alpha_fs):
    n, js = level
    total = sum(w for _, w in js)
    return math.fsum(w * fn(z, n, j, alpha_fs=alpha_fs) for j, w in js) / total


def _p2(z, n, j, alpha_fs):
    return hlike_p2(z, n, j, alpha_fs=alpha_fs)


def _lambda_scale(variant: str) -> float:
    # literal: lambda = 1 - alpha^2 p^2; trk: inversion of <p^2> = 2c^2(1 - lambda)
    if variant == "literal":
        return 1.0
    if variant == "trk":
        return 0.5
    raise ValueError(f"lambda variant must be one of {LAMBDA_VARIANTS}")


def hlike_lambda(z: int, alpha_fs: float = ALPHA_FS, variant: str = "trk") -> LambdaSet:
    if z < 1:
        raise ValueError("z must be >= 1")
    if z * alpha_fs >= 0.5:
        warnings.warn(f"Z alpha = {z * alpha_fs:.3f} >= 0.5: outside the lowest-order regime",
                      ValidityWarning, stacklevel=2)
    k = _lambda_scale(variant) * alpha_fs**2
    p00 = _averaged(_p2, z, GROUND, alpha_fs)
    p11 = _averaged(_p2, z, FIRST_EXCITED, alpha_fs)
    # off-diagonal factors vanish for central-potential energy perturbations
    return LambdaSet(1.0 - k * p00, 1.0 - k * p11, 0.0, 0.0)


@dataclass(frozen=True)
class HLikeModel:
    z: int
    alpha_fs: float
    e10: float
    e20: float
    x10: float
    x20: float
    X: float
    lam: LambdaSet
    variant: str = "trk"

    @property
    def E(self) -> float:
        return self.e10 / self.e20

    def point(self) -> ThreeLevelPoint:
        return ThreeLevelPoint(self.X, self.E, self.e10)


def hlike_model(z: int, alpha_fs: float = ALPHA_FS, variant: str = "trk") -> HLikeModel:
    e0 = _averaged(level_energy, z, GROUND, alpha_fs)
    e1 = _averaged(level_energy, z, FIRST_EXCITED, alpha_fs)
    e2 = _averaged(level_energy, z, SECOND_EXCITED, alpha_fs)
    e10, e20 = e1 - e0, e2 - e0
    lam = hlike_lambda(z, alpha_fs, variant)
    X = x_fraction()
    strength = 1.5 * lam.l00 - 1.0  # hbar = m = 1
    x10 = math.sqrt(X * X * max(strength, 0.0) / e10)
    x20 = math.sqrt((1 - X * X) * max(strength, 0.0) / e20)
    return HLikeModel(z, alpha_fs, e10, e20, x10, x20, X, lam, variant)


def hlike_gamma(z: int, alpha_fs: float = ALPHA_FS, variant: str = "trk") -> float:
    model = hlike_model(z, alpha_fs, variant)
    return float(gamma3l_rel(model.point(), model.lam))


def hlike_gamma_nonrel(z: int) -> float:
    model = hlike_model(z, 0.0)
    return float(gamma3l_nonrel(model.point()))


CURVE_COLUMNS = ("z", "gamma_raw_ratio", "gamma_isolated_ratio", "gamma_isolated_ratio_alt_lambda",
                 "e10", "e_ratio", "x_fraction", "lambda00", "lambda11")


def _safe_gamma(z, alpha_fs, variant):
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ValidityWarning)
            return hlike_gamma(z, alpha_fs, variant)
    except DomainError:
        return math.nan


def gamma_ratio_curve(z_max: int = 100, alpha_fs: float = ALPHA_FS, normalization: str = "relativity-isolated",
                      variant: str = "trk") -> dict:
    """Rows for Z = 1..z_max as a dict of equal-length column lists.

    ``gamma_raw_ratio`` is gamma'(Z)/gamma'(1); ``gamma_isolated_ratio`` is
    gamma'(Z)/gamma(Z, alpha = 0).  The alternate column uses the other
    lambda variant.  Cells where lambda00 falls below 2/3 are NaN.
    ``normalization`` only selects which ratio the metadata flags primary.
    """
    if not 1 <= z_max <= 137:
        raise ValueError("z_max must lie in 1..137")
    if normalization not in ("raw", "relativity-isolated"):
        raise ValueError(f"unknown normalization {normalization!r}")
    alt = "literal" if variant == "trk" else "trk"
    if z_max * alpha_fs >= 0.5:
        warnings.warn(f"Z alpha >= 0.5 from Z = {math.ceil(0.5 / alpha_fs)}: outside the lowest-order regime",
                      ValidityWarning, stacklevel=2)
    g1 = _safe_gamma(1, alpha_fs, variant)
    cols = {name: [] for name in CURVE_COLUMNS}
    for z in range(1, z_max + 1):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ValidityWarning)
            model = hlike_model(z, alpha_fs, variant)
        g = _safe_gamma(z, alpha_fs, variant)
        g0 = _safe_gamma(z, 0.0, variant)
        cols["z"].append(z)
        cols["gamma_raw_ratio"].append(g / g1)
        cols["gamma_isolated_ratio"].append(g / g0)
        cols["gamma_isolated_ratio_alt_lambda"].append(_safe_gamma(z, alpha_fs, alt) / g0)
        cols["e10"].append(model.e10)
        cols["e_ratio"].append(model.E)
        cols["x_fraction"].append(model.X)
        cols["lambda00"].append(model.lam.l00)
        cols["lambda11"].append(model.lam.l11)
    return cols
