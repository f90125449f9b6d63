"""Closed-form three-level ansatz with relativistically corrected sum rules.

Reduced parameters: ``X = |x10| / |x10_max|`` and ``E = E10 / E20``.  Every
closed form below is coded exactly as published, including the ones that
disagree with each other; :func:`consistency_report` measures those
disagreements against the sum-over-states engine instead of patching them.

Functions accept numpy arrays in the point/lambda fields and broadcast.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from nlolim.spectral import Spectrum, alpha_sos, beta_sos, gamma_sos
from nlolim.sumrules import LambdaSet

X_PEAK = 3.0 ** -0.25
_ROUNDOFF = 1e-14


class DomainError(ValueError):
    pass


class SingularPointError(ValueError):
    pass


@dataclass(frozen=True)
class ThreeLevelPoint:
    X: float
    E: float
    E10: float = 1.0

    def __post_init__(self):
        X, E = np.asarray(self.X), np.asarray(self.E)
        if np.any((X < 0) | (X > 1)):
            raise ValueError("X must lie in [0, 1]")
        if np.any((E < 0) | (E > 1)):
            raise ValueError("E must lie in [0, 1]")
        if np.any(np.asarray(self.E10) <= 0):
            raise ValueError("E10 must be positive")


@dataclass(frozen=True)
class LimitReport:
    value: float
    intrinsic: float
    normalizer_family: str


def _root(arg, what: str):
    arg = np.asarray(arg, dtype=float)
    # exact boundary values like 1.5*(2/3) - 1 land a few ulp below zero
    arg = np.where((arg < 0) & (arg > -_ROUNDOFF), 0.0, arg)
    if np.any(arg < 0):
        raise DomainError(what)
    r = np.sqrt(arg)
    return float(r) if r.ndim == 0 else r


def h_lambda(l00):
    return _root(1.5 * np.asarray(l00, dtype=float) - 1.0,
                 f"H_lambda needs l00 >= 2/3, got l00={l00}")


def g_lambda(X, l00, l11):
    X = np.asarray(X, dtype=float)
    arg = X**2 * (1.5 * np.asarray(l00) - 1.0) + 1.5 * np.asarray(l11) - 1.0
    return _root(arg, f"G_lambda argument negative for X={X}, l00={l00}, l11={l11}")


def _unit_moment(E10, m, hbar):
    return hbar / np.sqrt(m * E10)


def _unit_alpha(E10, m, e, hbar):
    return e**2 * hbar**2 / (m * E10**2)


def _unit_beta(E10, m, e, hbar):
    return e**3 * hbar**3 / np.sqrt(m**3 * E10**7)


def _unit_gamma(E10, m, e, hbar):
    return e**4 * hbar**4 / (m**2 * E10**5)


def ansatz_moments(p: ThreeLevelPoint, lam: LambdaSet, m: float = 1.0,
                   hbar: float = 1.0, charge: float = 1.0) -> Spectrum:
    """Three-level spectrum whose moments solve the four corrected sum rules.

    Off-diagonal moments are taken positive and x00 = 0.  X and E must be
    strictly inside (0, 1); the edges belong to the dedicated limit
    functions (gamma_prime_00 and friends).
    """
    X, E, E10 = float(p.X), float(p.E), float(p.E10)
    if not (0 < X < 1 and 0 < E < 1):
        raise SingularPointError(
            f"(X, E) = ({X}, {E}) is on the boundary where the moment formulas are"
            " singular; use beta_prime_at_peak / gamma_prime_00 / gamma_prime_10 /"
            " gamma_prime_X1 instead"
        )
    h = h_lambda(lam.l00)
    g = g_lambda(X, lam.l00, lam.l11)
    if h == 0:
        raise SingularPointError("l00 = 2/3 leaves no oscillator strength (H_lambda = 0)")
    u = _unit_moment(E10, m, hbar)
    sx = math.sqrt(1 - X * X)
    se = math.sqrt(1 - E)
    x10 = u * X * h
    x12 = u * math.sqrt(E / (1 - E)) * g
    x11 = u * ((E - 2) / se * sx / X * g + 3 * lam.l10 / (2 * X * h))
    x22 = u * ((1 - 2 * E) / se * X / sx * g + 3 * math.sqrt(E) * lam.l20 / (2 * sx * h))
    x20 = u * math.sqrt(E) * sx * h
    moments = np.array([
        [0.0, x10, x20],
        [x10, x11, x12],
        [x20, x12, x22],
    ])
    return Spectrum([0.0, E10, E10 / E], moments, charge=charge, mass=m)


def constructed_rule_residuals(s: Spectrum, lam: LambdaSet, hbar: float = 1.0) -> dict:
    """Residuals of the four sum rules the ansatz moments are solved from.

    These are the rules in the form the closed-form derivation writes them:
    the (1,0) and (2,0) left sides are twice the general TRK left side.
    """
    x = s.moments
    xb = s.barred()
    e10, e20 = s.energies[1], s.energies[2]
    e21 = e20 - e10
    k = hbar**2 / s.mass
    return {
        (0, 0): math.fsum([x[1, 0] ** 2 * e10, x[2, 0] ** 2 * e20, -k * (1.5 * lam.l00 - 1)]),
        (1, 1): math.fsum([x[1, 2] ** 2 * e21, -x[1, 0] ** 2 * e10, -k * (1.5 * lam.l11 - 1)]),
        (1, 0): math.fsum([x[1, 0] * xb[1, 1] * e10, x[1, 2] * x[2, 0] * (e21 + e20),
                           -1.5 * k * lam.l10]),
        (2, 0): math.fsum([x[2, 0] * xb[2, 2] * e20, x[1, 0] * x[1, 2] * (e10 - e21),
                           -1.5 * k * lam.l20]),
    }


# relativistically corrected closed forms ------------------------------------

def alpha3l_rel(p: ThreeLevelPoint, lam: LambdaSet, m=1.0, e=1.0, hbar=1.0):
    X, E = np.asarray(p.X), np.asarray(p.E)
    h = h_lambda(lam.l00)
    return 2 * _unit_alpha(p.E10, m, e, hbar) * (X**2 + E**2 * (1 - X**2)) * h**2


def beta3l_rel(p: ThreeLevelPoint, lam: LambdaSet, m=1.0, e=1.0, hbar=1.0):
    X, E = np.asarray(p.X, dtype=float), np.asarray(p.E, dtype=float)
    h = h_lambda(lam.l00)
    g = g_lambda(X, lam.l00, lam.l11)
    sx = np.sqrt(1 - X**2)
    bracket = (sx * X * (1 - E) ** 1.5 * (1 + 1.5 * E + E**2) * h * g
               - 3 * X * lam.l10
               - 3 * sx * E**3.5 * lam.l20)
    return 6 * _unit_beta(p.E10, m, e, hbar) * h * bracket


def gamma3l_rel(p: ThreeLevelPoint, lam: LambdaSet, m=1.0, e=1.0, hbar=1.0,
                juxtaposition: str = "sum"):
    """Corrected three-level gamma as published.

    One bracket prints ``4X^2E^5 (1-4X^2)E^3`` with no operator in between.
    ``juxtaposition="sum"`` (default) reads it as two added terms, matching
    the neighbouring brackets; ``"product"`` multiplies them.
    """
    X, E = np.asarray(p.X, dtype=float), np.asarray(p.E, dtype=float)
    l00, l11, l10, l20 = lam.l00, lam.l11, lam.l10, lam.l20
    h = h_lambda(l00)
    g = g_lambda(X, l00, l11)
    X2, X4 = X**2, X**4
    E2, E3, E5 = E**2, E**3, E**5
    if juxtaposition == "sum":
        odd = 4 * X2 * E5 + (1 - 4 * X2) * E3
    elif juxtaposition == "product":
        odd = 4 * X2 * E5 * (1 - 4 * X2) * E3
    else:
        raise ValueError(f"unknown juxtaposition reading {juxtaposition!r}")
    t1 = 4 * (4 - (1 + 2 * X2 + 5 * X4) * E5 - (1 - 2 * X2 - 5 * X4) * E3
              - (3 - 5 * X4) * E2 - 5 * X4)
    t2 = -9 * ((1 - 2 * X2 + 5 * X4) * E5 + (2 * X2 - 5 * X4) * E3
               + (4 * X2 - 5 * X4) * E2 + 5 * X4 - 4 * X2) * l00**2
    t3 = -6 * (4 - 4 * X2 + (4 * X2 - 3) * E2 + (4 * X2 - 1) * E3 - 4 * X2 * E5) * l11
    t4 = 6 * ((2 + 10 * X4) * E5 + (1 - 10 * X4) * E3 + (3 + 4 * X2 - 10 * X4) * E2
              + 10 * X4 - 4 * X2 - 4) * l00
    t5 = -9 * (odd + (3 - 4 * X2) * E2 + 4 * X2 - 4) * l00 * l11
    t6 = 9 * (E5 * l20**2 + l10**2)
    t7 = -12 * h * g * (l10 * (2 + E) * np.sqrt(1 - E) * np.sqrt(1 - X2)
                        - l20 * X * np.sqrt(E * (1 - E)) * (E3 + 2 * E**4))
    return _unit_gamma(p.E10, m, e, hbar) * (t1 + t2 + t3 + t4 + t5 + t6 + t7)


# non-relativistic closed forms ------------------------------------------------

def alpha3l_nonrel(p: ThreeLevelPoint, m=1.0, e=1.0, hbar=1.0):
    X, E = np.asarray(p.X), np.asarray(p.E)
    return _unit_alpha(p.E10, m, e, hbar) * (X**2 + E**2 * (1 - X**2))


def beta3l_nonrel(p: ThreeLevelPoint, m=1.0, e=1.0, hbar=1.0):
    X, E = np.asarray(p.X, dtype=float), np.asarray(p.E, dtype=float)
    pref = 3 * e**3 * hbar**3 / (2 * np.sqrt(2 * m**3 * p.E10**7))
    return pref * X * np.sqrt(1 - X**4) * (1 - E) ** 1.5 * (1 + 1.5 * E + E**2)


def gamma3l_nonrel(p: ThreeLevelPoint, m=1.0, e=1.0, hbar=1.0):
    X, E = np.asarray(p.X, dtype=float), np.asarray(p.E, dtype=float)
    body = (4 - 2 * (E**2 - 1) * E**3 * X**2
            - 5 * (E - 1) ** 2 * (E + 1) * (E**2 + E + 1) * X**4
            - (E**3 + E + 3) * E**2)
    return _unit_gamma(p.E10, m, e, hbar) * body


# limits -----------------------------------------------------------------------

def beta_limit(E10=1.0, m=1.0, e=1.0, hbar=1.0) -> LimitReport:
    v = 3**0.25 * _unit_beta(E10, m, e, hbar)
    return LimitReport(float(v), 1.0, "beta_max closed form (3^(1/4) e^3 hbar^3 / sqrt(m^3 E10^7))")


def gamma_max_limit(E10=1.0, m=1.0, e=1.0, hbar=1.0) -> LimitReport:
    v = 4 * _unit_gamma(E10, m, e, hbar)
    return LimitReport(float(v), 1.0, "gamma_max closed form (4 e^4 hbar^4 / m^2 E10^5)")


def gamma_min_limit(E10=1.0, m=1.0, e=1.0, hbar=1.0) -> LimitReport:
    v = -_unit_gamma(E10, m, e, hbar)
    return LimitReport(float(v), -1.0, "gamma_min closed form (-e^4 hbar^4 / m^2 E10^5)")


def _beta_peak_raw(h, l00, l11, l10):
    with np.errstate(invalid="ignore"):
        return (2 / 3**0.25) * h * (math.sqrt(6) * h * np.sqrt(1.5 * l00 + 1.5 * l11 - 1) - 9 * l10)


def beta_prime_at_peak(lam: LambdaSet, E10=1.0, m=1.0, e=1.0, hbar=1.0):
    """Corrected beta at X = 3^(-1/4), E = 0."""
    h = h_lambda(lam.l00)
    h_lambda(lam.l11)
    return _unit_beta(E10, m, e, hbar) * _beta_peak_raw(h, lam.l00, lam.l11, lam.l10)


def _gamma00_raw(l00, l11, l10):
    with np.errstate(invalid="ignore"):
        return (16 + 9 * l10 - 24 * l11 + 3 * l00 * (12 * l11 - 8)
                - 12 * l10 * np.sqrt((3 * l00 - 2) * (3 * l11 - 2)))


def _gamma10_raw(l00, l10):
    return 12 * l00 - 9 * l00**2 + 9 * l10**2 - 4


def gamma_prime_00(lam: LambdaSet, E10=1.0, m=1.0, e=1.0, hbar=1.0):
    """Corrected gamma at X = 0, E = 0 (the non-relativistic maximizer)."""
    h_lambda(lam.l00)
    h_lambda(lam.l11)
    return _unit_gamma(E10, m, e, hbar) * _gamma00_raw(lam.l00, lam.l11, lam.l10)


def gamma_prime_10(lam: LambdaSet, E10=1.0, m=1.0, e=1.0, hbar=1.0):
    """Corrected gamma at X = 1, E = 0."""
    h_lambda(lam.l00)
    return _unit_gamma(E10, m, e, hbar) * _gamma10_raw(lam.l00, lam.l10)


def gamma_prime_X1(lam: LambdaSet, E10=1.0, m=1.0, e=1.0, hbar=1.0):
    """Corrected gamma at E = 1 (independent of X)."""
    h_lambda(lam.l00)
    return _unit_gamma(E10, m, e, hbar) * (_gamma10_raw(lam.l00, lam.l10) + 9 * lam.l20**2)


_PUBLISHED_NORMALIZERS = {
    "beta": lambda E10, m, e, hbar: beta_limit(E10, m, e, hbar).value,
    "gamma-upper": lambda E10, m, e, hbar: gamma_max_limit(E10, m, e, hbar).value,
    "gamma-lower": lambda E10, m, e, hbar: abs(gamma_min_limit(E10, m, e, hbar).value),
}

_FAMILY_NORMALIZERS = {
    "beta": lambda E10, m, e, hbar: beta_prime_at_peak(LambdaSet(), E10, m, e, hbar),
    "gamma-upper": lambda E10, m, e, hbar: gamma_prime_00(LambdaSet(), E10, m, e, hbar),
    "gamma-lower": lambda E10, m, e, hbar: abs(gamma_prime_10(LambdaSet(), E10, m, e, hbar)),
}


def normalizer(which: str, E10=1.0, m=1.0, e=1.0, hbar=1.0, mode: str = "published") -> float:
    """Denominator for intrinsic values.

    ``mode="published"`` uses the published limits; ``mode="family"`` uses the
    same limit formula evaluated at lambda = identity, so the
    non-relativistic maximizer maps to exactly +-1 whatever overall constant
    that formula carries.
    """
    table = {"published": _PUBLISHED_NORMALIZERS, "family": _FAMILY_NORMALIZERS}.get(mode)
    if table is None:
        raise ValueError(f"unknown normalization {mode!r}")
    if which not in table:
        raise ValueError(f"unknown intrinsic family {which!r}")
    d = float(table[which](E10, m, e, hbar))
    if d == 0:
        raise ZeroDivisionError("normalizer vanished")
    return d


def intrinsic(value, which: str, E10=1.0, m=1.0, e=1.0, hbar=1.0, mode: str = "published"):
    return value / normalizer(which, E10, m, e, hbar, mode)


# consistency ------------------------------------------------------------------

@dataclass
class ConsistencyReport:
    samples: int
    seed: int
    alpha_rel_vs_nonrel: float
    alpha_sos_vs_nonrel: float
    beta_ratio_rel_over_nonrel: float
    beta_ratio_spread: float
    beta_ratio_sos_over_rel: float
    beta_ratio_sos_spread: float
    gamma_rel_vs_nonrel: dict
    gamma_rel_vs_sos: dict
    gamma_nonrel_vs_sos: float
    corners: list = field(default_factory=list)
    general: dict = field(default_factory=dict)
    verdict: str = ""

    def text(self) -> str:
        f = "{:.12e}".format
        lines = [
            "# three-level closed-form consistency (lambda = identity)",
            f"schema nlolim/1",
            f"samples {self.samples}",
            f"seed {self.seed}",
            "range X,E in (0.01, 0.99)",
            f"alpha  max|rel - nonrel|/|nonrel|            {f(self.alpha_rel_vs_nonrel)}",
            f"alpha  max|sos - nonrel|/|nonrel|            {f(self.alpha_sos_vs_nonrel)}",
            f"beta   ratio rel/nonrel (mean)               {f(self.beta_ratio_rel_over_nonrel)}",
            f"beta   ratio rel/nonrel max deviation        {f(self.beta_ratio_spread)}",
            f"beta   ratio sos/rel (mean)                  {f(self.beta_ratio_sos_over_rel)}",
            f"beta   ratio sos/rel max deviation           {f(self.beta_ratio_sos_spread)}",
        ]
        for reading in sorted(self.gamma_rel_vs_nonrel):
            lines.append(f"gamma  max|rel[{reading}] - nonrel|/max(1,|nonrel|) "
                         f"{f(self.gamma_rel_vs_nonrel[reading])}")
            lines.append(f"gamma  max|rel[{reading}] - sos|/max(1,|sos|)       "
                         f"{f(self.gamma_rel_vs_sos[reading])}")
        lines.append(f"gamma  max|nonrel - sos|/max(1,|sos|)         {f(self.gamma_nonrel_vs_sos)}")
        lines.append("corner checks (units e^4 hbar^4 / m^2 E10^5)")
        for name, rel, nonrel, expected in self.corners:
            lines.append(f"  {name:<14} rel {f(rel)}  nonrel {f(nonrel)}  published {f(expected)}")
        if self.general:
            lines.append("general lambda: l00,l11 in (0.7, 1.3), l10,l20 in (0, 0.2)")
            for key in sorted(self.general):
                lines.append(f"  {key:<44} {f(self.general[key])}")
        lines.append(f"verdict: {self.verdict}")
        return "\n".join(lines) + "\n"


def corner_values(juxtaposition: str = "sum") -> list:
    """(name, corrected, non-relativistic, published) at the three gamma corners."""
    ident = LambdaSet()
    out = []
    for name, X, E, published in (("X=0,E=0", 0.0, 0.0, 4.0),
                                  ("X=1,E=0", 1.0, 0.0, -1.0),
                                  ("X=0.5,E=1", 0.5, 1.0, -1.0)):
        pt = ThreeLevelPoint(X, E)
        out.append((name, float(gamma3l_rel(pt, ident, juxtaposition=juxtaposition)),
                    float(gamma3l_nonrel(pt)), published))
    return out


def _rel_dev(a, b, floor=0.0):
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), floor)))


def consistency_report(samples: int = 1000, seed: int = 0) -> ConsistencyReport:
    rng = np.random.default_rng(seed)
    X = rng.uniform(0.01, 0.99, samples)
    E = rng.uniform(0.01, 0.99, samples)
    ident = LambdaSet()
    pt = ThreeLevelPoint(X, E)

    a_rel, a_non = alpha3l_rel(pt, ident), alpha3l_nonrel(pt)
    b_rel, b_non = beta3l_rel(pt, ident), beta3l_nonrel(pt)
    g_non = gamma3l_nonrel(pt)
    g_rel = {r: gamma3l_rel(pt, ident, juxtaposition=r) for r in ("sum", "product")}

    a_sos = np.empty(samples)
    b_sos = np.empty(samples)
    g_sos = np.empty(samples)
    for i in range(samples):
        s = ansatz_moments(ThreeLevelPoint(X[i], E[i]), ident)
        a_sos[i], b_sos[i], g_sos[i] = alpha_sos(s), beta_sos(s), gamma_sos(s)

    ratio = b_rel / b_non
    r_mean = float(np.mean(ratio))
    sos_ratio = b_sos / b_rel
    s_mean = float(np.mean(sos_ratio))
    rep = ConsistencyReport(
        samples=samples,
        seed=seed,
        alpha_rel_vs_nonrel=_rel_dev(a_rel, a_non),
        alpha_sos_vs_nonrel=_rel_dev(a_sos, a_non),
        beta_ratio_rel_over_nonrel=r_mean,
        beta_ratio_spread=float(np.max(np.abs(ratio - r_mean))),
        beta_ratio_sos_over_rel=s_mean,
        beta_ratio_sos_spread=float(np.max(np.abs(sos_ratio - s_mean))),
        gamma_rel_vs_nonrel={r: _rel_dev(v, g_non, 1.0) for r, v in g_rel.items()},
        gamma_rel_vs_sos={r: _rel_dev(v, g_sos, 1.0) for r, v in g_rel.items()},
        gamma_nonrel_vs_sos=_rel_dev(g_non, g_sos, 1.0),
        corners=corner_values(),
        general=_general_lambda_checks(rng, samples),
    )
    rep.verdict = _verdict(rep)
    return rep


def _general_lambda_checks(rng, samples: int) -> dict:
    l00, l11 = rng.uniform(0.7, 1.3, (2, samples))
    l10, l20 = rng.uniform(0.0, 0.2, (2, samples))
    X = rng.uniform(0.01, 0.99, samples)
    E = rng.uniform(0.01, 0.99, samples)
    b_sos = np.empty(samples)
    g_sos = np.empty(samples)
    for i in range(samples):
        lam = LambdaSet(l00[i], l11[i], l10[i], l20[i])
        s = ansatz_moments(ThreeLevelPoint(X[i], E[i]), lam)
        b_sos[i], g_sos[i] = beta_sos(s), gamma_sos(s)
    lam = LambdaSet(l00, l11, l10, l20)
    pt = ThreeLevelPoint(X, E)
    b_rel = beta3l_rel(pt, lam)
    g_rel = gamma3l_rel(pt, lam)
    zero = np.zeros(samples)
    peak = beta3l_rel(ThreeLevelPoint(np.full(samples, X_PEAK), zero), lam)
    g00 = gamma3l_rel(ThreeLevelPoint(zero, zero), lam)
    g10 = gamma3l_rel(ThreeLevelPoint(zero + 1, zero), lam)
    gx1 = gamma3l_rel(ThreeLevelPoint(X, zero + 1), lam)
    return {
        "beta   max|rel + sos|/max(1,|sos|)": _rel_dev(b_rel, -b_sos, 1.0),
        "gamma  max|rel[sum] - sos|/max(1,|sos|)": _rel_dev(g_rel, g_sos, 1.0),
        "beta   max|peak formula - rel(X_peak,0)|": float(np.max(np.abs(
            beta_prime_at_peak(lam) - peak))),
        "beta   peak formula / rel(X_peak,0) at identity": float(
            beta_prime_at_peak(LambdaSet()) / beta3l_rel(ThreeLevelPoint(X_PEAK, 0.0), LambdaSet())),
        "gamma  max|gamma_prime_00 - rel(0,0)|": float(np.max(np.abs(gamma_prime_00(lam) - g00))),
        "gamma  max|gamma_prime_10 - rel(1,0)|": float(np.max(np.abs(gamma_prime_10(lam) - g10))),
        "gamma  max|gamma_prime_X1 - rel(X,1)|": float(np.max(np.abs(gamma_prime_X1(lam) - gx1))),
    }


def _verdict(rep: ConsistencyReport) -> str:
    tol = 1e-9
    parts = []
    for reading in ("sum", "product"):
        ok_non = rep.gamma_rel_vs_nonrel[reading] < tol
        ok_sos = rep.gamma_rel_vs_sos[reading] < tol
        parts.append(f"gamma corrected form [{reading} reading] "
                     f"{'matches' if ok_non else 'deviates from'} the non-relativistic form and "
                     f"{'matches' if ok_sos else 'deviates from'} sum-over-states")
    corners_ok = all(abs(r - e) <= 1e-10 * abs(e) and abs(n - e) <= 1e-10 * abs(e)
                     for _, r, n, e in rep.corners)
    parts.append("corner values " + ("reproduced" if corners_ok else "NOT reproduced"))
    parts.append(f"beta corrected/non-relativistic constant ratio {rep.beta_ratio_rel_over_nonrel:.10g}")
    return "; ".join(parts)
