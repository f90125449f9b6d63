import math
import warnings

import numpy as np
import pytest
from scipy.integrate import quad

from nlolim.eigensolver import GridSpec, PotentialSpec, solve_nonrel
from nlolim.hydrogenic import (
    ValidityWarning,
    fine_structure_shift,
    gamma_ratio_curve,
    hlike_gamma,
    hlike_lambda,
    hlike_model,
    hlike_p2,
    oscillator_strength_1s_np,
    x_fraction,
)
from nlolim.sumrules import lambda_matrix

R10 = lambda r: 2 * math.exp(-r)
R21 = lambda r: r * math.exp(-r / 2) / (2 * math.sqrt(6))
R31 = lambda r: 8 / (27 * math.sqrt(6)) * r * (1 - r / 6) * math.exp(-r / 3)


@pytest.mark.parametrize("N,R,dE", [(2, R21, 3 / 8), (3, R31, 4 / 9)])
def test_oscillator_strength_against_radial_quadrature(N, R, dE):
    radial, _ = quad(lambda r: R10(r) * R(r) * r**3, 0, np.inf)
    f = 2 / 3 * dE * radial**2
    assert oscillator_strength_1s_np(N) == pytest.approx(f, rel=1e-10)


def test_x_fraction():
    assert x_fraction() == pytest.approx(math.sqrt(0.41620 / (0.41620 + 0.07910)), rel=1e-4)


def dirac(z, N, j, alpha):
    k = j + 0.5
    d = k - math.sqrt(k * k - (z * alpha) ** 2)
    c = 1 / alpha
    return c * c * (1 / math.sqrt(1 + (z * alpha / (N - d)) ** 2) - 1)


@pytest.mark.parametrize("N,j", [(1, 0.5), (2, 0.5), (2, 1.5), (3, 1.5), (3, 2.5)])
def test_fine_structure_matches_dirac_expansion(N, j):
    alpha = 1 / 137.035999084
    exact = dirac(1, N, j, alpha) + 1 / (2 * N * N)
    assert fine_structure_shift(1, N - 1, j) == pytest.approx(exact, rel=1e-4)


def test_p2_fine_structure_term_is_minus_twice_the_level_shift():
    for z, n, j in ((1, 0, 0.5), (10, 1, 1.5), (30, 2, 2.5)):
        fs = hlike_p2(z, n, j) - hlike_p2(z, n, j, alpha_fs=0.0)
        assert fs == pytest.approx(-2 * fine_structure_shift(z, n, j), rel=1e-12)
    assert hlike_p2(3, 0, 0.5, alpha_fs=0.0) == 9.0
    with pytest.raises(ValueError):
        hlike_p2(1, 0, 1.0)


def test_nonrelativistic_scaling():
    model = hlike_model(1, 0.0)
    assert model.E == pytest.approx(27 / 32, rel=1e-15)
    g1 = hlike_gamma(1, 0.0)
    for z in (2, 7, 50, 100):
        assert hlike_gamma(z, 0.0) / g1 == pytest.approx(z**-10.0, rel=1e-10)


def test_relativistic_correction_is_second_order():
    g0 = hlike_gamma(10, 0.0)
    a = 1 / 137.035999084
    d1 = hlike_gamma(10, a) / g0 - 1
    d2 = hlike_gamma(10, a / 2) / g0 - 1
    assert d1 < 0
    assert d1 / d2 == pytest.approx(4.0, rel=1e-2)


def test_lambda_variants():
    t = hlike_lambda(5, variant="trk")
    lit = hlike_lambda(5, variant="literal")
    assert 1 - lit.l00 == pytest.approx(2 * (1 - t.l00), rel=1e-12)
    assert t.l10 == 0.0 and t.l20 == 0.0
    assert 1 - t.l00 == pytest.approx(25 / (2 * 137.035999084**2), rel=1e-3)
    with pytest.raises(ValueError):
        hlike_lambda(5, variant="other")


def test_validity_warning():
    with pytest.warns(ValidityWarning):
        hlike_lambda(70)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        hlike_lambda(60)


def test_curve_columns():
    with pytest.warns(ValidityWarning) as rec:
        cols = gamma_ratio_curve(100)
    assert len(rec) == 1
    assert cols["z"] == list(range(1, 101))
    assert cols["gamma_raw_ratio"][0] == 1.0
    alt = cols["gamma_isolated_ratio_alt_lambda"]
    assert all(math.isnan(v) for v in alt[76:])
    assert not any(math.isnan(v) for v in alt[:76])
    with pytest.warns(ValidityWarning):
        lit = gamma_ratio_curve(100, variant="literal")
    assert math.isnan(lit["gamma_isolated_ratio"][99])
    with pytest.raises(ValueError):
        gamma_ratio_curve(200)


def test_one_dimensional_soft_coulomb_is_same_order():
    es = solve_nonrel(PotentialSpec.soft_coulomb(1.0, 1.0), GridSpec(-60, 60, 4001), 3)
    one_d = 1 - lambda_matrix(es, 1, c=137.035999084)[0, 0]
    three_d = 1 - hlike_lambda(1).l00
    assert 0.1 < one_d / three_d < 10
