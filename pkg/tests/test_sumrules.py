import math
import warnings

import numpy as np
import pytest

from nlolim.eigensolver import PotentialSpec, solve_nonrel, solve_rel, spectrum_from_eigensystem
from nlolim.spectral import Spectrum
from nlolim.sumrules import (
    ForbiddenRegionWarning,
    LambdaMatrix,
    LambdaSet,
    lambda_direct,
    lambda_from_p2,
    lambda_matrix,
    trk_lhs,
    trk_residual,
    trk_rhs_rel,
)

C = 137.035999


def analytic_ho(n):
    x = np.zeros((n, n))
    for k in range(n - 1):
        x[k, k + 1] = x[k + 1, k] = math.sqrt((k + 1) / 2)
    return Spectrum(np.arange(n, dtype=float), x)


def test_trk_lhs_small_cases(ho_spectrum):
    assert math.isclose(trk_lhs(analytic_ho(8), 0, 0, 2), 0.5, rel_tol=1e-15)
    s = Spectrum([0, 1.5, 4], [[0.7, 0.3, 0.2], [0.3, 0.1, 0.4], [0.2, 0.4, 0.0]])
    assert math.isclose(trk_lhs(s, 0, 1, 1), -0.7 * 0.3 * 1.5 / 2)
    with pytest.raises(IndexError):
        trk_lhs(s, 0, 0, 4)


def test_trk_exact_for_analytic_oscillator():
    s = analytic_ho(40)
    I = LambdaMatrix.identity(40)
    assert abs(trk_residual(s, I, 0, 0, 40)) < 1e-10
    assert abs(trk_residual(s, I, 3, 3, 40)) < 1e-10
    assert abs(trk_residual(s, I, 2, 0, 40)) < 1e-10


def test_trk_rhs_rel():
    I = LambdaMatrix.identity(3)
    assert trk_rhs_rel(I, 0, 0) == 0.5
    v = np.eye(2)
    v[0, 0] = 0.9
    assert math.isclose(trk_rhs_rel(LambdaMatrix(v), 0, 0), 0.35)
    v = np.eye(2)
    v[1, 0] = v[0, 1] = 0.02
    assert math.isclose(trk_rhs_rel(LambdaMatrix(v), 1, 0), 0.03)


def test_lambda_from_p2():
    p2 = np.array([[0.5, 0.0], [0.0, 1.5]])
    lam = lambda_from_p2(p2, 1e12)
    assert np.max(np.abs(lam.values - np.eye(2))) < 1e-20
    lam = lambda_from_p2(p2, C)
    assert math.isclose(1 - lam[0, 0], 0.5 / (2 * C**2), rel_tol=1e-9)
    assert math.isclose(1 - lam[0, 0], 1.3313e-5, rel_tol=1e-4)
    assert lam[1, 0] == 0.0
    with pytest.raises(ValueError):
        lambda_from_p2([[1.0, 0.1], [0.0, 1.0]], C)


def test_lambda_identity_limit(ho_system):
    lam = lambda_matrix(ho_system, 10, c=1e9)
    assert np.max(np.abs(lam.values - np.eye(10))) <= 1e-15


def test_lambda_direct_against_p2_route(ho_system):
    es = solve_rel(ho_system.potential, ho_system.grid, 6, c=C)
    ref = lambda_matrix(es)
    bound = max(1e-8, 10 * es.grid.dx**2)
    for k in range(6):
        for n in range(6):
            assert abs(lambda_direct(es, None, n, k, C) - ref[k, n]) <= bound
    # parity
    assert abs(lambda_direct(es, None, 0, 1, C)) < 1e-12


def test_lambda_direct_nonrel_limit_is_overlap(ho_system):
    assert math.isclose(lambda_direct(ho_system, None, 2, 2, math.inf), 1.0, abs_tol=1e-12)
    assert abs(lambda_direct(ho_system, None, 0, 2, 1e15)) < 1e-12


def test_lambda_diagonal_damping_and_symmetry(ho_system, box_system):
    for es in (ho_system, box_system):
        lam = lambda_matrix(es, 8, c=C)
        assert np.all(np.diag(lam.values) < 1)
        np.testing.assert_array_equal(lam.values, lam.values.T)


def test_forbidden_region_is_reported():
    # flat-bottomed box with mc^2/2 below the kinetic energy of the excited state:
    # the square-root argument is negative wherever V = 0
    es = solve_nonrel(PotentialSpec.box(np.pi), None, 3)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        value, frac = lambda_direct(es, None, 2, 2, 2.5, full_output=True)
    assert frac > 1e-6
    assert any(issubclass(w.category, ForbiddenRegionWarning) for w in caught)
    assert value < 1e-12
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        ok, clean = lambda_direct(es, None, 0, 0, 2.5, full_output=True)
    assert clean == 0.0 and math.isclose(ok, math.sqrt(1 - 2 * es.eigenvalues[0] / 2.5**2), rel_tol=1e-9)


def test_box_truncation_study(box_system):
    s = spectrum_from_eigensystem(box_system)
    I = LambdaMatrix.identity(s.n_levels)
    res = [trk_residual(s, I, 0, 0, L) for L in (2, 3, 10, 50, 200)]
    assert all(r < 0 for r in res)
    mags = [abs(r) for r in res[1:]]
    assert all(a > b for a, b in zip(mags, mags[1:]))
    assert abs(trk_lhs(s, 0, 0, 200) - 0.5) < 1e-3


def test_lambda_set_matrix():
    ls = LambdaSet(0.9, 0.95, 0.02, 0.01)
    m = ls.to_matrix()
    assert m[1, 0] == 0.02 and m[0, 2] == 0.01 and m[0, 0] == 0.9
    assert ls.to_matrix(offdiag_scale=0.5)[1, 0] == 0.01
