import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nlolim.io import dumps, spectrum_from_dict, spectrum_to_dict
from nlolim.spectral import Spectrum, alpha_sos, barred_moment, beta_sos, coefficients, gamma_sos


def two_level(x01=1.0, x11=0.0, e10=1.0):
    return Spectrum([0.0, e10], [[0.0, x01], [x01, x11]])


def test_barred_moment():
    s = Spectrum([0, 1, 2], [[0.5, 0.1, 0.0], [0.1, 2.0, 0.3], [0.0, 0.3, -1.0]])
    assert barred_moment(s, 0, 0) == 0.0
    assert barred_moment(s, 1, 1) == 1.5
    assert barred_moment(s, 1, 2) == 0.3
    with pytest.raises(IndexError):
        barred_moment(s, 3, 0)


def test_two_level_values():
    assert alpha_sos(two_level()) == 2.0
    assert beta_sos(two_level(x11=1.0)) == 3.0
    assert gamma_sos(two_level()) == -4.0


def test_dark_spectrum_gives_zero_response():
    s = Spectrum([0, 1, 3], [[0, 0, 0], [0, 1, 0.4], [0, 0.4, -2]])
    assert coefficients(s) == (coefficients(s).__class__(0.0, 0.0, 0.0))


@pytest.mark.parametrize("bad", [
    dict(energies=[0.0], moments=[[0.0]]),
    dict(energies=[0.1, 1.0], moments=[[0, 1], [1, 0]]),
    dict(energies=[0, 2, 1], moments=np.zeros((3, 3))),
    dict(energies=[0, 1], moments=[[0, 1], [0.5, 0]]),
])
def test_invalid_spectra(bad):
    with pytest.raises(ValueError):
        Spectrum(**bad)


def test_spectrum_is_immutable():
    s = two_level()
    with pytest.raises(ValueError):
        s.moments[0, 1] = 3.0


def test_symmetric_potential_has_no_beta(ho_spectrum):
    assert abs(beta_sos(ho_spectrum)) < 1e-8


def test_json_round_trip_is_exact(ho_spectrum):
    doc = json.loads(dumps(spectrum_to_dict(ho_spectrum)))
    assert doc["schema"] == "nlolim/1"
    back, lam, lset = spectrum_from_dict(doc)
    assert lam is None and lset is None
    np.testing.assert_array_equal(back.moments, ho_spectrum.moments)
    np.testing.assert_array_equal(back.energies, ho_spectrum.energies)


@st.composite
def spectra(draw, max_levels=5):
    n = draw(st.integers(2, max_levels))
    gaps = draw(st.lists(st.floats(0.1, 5.0), min_size=n - 1, max_size=n - 1))
    e = np.concatenate([[0.0], np.cumsum(gaps)])
    vals = draw(st.lists(st.floats(-2.0, 2.0).filter(lambda v: v == 0 or abs(v) > 1e-6), min_size=n * n, max_size=n * n))
    a = np.array(vals).reshape(n, n)
    return Spectrum(e, np.triu(a) + np.triu(a, 1).T)


def _close(a, b, rel):
    return abs(a - b) <= rel * max(abs(a), abs(b), 1e-300) + 1e-13


@settings(max_examples=60, deadline=None)
@given(spectra(), st.floats(-5, 5))
def test_translation_invariance(s, d):
    t = s.shifted(d)
    for f in (alpha_sos, beta_sos, gamma_sos):
        assert _close(f(t), f(s), 1e-12)


@settings(max_examples=60, deadline=None)
@given(spectra(), st.floats(0.25, 4.0), st.floats(0.25, 4.0))
def test_moment_and_energy_scaling(s, k, t):
    xs = Spectrum(s.energies, s.moments * k)
    assert _close(alpha_sos(xs), k**2 * alpha_sos(s), 1e-12)
    assert _close(beta_sos(xs), k**3 * beta_sos(s), 1e-12)
    assert _close(gamma_sos(xs), k**4 * gamma_sos(s), 1e-12)
    es = Spectrum(s.energies * t, s.moments)
    assert _close(alpha_sos(es), alpha_sos(s) / t, 1e-12)
    assert _close(beta_sos(es), beta_sos(s) / t**2, 1e-12)
    assert _close(gamma_sos(es), gamma_sos(s) / t**3, 1e-12)


@settings(max_examples=60, deadline=None)
@given(spectra())
def test_alpha_nonnegative_and_monotone_in_truncation(s):
    a = alpha_sos(s)
    assert a >= 0
    assert (a == 0) == bool(np.all(s.moments[0, 1:] == 0))
    for n in range(2, s.n_levels):
        sub = Spectrum(s.energies[:n], s.moments[:n, :n])
        assert alpha_sos(sub) <= a + 1e-15
