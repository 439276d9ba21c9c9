import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from zloop.errors import ConvergenceGuard, DomainError, InvalidKilling, Uncertified
from zloop.heat_trace import orbital_integral_closed
from zloop.loop_measure import (
    SpectralParameter,
    class_mass,
    mass_by_quadratic_variation,
    total_essential_mass,
)
from zloop.selberg import log_zeta_sum
from zloop.spectrum import length_spectrum
from zloop.surfaces import cylinder
from zloop.transfer import fredholm_det


def time_quadrature(ell, m, kappa):
    f = lambda t: math.exp(-kappa * t) * orbital_integral_closed(t, ell, m) / t  # noqa: E731
    v1, _ = integrate.quad(f, 0, 1, epsabs=0, epsrel=1e-13, limit=200)
    v2, _ = integrate.quad(f, 1, np.inf, epsabs=0, epsrel=1e-13, limit=200)
    return v1 + v2


@pytest.mark.parametrize("ell, m, expected", [(1.0, 1, 1 / (math.e - 1)), (1.0, 2, 0.5 / (math.e ** 2 - 1))])
def test_class_mass_examples(ell, m, expected):
    assert class_mass(ell, m, 0.0) == pytest.approx(expected, rel=1e-14)
    assert time_quadrature(ell, m, 0.0) == pytest.approx(expected, rel=1e-8)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 5), st.integers(1, 5))
def test_class_mass_at_bottom_of_spectrum(ell, m):
    assert class_mass(ell, m, -0.25) == pytest.approx(1 / (2 * m * math.sinh(m * ell / 2)), rel=1e-12)


def test_spectral_parameter():
    p = SpectralParameter.from_kappa(2.0)
    assert p.s == pytest.approx(2.0)
    assert SpectralParameter.from_s(1.5).kappa == pytest.approx(0.75)
    with pytest.raises(InvalidKilling):
        SpectralParameter.from_kappa(-0.3)
    with pytest.raises(InvalidKilling):
        class_mass(1.0, 1, -0.3)
    with pytest.raises(DomainError):
        SpectralParameter(1.0, 3.0)


def test_total_mass_matches_log_zeta(cyl1_spec):
    mass = total_essential_mass(cyl1_spec, 0.0)
    z = log_zeta_sum(cyl1_spec, 1.0)
    assert abs(mass.value + z.log_value) < 1e-10
    assert mass.truncation_error == 0.0 and mass.certified


def test_total_mass_vanishes_for_long_cylinders():
    vals = [total_essential_mass(length_spectrum(cylinder(ell), 8 * ell), 0.5).value for ell in (1, 4, 16)]
    assert vals[0] > vals[1] > vals[2] and vals[2] < 2 * math.exp(-16 * 1.366)


def test_total_mass_matches_transfer_determinant(funnel, funnel_spec):
    mass = total_essential_mass(funnel_spec, 0.0)
    assert abs(mass.value + math.log(fredholm_det(funnel, 1.0).real)) < 1e-6
    assert mass.truncation_error < 1e-6


def test_guards(bolza_spec, funnel):
    with pytest.raises(Uncertified):
        total_essential_mass(bolza_spec, 2.0)
    with pytest.raises(ConvergenceGuard):
        total_essential_mass(bolza_spec, 0.0, allow_uncertified=True)
    short = length_spectrum(funnel, 24.0, max_word_length=5)
    with pytest.raises(Uncertified):
        total_essential_mass(short, 0.0)


def test_quadratic_variation_split(cyl1_spec):
    total = total_essential_mass(cyl1_spec, 0.0).value
    lo = mass_by_quadratic_variation(cyl1_spec, 0.0, 0.7, "below")
    hi = mass_by_quadratic_variation(cyl1_spec, 0.0, 0.7, "above")
    assert lo + hi == pytest.approx(total, abs=1e-8)


def test_quadratic_variation_small_varpi(cyl1_spec):
    total = total_essential_mass(cyl1_spec, 0.0).value
    ratios = [mass_by_quadratic_variation(cyl1_spec, 0.0, w, "below") / w for w in (0.1, 0.05, 0.025)]
    assert all(r < 1.0 for r in ratios)
    assert ratios[0] >= ratios[1] >= ratios[2]
    above = [mass_by_quadratic_variation(cyl1_spec, 0.0, w, "above") for w in (0.1, 0.05, 0.025)]
    assert above[0] <= above[1] <= above[2] <= total + 1e-12


def test_quadratic_variation_side_checked(cyl1_spec):
    with pytest.raises(DomainError):
        mass_by_quadratic_variation(cyl1_spec, 0.0, 1.0, "middle")


@pytest.mark.parametrize("ell, kappa", [(0.5, 0.0), (1.0, 2.0), (3.0, 0.3)])
def test_iterate_decay(ell, kappa):
    s = SpectralParameter.from_kappa(kappa).s
    ratio = [class_mass(ell, m, kappa) * m * math.exp(m * s * ell) for m in (10, 20)]
    assert abs(ratio[1] - 1) < abs(ratio[0] - 1) + 1e-15
    assert abs(ratio[1] - 1) < 2 * math.exp(-20 * ell)
