import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zloop.errors import ConvergenceGuard, DomainError
from zloop.heat_trace import (
    HeatTime,
    heat_kernel,
    heat_kernel_array,
    orbital_integral_closed,
    orbital_integral_quadrature,
    radial_integral,
    trace_E,
    trace_integral,
    zero_trace_corrections,
)
from zloop.loop_measure import total_essential_mass


def mp_heat_kernel(t, d):
    mpmath.mp.dps = 30
    t, d = mpmath.mpf(t), mpmath.mpf(d)
    f = lambda r: r * mpmath.exp(-(r * r - d * d) / (4 * t)) / mpmath.sqrt(mpmath.cosh(r) - mpmath.cosh(d)) if r > d else 0  # noqa: E731
    v = mpmath.quad(f, [d, d + mpmath.mpf("0.01"), d + 1, d + 5, d + 60 * mpmath.sqrt(t) + 20])
    return float(mpmath.sqrt(2) * (4 * mpmath.pi * t) ** -1.5 * mpmath.exp(-t / 4 - d * d / (4 * t)) * v)


def test_heat_time_positive():
    with pytest.raises(DomainError):
        HeatTime(0.0)
    with pytest.raises(DomainError):
        heat_kernel(-1.0, 0.0)


@pytest.mark.parametrize("t, d", [(0.1, 0.5), (1.0, 3.0), (10.0, 15.0), (1.0, 0.5)])
def test_heat_kernel_against_high_precision(t, d):
    assert heat_kernel(t, d) == pytest.approx(mp_heat_kernel(t, d), rel=1e-10)


@pytest.mark.parametrize("t", [0.01, 0.5, 3.0, 30.0])
def test_batch_kernel_agrees_with_scalar(t):
    d = np.array([0.0, 0.01, 0.5, 1.0, 3.0, 7.0, 15.0])
    scalar = np.array([heat_kernel(t, x) for x in d])
    np.testing.assert_allclose(heat_kernel_array(t, d), scalar, rtol=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 20), st.floats(0, 10), st.floats(0.01, 2))
def test_heat_kernel_positive_and_decreasing(t, d, step):
    a, b = heat_kernel(t, d), heat_kernel(t, d + step)
    assert a > b > 0


@pytest.mark.parametrize("t", [0.1, 1.0, 10.0])
def test_normalisation(t):
    assert abs(radial_integral(t) - 1.0) < 1e-8


def test_cosh_moment():
    assert abs(radial_integral(0.5, math.cosh) - math.e) < 1e-7


@pytest.mark.parametrize("t, ell, m", [(1.0, 1.0, 1), (1.0, 1.0, 2), (0.3, 0.7, 2), (3.0, 1.5, 1)])
def test_orbital_quadrature_matches_closed_form(t, ell, m):
    q = orbital_integral_quadrature(t, ell, m)
    assert q == pytest.approx(orbital_integral_closed(t, ell, m), rel=1e-6)


def test_orbital_quadrature_resolution_stable():
    a = orbital_integral_quadrature(1.0, 1.0, 1)
    b = orbital_integral_quadrature(1.0, 1.0, 1, resolution=2)
    assert abs(a - b) < 1e-8


def test_orbital_closed_form_vanishes_at_small_t():
    vals = [orbital_integral_closed(t, 1.0, 1) for t in (0.02, 0.01, 0.005)]
    assert vals[2] < vals[1] * 1e-5 < vals[0] * 1e-10


def test_trace_cylinder_series(cyl1_spec):
    ref = math.exp(-0.25) / (4 * math.sqrt(math.pi)) * 2 * sum(
        math.exp(-k * k / 4) / math.sinh(k / 2) for k in range(1, 80))
    pt = trace_E(cyl1_spec, 0.0, 1.0)
    assert pt.value == pytest.approx(ref, rel=1e-14)
    assert pt.tail_bound == 0.0


@pytest.mark.parametrize("t", [0.3, 1.0, 5.0])
def test_trace_killing_scaling(funnel_spec, t):
    a = trace_E(funnel_spec, 0.0, t)
    b = trace_E(funnel_spec, 1.3, t)
    assert b.value == pytest.approx(math.exp(-1.3 * t) * a.value, rel=1e-14)
    assert a.tail_bound >= 0


def test_trace_small_t(cyl1_spec):
    assert trace_E(cyl1_spec, 0.0, 0.01).value < 1e-10


def test_trace_integral_equals_mass(cyl1_spec, funnel_spec):
    for spec, kappa in ((cyl1_spec, 0.0), (cyl1_spec, 1.0), (funnel_spec, 0.5)):
        mass = total_essential_mass(spec, kappa).value
        assert trace_integral(spec, kappa) == pytest.approx(mass, rel=1e-6)


def test_trace_integral_monotone_in_kappa(cyl1_spec):
    assert trace_integral(cyl1_spec, 0.2) > trace_integral(cyl1_spec, 0.4)


def test_trace_integral_guard(bolza_spec):
    with pytest.raises(ConvergenceGuard):
        trace_integral(bolza_spec, 0.0, allow_uncertified=True)


@pytest.mark.parametrize("t", [0.1, 1.0, 10.0])
def test_zero_trace_scaling_and_sign(t):
    h0, hc = zero_trace_corrections(0.0, t)
    k0, kc = zero_trace_corrections(0.7, t)
    assert h0 > 0
    assert k0 == pytest.approx(math.exp(-0.7 * t) * h0, rel=1e-13)
    assert kc == pytest.approx(math.exp(-0.7 * t) * hc, rel=1e-13)


def test_h0_small_time_limit():
    h0, _ = zero_trace_corrections(0.0, 1e-3)
    assert h0 * 4 * math.pi * 1e-3 == pytest.approx(1.0, rel=1e-2)


@pytest.mark.parametrize("t", [0.1, 1.0])
def test_zero_trace_against_high_precision(t):
    mpmath.mp.dps = 25
    I = mpmath.quad(lambda u: mpmath.re(mpmath.digamma(1 + 1j * u)) * mpmath.exp(-t * u * u), [-mpmath.inf, 0, mpmath.inf])
    hc = mpmath.exp(-t / 4) * (-I / (2 * mpmath.pi) - mpmath.log(2) / mpmath.sqrt(4 * mpmath.pi * t) + 0.25)
    h0 = mpmath.exp(-t / 4) * (4 * mpmath.pi * t) ** -1.5 * mpmath.quad(
        lambda r: r * mpmath.exp(-r * r / (4 * t)) / mpmath.sinh(r / 2), [0, mpmath.inf])
    a, b = zero_trace_corrections(0.0, t)
    assert a == pytest.approx(float(h0), rel=1e-12)
    assert b == pytest.approx(float(hc), rel=1e-12)
