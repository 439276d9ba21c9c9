import math

import numpy as np
import pytest
from scipy.integrate import trapezoid
from hypothesis import given, settings
from hypothesis import strategies as st

from zloop.errors import DomainError, NotHyperbolic
from zloop.hyperbolic import (
    HPoint,
    MoebiusTransform,
    classify,
    hyp_dist,
    translation_length,
    word_matrix,
)

coord = st.floats(-5, 5)
height = st.floats(0.05, 5)
entry = st.floats(-3, 3)


def random_sl2(a, b, c):
    # (a, b; c, d) with d fixed by det = 1; resample when a is tiny
    if abs(a) < 0.1:
        a = 0.1 + abs(a)
    return MoebiusTransform(a, b, c, (1 + b * c) / a)


@pytest.mark.parametrize(
    "z, w, expected",
    [((0, 1), (0, 1), 0.0), ((0, 1), (0, 2), math.log(2)), ((0, 1), (1, 1), math.acosh(1.5))],
)
def test_distance_examples(z, w, expected):
    assert hyp_dist(HPoint(*z), HPoint(*w)) == pytest.approx(expected, abs=1e-15)


def test_distance_matches_arc_length_integral():
    # length of the geodesic arc from i to 1+i on the circle |z - 1/2| = sqrt(5)/2
    c, r = 0.5, math.sqrt(5) / 2
    t0, t1 = math.atan2(1, -0.5), math.atan2(1, 0.5)
    t = np.linspace(t1, t0, 200_001)
    y = r * np.sin(t)
    length = trapezoid(r / y, t)
    assert length == pytest.approx(math.acosh(1.5), rel=1e-9)


def test_hpoint_rejects_lower_half_plane():
    with pytest.raises(DomainError):
        HPoint(0.0, 0.0)


@settings(max_examples=200, deadline=None)
@given(coord, height, coord, height, entry, entry, entry)
def test_distance_symmetric_and_invariant(x1, y1, x2, y2, a, b, c):
    z, w = HPoint(x1, y1), HPoint(x2, y2)
    g = random_sl2(a, b, c)
    d = hyp_dist(z, w)
    assert d == pytest.approx(hyp_dist(w, z), abs=1e-12)
    assert hyp_dist(g(z), g(w)) == pytest.approx(d, rel=1e-8, abs=1e-10)


@settings(max_examples=100, deadline=None)
@given(coord, height, st.floats(0.05, 4))
def test_dilation_distance_formula(x, y, ell):
    z = HPoint(x, y)
    h = MoebiusTransform.dilation(ell)
    lhs = math.cosh(hyp_dist(z, h(z)))
    rhs = 1 + 2 * math.sinh(ell / 2) ** 2 * (1 + x * x / (y * y))
    assert lhs == pytest.approx(rhs, rel=1e-10)


@pytest.mark.parametrize(
    "m, expected",
    [
        (np.diag([math.exp(0.5), math.exp(-0.5)]), "hyperbolic"),
        ([[1, 1], [0, 1]], "parabolic"),
        ([[math.cos(0.3), math.sin(0.3)], [-math.sin(0.3), math.cos(0.3)]], "elliptic"),
        (np.eye(2), "identity"),
    ],
)
def test_classify(m, expected):
    assert classify(MoebiusTransform.from_matrix(m)) == expected


def test_sign_quotient_equality():
    g = MoebiusTransform(2.0, 1.0, 1.0, 1.0)
    assert g == MoebiusTransform(-2.0, -1.0, -1.0, -1.0)
    assert hash(g) == hash(MoebiusTransform(-2.0, -1.0, -1.0, -1.0))


def test_determinant_renormalised():
    g = MoebiusTransform(4.0, 2.0, 2.0, 2.0)  # det 4
    assert g.a * g.d - g.b * g.c == pytest.approx(1.0, abs=1e-12)


def test_translation_length_examples():
    assert translation_length(MoebiusTransform.dilation(1.0)) == pytest.approx(1.0, abs=1e-14)
    with pytest.raises(NotHyperbolic):
        translation_length(MoebiusTransform(1.0, 1.0, 0.0, 1.0))


@settings(max_examples=100, deadline=None)
@given(st.floats(0.1, 5), entry, entry, entry)
def test_translation_length_power_and_conjugation(ell, a, b, c):
    g = MoebiusTransform(math.cosh(ell / 2) + 0.3, 0.7, 0.2, 1.0)
    g = MoebiusTransform(g.a, g.b, g.c, (1 + g.b * g.c) / g.a)
    L = translation_length(g)
    assert translation_length(g @ g) == pytest.approx(2 * L, rel=1e-12)
    h = random_sl2(a, b, c)
    conj = h @ g @ h.inverse()
    assert translation_length(conj) == pytest.approx(L, rel=1e-9)


def test_translation_length_is_minimal_displacement():
    g = MoebiusTransform(2.0, 1.0, 1.0, 1.0)
    xs, ys = np.meshgrid(np.linspace(-3, 3, 301), np.geomspace(0.05, 5, 301))
    disp = min(hyp_dist(HPoint(x, y), g(HPoint(x, y))) for x, y in zip(xs.ravel(), ys.ravel()))
    L = translation_length(g)
    assert L <= disp < L + 1e-3


def test_fixed_points_are_fixed():
    g = MoebiusTransform(2.0, 1.0, 1.0, 1.0)
    rep, att = g.fixed_points()
    assert g(rep) == pytest.approx(rep)
    assert g(att) == pytest.approx(att)
    assert abs(g.derivative(att)) < 1 < abs(g.derivative(rep))


def test_word_matrix_keeps_unit_determinant():
    gens = np.array([MoebiusTransform(2.0, 1.0, 1.0, 1.0).matrix, MoebiusTransform(1.0, 0.3, 0.0, 1.0).matrix])
    m = word_matrix([0, 1] * 5, gens)
    assert np.linalg.det(m) == pytest.approx(1.0, rel=1e-9)
