import pytest

from zloop.errors import SurfaceError
from zloop.selberg import zeta_euler
from zloop.spectrum import delta_estimate
from zloop.surfaces import funnel3
from zloop.transfer import collocation_system, convergence_table, find_delta, fredholm_det, real_zero_scan


def test_large_s(funnel):
    assert abs(fredholm_det(funnel, 30.0) - 1.0) < 1e-12


@pytest.mark.parametrize("s", [1.0, 1.5, 2.0])
def test_matches_euler_product(funnel, funnel_spec, s):
    assert abs(fredholm_det(funnel, s, 32).real - zeta_euler(funnel_spec, s).value) < 1e-6


@pytest.mark.parametrize("N", [24, 32])
def test_self_convergence(funnel, N):
    assert abs(fredholm_det(funnel, 1.0, N) - fredholm_det(funnel, 1.0, 2 * N)) < 1e-10


def test_real_for_real_s(funnel):
    assert abs(fredholm_det(funnel, 0.8).imag) < 1e-15


def test_complex_s_conjugate_symmetry(funnel):
    a = fredholm_det(funnel, complex(1.0, 3.0))
    b = fredholm_det(funnel, complex(1.0, -3.0))
    assert a == pytest.approx(b.conjugate(), abs=1e-12)


def test_delta_in_lower_half_and_consistent(funnel):
    d = find_delta(funnel)
    assert 0 < d < 0.5
    assert abs(d - delta_estimate(funnel)) < 1e-3


def test_delta_decreases_with_funnel_length():
    assert find_delta(funnel3(6.0)) < find_delta(funnel3(5.0))


def test_cylinder_rejected(cyl1):
    with pytest.raises(SurfaceError):
        find_delta(cyl1)


def test_zero_scan(funnel):
    d = find_delta(funnel)
    assert real_zero_scan(funnel, (d + 1e-3, 1.0)) == []
    zeros = real_zero_scan(funnel, (0.0, 1.0))
    assert any(abs(z - d) < 1e-10 for z in zeros)
    assert real_zero_scan(funnel, (0.0, 1.0), step=0.005) == pytest.approx(zeros, abs=1e-10)


def test_collocation_margin_positive(funnel):
    assert collocation_system(funnel, 16).margin > 0


def test_convergence_table(funnel):
    rows = convergence_table(funnel, 1.0, sizes=(8, 16, 32))
    assert rows[-1][2] == 0.0 and rows[0][2] > rows[1][2]


def test_collocation_error_decreases(funnel):
    rows = convergence_table(funnel, 0.7, sizes=(4, 6, 8, 10, 12, 64))
    errs = [r[2] for r in rows[:-1]]
    assert all(a > b for a, b in zip(errs, errs[1:]))
