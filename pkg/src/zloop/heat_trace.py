"""Heat kernel of the hyperbolic plane, orbital integrals and the renormalised heat trace.

Heat kernel at distance d (speed-2 Brownian motion, generator the Laplacian):

    p(t, d) = sqrt(2) (4 pi t)^{-3/2} e^{-t/4} int_d^inf r e^{-r^2/4t} / sqrt(cosh r - cosh d) dr.

Renormalised trace over the closed geodesics of a length spectrum:

    Tr E(t) = e^{-t/4 - kappa t} / (4 sqrt(pi t)) sum_gamma sum_k l e^{-(k l)^2/4t} / sinh(k l / 2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DomainError, QuadratureFailure
from .kernels import heat_kernel_batch
from .loop_measure import as_parameter, check_domain, per_primitive_bound
from .special import digamma

#: Relative accuracy target of the scalar heat kernel.
HEAT_RTOL = 1e-10


@dataclass(frozen=True)
class HeatTime:
    t: float

    def __post_init__(self):
        if not (self.t > 0 and math.isfinite(self.t)):
            raise DomainError(f"time must be positive and finite, got {self.t}")

    def __float__(self):
        return float(self.t)


def _time(t) -> float:
    return HeatTime(float(t)).t


@dataclass(frozen=True)
class TraceCurvePoint:
    t: float
    value: float
    tail_bound: float


def heat_kernel(t, d: float, rtol: float = HEAT_RTOL) -> float:
    """Heat kernel of H^2 at time ``t`` and distance ``d`` by adaptive quadrature.

    On ``[d, d + 1]`` the square-root endpoint singularity is removed with
    ``cosh r - cosh d = u^2``, which turns the integrand into the smooth
    ``2 r e^{-r^2/4t} / sinh r``.  The remainder ``[d + 1, inf)`` is regular
    and is integrated in ``r`` directly.
    """
    t = _time(t)
    d = float(d)
    if not d >= 0:
        raise DomainError("distance must be non-negative")
    # cosh r - 1 = 2 sinh^2(d/2) + u^2, computed without cancellation near r = 0
    a = 2.0 * math.sinh(d / 2.0) ** 2

    def near(u):
        r = 2.0 * math.asinh(math.sqrt((a + u * u) / 2.0))
        ratio = 1.0 if r == 0.0 else r / math.sinh(r)
        # Gaussian factor relative to its value at r = d
        return 2.0 * ratio * math.exp(-(r - d) * (r + d) / (4.0 * t))

    def far(r):
        g = (r - d) * (r + d) / (4.0 * t)
        if g > 745.0:
            return 0.0
        # 1/sqrt(cosh r - cosh d) = 1/sqrt(2 sinh((r+d)/2) sinh((r-d)/2)), in log form
        h = 0.5 * (r + d)
        e = 0.5 * (r - d)
        log_den = 0.5 * (h + math.log1p(-math.exp(-2 * h)) + e + math.log1p(-math.exp(-2 * e)) - math.log(2.0))
        return r * math.exp(-g - log_den)

    u1 = math.sqrt(2.0 * math.sinh(d + 0.5) * math.sinh(0.5))
    v1, e1 = integrate.quad(near, 0.0, u1, epsabs=0.0, epsrel=rtol * 0.1, limit=200)
    # the Gaussian has decayed by e^{-46} once r^2 - d^2 > 184 t
    r_end = math.sqrt(d * d + 184.0 * t)
    v2 = e2 = 0.0
    if r_end > d + 1.0:
        pts = np.linspace(d + 1.0, r_end, 5)
        for lo, hi in zip(pts[:-1], pts[1:]):
            v, e = integrate.quad(far, lo, hi, epsabs=0.0, epsrel=rtol * 0.1, limit=200)
            v2 += v
            e2 += e
    val = v1 + v2
    err = e1 + e2
    if not (val > 0 and err <= rtol * val):
        raise QuadratureFailure(f"heat kernel quadrature at t={t}, d={d} reached only {err / val:.2e}")
    return math.sqrt(2.0) * (4 * math.pi * t) ** -1.5 * math.exp(-t / 4.0 - d * d / (4.0 * t)) * val


def heat_kernel_array(t, d, use_numba=None) -> np.ndarray:
    """Vectorised heat kernel (fixed graded Gauss-Legendre rule, see kernels)."""
    return heat_kernel_batch(_time(t), d, use_numba=use_numba)


def radial_integral(t, weight=None, rtol: float = 1e-12) -> float:
    """int_0^inf w(r) p(t, r) 2 pi sinh r dr; ``weight=None`` gives the total mass."""
    t = _time(t)
    w = (lambda r: 1.0) if weight is None else weight
    r_end = 2.0 * t + math.sqrt(4.0 * t * 46.0) + 8.0 * math.sqrt(t) + 1.0

    def f(r):
        return w(r) * heat_kernel_array(t, np.array([r]))[0] * 2 * math.pi * math.sinh(r)

    # the radial density peaks near r = 2t; split there
    pts = sorted({0.0, min(2.0 * t, r_end / 2), r_end})
    total = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        v, _ = integrate.quad(f, lo, hi, epsabs=0.0, epsrel=rtol, limit=400)
        total += v
    return total


# ---------------------------------------------------------------------------
# orbital integrals
# ---------------------------------------------------------------------------

def orbital_integral_closed(t, length: float, m: int) -> float:
    """Heat-kernel orbital integral of the class of gamma^m (gamma primitive of ``length``)."""
    t = _time(t)
    L = m * length
    return math.exp(-t / 4.0 - L * L / (4.0 * t)) / (4.0 * math.sqrt(math.pi * t)) * length / math.sinh(L / 2.0)


@dataclass(frozen=True)
class OrbitalQuadrature:
    value: float
    truncation_bound: float


def orbital_integral_quadrature(t, length: float, m: int, resolution: int = 1,
                                full_output: bool = False):
    """Integral of p(t, z, e^{m l} z) over the strip 1 <= y < e^{l} by 2D quadrature.

    With S = sinh(m l / 2), cosh d(z, e^{ml} z) = 1 + 2 S^2 (1 + x^2/y^2).
    The x-range is cut where the Gaussian factor of the kernel drops below
    1e-18 and the omitted part is bounded separately.  Outer rule: Gauss-
    Legendre in y; inner rule: composite Gauss-Legendre in w with x = sinh w.
    ``resolution`` scales both rules.
    """
    t = _time(t)
    if not length > 0 or m < 1:
        raise DomainError("need length > 0 and m >= 1")
    S2 = math.sinh(m * length / 2.0) ** 2
    d_cut = math.sqrt(4.0 * t * math.log(1e18))
    d0 = m * length
    ny = 24 * resolution
    nw = 32
    panels = 12 * resolution
    gy, wy = np.polynomial.legendre.leggauss(ny)
    gw, ww = np.polynomial.legendre.leggauss(nw)
    ys = 0.5 * (math.exp(length) - 1.0) * (gy + 1.0) + 1.0
    wys = 0.5 * (math.exp(length) - 1.0) * wy
    if d_cut <= d0:
        # the whole strip lies beyond the Gaussian cut
        val = 0.0
        bound = orbital_integral_upper(t, length, m)
    else:
        q_cut = (math.cosh(d_cut) - 1.0) / (2.0 * S2) - 1.0
        total = 0.0
        edge = 0.0
        p_cut = heat_kernel_array(t, np.array([d_cut]))[0]
        for y, wyk in zip(ys, wys):
            x_max = y * math.sqrt(q_cut)
            w_max = math.asinh(x_max)
            edges = np.linspace(0.0, w_max, panels + 1)
            half = 0.5 * np.diff(edges)
            mid = 0.5 * (edges[1:] + edges[:-1])
            w = (mid[:, None] + half[:, None] * gw[None, :]).ravel()
            wt = (half[:, None] * ww[None, :]).ravel()
            x = np.sinh(w)
            cosh_d = 1.0 + 2.0 * S2 * (1.0 + (x / y) ** 2)
            dist = np.arccosh(cosh_d)
            p = heat_kernel_array(t, dist)
            inner = 2.0 * np.sum(wt * p * np.cosh(w))  # symmetric in x
            total += wyk * inner / (y * y)
            # integrand at the cut, times the e-folding width in x of the Gaussian there
            dd_dx = 2.0 * S2 * 2.0 * x_max / (y * y) / math.sinh(d_cut)
            width = (2.0 * t / d_cut) / dd_dx
            edge += wyk * 2.0 * p_cut * width / (y * y)
        val = total
        bound = edge
    if not np.isfinite(val) or bound > 1e-8 * max(val, 1e-300) and d_cut > d0:
        raise QuadratureFailure(f"orbital quadrature truncation bound {bound:.2e} too large")
    if full_output:
        return OrbitalQuadrature(val, bound)
    return val


def orbital_integral_upper(t, length: float, m: int) -> float:
    """Crude upper bound used when the strip lies beyond the Gaussian cut."""
    return 2.0 * orbital_integral_closed(t, length, m)


# ---------------------------------------------------------------------------
# renormalised trace
# ---------------------------------------------------------------------------

def _trace_sum(lengths: np.ndarray, t: float) -> float:
    """sum_gamma sum_k l e^{-(k l)^2/4t} / sinh(k l / 2), summed in log space."""
    if lengths.size == 0:
        return 0.0
    total = np.zeros_like(lengths)
    active = np.ones(lengths.shape, bool)
    k = 1
    while active.any():
        x = k * lengths[active]
        log_term = np.log(lengths[active]) - x * x / (4.0 * t) - (0.5 * x + np.log(-np.expm1(-x)) - math.log(2.0))
        term = np.exp(log_term)
        total[active] += term
        idx = np.flatnonzero(active)
        done = (term <= 1e-17 * total[active]) | (log_term < -745)
        active[idx[done]] = False
        k += 1
    return math.fsum(np.sort(total))


def _trace_bound_fn(t: float, pref: float):
    def f(x):
        g = x * x / (4.0 * t)
        if g + 0.5 * x > 745:
            return 0.0
        return pref * x * math.exp(-g) / (math.sinh(x / 2.0) * -math.expm1(-g - 0.5 * x))
    return f


def trace_E(spec, p, t, *, allow_uncertified: bool = False) -> TraceCurvePoint:
    """Renormalised heat trace Tr E_kappa(t) from a length spectrum.

    ``tail_bound`` covers primitives beyond the cutoff, integrated against
    the counting envelope; it carries the Gaussian factor e^{-L^2/4t}.
    """
    from .errors import Uncertified

    p = as_parameter(p)
    t = _time(t)
    if not spec.certified and not allow_uncertified:
        raise Uncertified(f"length spectrum to L = {spec.cutoff:g} is not certified complete")
    pref = math.exp(-t / 4.0 - p.kappa * t) / (4.0 * math.sqrt(math.pi * t))
    val = pref * _trace_sum(spec.primitive_lengths, t)
    tail = spec.tail_bound(_trace_bound_fn(t, pref))
    return TraceCurvePoint(t, val, tail)


def trace_integral_range(spec, p, a: float, b: float, rtol: float = 1e-11) -> float:
    """int_a^b Tr E(t) dt / t, split at t = 1 and integrated adaptively."""
    p = as_parameter(p)
    lengths = spec.primitive_lengths
    c = 0.25 + p.kappa

    def f(t):
        if t <= 0:
            return 0.0
        return math.exp(-c * t) / (4.0 * math.sqrt(math.pi) * t ** 1.5) * _trace_sum(lengths, t)

    # the class of length l contributes a bump near t ~ l^2/6; give quad those scales
    knots = {1.0}
    if lengths.size:
        knots |= {float(x) for x in np.geomspace(lengths.min() ** 2 / 6, lengths.max() ** 2 / 6, 6)}
    pts = sorted(k for k in knots if a < k < b)
    bounds = [a] + pts + [b]
    total = 0.0
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        v, err = integrate.quad(f, lo, hi, epsabs=0.0, epsrel=rtol, limit=500)
        if not err <= max(1e-6 * abs(v), 1e-300):
            raise QuadratureFailure(f"trace integral on [{lo}, {hi}] reached only {err:.2e}")
        total += v
    return total


def trace_integral(spec, p, *, allow_uncertified: bool = False) -> float:
    """int_0^inf Tr E_kappa(t) dt / t (equals the total essential loop mass)."""
    p = as_parameter(p)
    check_domain(spec, p, allow_uncertified)
    return trace_integral_range(spec, p, 0.0, math.inf)


def trace_integral_tail(spec, p) -> float:
    """Bound on the contribution of primitives beyond the cutoff to :func:`trace_integral`."""
    return spec.tail_bound(per_primitive_bound(as_parameter(p).s))


# ---------------------------------------------------------------------------
# zero-trace correction terms
# ---------------------------------------------------------------------------

def zero_trace_corrections(p, t) -> tuple:
    """(h0, hc): identity and cusp contributions to the zero heat trace.

    h0 = e^{-(1/4+kappa)t} (4 pi t)^{-3/2} int_0^inf r e^{-r^2/4t} / sinh(r/2) dr
    hc = e^{-(1/4+kappa)t} ( -1/(2 pi) int_R Re psi(1 + iu) e^{-t u^2} du
                             - log 2 / sqrt(4 pi t) + 1/4 )
    """
    p = as_parameter(p)
    t = _time(t)
    damp = math.exp(-(0.25 + p.kappa) * t)
    # r = 2 sqrt(t) v
    st = math.sqrt(t)

    def h0_integrand(v):
        r = 2.0 * st * v
        if r == 0:
            return 4.0 * st
        # r / sinh(r/2) e^{-v^2}, kept in log form for large r
        return 2.0 * st * 2.0 * r * math.exp(-v * v - 0.5 * r) / -math.expm1(-r)

    # e^{-v^2} is below 1e-300 past v = 27
    i0, e0 = integrate.quad(h0_integrand, 0.0, 27.0, epsabs=0.0, epsrel=1e-12, limit=200)
    if not e0 <= 1e-9 * i0:
        raise QuadratureFailure("h0 quadrature did not converge")
    h0 = damp * (4 * math.pi * t) ** -1.5 * i0

    # u = w / sqrt(t); Re psi(1 + iu) is even, integrate over w >= 0 and double
    def hc_integrand(w):
        u = w / st
        return digamma(complex(1.0, u)).real * math.exp(-w * w) / st

    ic, ec = integrate.quad(hc_integrand, 0.0, np.inf, epsabs=1e-14, epsrel=1e-12, limit=200)
    if not ec <= 1e-9 * max(abs(ic), 1.0):
        raise QuadratureFailure("hc quadrature did not converge")
    hc = damp * (-(2.0 * ic) / (2.0 * math.pi) - math.log(2.0) / math.sqrt(4 * math.pi * t) + 0.25)
    return h0, hc
