"""Scalar special functions: E1, digamma, Barnes G, G0, G_inf, and pinned constants.

log-Gamma and erf come from the standard library (``math.lgamma``,
``math.erf``); the rest are implemented here with recurrences and
asymptotic series.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import DomainError


@dataclass(frozen=True)
class SpecialConstant:
    """A named constant stored as a decimal string with at least 30 digits."""

    name: str
    digits: str

    @property
    def value(self) -> float:
        return float(self.digits)

    def __float__(self):
        return self.value


EULER_GAMMA = SpecialConstant("euler_gamma", "0.577215664901532860606512090082402431042159336")
GLAISHER_A = SpecialConstant("glaisher_a", "1.28242712910062263687534256886979172776768893")
# zeta'(-1) = 1/12 - log A
ZETA_PRIME_MINUS_ONE = SpecialConstant("zeta_prime_minus_one",
                                       "-0.16542114370045092921391966024278064276403638")
# E = (4 zeta'(-1) - 1/2 + log 2 pi) / (4 pi)
SARNAK_E = SpecialConstant("sarnak_e", "0.0538096887604826121553618444984479151797054607")

CONSTANTS = {c.name: c for c in (EULER_GAMMA, GLAISHER_A, ZETA_PRIME_MINUS_ONE, SARNAK_E)}

# Bernoulli numbers B_2, B_4, ..., B_22
_BERNOULLI = [Fraction(1, 6), Fraction(-1, 30), Fraction(1, 42), Fraction(-1, 30), Fraction(5, 66),
              Fraction(-691, 2730), Fraction(7, 6), Fraction(-3617, 510), Fraction(43867, 798),
              Fraction(-174611, 330), Fraction(854513, 138)]

log_gamma = math.lgamma
gamma = math.gamma
erf = math.erf


def exp_integral_E1(x: float) -> float:
    """E1(x) = int_x^inf e^{-t}/t dt for x > 0.

    Power series for x <= 1, modified Lentz continued fraction beyond.
    """
    x = float(x)
    if not x > 0:
        raise DomainError(f"E1 needs x > 0, got {x}")
    if x <= 1.0:
        total = 0.0
        term = 1.0
        k = 1
        while True:
            term *= -x / k
            add = term / k
            total += add
            if abs(add) < 1e-18 * max(abs(total), 1e-300):
                break
            k += 1
        return -EULER_GAMMA.value - math.log(x) - total
    # e^{-x} / (x + 1 - 1/(x + 3 - 4/(x + 5 - ...)))
    tiny = 1e-300
    b = x + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 10_000):
        an = -float(i * i)
        b += 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            return h * math.exp(-x)
    raise DomainError("E1 continued fraction did not converge")


def digamma(z):
    """psi(z) = Gamma'(z)/Gamma(z) for real or complex z off the non-positive integers."""
    is_real = not isinstance(z, complex)
    z = complex(z)
    if z.real <= 0 and z.imag == 0 and z.real == math.floor(z.real):
        raise DomainError("digamma has poles at non-positive integers")
    shift = 0j
    if z.real < 0.5:
        # reflection psi(1 - z) - psi(z) = pi cot(pi z)
        val = digamma(1 - z) - math.pi / cmath.tan(math.pi * z)
        return val.real if is_real else val
    while abs(z) < 12 or z.real < 12:
        shift -= 1 / z
        z += 1
    z2 = 1 / (z * z)
    series = 0j
    zp = z2
    for k, b in enumerate(_BERNOULLI[:9], start=1):
        series += float(b) / (2 * k) * zp
        zp *= z2
    val = cmath.log(z) - 0.5 / z - series + shift
    return val.real if is_real else val


def log_barnes_g(x: float) -> float:
    """log G(x) for real x > 0, G the Barnes G-function (G(1) = 1).

    The recursion G(x+1) = Gamma(x) G(x) lifts x above 20, where the
    asymptotic expansion
    log G(z+1) = z^2/2 (log z - 3/2) + z/2 log 2 pi - log(z)/12 + zeta'(-1)
                 + sum_k B_{2k+2} / (4k(k+1) z^{2k})
    is accurate to rounding.
    """
    x = float(x)
    if not x > 0:
        raise DomainError(f"Barnes G is evaluated for x > 0, got {x}")
    acc = 0.0
    while x < 20.0:
        acc -= math.lgamma(x)
        x += 1.0
    z = x - 1.0
    val = 0.5 * z * z * (math.log(z) - 1.5) + 0.5 * z * math.log(2 * math.pi) - math.log(z) / 12.0
    val += ZETA_PRIME_MINUS_ONE.value
    zp = 1.0 / (z * z)
    for k in range(1, 9):
        val += float(_BERNOULLI[k]) / (4 * k * (k + 1)) * zp
        zp /= z * z
    return val + acc


def barnes_g(x: float) -> float:
    return math.exp(log_barnes_g(x))


def log_g_zero(s: float) -> float:
    if not s > 0.5:
        raise DomainError(f"G0(s) needs s > 1/2, got {s}")
    return -s * math.log(2.0) + 0.5 * math.log(s - 0.5) + math.lgamma(s - 0.5)


def g_zero(s: float) -> float:
    """G0(s) = 2^{-s} (s - 1/2)^{1/2} Gamma(s - 1/2)."""
    return math.exp(log_g_zero(s))


def log_g_infty(s: float) -> float:
    if not s > 0:
        raise DomainError(f"G_inf(s) needs s > 0, got {s}")
    return -s * math.log(2 * math.pi) + math.lgamma(s) + 2.0 * log_barnes_g(s)


def g_infty(s: float) -> float:
    """G_inf(s) = (2 pi)^{-s} Gamma(s) G(s)^2."""
    return math.exp(log_g_infty(s))
