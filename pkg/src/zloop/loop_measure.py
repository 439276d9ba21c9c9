"""Brownian loop-measure masses of essential free homotopy classes.

The mass of the class of ``gamma^m`` (``gamma`` primitive of length ``l``)
under the loop measure with killing rate ``kappa`` is

    mu = (1/m) e^{m (1/2 - sqrt(1/4 + kappa)) l} / (e^{m l} - 1)
       = (1/m) e^{-m s l} / (1 - e^{-m l}),       s = 1/2 + sqrt(1/4 + kappa).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceGuard, DomainError, InvalidKilling, Uncertified

#: Required gap between ``s`` and the exponent of convergence.
DELTA_MARGIN = 1e-6

#: Relative size at which iterate and k-series are cut.
SERIES_TOL = 1e-17


@dataclass(frozen=True)
class SpectralParameter:
    """Killing rate ``kappa`` and its spectral parameter ``s = 1/2 + sqrt(1/4 + kappa)``."""

    kappa: float
    s: float

    def __post_init__(self):
        if not math.isfinite(self.kappa) or self.kappa < -0.25:
            raise InvalidKilling(f"killing rate must be >= -1/4, got {self.kappa}")
        if not self.s >= 0.5 or abs(self.s * (self.s - 1.0) - self.kappa) > 1e-12 * max(1.0, abs(self.kappa)):
            raise DomainError(f"s = {self.s} does not match kappa = {self.kappa}")

    @classmethod
    def from_kappa(cls, kappa: float) -> "SpectralParameter":
        kappa = float(kappa)
        if not math.isfinite(kappa) or kappa < -0.25:
            raise InvalidKilling(f"killing rate must be >= -1/4, got {kappa}")
        return cls(kappa, 0.5 + math.sqrt(0.25 + kappa))

    @classmethod
    def from_s(cls, s: float) -> "SpectralParameter":
        s = float(s)
        if not s >= 0.5:
            raise DomainError(f"spectral parameter must be >= 1/2, got {s}")
        return cls(s * (s - 1.0), s)


def as_parameter(p) -> SpectralParameter:
    """Accept a SpectralParameter or a bare killing rate."""
    return p if isinstance(p, SpectralParameter) else SpectralParameter.from_kappa(p)


@dataclass(frozen=True)
class MassReport:
    """Total essential loop mass up to a length cutoff.

    ``truncation_error`` bounds the classes longer than ``cutoff`` using the
    counting envelope of the spectrum; it is zero for cylinders.
    """

    value: float
    truncation_error: float
    cutoff: float
    certified: bool = True
    n_primitive: int = 0


def class_mass(primitive_length: float, m: int, p) -> float:
    """Loop-measure mass of the free homotopy class of ``gamma^m``.

    Parameters
    ----------
    primitive_length : float
        Length of the primitive geodesic ``gamma``.
    m : int
        Iterate, at least 1.
    p : SpectralParameter or float
        Spectral parameter, or the killing rate.
    """
    p = as_parameter(p)
    if not primitive_length > 0:
        raise DomainError("primitive length must be positive")
    if int(m) != m or m < 1:
        raise DomainError("iterate must be a positive integer")
    x = m * primitive_length
    return math.exp(-p.s * x) / (-math.expm1(-x)) / m


def per_primitive_bound(s: float):
    """Decreasing majorant of the full iterate sum for one primitive of length x."""
    def f(x):
        if s * x > 745.0:
            return 0.0
        return math.exp(-s * x) / (-math.expm1(-x) * -math.expm1(-s * x))
    return f


def check_domain(spec, p: SpectralParameter, allow_uncertified: bool = False) -> None:
    """Raise the guards shared by every spectral sum."""
    if not p.s > spec.delta_estimate + DELTA_MARGIN:
        raise ConvergenceGuard(
            f"s = {p.s:.12g} must exceed the exponent of convergence {spec.delta_estimate:.12g} "
            f"by {DELTA_MARGIN:g}"
        )
    if not spec.certified and not allow_uncertified:
        why = f"gap {spec.gap:.3g}" if spec.c_min is not None else "no length-per-letter bound"
        raise Uncertified(f"length spectrum to L = {spec.cutoff:g} is not certified complete ({why})")


def iterate_sums(lengths, weight) -> float:
    """sum_gamma sum_{m >= 1} weight(m, l_gamma), cut once terms drop below SERIES_TOL relative.

    ``weight`` maps (m, lengths array) to an array of non-negative terms that
    decrease in ``m``.
    """
    lengths = np.asarray(lengths, dtype=float)
    if lengths.size == 0:
        return 0.0
    per = np.zeros_like(lengths)
    active = np.ones(lengths.shape, bool)
    m = 1
    while active.any():
        term = weight(m, lengths[active])
        per[active] += term
        still = term > SERIES_TOL * per[active]
        idx = np.flatnonzero(active)
        active[idx[~still]] = False
        m += 1
        if m > 100_000:
            raise DomainError("iterate series failed to converge")
    return math.fsum(np.sort(per))


def total_essential_mass(spec, p, *, allow_uncertified: bool = False) -> MassReport:
    """Sum of loop masses over every essential class, with a truncation bound.

    Every primitive in the spectrum contributes all its iterates (the
    iterate series is summed until the relative increment falls below
    1e-17); primitives beyond the cutoff are bounded via the counting
    envelope.

    Raises
    ------
    ConvergenceGuard
        If ``s <= delta + 1e-6``.
    Uncertified
        If the spectrum is not certified and ``allow_uncertified`` is false.
    """
    p = as_parameter(p)
    check_domain(spec, p, allow_uncertified)
    lengths = spec.primitive_lengths
    s = p.s

    def weight(m, x):
        return np.exp(-s * m * x) / -np.expm1(-m * x) / m

    value = iterate_sums(lengths, weight)
    tail = spec.tail_bound(per_primitive_bound(s))
    return MassReport(value, tail, spec.cutoff, spec.certified, int(lengths.size))


def mass_by_quadratic_variation(spec, p, varpi: float, side: str = "below", *,
                                allow_uncertified: bool = False) -> float:
    """Loop mass restricted to loops of quadratic variation below / above ``4 varpi``.

    Equals the integral of Tr E(t)/t over (0, varpi] (``side="below"``) or
    [varpi, inf) (``side="above"``).
    """
    from .heat_trace import trace_integral_range

    p = as_parameter(p)
    check_domain(spec, p, allow_uncertified)
    if not varpi > 0:
        raise DomainError("varpi must be positive")
    if side == "below":
        return trace_integral_range(spec, p, 0.0, varpi)
    if side == "above":
        return trace_integral_range(spec, p, varpi, math.inf)
    raise DomainError("side must be 'below' or 'above'")
