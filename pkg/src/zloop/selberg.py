"""Selberg zeta function from a length spectrum, and the loop-mass identity.

    log Z(s) = sum_gamma sum_{k >= 0} log(1 - e^{-(s + k) l_gamma})
             = - sum_gamma sum_{m >= 1} (1/m) e^{-s m l} / (1 - e^{-m l})

Both orientations of every geodesic are separate primitives.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .loop_measure import (
    SERIES_TOL,
    as_parameter,
    check_domain,
    iterate_sums,
    per_primitive_bound,
    total_essential_mass,
)


@dataclass(frozen=True)
class ZetaValue:
    """log Z(s) with a bound on the contribution of primitives beyond the cutoff."""

    log_value: float
    tail_bound: float
    s: float
    route: str

    @property
    def value(self) -> float:
        return math.exp(self.log_value)


def _check(spec, s, allow_uncertified):
    from .loop_measure import SpectralParameter

    check_domain(spec, SpectralParameter.from_s(s), allow_uncertified)


def zeta_euler(spec, s: float, *, allow_uncertified: bool = False) -> ZetaValue:
    """Euler product over the primitives of ``spec``, evaluated in log space."""
    s = float(s)
    _check(spec, s, allow_uncertified)
    lengths = spec.primitive_lengths
    total = 0.0
    if lengths.size:
        per = np.zeros_like(lengths)
        active = np.ones(lengths.shape, bool)
        k = 0
        while active.any():
            term = np.log1p(-np.exp(-(s + k) * lengths[active]))
            per[active] += term
            still = np.abs(term) > SERIES_TOL * np.abs(per[active])
            idx = np.flatnonzero(active)
            active[idx[~still]] = False
            k += 1
        total = math.fsum(np.sort(per)[::-1])
    tail = spec.tail_bound(per_primitive_bound(s))
    return ZetaValue(total, tail, s, "euler_product")


def log_zeta_sum(spec, s: float, *, allow_uncertified: bool = False) -> ZetaValue:
    """log Z(s) from the iterate expansion of the logarithm."""
    s = float(s)
    _check(spec, s, allow_uncertified)

    def weight(m, x):
        return np.exp(-s * m * x) / -np.expm1(-m * x) / m

    total = iterate_sums(spec.primitive_lengths, weight)
    tail = spec.tail_bound(per_primitive_bound(s))
    return ZetaValue(-total, tail, s, "log_sum")


@dataclass(frozen=True)
class IdentityRow:
    identity: str
    lhs: float
    rhs: float
    residual: float
    bound: float
    passed: bool


@dataclass
class MassIdentityReport:
    """Residuals of  sum of loop masses = -log Z(s)  by independent routes."""

    kappa: float
    s: float
    cutoff: float
    rows: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def row(self, name: str) -> IdentityRow:
        return next(r for r in self.rows if r.identity == name)


#: Floor for comparing two routes summed over the same spectrum.
ROUNDING_FLOOR = 1e-12


def verify_mass_identity(model, p, L: float, *, N: int = 32, allow_uncertified: bool = False,
                    spec=None) -> MassIdentityReport:
    """Check total loop mass against -log Z(s).

    Route ``euler``: the Euler product over the same spectrum; the two sides
    share every truncation, so the residual is bounded by rounding.
    Route ``transfer`` (Schottky only): the Fredholm determinant of the
    transfer operator, which sees every geodesic; the bound is the loop-mass
    truncation bound plus the collocation error estimate |det_N - det_2N|.
    """
    from .spectrum import length_spectrum

    p = as_parameter(p)
    if spec is None:
        spec = length_spectrum(model, L)
    mass = total_essential_mass(spec, p, allow_uncertified=allow_uncertified)
    z = zeta_euler(spec, p.s, allow_uncertified=allow_uncertified)
    rep = MassIdentityReport(p.kappa, p.s, spec.cutoff)
    res = abs(mass.value + z.log_value)
    bound = ROUNDING_FLOOR * max(1.0, mass.value)
    rep.rows.append(IdentityRow("mass=-logZ[euler]", mass.value, -z.log_value, res, bound, res <= bound))
    if model.kind == "schottky":
        from .transfer import fredholm_det

        d1 = fredholm_det(model, p.s, N).real
        d2 = fredholm_det(model, p.s, 2 * N).real
        coll = abs(d1 - d2) / abs(d1)
        rhs = -math.log(d1)
        res = abs(mass.value - rhs)
        bound = mass.truncation_error + coll + ROUNDING_FLOOR
        rep.rows.append(IdentityRow("mass=-logZ[transfer]", mass.value, rhs, res, bound, res <= bound))
    return rep
