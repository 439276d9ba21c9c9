"""Oriented closed geodesics: enumeration, certified length spectra, exponent of convergence.

Conjugacy classes of a free group are cyclic words, so for cylinder and
Schottky models a class is the lexicographically minimal rotation of a
cyclically reduced word.  Octagon groups are not free; there each word is
conjugated until its axis crosses the Dirichlet domain centred at ``i`` and
the class is identified by the finite set of conjugates whose axes cross
that domain.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.optimize import brentq

from .errors import ExplosionGuard, SurfaceError
from .hyperbolic import MoebiusTransform, trace_to_length, word_matrix
from .kernels import enumerate_words
from .surfaces import (
    SurfaceModel,
    boundary_to_klein,
    dirichlet_domain,
    h_to_klein,
    klein_to_h,
    word_to_str,
)

#: Default cap on the number of reduced words visited by one enumeration.
WORD_BUDGET = 10_000_000

#: Margin added to the estimated exponent in the counting fit.
COUNT_FIT_MARGIN = 1e-3

#: Default word length for octagon spectra (no completeness certificate exists).
OCTAGON_WORD_LENGTH = 8

_AXIS_TOL = 1e-6
_LENGTH_TOL = 1e-8


@dataclass(frozen=True)
class GeodesicClassEntry:
    """One oriented free homotopy class ``gamma^m``."""

    word: tuple
    primitive_length: float
    iterate: int
    total_length: float

    @property
    def word_str(self) -> str:
        return word_to_str(self.word)

    @property
    def is_primitive(self) -> bool:
        return self.iterate == 1


@dataclass(frozen=True)
class CountingFit:
    """Envelope N(x) <= prefactor * exp(rate * x) for the primitive counting function."""

    prefactor: float
    rate: float
    finite: bool = False

    def __call__(self, x):
        if self.finite:
            return np.zeros_like(np.asarray(x, dtype=float))
        return self.prefactor * np.exp(self.rate * np.asarray(x, dtype=float))


@dataclass(frozen=True)
class LengthSpectrum:
    """All oriented classes with total length <= cutoff, with completeness metadata.

    Attributes
    ----------
    entries : tuple of GeodesicClassEntry
        Sorted by total length, then by word.
    cutoff : float
        The length L.
    certified : bool
        True when every class of length <= L is guaranteed present.
    delta_estimate : float
        Exponent of convergence of the group.
    max_word_length : int
        Longest word enumerated.
    c_min : float or None
        Lower bound on geodesic length per letter (None if unavailable).
    gap : float
        ``L - c_min (max_word_length + 1)`` when not certified, else 0.
    fit : CountingFit
        Envelope of the primitive counting function used for tail bounds.
    collisions : int
        Octagon only: pairs of distinct classes whose signatures nearly agree.
    """

    entries: tuple
    cutoff: float
    certified: bool
    delta_estimate: float
    kind: str = "schottky"
    max_word_length: int = 0
    c_min: float | None = None
    gap: float = 0.0
    fit: CountingFit = field(default_factory=lambda: CountingFit(0.0, 0.0, True))
    collisions: int = 0

    def __len__(self):
        return len(self.entries)

    def primitives(self) -> list:
        return [e for e in self.entries if e.iterate == 1]

    @property
    def primitive_lengths(self) -> np.ndarray:
        return np.array([e.primitive_length for e in self.entries if e.iterate == 1])

    @property
    def total_lengths(self) -> np.ndarray:
        return np.array([e.total_length for e in self.entries])

    def count(self, x: float) -> int:
        """Number of entries (all iterates) with total length <= x."""
        return int(np.searchsorted(self.total_lengths, x, side="right"))

    def tail_bound(self, per_primitive, lower: float | None = None) -> float:
        """Bound on the sum of ``per_primitive(l)`` over primitives longer than the cutoff.

        ``per_primitive`` must be positive and decreasing.  The bound
        integrates it against the counting envelope: with N(x) <= C e^{r x},
        the missing sum is at most f(L) max(0, C e^{rL} - N(L)) + C r int_L^inf f(x) e^{rx} dx.
        """
        if self.fit.finite:
            return 0.0
        L = self.cutoff if lower is None else lower
        C, r = self.fit.prefactor, self.fit.rate
        n_L = len(self.primitive_lengths[self.primitive_lengths <= L])
        head = per_primitive(L) * max(0.0, C * math.exp(r * L) - n_L)

        def integrand(x):
            v = per_primitive(x)
            # v vanishes before e^{rx} can overflow since f decays faster than e^{-rx}
            return v * math.exp(min(r * x, 700.0)) if v > 0 else 0.0

        val, _ = integrate.quad(integrand, L, np.inf, limit=200, epsabs=0.0, epsrel=1e-8)
        return float(head + C * r * val)


# ---------------------------------------------------------------------------
# words and periods
# ---------------------------------------------------------------------------

def minimal_period(word) -> int:
    """Smallest p dividing len(word) with word == (word[:p])^(n/p)."""
    n = len(word)
    for p in range(1, n + 1):
        if n % p == 0 and all(word[i] == word[i % p] for i in range(n)):
            return p
    return n


def projected_word_count(n_letters: int, max_len: int) -> int:
    """Number of freely reduced words of length 1..max_len."""
    if n_letters == 2:
        return 2 * max_len
    return sum(n_letters * (n_letters - 1) ** (j - 1) for j in range(1, max_len + 1))


def _check_budget(model: SurfaceModel, max_len: int, budget: int) -> None:
    projected = projected_word_count(2 * model.rank, max_len)
    if projected > budget:
        raise ExplosionGuard(
            f"enumeration to word length {max_len} visits {projected:.3g} words, "
            f"above the budget {budget:.3g}"
        )


def _raw_words(model, max_len, cutoff, use_numba):
    cap = 2.0 * math.cosh(cutoff / 2.0) * (1 + 1e-12) + 1e-12 if math.isfinite(cutoff) else np.inf
    words, _, traces = enumerate_words(
        model.letter_matrices, model.inverse_letters, max_len, cap, use_numba=use_numba
    )
    lengths = trace_to_length(traces)
    return words, lengths


def enumerate_classes(model: SurfaceModel, max_word_length: int, *, cutoff: float = math.inf,
                      budget: int = WORD_BUDGET, use_numba=None) -> list:
    """One entry per oriented conjugacy class of cyclic word length <= ``max_word_length``.

    Parameters
    ----------
    model : SurfaceModel
    max_word_length : int
        At least 1.
    cutoff : float, optional
        Drop classes longer than this (enumeration is pruned by trace).
    budget : int
        Maximum number of reduced words visited; :class:`ExplosionGuard` otherwise.

    Returns
    -------
    list of GeodesicClassEntry
        Sorted by total length, then word length, then word.
    """
    if max_word_length < 1:
        raise ValueError("max_word_length must be >= 1")
    _check_budget(model, max_word_length, budget)
    words, lengths = _raw_words(model, max_word_length, cutoff, use_numba)
    if model.kind == "octagon":
        entries, _ = _octagon_classes(model, words, lengths)
        return entries
    out = []
    for row, total in zip(words, lengths):
        w = tuple(int(k) for k in row if k >= 0)
        m = len(w) // minimal_period(w)
        out.append(GeodesicClassEntry(w, float(total) / m, m, float(total)))
    out.sort(key=lambda e: (e.total_length, len(e.word), e.word))
    return out


# ---------------------------------------------------------------------------
# octagon conjugacy classes
# ---------------------------------------------------------------------------

def _axis_foot(g: MoebiusTransform) -> complex:
    """Point of the axis of ``g`` closest to i."""
    rep, att = g.fixed_points()
    e1, e2 = boundary_to_klein(rep), boundary_to_klein(att)
    d = e2 - e1
    t = -((e1.conjugate() * d).real) / abs(d) ** 2
    return complex(klein_to_h(e1 + t * d))


def _endpoint_angles(g: MoebiusTransform) -> tuple:
    rep, att = g.fixed_points()
    return (np.angle(boundary_to_klein(rep)) % (2 * np.pi),
            np.angle(boundary_to_klein(att)) % (2 * np.pi))


class _OctagonCanon:
    def __init__(self, model: SurfaceModel):
        self.letters = [model.letter(k) for k in range(2 * model.rank)]
        self.domain = dirichlet_domain(model)

    def reduce(self, g: MoebiusTransform) -> MoebiusTransform:
        for _ in range(10_000):
            q = _axis_foot(g)
            best_r = abs(h_to_klein(q)) - 1e-12
            best = None
            for h in self.letters:
                r = abs(h_to_klein(h(q)))
                if r < best_r:
                    best_r, best = r, h
            if best is None:
                return g
            g = best @ g @ best.inverse()
        raise SurfaceError("axis reduction into the Dirichlet domain did not terminate")

    def crossing_set(self, g: MoebiusTransform, cap: int = 100_000) -> np.ndarray:
        """Endpoint angles of every conjugate whose axis crosses the domain."""
        g = self.reduce(g)
        seen = [g]
        keys = [_endpoint_angles(g)]
        queue = [g]
        while queue:
            cur = queue.pop()
            for h in self.letters:
                nxt = h @ cur @ h.inverse()
                rep, att = nxt.fixed_points()
                if not self.domain.meets_chord(boundary_to_klein(rep), boundary_to_klein(att)):
                    continue
                ang = _endpoint_angles(nxt)
                if any(_angles_close(ang, k) for k in keys):
                    continue
                seen.append(nxt)
                keys.append(ang)
                queue.append(nxt)
                if len(keys) > cap:
                    raise SurfaceError("conjugate search exceeded its cap")
        return np.array(keys)


def _angle_gap(a, b):
    d = abs(a - b) % (2 * np.pi)
    return np.minimum(d, 2 * np.pi - d)


def _angles_close(p, q, tol=_AXIS_TOL) -> bool:
    return bool(_angle_gap(p[0], q[0]) < tol and _angle_gap(p[1], q[1]) < tol)


def _octagon_classes(model, words, lengths):
    canon = _OctagonCanon(model)
    order = np.lexsort([np.array([(w >= 0).sum() for w in words]), lengths]) if len(words) else []
    classes = []  # (length, word, crossing set)
    collisions = 0
    for idx in order:
        w = tuple(int(k) for k in words[idx] if k >= 0)
        total = float(lengths[idx])
        g = model.word_transform(w)
        cset = canon.crossing_set(g)
        probe = cset[0]
        match = None
        for c in reversed(classes):
            if total - c[0] > _LENGTH_TOL:
                break
            if abs(total - c[0]) <= _LENGTH_TOL and any(_angles_close(probe, k) for k in c[2]):
                match = c
                break
        if match is None:
            # a near-collision: equal length, some endpoint pair close but not equal
            for c in reversed(classes):
                if total - c[0] > _LENGTH_TOL:
                    break
                d = np.min(_angle_gap(c[2][:, 0], probe[0]) + _angle_gap(c[2][:, 1], probe[1]))
                if d < 1e3 * _AXIS_TOL:
                    collisions += 1
            classes.append((total, w, cset))
    # iterates share their axis set with the primitive root
    entries = []
    for i, (total, w, cset) in enumerate(classes):
        prim = total
        probe = cset[0]
        for total2, _, cset2 in classes[:i]:
            if total2 < total - _LENGTH_TOL and any(_angles_close(probe, k) for k in cset2):
                prim = min(prim, total2)
        m = max(1, int(round(total / prim)))
        m_word = len(w) // minimal_period(w)
        if m_word > m:
            m = m_word
        entries.append(GeodesicClassEntry(w, total / m, m, total))
    entries.sort(key=lambda e: (e.total_length, len(e.word), e.word))
    return entries, collisions


# ---------------------------------------------------------------------------
# completeness certificate
# ---------------------------------------------------------------------------

def min_cycle_mean(weights: np.ndarray) -> float:
    """Karp's minimum mean cycle weight; ``inf`` entries are missing edges."""
    n = weights.shape[0]
    D = np.full((n + 1, n), np.inf)
    D[0] = 0.0
    for k in range(1, n + 1):
        D[k] = np.min(D[k - 1][:, None] + weights, axis=0)
    best = np.inf
    for v in range(n):
        if not np.isfinite(D[n, v]):
            continue
        worst = -np.inf
        for k in range(n):
            if np.isfinite(D[k, v]):
                worst = max(worst, (D[n, v] - D[k, v]) / (n - k))
        best = min(best, worst)
    return float(best)


def _max_derivative_on_interval(g: MoebiusTransform, lo: float, hi: float) -> float:
    # |c x + d| is affine, so its minimum over [lo, hi] is at an endpoint unless it vanishes
    c, d = g.c, g.d
    if c != 0.0 and lo <= -d / c <= hi:
        return math.inf
    return max(1.0 / (c * lo + d) ** 2, 1.0 / (c * hi + d) ** 2)


def transition_weights(model: SurfaceModel) -> np.ndarray:
    """w[i, j] = -log max over interval j of the derivative of letter i (inf if forbidden)."""
    iv = model.intervals()
    n = 2 * model.rank
    w = np.full((n, n), np.inf)
    for i in range(n):
        g = model.letter(i)
        for j in range(n):
            if j == i ^ 1:
                continue
            w[i, j] = -math.log(_max_derivative_on_interval(g, *iv[j]))
    return w


@lru_cache(maxsize=64)
def length_per_letter(model: SurfaceModel) -> float | None:
    """Lower bound on geodesic length per letter of a cyclically reduced word."""
    if model.kind == "cylinder":
        return float(model.summary()["generator_lengths"][0])
    if model.kind == "schottky":
        return min_cycle_mean(transition_weights(model))
    return None


# ---------------------------------------------------------------------------
# exponent of convergence
# ---------------------------------------------------------------------------

def _log_shell_sum(lengths, periods, s):
    a = -s * lengths - np.log1p(-np.exp(-lengths)) + np.log(periods)
    top = a.max()
    return top + math.log(np.exp(a - top).sum())


def shell_sums(model: SurfaceModel, max_len: int, use_numba=None):
    """Per word length n: (lengths, periods) of the cyclic words of length n."""
    words, lengths = _raw_words(model, max_len, math.inf, use_numba)
    wl = (words >= 0).sum(axis=1)
    periods = np.array([minimal_period(tuple(r[:k])) for r, k in zip(words, wl)], dtype=float)
    return {n: (lengths[wl == n], periods[wl == n]) for n in range(1, max_len + 1)}


def shell_ratio_root(shells, n: int) -> float:
    """Root of T_n(s) = T_{n-1}(s), T_n(s) = sum over length-n cycles of e^{-s l}/(1 - e^{-l})."""
    Ln, Pn = shells[n]
    Lm, Pm = shells[n - 1]

    def f(s):
        return _log_shell_sum(Ln, Pn, s) - _log_shell_sum(Lm, Pm, s)

    lo, hi = 1e-9, 2.0
    if f(lo) <= 0:
        return 0.0
    while f(hi) > 0:
        hi *= 2
        if hi > 1e3:
            raise SurfaceError("shell sums do not decay; exponent estimate failed")
    return brentq(f, lo, hi, xtol=1e-14, rtol=1e-14)


def cycle_expansion(shells, s: float, order: int) -> float:
    """Truncated periodic-orbit expansion of det(1 - L_s) at order ``order``.

    With traces T_n(s) from the length-n cycles, log det(1 - z L_s) =
    -sum_n T_n z^n / n; the Taylor coefficients follow from Newton's
    identities and their partial sum at z = 1 is returned.
    """
    t = [float(np.sum(shells[n][1] * np.exp(-s * shells[n][0]) / -np.expm1(-shells[n][0])))
         for n in range(1, order + 1)]
    c = [1.0]
    for k in range(1, order + 1):
        c.append(-sum(t[j - 1] * c[k - j] for j in range(1, k + 1)) / k)
    return math.fsum(c)


@lru_cache(maxsize=64)
def _schottky_delta(model: SurfaceModel, max_len: int, use_numba) -> tuple:
    shells = shell_sums(model, max_len, use_numba)
    roots = []
    for order in range(2, max_len + 1):
        def f(s, order=order):
            return cycle_expansion(shells, s, order)

        lo, hi = 1e-6, 1.0
        if f(lo) * f(hi) > 0:
            roots.append(math.nan)
            continue
        roots.append(brentq(f, lo, hi, xtol=1e-14, rtol=1e-14))
    return tuple(roots)


def delta_estimate(model: SurfaceModel, max_len: int = 10, use_numba=None) -> float:
    """Exponent of convergence of the group of ``model``.

    Cylinder: 0.  Octagon (cocompact): 1.  Schottky: the zero in (0, 1) of
    the periodic-orbit expansion of the dynamical determinant built from
    the lengths of all cyclic words up to ``max_len`` letters.  This is the
    point where the Poincare-type sums over cycles switch from convergent
    to divergent, located with a super-exponentially convergent series.
    """
    if model.kind == "cylinder":
        return 0.0
    if model.kind == "octagon":
        return 1.0
    n = max_len
    while n > 2 and projected_word_count(2 * model.rank, n) > WORD_BUDGET:
        n -= 1
    roots = [r for r in _schottky_delta(model, n, use_numba) if math.isfinite(r)]
    if not roots:
        raise SurfaceError("periodic-orbit expansion has no zero in (0, 1)")
    return float(roots[-1])


def delta_history(model: SurfaceModel, max_len: int = 10, use_numba=None) -> np.ndarray:
    """Exponent estimates at expansion orders 2..max_len (convergence diagnostics)."""
    if model.kind != "schottky":
        raise SurfaceError("periodic-orbit expansions are defined for schottky models")
    return np.array(_schottky_delta(model, max_len, use_numba))


def counting_exponent(lengths) -> float:
    """Least-squares growth rate of log(x N(x)) on the upper half of the observed range.

    Uses N(x) ~ e^{delta x}/(delta x); a coarse cross-check of :func:`delta_estimate`.
    """
    x = np.sort(np.asarray(lengths, dtype=float))
    if len(x) < 8:
        return 0.0
    n = np.arange(1, len(x) + 1)
    keep = x >= x[0] + 0.5 * (x[-1] - x[0])
    slope, _ = np.polyfit(x[keep], np.log(n[keep] * x[keep]), 1)
    return float(slope)


def counting_fit(prim_lengths, rate: float) -> CountingFit:
    """Smallest C with N(x) <= C e^{rate x} at every observed primitive length."""
    x = np.sort(np.asarray(prim_lengths, dtype=float))
    if len(x) == 0:
        return CountingFit(0.0, rate)
    n = np.arange(1, len(x) + 1)
    return CountingFit(float(np.max(n * np.exp(-rate * x))), rate)


# ---------------------------------------------------------------------------
# length spectrum
# ---------------------------------------------------------------------------

def length_spectrum(model: SurfaceModel, L: float, max_word_length: int | None = None, *,
                    budget: int = WORD_BUDGET, use_numba=None) -> LengthSpectrum:
    """All oriented classes with total length <= L.

    For cylinder and Schottky models the word length is chosen so that
    ``c_min (n + 1) > L``, where ``c_min`` is the minimum cycle mean of the
    per-transition contraction bounds; the result is then certified.  A
    smaller explicit ``max_word_length`` yields an uncertified spectrum with
    the gap reported.  Octagon spectra are never certified.
    """
    if not L > 0:
        raise ValueError("cutoff L must be positive")
    c_min = length_per_letter(model)
    if model.kind == "octagon":
        n = max_word_length or OCTAGON_WORD_LENGTH
    else:
        if not c_min > 0:
            raise SurfaceError("disk system gives no positive length per letter")
        needed = int(math.floor(L / c_min))
        needed = max(needed, 1)
        n = needed if max_word_length is None else max_word_length
    _check_budget(model, n, budget)
    words, lengths = _raw_words(model, n, L, use_numba)
    collisions = 0
    if model.kind == "octagon":
        entries, collisions = _octagon_classes(model, words, lengths)
    else:
        entries = enumerate_classes(model, n, cutoff=L, budget=budget, use_numba=use_numba)
    entries = [e for e in entries if e.total_length <= L]
    certified = c_min is not None and c_min * (n + 1) > L
    gap = 0.0 if certified or c_min is None else L - c_min * (n + 1)
    delta = delta_estimate(model, use_numba=use_numba)
    prim = [e.primitive_length for e in entries if e.iterate == 1]
    if model.kind == "cylinder":
        fit = CountingFit(0.0, 0.0, finite=True)
    else:
        fit = counting_fit(prim, delta + COUNT_FIT_MARGIN)
    return LengthSpectrum(tuple(entries), float(L), bool(certified), float(delta), model.kind, n,
                          c_min, float(gap), fit, collisions)
