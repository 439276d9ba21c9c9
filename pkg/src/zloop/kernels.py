"""Hot numeric loops.

Every kernel has a numba implementation (``*_nb``) and a pure-numpy
implementation (``*_np``).  The public names dispatch on
:data:`zloop._accel.HAVE_NUMBA`; both paths are exercised by the tests and
compared in ``benchmarks/bench_kernels.py``.
"""
from __future__ import annotations

import math

import numpy as np

from ._accel import HAVE_NUMBA, njit

if HAVE_NUMBA:
    from numba import prange
else:  # pragma: no cover - exercised with ZLOOP_DISABLE_NUMBA=1
    prange = range

# Hyperbolic trace window: elements with |tr| <= 2 + this are not recorded.
HYPERBOLIC_MARGIN = 1e-9

# Products are renormalised to unit determinant only while |a d| stays below
# this.  For larger entries ad - bc carries a cancellation error of order
# |a d| eps, and dividing by its square root costs more accuracy than the
# determinant drift it removes.
RENORM_LIMIT = 10.0

#: Below this many reduced words the numpy enumeration is used by default.
SMALL_ENUMERATION = 20_000


# ---------------------------------------------------------------------------
# word enumeration
# ---------------------------------------------------------------------------

@njit
def _is_lexmin_nb(letters, n):
    for r in range(1, n):
        for i in range(n):
            a = letters[(r + i) % n]
            b = letters[i]
            if a < b:
                return False
            if a > b:
                break
    return True


@njit
def _enum_words_nb(gens, inv, max_len, trace_cap, first_letters, capacity):
    k = gens.shape[0]
    words = np.full((capacity, max_len), -1, np.int8)
    lens = np.zeros(capacity, np.int64)
    traces = np.zeros(capacity)
    mats = np.zeros((max_len + 1, 2, 2))
    letters = np.zeros(max_len, np.int64)
    cand = np.zeros(max_len + 1, np.int64)
    count = 0
    lo = 2.0 + HYPERBOLIC_MARGIN
    for fi in range(first_letters.shape[0]):
        f = first_letters[fi]
        mats[0, 0, 0] = 1.0
        mats[0, 0, 1] = 0.0
        mats[0, 1, 0] = 0.0
        mats[0, 1, 1] = 1.0
        depth = 0
        c = f
        while True:
            # descend with letter c at position `depth`
            letters[depth] = c
            p = mats[depth]
            g = gens[c]
            m00 = p[0, 0] * g[0, 0] + p[0, 1] * g[1, 0]
            m01 = p[0, 0] * g[0, 1] + p[0, 1] * g[1, 1]
            m10 = p[1, 0] * g[0, 0] + p[1, 1] * g[1, 0]
            m11 = p[1, 0] * g[0, 1] + p[1, 1] * g[1, 1]
            s = 1.0
            if abs(m00 * m11) < RENORM_LIMIT:
                s = 1.0 / math.sqrt(m00 * m11 - m01 * m10)
            mats[depth + 1, 0, 0] = m00 * s
            mats[depth + 1, 0, 1] = m01 * s
            mats[depth + 1, 1, 0] = m10 * s
            mats[depth + 1, 1, 1] = m11 * s
            depth += 1
            n = depth
            tr = mats[n, 0, 0] + mats[n, 1, 1]
            atr = abs(tr)
            if atr > lo and atr <= trace_cap:
                if n == 1 or letters[n - 1] != inv[letters[0]]:
                    if _is_lexmin_nb(letters, n):
                        if count >= capacity:
                            return words, lens, traces, -1
                        for i in range(n):
                            words[count, i] = letters[i]
                        lens[count] = n
                        traces[count] = atr
                        count += 1
            cand[depth] = 0
            # find next letter to descend with (backtracking as needed)
            found = False
            while not found:
                if depth < max_len:
                    while cand[depth] < k:
                        cc = cand[depth]
                        cand[depth] += 1
                        if cc != inv[letters[depth - 1]]:
                            c = cc
                            found = True
                            break
                if not found:
                    depth -= 1
                    if depth == 0:
                        break
            if not found:
                break
    return words, lens, traces, count


def _lexmin_mask_np(w):
    n = w.shape[1]
    ok = np.ones(w.shape[0], bool)
    for r in range(1, n):
        rot = np.roll(w, -r, axis=1)
        diff = rot != w
        anyd = diff.any(axis=1)
        idx = diff.argmax(axis=1)
        rows = np.arange(w.shape[0])
        less = anyd & (rot[rows, idx] < w[rows, idx])
        ok &= ~less
    return ok


def _enum_words_np(gens, inv, max_len, trace_cap, first_letters):
    k = gens.shape[0]
    lo = 2.0 + HYPERBOLIC_MARGIN
    out_words, out_lens, out_tr = [], [], []
    for f in first_letters:
        w = np.array([[f]], dtype=np.int8)
        m = gens[f][None, :, :].copy()
        for n in range(1, max_len + 1):
            if n > 1:
                last = w[:, -1].astype(np.int64)
                nw, nm = [], []
                for c in range(k):
                    sel = inv[last] != c
                    if not sel.any():
                        continue
                    ws = w[sel]
                    nw.append(np.concatenate([ws, np.full((ws.shape[0], 1), c, np.int8)], axis=1))
                    nm.append(m[sel] @ gens[c])
                w = np.concatenate(nw)
                m = np.concatenate(nm)
                small = np.abs(m[:, 0, 0] * m[:, 1, 1]) < RENORM_LIMIT
                det = m[small, 0, 0] * m[small, 1, 1] - m[small, 0, 1] * m[small, 1, 0]
                m[small] /= np.sqrt(det)[:, None, None]
            atr = np.abs(m[:, 0, 0] + m[:, 1, 1])
            keep = (atr > lo) & (atr <= trace_cap)
            if n > 1:
                keep &= w[:, -1].astype(np.int64) != inv[w[:, 0].astype(np.int64)]
            if keep.any():
                idx = np.flatnonzero(keep)
                idx = idx[_lexmin_mask_np(w[idx])]
                if idx.size:
                    pad = np.full((idx.size, max_len), -1, np.int8)
                    pad[:, :n] = w[idx]
                    out_words.append(pad)
                    out_lens.append(np.full(idx.size, n, np.int64))
                    out_tr.append(atr[idx])
    if not out_words:
        return np.zeros((0, max_len), np.int8), np.zeros(0, np.int64), np.zeros(0)
    return np.concatenate(out_words), np.concatenate(out_lens), np.concatenate(out_tr)


def enumerate_words(gens, inv, max_len, trace_cap=np.inf, use_numba=None):
    """Cyclically reduced, rotation-minimal words with hyperbolic trace.

    Parameters
    ----------
    gens : ndarray (k, 2, 2)
        Letter matrices; letter ``inv[i]`` is the inverse of letter ``i``.
    inv : ndarray (k,)
    max_len : int
        Maximal word length.
    trace_cap : float
        Only words with ``|tr| <= trace_cap`` are returned.

    Returns
    -------
    words : ndarray (n, max_len) int8, padded with -1
    lengths : ndarray (n,)
    traces : ndarray (n,) of ``|tr|``

    Rows are sorted by word length, then lexicographically.  With
    ``use_numba=None`` enumerations of fewer than ``SMALL_ENUMERATION``
    reduced words run on numpy, where they finish before a cold numba
    compile would.
    """
    gens = np.ascontiguousarray(gens, dtype=np.float64)
    inv = np.ascontiguousarray(inv, dtype=np.int64)
    firsts = np.arange(gens.shape[0], dtype=np.int64)
    if use_numba is None:
        k = gens.shape[0]
        reduced = sum(k * (k - 1) ** (n - 1) for n in range(1, int(max_len) + 1))
        use_numba = HAVE_NUMBA and reduced >= SMALL_ENUMERATION
    if use_numba:
        cap = 1 << 14
        while True:
            words, lens, tr, count = _enum_words_nb(gens, inv, int(max_len), float(trace_cap), firsts, cap)
            if count >= 0:
                break
            cap *= 4
        words, lens, tr = words[:count], lens[:count], tr[:count]
    else:
        words, lens, tr = _enum_words_np(gens, inv, int(max_len), float(trace_cap), firsts)
    # lexsort: last key is primary
    keys = [words[:, j] for j in range(words.shape[1] - 1, -1, -1)] + [lens]
    order = np.lexsort(keys)
    return words[order], lens[order], tr[order]


# ---------------------------------------------------------------------------
# heat kernel on H^2
# ---------------------------------------------------------------------------

# Gaussian tail cut: e^{-(r^2 - d^2)/4t} below e^{-HEAT_TAIL}.
HEAT_TAIL = 46.0


@njit
def _log_sinh(x):
    return x + math.log(-math.expm1(-2.0 * x)) - math.log(2.0)


@njit
def _heat_integral_nb(t, d, gl_x, gl_w, levels):
    """int_0^inf g(v) dv after r = d + v^2, Gaussian factor e^{-d^2/4t} removed."""
    vmax2 = -d + math.sqrt(d * d + 4.0 * t * HEAT_TAIL)
    vmax = math.sqrt(vmax2)
    total = 0.0
    for j in range(levels + 1):
        if j < levels:
            b = vmax * 0.5 ** j
            a = vmax * 0.5 ** (j + 1)
        else:
            b = vmax * 0.5 ** levels
            a = 0.0
        half = 0.5 * (b - a)
        mid = 0.5 * (b + a)
        acc = 0.0
        for q in range(gl_x.shape[0]):
            v = mid + half * gl_x[q]
            v2 = v * v
            r = d + v2
            lg = -(2.0 * d * v2 + v2 * v2) / (4.0 * t)
            lg -= 0.5 * (math.log(2.0) + _log_sinh(d + 0.5 * v2) + _log_sinh(0.5 * v2))
            acc += gl_w[q] * 2.0 * v * r * math.exp(lg)
        total += half * acc
    return total


@njit(parallel=HAVE_NUMBA)
def _heat_kernel_nb(t, d, gl_x, gl_w, levels):
    out = np.empty(d.shape[0])
    pref = math.sqrt(2.0) * (4.0 * math.pi * t) ** -1.5 * math.exp(-t / 4.0)
    for i in prange(d.shape[0]):
        di = d[i]
        out[i] = pref * math.exp(-di * di / (4.0 * t)) * _heat_integral_nb(t, di, gl_x, gl_w, levels)
    return out


def _log_sinh_np(x):
    return x + np.log(-np.expm1(-2.0 * x)) - math.log(2.0)


def _heat_kernel_np(t, d, gl_x, gl_w, levels):
    d = np.asarray(d, dtype=float)
    vmax = np.sqrt(-d + np.sqrt(d * d + 4.0 * t * HEAT_TAIL))
    j = np.arange(levels + 1)
    b = vmax[:, None] * 0.5 ** j[None, :]
    a = np.where(j[None, :] < levels, vmax[:, None] * 0.5 ** (j[None, :] + 1), 0.0)
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    v = mid[:, :, None] + half[:, :, None] * gl_x[None, None, :]
    v2 = v * v
    dd = d[:, None, None]
    lg = -(2.0 * dd * v2 + v2 * v2) / (4.0 * t)
    lg -= 0.5 * (math.log(2.0) + _log_sinh_np(dd + 0.5 * v2) + _log_sinh_np(0.5 * v2))
    g = 2.0 * v * (dd + v2) * np.exp(lg)
    integral = np.sum(half * np.tensordot(g, gl_w, axes=([2], [0])), axis=1)
    pref = math.sqrt(2.0) * (4.0 * math.pi * t) ** -1.5 * math.exp(-t / 4.0)
    return pref * np.exp(-d * d / (4.0 * t)) * integral


def heat_kernel_batch(t, d, nodes=24, levels=22, use_numba=None):
    """Heat kernel of H^2 at time ``t`` for an array of distances ``d``.

    Fixed composite Gauss-Legendre rule on panels graded geometrically
    towards the endpoint; accuracy is checked against adaptive quadrature
    in the test suite.
    """
    d = np.ascontiguousarray(np.atleast_1d(np.asarray(d, dtype=float)))
    gl_x, gl_w = np.polynomial.legendre.leggauss(nodes)
    if use_numba is None:
        use_numba = HAVE_NUMBA
    if use_numba:
        return _heat_kernel_nb(float(t), d, gl_x, gl_w, int(levels))
    out = np.empty_like(d)
    step = 4096
    for s in range(0, d.size, step):
        out[s:s + step] = _heat_kernel_np(float(t), d[s:s + step], gl_x, gl_w, int(levels))
    return out


# ---------------------------------------------------------------------------
# geodesic random walk
# ---------------------------------------------------------------------------

@njit(parallel=HAVE_NUMBA)
def _walk_nb(x0, y0, normals, scale):
    npath = normals.shape[0]
    nstep = normals.shape[1]
    out = np.empty(npath)
    for p in prange(npath):
        x = x0
        y = y0
        for s in range(nstep):
            u = scale * normals[p, s, 0]
            v = scale * normals[p, s, 1]
            rho = math.sqrt(u * u + v * v)
            if rho == 0.0:
                continue
            ch = math.cosh(rho)
            sh = math.sinh(rho)
            den = ch - (v / rho) * sh
            x = x + y * (u / rho) * sh / den
            y = y / den
        out[p] = 2.0 * math.asinh(math.hypot(x - x0, y - y0) / (2.0 * math.sqrt(y * y0)))
    return out


def _walk_np(x0, y0, normals, scale):
    npath, nstep = normals.shape[:2]
    x = np.full(npath, float(x0))
    y = np.full(npath, float(y0))
    for s in range(nstep):
        u = scale * normals[:, s, 0]
        v = scale * normals[:, s, 1]
        rho = np.hypot(u, v)
        safe = np.where(rho > 0, rho, 1.0)
        sh = np.sinh(rho)
        den = np.cosh(rho) - (v / safe) * sh
        x = x + y * (u / safe) * sh / den
        y = y / den
    return 2.0 * np.arcsinh(np.hypot(x - x0, y - y0) / (2.0 * np.sqrt(y * y0)))


def geodesic_walk(x0, y0, normals, scale, use_numba=None):
    """Endpoint distances of geodesic random walks driven by ``normals``.

    ``normals`` has shape (paths, steps, 2); each step moves along the
    geodesic with initial velocity ``scale * normals[p, s]`` expressed in
    the orthonormal frame at the current point.
    """
    normals = np.ascontiguousarray(normals, dtype=np.float64)
    if use_numba is None:
        use_numba = HAVE_NUMBA
    if use_numba:
        return _walk_nb(float(x0), float(y0), normals, float(scale))
    return _walk_np(float(x0), float(y0), normals, float(scale))
