"""Transfer-operator determinant for Schottky surfaces.

For a Schottky group with disk system ``D_0, ..., D_{2r-1}`` the weighted
composition operator

    (L_s f)(x) = sum_{i : x not in D_{inv(i)}} g_i'(x)^s f_i(g_i x),   x in D_j,

acts on functions analytic on the disks, and det(1 - L_s) equals the
Selberg zeta function.  Each disk is discretised by Chebyshev collocation on
its real diameter, and L_s becomes a ``2rN x 2rN`` matrix whose ``(j, i)``
block is ``diag(g_i'(x_j)^s) @ Lagrange_i(g_i x_j)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .errors import BranchError, ContractionError, NoRoot, SurfaceError
from .surfaces import SurfaceModel

DEFAULT_NODES = 32


@dataclass(frozen=True, eq=False)
class CollocationSystem:
    """Collocation data independent of ``s``.

    Attributes
    ----------
    disks : tuple of (center, radius)
    node_count : int
        Nodes per disk.
    nodes : ndarray (2r, N)
        Chebyshev points on each disk's real diameter.
    branch_data : ndarray (2r, 2r, N)
        ``branch_data[j, i]`` holds g_i' at the nodes of disk j (nan where the
        transition is forbidden).
    interp : ndarray (2r, 2r, N, N)
        Lagrange interpolation matrices from disk i's nodes to ``g_i(nodes_j)``.
    margin : float
        Smallest relative gap between an image interval and the rim of its target.
    """

    disks: tuple
    node_count: int
    nodes: np.ndarray
    branch_data: np.ndarray
    interp: np.ndarray
    margin: float

    @property
    def size(self) -> int:
        return self.nodes.size

    def matrix(self, s) -> np.ndarray:
        """The collocation matrix of L_s (real for real ``s``)."""
        k, N = self.nodes.shape
        complex_s = isinstance(s, complex) or np.iscomplexobj(s)
        dtype = complex if complex_s else float
        M = np.zeros((k * N, k * N), dtype=dtype)
        for j in range(k):
            for i in range(k):
                der = self.branch_data[j, i]
                if np.isnan(der[0]):
                    continue
                wt = np.exp(s * np.log(der))
                M[j * N:(j + 1) * N, i * N:(i + 1) * N] = wt[:, None] * self.interp[j, i]
        return M


def _chebyshev(N):
    k = np.arange(N)
    theta = (2 * k + 1) * np.pi / (2 * N)
    return np.cos(theta), (-1.0) ** k * np.sin(theta)


def _barycentric(x_eval, x_nodes, w):
    diff = x_eval[:, None] - x_nodes[None, :]
    exact = diff == 0.0
    diff[exact] = 1.0
    L = w[None, :] / diff
    L /= L.sum(axis=1, keepdims=True)
    rows = exact.any(axis=1)
    if rows.any():
        L[rows] = exact[rows].astype(float)
    return L


def _require_schottky(model: SurfaceModel):
    if model.kind != "schottky":
        raise SurfaceError(f"transfer operator needs a schottky model, got {model.kind}")


@lru_cache(maxsize=32)
def collocation_system(model: SurfaceModel, N: int = DEFAULT_NODES) -> CollocationSystem:
    """Assemble the ``s``-independent part of the collocation matrix."""
    _require_schottky(model)
    if N < 4:
        raise ValueError("need at least 4 collocation nodes per disk")
    disks = model.schottky_disks
    k = len(disks)
    u, w = _chebyshev(N)
    nodes = np.array([c + r * u for c, r in disks])
    der = np.full((k, k, N), np.nan)
    interp = np.zeros((k, k, N, N))
    margin = math.inf
    for i in range(k):
        g = model.letter(i)
        ci, ri = disks[i]
        for j in range(k):
            if j == i ^ 1:
                continue
            cj, rj = disks[j]
            lo, hi = cj - rj, cj + rj
            if g.c != 0.0 and lo <= -g.d / g.c <= hi:
                raise ContractionError(f"letter {i} has its pole inside disk {j}")
            ends = g(np.array([lo, hi]))
            gap = min(ends.min() - (ci - ri), (ci + ri) - ends.max()) / ri
            margin = min(margin, gap)
            if not gap > 0:
                raise ContractionError(f"letter {i} does not map disk {j} strictly inside disk {i}")
            d = g.derivative(nodes[j])
            if np.any(~np.isfinite(d)) or np.any(d <= 0):
                raise BranchError(f"derivative of letter {i} is not positive on disk {j}")
            der[j, i] = d
            interp[j, i] = _barycentric(g(nodes[j]), nodes[i], w)
    return CollocationSystem(disks, N, nodes, der, interp, float(margin))


def fredholm_det(model: SurfaceModel, s, N: int = DEFAULT_NODES) -> complex:
    """det(1 - L_s) by collocation with ``N`` nodes per disk.

    Parameters
    ----------
    model : SurfaceModel
        Schottky model with a valid disk system.
    s : float or complex
    N : int
        Nodes per disk, at least 4.

    Returns
    -------
    complex
        Real up to rounding when ``s`` is real.
    """
    sysm = collocation_system(model, int(N))
    M = sysm.matrix(s)
    sign, logdet = np.linalg.slogdet(np.eye(M.shape[0]) - M)
    return complex(sign * np.exp(logdet))


def _real_det(model, s, N):
    return fredholm_det(model, float(s), N).real


def real_zero_scan(model: SurfaceModel, interval=(0.0, 1.0), N: int = DEFAULT_NODES,
                   step: float = 0.01) -> list:
    """Real zeros of s -> det(1 - L_s) on ``interval`` by sign-change scan and bisection.

    Only zeros whose refined residual ``|det| < 1e-9`` are reported.
    """
    _require_schottky(model)
    a, b = interval
    a = max(a, 1e-6)
    if not (0 < a < b <= 1.0 + 1e-12):
        raise ValueError("interval must lie in (0, 1]")
    grid = np.linspace(a, b, max(2, int(math.ceil((b - a) / step)) + 1))
    vals = np.array([_real_det(model, s, N) for s in grid])
    zeros = []
    for k in range(len(grid) - 1):
        if vals[k] == 0.0:
            zeros.append(float(grid[k]))
            continue
        if vals[k] * vals[k + 1] < 0:
            root = brentq(lambda s: _real_det(model, s, N), grid[k], grid[k + 1],
                          xtol=1e-12, rtol=1e-14)
            if abs(_real_det(model, root, N)) < 1e-9:
                zeros.append(float(root))
    return zeros


@lru_cache(maxsize=32)
def find_delta(model: SurfaceModel, N: int = DEFAULT_NODES) -> float:
    """Largest real zero of det(1 - L_s) in (0, 1): the exponent of convergence."""
    _require_schottky(model)
    zeros = real_zero_scan(model, (1e-4, 1.0), N, step=0.01)
    if not zeros:
        raise NoRoot("det(1 - L_s) has no sign change on (0, 1)")
    return max(zeros)


def convergence_table(model: SurfaceModel, s, sizes=(8, 12, 16, 24, 32, 48, 64)) -> list:
    """(N, det_N, |det_N - det_max|) rows for inspecting collocation convergence."""
    dets = [fredholm_det(model, s, n) for n in sizes]
    ref = dets[-1]
    return [(n, d, abs(d - ref)) for n, d in zip(sizes, dets)]
