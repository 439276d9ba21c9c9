"""Monte Carlo check of the heat kernel by geodesic random walks on H^2.

Brownian motion runs at speed 2 (generator the Laplacian, quadratic
variation 4t at time t): each of the ``step_count`` steps draws a tangent
vector whose two orthonormal coordinates are centred Gaussians of variance
``2 t / step_count`` and moves along the geodesic with that initial velocity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import interpolate, stats

from .errors import DomainError
from .heat_trace import HeatTime, heat_kernel_array
from .kernels import geodesic_walk

#: Paths below which ``validate_kernel`` flags the sample as too small.
MIN_PATHS = 10_000

#: Paths per batch of normals held in memory at once.
BATCH = 4096


@dataclass(frozen=True)
class SimulationConfig:
    """Parameters of a geodesic random-walk run.

    Attributes
    ----------
    t : float
        Final time.
    step_count : int
        Number of geodesic steps, at least 100.
    path_count : int
        Number of independent paths.
    seed : int
        64-bit seed; path ``k`` uses the Philox stream keyed by ``(seed, k)``.
    base_point : tuple of float
        Starting point ``(x, y)`` in the upper half-plane.
    """

    t: float
    step_count: int = 2000
    path_count: int = 100_000
    seed: int = 0
    base_point: tuple = (0.0, 1.0)

    def __post_init__(self):
        HeatTime(self.t)
        if int(self.step_count) != self.step_count or self.step_count < 100:
            raise DomainError("step_count must be an integer >= 100")
        if int(self.path_count) != self.path_count or self.path_count < 1:
            raise DomainError("path_count must be a positive integer")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise DomainError("seed must fit in 64 unsigned bits")
        if not self.base_point[1] > 0:
            raise DomainError("base point must lie in the upper half-plane")


def _path_normals(seed: int, first: int, count: int, steps: int) -> np.ndarray:
    out = np.empty((count, steps, 2))
    for k in range(count):
        key = np.array([seed, first + k], dtype=np.uint64)
        out[k] = np.random.Generator(np.random.Philox(key=key)).standard_normal((steps, 2))
    return out


def sample_endpoint_distances(cfg: SimulationConfig, use_numba=None) -> np.ndarray:
    """Hyperbolic distance from the base point to each path's endpoint, ordered by path id."""
    scale = math.sqrt(2.0 * cfg.t / cfg.step_count)
    x0, y0 = map(float, cfg.base_point)
    out = np.empty(cfg.path_count)
    for first in range(0, cfg.path_count, BATCH):
        count = min(BATCH, cfg.path_count - first)
        normals = _path_normals(int(cfg.seed), first, count, cfg.step_count)
        out[first:first + count] = geodesic_walk(x0, y0, normals, scale, use_numba=use_numba)
    return out


def endpoint_cdf(t: float, panels: int = 400, nodes: int = 16):
    """CDF of d(z0, W_t), i.e. int_0^r p(t, rho) 2 pi sinh rho d rho, as a spline."""
    t = HeatTime(t).t
    r_max = 2.0 * t + 20.0 * math.sqrt(t) + 5.0
    edges = np.linspace(0.0, r_max, panels + 1)
    gx, gw = np.polynomial.legendre.leggauss(nodes)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    r = (mid[:, None] + half[:, None] * gx[None, :]).ravel()
    dens = heat_kernel_array(t, r) * 2.0 * math.pi * np.sinh(r)
    mass = (dens.reshape(panels, nodes) * gw[None, :]).sum(axis=1) * half
    cdf = np.concatenate([[0.0], np.cumsum(mass)])
    spline = interpolate.PchipInterpolator(edges, cdf, extrapolate=False)

    def F(x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= r_max, 1.0, np.nan_to_num(spline(np.clip(x, 0.0, r_max)), nan=1.0))

    return F


@dataclass(frozen=True)
class KernelReport:
    """Comparison of simulated endpoint distances with the heat-kernel law.

    ``cosh_stderr`` is the standard error of the sample mean of cosh d and
    ``cosh_z`` the deviation from e^{2t} in those units.
    """

    ks_statistic: float
    p_value: float
    cosh_mean: float
    cosh_expected: float
    cosh_stderr: float
    cosh_z: float
    path_count: int
    insufficient: bool

    @property
    def passed(self) -> bool:
        return not self.insufficient and self.p_value > 0.01 and abs(self.cosh_z) <= 3.0


def compare_distances(t: float, d: np.ndarray) -> KernelReport:
    d = np.asarray(d, dtype=float)
    n = d.size
    ks = stats.kstest(d, endpoint_cdf(t))
    c = np.cosh(d)
    mean = float(c.mean())
    se = float(c.std(ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    expected = math.exp(2.0 * t)
    z = (mean - expected) / se if se > 0 else math.inf
    return KernelReport(float(ks.statistic), float(ks.pvalue), mean, expected, se, z, n, n < MIN_PATHS)


def validate_kernel(cfg: SimulationConfig, use_numba=None) -> KernelReport:
    """KS test and cosh moment of the simulated endpoint law against the heat kernel."""
    return compare_distances(cfg.t, sample_endpoint_distances(cfg, use_numba=use_numba))
