"""Upper half-plane primitives: points, Moebius maps, distance, translation length."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import DomainError, NotHyperbolic

#: Width of the band around |tr| = 2 that is resolved as parabolic.
PARABOLIC_TOL = 1e-10

_DET_TOL = 1e-12
# Beyond this |ad| the computed ad - bc is dominated by cancellation; such
# matrices (long word products) are trusted as given.
_RENORM_LIMIT = 1e6
# word products: renormalising once |ad| is large costs more than the drift it removes
_WORD_RENORM_LIMIT = 10.0


@dataclass(frozen=True)
class HPoint:
    x: float
    y: float

    def __post_init__(self):
        if not (self.y > 0 and math.isfinite(self.y) and math.isfinite(self.x)):
            raise DomainError(f"HPoint needs finite x and y > 0, got ({self.x}, {self.y})")

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)

    @classmethod
    def from_complex(cls, z: complex) -> "HPoint":
        return cls(z.real, z.imag)


class MoebiusTransform:
    """Element of PSL(2, R) stored as a unit-determinant 2x2 matrix.

    The determinant is renormalised on construction, and ``g == -g``.
    """

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a: float, b: float, c: float, d: float):
        det = a * d - b * c
        big = max(abs(a * d), abs(b * c)) > _RENORM_LIMIT
        if not det > 0 and not big:
            raise DomainError(f"matrix determinant must be positive, got {det}")
        if not big and abs(det - 1.0) > _DET_TOL:
            r = math.sqrt(det)
            a, b, c, d = a / r, b / r, c / r, d / r
        self.a, self.b, self.c, self.d = float(a), float(b), float(c), float(d)

    @classmethod
    def from_matrix(cls, m) -> "MoebiusTransform":
        m = np.asarray(m, dtype=float).reshape(2, 2)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    @classmethod
    def identity(cls) -> "MoebiusTransform":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def dilation(cls, length: float) -> "MoebiusTransform":
        """z -> e^length z, hyperbolic with translation length ``length``."""
        h = math.exp(length / 2)
        return cls(h, 0.0, 0.0, 1.0 / h)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    @property
    def trace(self) -> float:
        return self.a + self.d

    def __matmul__(self, other: "MoebiusTransform") -> "MoebiusTransform":
        return MoebiusTransform(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "MoebiusTransform":
        return MoebiusTransform(self.d, -self.b, -self.c, self.a)

    def __pow__(self, n: int) -> "MoebiusTransform":
        if n < 0:
            return self.inverse() ** (-n)
        out = MoebiusTransform.identity()
        base = self
        while n:
            if n & 1:
                out = out @ base
            base = base @ base
            n >>= 1
        return out

    def __call__(self, z):
        """Action on a complex number, an HPoint or a numpy array."""
        if isinstance(z, HPoint):
            return HPoint.from_complex(self(z.z))
        return (self.a * z + self.b) / (self.c * z + self.d)

    def derivative(self, z):
        return 1.0 / (self.c * z + self.d) ** 2

    def __eq__(self, other) -> bool:
        if not isinstance(other, MoebiusTransform):
            return NotImplemented
        p = np.array([self.a, self.b, self.c, self.d])
        q = np.array([other.a, other.b, other.c, other.d])
        scale = max(1.0, np.abs(p).max())
        return bool(np.allclose(p, q, atol=1e-12 * scale, rtol=0) or np.allclose(p, -q, atol=1e-12 * scale, rtol=0))

    def __hash__(self):
        # sign-normalised, coarse rounding keeps hash consistent with __eq__ in practice
        p = (self.a, self.b, self.c, self.d)
        first = next((v for v in p if abs(v) > 1e-9), 1.0)
        s = 1.0 if first > 0 else -1.0
        return hash(tuple(round(s * v, 8) for v in p))

    def __repr__(self):
        return f"MoebiusTransform({self.a!r}, {self.b!r}, {self.c!r}, {self.d!r})"

    def fixed_points(self) -> tuple[float, float]:
        """Repelling and attracting fixed points on the boundary (``inf`` allowed).

        Only meaningful for hyperbolic elements.
        """
        a, b, c, d = self.a, self.b, self.c, self.d
        tr = a + d
        if abs(tr) <= 2:
            raise NotHyperbolic("fixed points requested for a non-hyperbolic element")
        # c x^2 + (d - a) x - b = 0, solved without cancellation
        B = d - a
        sq = math.sqrt(tr * tr - 4.0)
        q = -0.5 * (B + math.copysign(sq, B))
        x_fin = -b / q
        x_other = q / c if c != 0.0 else math.inf
        # the multiplier at a fixed point x is (c x + d)^-2
        if abs(c * x_fin + d) > 1.0:
            return x_other, x_fin
        return x_fin, x_other


def hyp_dist(z: HPoint, w: HPoint) -> float:
    """Hyperbolic distance arccosh(1 + |z-w|^2 / (2 y_z y_w))."""
    dx = z.x - w.x
    dy = z.y - w.y
    # 2 asinh(|z-w| / (2 sqrt(y_z y_w))) avoids cancellation near the diagonal
    return 2.0 * math.asinh(math.hypot(dx, dy) / (2.0 * math.sqrt(z.y * w.y)))


def hyp_dist_array(x1, y1, x2, y2):
    """Vectorised distance for coordinate arrays."""
    return 2.0 * np.arcsinh(np.hypot(x1 - x2, y1 - y2) / (2.0 * np.sqrt(y1 * y2)))


def classify(g: MoebiusTransform, tol: float = PARABOLIC_TOL) -> str:
    """One of ``identity``, ``elliptic``, ``parabolic``, ``hyperbolic``."""
    if g == MoebiusTransform.identity():
        return "identity"
    t = abs(g.trace)
    if abs(t - 2.0) <= tol:
        return "parabolic"
    return "hyperbolic" if t > 2.0 else "elliptic"


def translation_length(g: MoebiusTransform) -> float:
    """2 arccosh(|tr g| / 2) for hyperbolic ``g``."""
    if classify(g) != "hyperbolic":
        raise NotHyperbolic(f"translation length undefined for trace {g.trace}")
    return trace_to_length(g.trace)


def trace_to_length(tr):
    """Vectorised 2 arccosh(|tr| / 2)."""
    return 2.0 * np.arccosh(np.abs(tr) / 2.0)


def word_matrix(letters: Iterable[int], gens: np.ndarray) -> np.ndarray:
    """Product of letter matrices, left to right, with determinant renormalisation.

    Renormalisation stops once ``|a d|`` exceeds ``_WORD_RENORM_LIMIT``.
    """
    m = np.eye(2)
    for k in letters:
        m = m @ gens[k]
        if abs(m[0, 0] * m[1, 1]) < _WORD_RENORM_LIMIT:
            m /= math.sqrt(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])
    return m
