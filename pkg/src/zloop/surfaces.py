"""Surface catalogue: cylinders, three-funnel Schottky surfaces, the Bolza surface.

Letter convention: generator ``i`` gives letter ``2i`` and its inverse gives
letter ``2i + 1``; letters print as ``a, A, b, B, ...``.  For Schottky
models ``disks[2i]`` is the disk of ``g_i`` and ``disks[2i + 1]`` the disk of
``g_i^{-1}``; ``g_i`` maps the exterior of ``disks[2i + 1]`` onto the
interior of ``disks[2i]``.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from .errors import SurfaceError
from .hyperbolic import MoebiusTransform, classify, translation_length

KINDS = ("cylinder", "schottky", "octagon")
DISK_TOL = 1e-8


def letter_name(k: int) -> str:
    base = chr(ord("a") + k // 2)
    return base.upper() if k % 2 else base


def word_to_str(word) -> str:
    return "".join(letter_name(int(k)) for k in word)


def str_to_word(s: str) -> tuple[int, ...]:
    out = []
    for ch in s:
        k = 2 * (ord(ch.lower()) - ord("a"))
        out.append(k + 1 if ch.isupper() else k)
    return tuple(out)


@dataclass(frozen=True, eq=False)
class SurfaceModel:
    """A presentation of a torsion-free Fuchsian group with geometric metadata."""

    kind: str
    generators: tuple
    schottky_disks: tuple | None = None
    n_c: int = 0
    euler_char: int = 0
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(self.generators))
        if self.schottky_disks is not None:
            object.__setattr__(
                self, "schottky_disks", tuple((float(c), float(r)) for c, r in self.schottky_disks)
            )
        validate(self)

    # models are used as cache keys
    def _key(self):
        return (self.kind, tuple((g.a, g.b, g.c, g.d) for g in self.generators), self.schottky_disks,
                self.n_c, self.euler_char)

    def __eq__(self, other):
        return isinstance(other, SurfaceModel) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    @property
    def rank(self) -> int:
        return len(self.generators)

    @cached_property
    def letter_matrices(self) -> np.ndarray:
        out = np.empty((2 * self.rank, 2, 2))
        for i, g in enumerate(self.generators):
            out[2 * i] = g.matrix
            out[2 * i + 1] = g.inverse().matrix
        return out

    @cached_property
    def inverse_letters(self) -> np.ndarray:
        return np.array([k ^ 1 for k in range(2 * self.rank)], dtype=np.int64)

    @property
    def letters(self) -> list[str]:
        return [letter_name(k) for k in range(2 * self.rank)]

    def letter(self, k: int) -> MoebiusTransform:
        g = self.generators[k // 2]
        return g.inverse() if k % 2 else g

    def word_transform(self, word) -> MoebiusTransform:
        m = MoebiusTransform.identity()
        for k in word:
            m = m @ self.letter(int(k))
        return m

    def intervals(self) -> np.ndarray:
        """Disk traces on the real line, shape (2r, 2)."""
        if self.schottky_disks is None:
            raise SurfaceError(f"{self.kind} model carries no disks")
        return np.array([(c - r, c + r) for c, r in self.schottky_disks])

    def to_dict(self) -> dict:
        d = {
            "kind": self.kind,
            "generators": [[g.a, g.b, g.c, g.d] for g in self.generators],
            "n_c": self.n_c,
            "euler_char": self.euler_char,
        }
        if self.schottky_disks is not None:
            d["disks"] = [list(x) for x in self.schottky_disks]
        if self.name:
            d["name"] = self.name
        return d

    def summary(self) -> dict:
        return {
            "name": self.name or self.kind,
            "kind": self.kind,
            "rank": self.rank,
            "generator_traces": [abs(g.trace) for g in self.generators],
            "generator_lengths": [translation_length(g) for g in self.generators],
            "euler_char": self.euler_char,
            "n_c": self.n_c,
        }


def validate(model: SurfaceModel) -> None:
    """Raise :class:`SurfaceError` unless ``model`` satisfies the type invariants."""
    if model.kind not in KINDS:
        raise SurfaceError(f"kind must be one of {KINDS}, got {model.kind!r}")
    if not model.generators:
        raise SurfaceError("at least one generator required")
    for i, g in enumerate(model.generators):
        if not isinstance(g, MoebiusTransform):
            raise SurfaceError(f"generators[{i}] is not a MoebiusTransform")
        cls = classify(g)
        if cls != "hyperbolic":
            raise SurfaceError(f"generators[{i}] is {cls}, expected hyperbolic")
    if model.n_c != 0:
        raise SurfaceError("cusped surfaces are not supported (n_c must be 0)")
    r = model.rank
    expected = {"cylinder": 0, "schottky": 1 - r, "octagon": -2}[model.kind]
    if model.kind == "cylinder" and r != 1:
        raise SurfaceError("a cylinder has exactly one generator")
    if model.kind == "octagon" and r != 4:
        raise SurfaceError("an octagon model has four side-pairing generators")
    if model.euler_char != expected:
        raise SurfaceError(f"euler_char {model.euler_char} inconsistent with {model.kind} of rank {r} "
                           f"(expected {expected})")
    if model.kind == "schottky":
        _validate_disks(model)


def _validate_disks(model: SurfaceModel) -> None:
    disks = model.schottky_disks
    r = model.rank
    if disks is None or len(disks) != 2 * r:
        raise SurfaceError(f"schottky model needs {2 * r} disks, one per letter")
    for i, (c, rad) in enumerate(disks):
        if not rad > 0:
            raise SurfaceError(f"disks[{i}] has non-positive radius")
    for i in range(2 * r):
        for j in range(i + 1, 2 * r):
            ci, ri = disks[i]
            cj, rj = disks[j]
            if abs(ci - cj) <= ri + rj:
                raise SurfaceError(f"disks[{i}] and disks[{j}] overlap")
    theta = np.linspace(0, 2 * np.pi, 17)[:-1] + 0.1
    for k in range(2 * r):
        g = model.letter(k)
        src_c, src_r = disks[k ^ 1]
        dst_c, dst_r = disks[k]
        pts = src_c + src_r * np.exp(1j * theta)
        img = g(pts)
        err = np.abs(np.abs(img - dst_c) - dst_r).max()
        if err > DISK_TOL * max(1.0, dst_r):
            raise SurfaceError(f"letter {letter_name(k)} does not map the boundary of disk "
                               f"{k ^ 1} onto disk {k} (error {err:.2e})")
        # a point outside the source disk must land inside the target disk
        out_pt = src_c + 2.0 * src_r + 1e3 * (1 + abs(src_c)) * 1j
        if abs(g(out_pt) - dst_c) >= dst_r:
            raise SurfaceError(f"letter {letter_name(k)} maps the exterior of disk {k ^ 1} "
                               f"outside disk {k}")


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------

def cylinder(length: float = 1.0) -> SurfaceModel:
    """Hyperbolic cylinder generated by z -> e^length z."""
    if not length > 0:
        raise SurfaceError("cylinder length must be positive")
    return SurfaceModel("cylinder", (MoebiusTransform.dilation(length),), None, 0, 0,
                        name=f"cylinder({length:g})")


def _boundary_point(angle: float) -> float:
    # Cayley image of e^{i angle}: i (1 + w)/(1 - w) = -cot(angle/2)
    return -1.0 / math.tan(angle / 2.0)


def _geodesic_circle(centre_angle: float, half_width: float) -> tuple[float, float]:
    x1 = _boundary_point(centre_angle - half_width)
    x2 = _boundary_point(centre_angle + half_width)
    return (x1 + x2) / 2.0, abs(x2 - x1) / 2.0


def _reflection(c: float, r: float) -> np.ndarray:
    # z -> c + r^2 / (conj(z) - c) as the matrix acting on conj(z), scaled to det -1
    return np.array([[c, r * r - c * c], [1.0, -c]]) / r


def _funnel3_parts(half_width: float):
    circles = [_geodesic_circle(t, half_width) for t in (math.pi / 3, math.pi, 5 * math.pi / 3)]
    refl = [_reflection(c, r) for c, r in circles]
    a = MoebiusTransform.from_matrix(refl[0] @ refl[1])
    b = MoebiusTransform.from_matrix(refl[2] @ refl[1])
    return circles, a, b


def funnel3(length: float = 5.0) -> SurfaceModel:
    """Symmetric three-funnel surface with all three boundary geodesics of ``length``.

    The group is the orientation-preserving half of the reflection group in
    three disjoint geodesics C1, C2, C3 placed with three-fold symmetry;
    ``a = R1 R2``, ``b = R3 R2`` and ``a b^-1 = R1 R3`` all translate by
    ``length``.  Coordinates are then chosen so that C2 is the imaginary
    axis: R2 becomes the mirror x -> -x, the disk of ``a^-1`` is the mirror
    image of C1, and every letter is a strict contraction outside the disk
    of its inverse (the disks are the letters' isometric circles).
    """
    if not length > 0:
        raise SurfaceError("funnel length must be positive")

    def excess(w):
        return translation_length(_funnel3_parts(w)[1]) - length

    w = brentq(excess, 1e-6, math.pi / 3 - 1e-12, xtol=1e-15, rtol=1e-15)
    circles, a, b = _funnel3_parts(w)
    (c1, r1), (c2, r2), (c3, r3) = circles
    # send the endpoints c2 + r2, c2 - r2 of C2 to 0 and infinity
    T = MoebiusTransform(1.0, -(c2 + r2), 1.0, -(c2 - r2))
    Ti = T.inverse()
    a2, b2 = T @ a @ Ti, T @ b @ Ti

    def image_disk(c, r):
        u, v = T(c - r), T(c + r)
        lo, hi = min(u, v), max(u, v)
        return (lo + hi) / 2, (hi - lo) / 2

    d1, d3 = image_disk(c1, r1), image_disk(c3, r3)
    disks = (d1, (-d1[0], d1[1]), d3, (-d3[0], d3[1]))
    return SurfaceModel("schottky", (a2, b2), disks, 0, -1, name=f"funnel3({length:g})")


def schottky_from_circles(pairs, name: str = "") -> SurfaceModel:
    """Schottky model from pairs ``(source, target)`` of disjoint geodesic circles.

    Each pair ``((c1, r1), (c2, r2))`` gives the generator
    ``z -> c2 - r1 r2 / (z - c1)``, which maps the exterior of the source
    circle onto the interior of the target circle.
    """
    gens = []
    disks = []
    for (c1, r1), (c2, r2) in pairs:
        gens.append(MoebiusTransform(c2, -r1 * r2 - c1 * c2, 1.0, -c1))
        disks += [(c2, r2), (c1, r1)]
    return SurfaceModel("schottky", tuple(gens), tuple(disks), 0, 1 - len(gens), name=name)


def bolza() -> SurfaceModel:
    """Bolza surface from the side pairings of the regular octagon centred at i."""
    s2 = math.sqrt(2.0)
    p = 1 + s2
    q = math.sqrt(2 * (1 + s2))
    cayley = np.array([[1, -1j], [1, 1j]])
    cayley_inv = np.linalg.inv(cayley)
    gens = []
    for k in range(4):
        e = np.exp(1j * k * np.pi / 4)
        su = np.array([[p, q * e], [q * np.conj(e), p]])
        m = cayley_inv @ su @ cayley
        if np.abs(m.imag).max() > 1e-12:
            raise SurfaceError("octagon side pairing is not real")
        gens.append(MoebiusTransform.from_matrix(m.real))
    return SurfaceModel("octagon", tuple(gens), None, 0, -2, name="bolza")


_PRESET_RE = re.compile(r"^\s*([a-z0-9_]+)\s*(?:\(\s*([^)]*)\s*\))?\s*$")


def preset(spec: str) -> SurfaceModel:
    """Build a preset from strings like ``cylinder(1)``, ``funnel3(5)``, ``bolza``."""
    m = _PRESET_RE.match(spec.lower())
    if not m:
        raise SurfaceError(f"cannot parse preset {spec!r}")
    name, arg = m.group(1), m.group(2)
    try:
        val = float(arg) if arg else None
    except ValueError:
        raise SurfaceError(f"preset argument must be a number, got {arg!r}") from None
    if name == "cylinder":
        return cylinder(1.0 if val is None else val)
    if name == "funnel3":
        return funnel3(5.0 if val is None else val)
    if name == "bolza":
        if val is not None:
            raise SurfaceError("bolza takes no argument")
        return bolza()
    raise SurfaceError(f"unknown preset {name!r}; choose cylinder(l), funnel3(l) or bolza")


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------

def from_dict(d) -> SurfaceModel:
    """Parse the surface JSON schema; errors name the offending path."""
    if not isinstance(d, dict):
        raise SurfaceError("$: expected an object")
    kind = d.get("kind")
    if kind not in KINDS:
        raise SurfaceError(f"$.kind: expected one of {KINDS}, got {kind!r}")
    gens_raw = d.get("generators")
    if not isinstance(gens_raw, list) or not gens_raw:
        raise SurfaceError("$.generators: expected a non-empty list")
    gens = []
    for i, g in enumerate(gens_raw):
        if not (isinstance(g, list) and len(g) == 4 and all(isinstance(v, (int, float)) for v in g)):
            raise SurfaceError(f"$.generators[{i}]: expected [a, b, c, d]")
        try:
            gens.append(MoebiusTransform(*map(float, g)))
        except ValueError as exc:
            raise SurfaceError(f"$.generators[{i}]: {exc}") from None
    disks = d.get("disks")
    if disks is not None:
        if not isinstance(disks, list):
            raise SurfaceError("$.disks: expected a list of [center, radius]")
        for i, x in enumerate(disks):
            if not (isinstance(x, list) and len(x) == 2 and all(isinstance(v, (int, float)) for v in x)):
                raise SurfaceError(f"$.disks[{i}]: expected [center, radius]")
        disks = tuple(tuple(map(float, x)) for x in disks)
    for key in ("n_c", "euler_char"):
        if key in d and not isinstance(d[key], int):
            raise SurfaceError(f"$.{key}: expected an integer")
    return SurfaceModel(kind, tuple(gens), disks or None, d.get("n_c", 0), d.get("euler_char", 0),
                        name=str(d.get("name", "")))


def load(path) -> SurfaceModel:
    try:
        d = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SurfaceError(f"$: invalid JSON ({exc})") from None
    return from_dict(d)


def dump(model: SurfaceModel, path) -> None:
    Path(path).write_text(json.dumps(model.to_dict(), indent=2))


# ---------------------------------------------------------------------------
# Dirichlet domain at i (octagon models), Klein model coordinates
# ---------------------------------------------------------------------------

def h_to_klein(z):
    p = (z - 1j) / (z + 1j)
    return 2 * p / (1 + np.abs(p) ** 2)


def klein_to_h(k):
    p = k / (1 + np.sqrt(np.maximum(0.0, 1 - np.abs(k) ** 2)))
    return 1j * (1 + p) / (1 - p)


def boundary_to_klein(x: float) -> complex:
    """Ideal point of R u {inf} on the unit circle."""
    if math.isinf(x):
        return 1.0 + 0j
    return complex((x - 1j) / (x + 1j))


@dataclass
class DirichletDomain:
    """Convex polygon in the Klein model: {k : <k, n_j> <= h_j for all letters j}."""

    normals: np.ndarray
    offsets: np.ndarray
    vertices: np.ndarray

    def contains(self, k: complex, tol: float = 1e-9) -> bool:
        v = np.array([k.real, k.imag])
        return bool(np.all(self.normals @ v <= self.offsets + tol))

    def meets_chord(self, e1: complex, e2: complex, tol: float = 1e-9) -> bool:
        """Whether the chord between ideal points e1, e2 meets the closed polygon."""
        dx, dy = e2.real - e1.real, e2.imag - e1.imag
        norm = math.hypot(dx, dy)
        side = (dx * (self.vertices.imag - e1.imag) - dy * (self.vertices.real - e1.real)) / norm
        return bool(side.min() <= tol and side.max() >= -tol)


def dirichlet_domain(model: SurfaceModel) -> DirichletDomain:
    """Dirichlet polygon centred at i cut out by the letters' bisectors."""
    normals, offsets = [], []
    for k in range(2 * model.rank):
        img = model.letter(k)(1j)
        kk = h_to_klein(img)
        rho = abs(kk)
        dist = math.atanh(rho)
        normals.append([kk.real / rho, kk.imag / rho])
        offsets.append(math.tanh(dist / 2))
    normals = np.array(normals)
    offsets = np.array(offsets)
    # clip a large square by every half-plane
    poly = [complex(x, y) for x, y in ((-2, -2), (2, -2), (2, 2), (-2, 2))]
    for n, h in zip(normals, offsets):
        out = []
        m = len(poly)
        for i in range(m):
            p, q = poly[i], poly[(i + 1) % m]
            fp = n[0] * p.real + n[1] * p.imag - h
            fq = n[0] * q.real + n[1] * q.imag - h
            if fp <= 0:
                out.append(p)
            if fp * fq < 0:
                out.append(p + (q - p) * (fp / (fp - fq)))
        poly = out
    verts = np.array(poly)
    if np.abs(verts).max() >= 1:
        raise SurfaceError("Dirichlet polygon is not compact; octagon generators look wrong")
    return DirichletDomain(normals, offsets, verts)
