"""Euclidean apartments of type affine A2 and affine C2.

Points are exact rational coordinates in a basis of the special-vertex
lattice; the inner product is given by the Gram matrix of that basis, so
adjacent special vertices are at distance 1 in both types.  Walls are the
level sets ``f(x) = k`` (``k`` integer) of a finite family of integral
functionals ``f``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import DegenerateDirection
from .exact import Angle, Surd
from .fields import to_radians

A2 = "A2affine"
C2 = "C2affine"


def _vec(v):
    return (Fraction(v[0]), Fraction(v[1]))


@dataclass(frozen=True)
class ApartmentPoint:
    x: Fraction
    y: Fraction

    def __init__(self, x, y=None):
        if y is None:
            x, y = x
        object.__setattr__(self, "x", Fraction(x))
        object.__setattr__(self, "y", Fraction(y))

    @property
    def coordinates(self):
        return (self.x, self.y)

    def __sub__(self, other):
        return (self.x - other.x, self.y - other.y)

    def translate(self, v, s=1):
        return ApartmentPoint(self.x + s * v[0], self.y + s * v[1])

    def to_json(self):
        return [str(self.x), str(self.y)]


@dataclass(frozen=True)
class Wall:
    """The affine line ``functional . x == level``."""

    family: str
    functional: tuple
    level: int


@dataclass(frozen=True)
class HalfWall:
    """A wall ray leaving a vertex; ``label`` is its facet type."""

    direction: tuple
    label: str


@dataclass(frozen=True)
class WeylData:
    kind: str
    gram: tuple
    families: tuple  # (name, functional) pairs
    rays: tuple  # HalfWall at the origin
    lattice: tuple = ((1, 0), (0, 1))

    def inner(self, u, v):
        (a, b), (c, d) = self.gram
        return u[0] * (a * v[0] + b * v[1]) + u[1] * (c * v[0] + d * v[1])

    def norm2(self, u):
        return self.inner(u, u)

    def dual_vector(self, f):
        """Coordinates of the vector ``n`` with ``<n, x> = f . x``."""
        (a, b), (c, d) = self.gram
        det = Fraction(a * d - b * c)
        return ((d * f[0] - b * f[1]) / det, (-c * f[0] + a * f[1]) / det)

    @property
    def roots(self):
        """Unit normals of the wall families, as ``(vector, norm2)`` pairs."""
        return tuple((self.dual_vector(f), self.norm2(self.dual_vector(f)))
                     for _, f in self.families)

    def reflect(self, wall, p):
        """Reflection of ``p`` in ``wall``."""
        n = self.dual_vector(wall.functional)
        f = wall.functional
        s = 2 * (f[0] * p.x + f[1] * p.y - wall.level) / self.norm2(n)
        return ApartmentPoint(p.x - s * n[0], p.y - s * n[1])

    def is_special(self, p):
        return p.x.denominator == 1 and p.y.denominator == 1


def weyl_data(kind):
    h = Fraction(1, 2)
    if kind == A2:
        # basis e1, e2 at angle pi/3; a vertex (a, b) has type a + 2b mod 3
        rays = []
        for v in [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)]:
            rays.append(HalfWall(v, f"type+{(v[0] + 2 * v[1]) % 3}"))
        return WeylData(A2, ((1, h), (h, 1)),
                        (("a", (1, 0)), ("b", (0, 1)), ("a+b", (1, 1))), tuple(rays))
    if kind == C2:
        rays = []
        for v in [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)]:
            label = "special" if 0 in v else "nonspecial"
            rays.append(HalfWall(v, label))
        return WeylData(C2, ((1, 0), (0, 1)),
                        (("x", (1, 0)), ("y", (0, 1)), ("x+y", (1, 1)), ("x-y", (1, -1))),
                        tuple(rays))
    raise ValueError(f"unknown apartment type {kind!r}")


A2_DATA = weyl_data(A2)
C2_DATA = weyl_data(C2)


@dataclass(frozen=True)
class Ray:
    """A geodesic ray ``base + s * direction / |direction|`` (``s >= 0``)."""

    base: ApartmentPoint
    direction: tuple
    weyl: WeylData = A2_DATA

    def __post_init__(self):
        d = _vec(self.direction)
        if d == (0, 0):
            raise DegenerateDirection("ray direction must be nonzero")
        object.__setattr__(self, "direction", d)

    @property
    def length(self):
        return Surd.sqrt(self.weyl.norm2(self.direction))

    def point(self, s):
        """The point at arclength ``s``; ``s`` must make it rational."""
        scale = Surd.coerce(s) / self.length
        return self.base.translate(self.direction, scale.to_fraction())


def _exact(s):
    return s.coef if isinstance(s, Surd) and s.is_rational() else s


def busemann(r, x):
    """``-<x - base, u>`` for the unit direction ``u`` of ``r``."""
    v = x - r.base
    value = Surd.coerce(-r.weyl.inner(v, r.direction)) / r.length
    return _exact(value)


def horoball_contains(r, level, x):
    return Surd.coerce(busemann(r, x)) <= Surd.coerce(level)


def vertex_angle(a, u, v, weyl=A2_DATA):
    """Angle at ``a`` between ``u`` and ``v`` as an exact :class:`Angle`.

    ``u`` and ``v`` are points, or direction vectors given as ``Ray``
    objects (only their direction is used).
    """
    def arm(w):
        if isinstance(w, Ray):
            return w.direction
        d = w - a
        if d == (0, 0):
            raise DegenerateDirection("angle at a point with itself")
        return d

    du, dv = arm(u), arm(v)
    ip = weyl.inner(du, dv)
    cos2 = ip * ip / (weyl.norm2(du) * weyl.norm2(dv))
    return Angle(cos2, (ip > 0) - (ip < 0))


def busemann_step_bound(d, angle):
    """``d * max(0, -cos(angle))``.

    Exact when ``d`` is exact and ``angle`` is an :class:`Angle` or a
    rational multiple of pi (with tabulated cosine); floats otherwise.
    """
    import math

    if isinstance(angle, float) or isinstance(d, float):
        theta = angle if isinstance(angle, float) else (
            angle.radians if isinstance(angle, Angle) else to_radians(angle))
        return float(d) * max(0.0, -math.cos(theta))
    if not isinstance(angle, Angle):
        angle = Angle.from_pi(angle)
    if angle.sign >= 0:
        return Fraction(0)
    return _exact(Surd.coerce(d) * -angle.cos)


def weyl_walls_through(w, p):
    """All walls of the arrangement containing ``p``."""
    out = set()
    for name, f in w.families:
        level = f[0] * p.x + f[1] * p.y
        if level.denominator == 1:
            out.add(Wall(name, f, int(level)))
    return out


def half_walls_at(w, p):
    """Wall rays leaving ``p`` (6 for A2, 8 for C2 at a special vertex)."""
    walls = weyl_walls_through(w, p)
    out = []
    for ray in w.rays:
        d = ray.direction
        if any(wl.functional[0] * d[0] + wl.functional[1] * d[1] == 0 for wl in walls):
            out.append(HalfWall(d, ray.label))
    return out


def vertex_type(p):
    """Type in Z/3 of a special vertex of the A2 apartment."""
    return int(p.x + 2 * p.y) % 3


# -- scenes ---------------------------------------------------------------

def scene_to_json(points, rays=(), walls=(), levels=(), kind=A2):
    """Apartment scene: named points, named rays, walls and horocycle levels."""
    return {
        "kind": kind,
        "points": {k: p.to_json() for k, p in points.items()},
        "rays": {k: {"base": r.base.to_json(), "direction": [str(c) for c in r.direction]}
                 for k, r in dict(rays).items()},
        "walls": [{"family": wl.family, "functional": list(wl.functional),
                   "level": wl.level} for wl in walls],
        "levels": [str(x) for x in levels],
    }


def scene_to_svg(points, rays=(), walls=(), kind=A2, size=400):
    """A small SVG drawing in the style of the wall/ray figures."""
    w = weyl_data(kind)
    (a, b), (_, d) = w.gram
    # embed the lattice basis in the plane: e1 = (1, 0), e2 = (b, sqrt(d - b^2))
    import math

    e2 = (float(b), math.sqrt(float(d - b * b)))

    def xy(p):
        x, y = float(p[0]), float(p[1])
        return (x + y * e2[0], y * e2[1])

    pts = {k: xy(p.coordinates) for k, p in points.items()}
    if not pts:
        pts = {"": (0.0, 0.0)}
    xs = [v[0] for v in pts.values()]
    ys = [v[1] for v in pts.values()]
    cx, cy = (max(xs) + min(xs)) / 2, (max(ys) + min(ys)) / 2
    span = max(max(xs) - min(xs), max(ys) - min(ys), 2.0) + 2
    scale = size / span

    def screen(v):
        return (size / 2 + (v[0] - cx) * scale, size / 2 - (v[1] - cy) * scale)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}">']
    for wl in walls:
        f = wl.functional
        n = w.dual_vector(f)
        # a point on the wall and a direction along it
        base = tuple(c * wl.level / w.norm2(n) for c in n)
        along = (-f[1], f[0])
        p0 = screen(xy((base[0] - 50 * along[0], base[1] - 50 * along[1])))
        p1 = screen(xy((base[0] + 50 * along[0], base[1] + 50 * along[1])))
        out.append(f'<line x1="{p0[0]:.1f}" y1="{p0[1]:.1f}" x2="{p1[0]:.1f}" '
                   f'y2="{p1[1]:.1f}" stroke="#999" stroke-dasharray="4 3"/>')
    for name, r in dict(rays).items():
        s = screen(xy(r.base.coordinates))
        t = screen(xy((r.base.x + 20 * r.direction[0], r.base.y + 20 * r.direction[1])))
        out.append(f'<line x1="{s[0]:.1f}" y1="{s[1]:.1f}" x2="{t[0]:.1f}" '
                   f'y2="{t[1]:.1f}" stroke="#c33"/>')
        out.append(f'<text x="{s[0] - 30:.1f}" y="{s[1] - 6:.1f}" font-size="11">{name}</text>')
    for name, v in pts.items():
        s = screen(v)
        out.append(f'<circle cx="{s[0]:.1f}" cy="{s[1]:.1f}" r="3"/>')
        out.append(f'<text x="{s[0] + 5:.1f}" y="{s[1] - 5:.1f}" font-size="12">{name}</text>')
    out.append("</svg>")
    return "\n".join(out)
