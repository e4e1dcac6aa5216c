"""Finite generalized polygons and their CAT(1) realization.

Panels carry dense integer ids: points are ``0..P-1`` and lines are
``P..P+L-1``.  Angles and CAT(1) distances are exact :class:`Fraction`
multiples of pi throughout; use :func:`forge.fields.to_radians` for floats.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from itertools import combinations

import numpy as np

from .errors import GeometryAxiomError, UnknownFlag, UnknownPanel, UnsupportedOrder
from .fields import field, format_pi, parse_pi

GONALITY = {"A2": 3, "C2": 4, "G2": 6}


class IncidenceGeometry:
    """Bipartite point/line geometry housing a rank-2 spherical building.

    Immutable once built.  ``incidence`` holds ``(point_id, line_id)`` pairs
    using global panel ids.
    """

    def __init__(self, kind, num_points, num_lines, incidence, *, coords=None,
                 q=None, name=None):
        if kind not in GONALITY:
            raise ValueError(f"unknown kind {kind!r}")
        self.kind = kind
        self.n = GONALITY[kind]
        self.num_points = num_points
        self.num_lines = num_lines
        self.q = q
        self.name = name or kind
        # point coordinates (projective vectors) when built from a vector space
        self.coords = coords
        inc = set()
        for p, l in incidence:
            if not (0 <= p < num_points and num_points <= l < num_points + num_lines):
                raise UnknownPanel(f"bad incidence pair {(p, l)}")
            inc.add((p, l))
        self.incidence = frozenset(inc)
        nbrs = [[] for _ in range(self.num_panels)]
        for p, l in sorted(inc):
            nbrs[p].append(l)
            nbrs[l].append(p)
        self.neighbors = tuple(tuple(sorted(x)) for x in nbrs)
        self._dist = None
        self._lines_on = None

    # -- basic structure --------------------------------------------------
    @property
    def num_panels(self):
        return self.num_points + self.num_lines

    @property
    def points(self):
        return range(self.num_points)

    @property
    def lines(self):
        return range(self.num_points, self.num_panels)

    @property
    def panels(self):
        return range(self.num_panels)

    @property
    def arc(self):
        """Length of one chamber arc, as a multiple of pi."""
        return Fraction(1, self.n)

    def is_point(self, a):
        return 0 <= a < self.num_points

    def panel_type(self, a):
        self.check_panel(a)
        return 0 if a < self.num_points else 1

    def check_panel(self, a):
        if not (isinstance(a, (int, np.integer)) and 0 <= a < self.num_panels):
            raise UnknownPanel(f"no panel {a!r} in {self.name}")

    def flags(self):
        """All chambers ``(point, line)`` in id-ascending order."""
        return sorted(self.incidence)

    def points_on(self, line):
        return self.neighbors[line]

    def lines_through(self, point):
        return self.neighbors[point]

    def line_point_sets(self):
        """Map ``frozenset(points) -> line id``."""
        if self._lines_on is None:
            self._lines_on = {frozenset(self.neighbors[l]): l for l in self.lines}
        return self._lines_on

    # -- metric -----------------------------------------------------------
    @property
    def distances(self):
        """All-pairs incidence-graph distances (BFS from every panel)."""
        if self._dist is None:
            N = self.num_panels
            D = np.full((N, N), -1, dtype=np.int16)
            for s in range(N):
                D[s, s] = 0
                queue = deque([s])
                while queue:
                    u = queue.popleft()
                    du = D[s, u]
                    for w in self.neighbors[u]:
                        if D[s, w] < 0:
                            D[s, w] = du + 1
                            queue.append(w)
            D.setflags(write=False)
            self._dist = D
        return self._dist

    def verify(self):
        """Audit the generalized polygon axioms; raise on failure.

        Returns a summary dict (counts, girth, diameter).
        """
        D = self.distances
        if (D < 0).any():
            raise GeometryAxiomError(f"{self.name}: incidence graph disconnected")
        for p, l in self.incidence:
            if not (self.is_point(p) and not self.is_point(l)):
                raise GeometryAxiomError(f"{self.name}: not bipartite")
        diameter = int(D.max())
        girth = incidence_girth(self)
        degs = [len(x) for x in self.neighbors]
        if min(degs) < 2:
            raise GeometryAxiomError(f"{self.name}: thinness violated")
        if girth != 2 * self.n or diameter != self.n:
            raise GeometryAxiomError(
                f"{self.name}: girth {girth}, diameter {diameter}; expected {2 * self.n}, {self.n}"
            )
        return {
            "kind": self.kind,
            "n": self.n,
            "points": self.num_points,
            "lines": self.num_lines,
            "flags": len(self.incidence),
            "girth": girth,
            "diameter": diameter,
            "lines_per_point": sorted({degs[p] for p in self.points}),
            "points_per_line": sorted({degs[l] for l in self.lines}),
        }

    # -- realized points --------------------------------------------------
    def realized(self, point, line, theta=Fraction(0)):
        """A point of the CAT(1) realization on the arc of ``(point, line)``."""
        if (point, line) not in self.incidence:
            raise UnknownFlag(f"({point}, {line}) is not a flag of {self.name}")
        theta = Fraction(theta)
        if not 0 <= theta <= self.arc:
            raise ValueError(f"offset {theta} outside [0, 1/{self.n}]")
        return RealizedPoint(point, line, theta, self.n)

    def panel_point(self, a):
        """The realized point sitting exactly at panel ``a``."""
        self.check_panel(a)
        if self.is_point(a):
            return RealizedPoint(a, self.neighbors[a][0], Fraction(0), self.n)
        return RealizedPoint(self.neighbors[a][0], a, Fraction(1, self.n), self.n)

    def midpoint(self, flag):
        p, l = flag
        return self.realized(p, l, Fraction(1, 2 * self.n))

    # -- serialization ----------------------------------------------------
    def to_json(self):
        return {
            "kind": self.kind,
            "n": self.n,
            "points": list(self.points),
            "lines": list(self.lines),
            "incidence": [[p, l] for p, l in sorted(self.incidence)],
        }

    @classmethod
    def from_json(cls, data):
        if isinstance(data, str):
            data = json.loads(data)
        points, lines = data["points"], data["lines"]
        if points != list(range(len(points))) or lines != list(
            range(len(points), len(points) + len(lines))
        ):
            raise ValueError("panel ids must be dense: points first, then lines")
        g = cls(data["kind"], len(points), len(lines), [tuple(x) for x in data["incidence"]])
        if g.n != data.get("n", g.n):
            raise ValueError("n does not match kind")
        return g

    def to_dot(self):
        out = [f"graph {self.kind} {{"]
        for p in self.points:
            out.append(f'  {p} [shape=circle,label="P{p}"];')
        for l in self.lines:
            out.append(f'  {l} [shape=box,label="L{l}"];')
        for p, l in sorted(self.incidence):
            out.append(f"  {p} -- {l};")
        out.append("}")
        return "\n".join(out) + "\n"

    def __repr__(self):
        return f"IncidenceGeometry({self.name}: {self.num_points} points, {self.num_lines} lines)"


@dataclass(frozen=True, eq=False)
class RealizedPoint:
    """Point on the arc of flag ``(point, line)``, ``theta`` pi-units from the point."""

    point: int
    line: int
    theta: Fraction
    n: int = dc_field(repr=False)

    @property
    def flag(self):
        return (self.point, self.line)

    def key(self):
        if self.theta == 0:
            return ("panel", self.point)
        if self.theta == Fraction(1, self.n):
            return ("panel", self.line)
        return ("arc", self.point, self.line, self.theta)

    def panel(self):
        """Panel id when this point is a vertex of the realization, else None."""
        k = self.key()
        return k[1] if k[0] == "panel" else None

    def __eq__(self, other):
        if not isinstance(other, RealizedPoint):
            return NotImplemented
        return self.n == other.n and self.key() == other.key()

    def __hash__(self):
        return hash((self.n, self.key()))

    def to_json(self):
        return {"flag": [self.point, self.line], "theta": format_pi(self.theta)}

    @staticmethod
    def from_json(g, data):
        p, l = data["flag"]
        return g.realized(p, l, parse_pi(data["theta"]))


def incidence_girth(g):
    """Girth of the incidence graph by BFS from every vertex."""
    best = None
    N = g.num_panels
    for s in range(N):
        dist = [-1] * N
        parent = [-1] * N
        dist[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for w in g.neighbors[u]:
                if dist[w] < 0:
                    dist[w] = dist[u] + 1
                    parent[w] = u
                    queue.append(w)
                elif parent[u] != w:
                    cyc = dist[u] + dist[w] + 1
                    if best is None or cyc < best:
                        best = cyc
    return best


# -- metric operations ------------------------------------------------------

def graph_distance(g, a, b):
    g.check_panel(a)
    g.check_panel(b)
    return int(g.distances[a, b])


def is_opposite(g, a, b):
    return graph_distance(g, a, b) == g.n


def _check_realized(g, x):
    if x.n != g.n or (x.point, x.line) not in g.incidence:
        raise UnknownFlag(f"{x!r} is not a point of {g.name}")


def _endpoint_offsets(g, x):
    return ((x.point, x.theta), (x.line, g.arc - x.theta))


def cat1_distance(g, x, y):
    """CAT(1) distance between realized points, as a multiple of pi."""
    _check_realized(g, x)
    _check_realized(g, y)
    if x == y:
        return Fraction(0)
    D = g.distances
    best = Fraction(1)
    if x.flag == y.flag:
        best = min(best, abs(x.theta - y.theta))
    for u, du in _endpoint_offsets(g, x):
        for v, dv in _endpoint_offsets(g, y):
            cand = du + Fraction(int(D[u, v]), g.n) + dv
            if cand < best:
                best = cand
    return best


def panel_distance(g, a, x):
    """CAT(1) distance from panel ``a`` to realized point ``x``."""
    return cat1_distance(g, g.panel_point(a), x)


def dual(g):
    """Swap the roles of points and lines."""
    P = g.num_points
    L = g.num_lines
    # old line l -> new point l-P ; old point p -> new line L+p
    inc = [(l - P, L + p) for p, l in g.incidence]
    return IncidenceGeometry(g.kind, L, P, inc, q=g.q, name=f"dual({g.name})")


# -- constructions ----------------------------------------------------------

def build_projective_plane(q):
    """PG(2, q): points and lines are 1- and 2-subspaces of ``F_q^3``."""
    if q not in (2, 3, 4, 5):
        raise UnsupportedOrder(f"projective plane order {q} not supported (2..5)")
    F = field(q)
    pts = F.projective_points(3)
    # a line is the kernel of a normalized dual vector
    duals = F.projective_points(3)
    P = len(pts)
    inc = [(i, P + j) for j, u in enumerate(duals) for i, v in enumerate(pts) if F.dot(u, v) == 0]
    g = IncidenceGeometry("A2", P, len(duals), inc, coords=pts, q=q, name=f"PG(2,{q})")
    g.line_coords = duals
    return g


def symplectic_form(F, x, y):
    """Standard alternating form x0 y1 - x1 y0 + x2 y3 - x3 y2."""
    t1 = F.sub(F.mul(x[0], y[1]), F.mul(x[1], y[0]))
    t2 = F.sub(F.mul(x[2], y[3]), F.mul(x[3], y[2]))
    return F.add(t1, t2)


def _span_points(F, vecs):
    """Projective points in the span of ``vecs``."""
    out = set()
    for coeffs in F.vectors(len(vecs)):
        if not any(coeffs):
            continue
        v = [0] * len(vecs[0])
        for c, w in zip(coeffs, vecs):
            v = [F.add(a, F.mul(c, b)) for a, b in zip(v, w)]
        if any(v):
            out.add(F.normalize(v))
    return frozenset(out)


def _geometry_from_lines(kind, F, pts, line_sets, name):
    index = {v: i for i, v in enumerate(pts)}
    lines = sorted(sorted(index[v] for v in s) for s in line_sets)
    P = len(pts)
    inc = [(i, P + j) for j, ln in enumerate(lines) for i in ln]
    return IncidenceGeometry(kind, P, len(lines), inc, coords=pts, q=F.q, name=name)


def build_symplectic_quadrangle(q):
    """W(q): all points of PG(3, q), totally isotropic lines of a symplectic form."""
    if q not in (2, 3):
        raise UnsupportedOrder(f"symplectic quadrangle order {q} not supported (2, 3)")
    F = field(q)
    pts = F.projective_points(4)
    lines = set()
    for x, y in combinations(pts, 2):
        if symplectic_form(F, x, y) == 0:
            lines.add(_span_points(F, [x, y]))
    return _geometry_from_lines("C2", F, pts, lines, f"W({q})")


# split octonions over F_2 in Zorn vector-matrix form (a, v, w, b);
# over characteristic 2 the usual signs in the product disappear.

def _cross(u, v):
    return (
        (u[1] * v[2] + u[2] * v[1]) % 2,
        (u[2] * v[0] + u[0] * v[2]) % 2,
        (u[0] * v[1] + u[1] * v[0]) % 2,
    )


def _zorn_mul(x, y):
    a, v, w, b = x
    c, s, r, d = y
    dot = lambda u, t: sum(i * j for i, j in zip(u, t)) % 2
    first = (a * c + dot(v, r)) % 2
    vec1 = tuple((a * s_ + d * v_ + cr) % 2 for s_, v_, cr in zip(s, v, _cross(w, r)))
    vec2 = tuple((c * w_ + b * r_ + cr) % 2 for w_, r_, cr in zip(w, r, _cross(v, s)))
    last = (b * d + dot(w, s)) % 2
    return (first, vec1, vec2, last)


def _zorn(vec7):
    # trace-zero elements over F_2 have a == b
    a = vec7[0]
    return (a, tuple(vec7[1:4]), tuple(vec7[4:7]), a)


def _zorn_norm(x):
    a, v, w, b = x
    return (a * b + sum(i * j for i, j in zip(v, w))) % 2


def build_split_cayley_hexagon():
    """The split Cayley hexagon H(2) of order (2, 2).

    Points are the singular points of the norm quadric on trace-zero split
    octonions over F_2 (a parabolic quadric in 7-space); lines are the
    2-spaces on which the octonion product vanishes identically.
    """
    F = field(2)
    zero = (0, (0, 0, 0), (0, 0, 0), 0)
    pts = [v for v in F.vectors(7) if any(v) and _zorn_norm(_zorn(v)) == 0]
    lines = set()
    for x, y in combinations(pts, 2):
        zx, zy = _zorn(x), _zorn(y)
        if _zorn_mul(zx, zy) == zero and _zorn_mul(zy, zx) == zero:
            s = tuple((i + j) % 2 for i, j in zip(x, y))
            lines.add(frozenset((x, y, s)))
    g = _geometry_from_lines("G2", F, sorted(pts), lines, "H(2)")
    g.verify()
    return g


def build(name):
    """Build a named geometry: ``PG2_q``, ``W_q`` or ``H2``."""
    key = name.upper().replace("(", "").replace(")", "").replace(",", "_")
    if key in ("H2", "G2", "HEXAGON", "G22"):
        return build_split_cayley_hexagon()
    if key.startswith("PG2_"):
        return build_projective_plane(int(key[4:]))
    if key.startswith("W_") or key.startswith("W"):
        return build_symplectic_quadrangle(int(key.lstrip("W_")))
    raise ValueError(f"unknown geometry {name!r}")
