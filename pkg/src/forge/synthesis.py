"""Hyperbolic element synthesis from two elliptic subgroups.

Given generators of ``G0`` and ``G1`` with disjoint fixed sets, pick a
closest pair ``a0 in Fix(G0)``, ``a1 in Fix(G1)``, use the projective-plane
dichotomy in the links at ``a1`` and ``a2 = g1 a0`` to choose ``g1`` and
``g2``, and follow ``a_i = g a_(i-2)`` for ``g = g2 g1``.  The direction
``xi`` is the wall ray from ``a1`` through the panel ``p1``; Busemann values
along it are exact rationals.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from .action import Automorphism, close_group
from .apartment import A2_DATA, ApartmentPoint, Ray, busemann, vertex_angle
from .dichotomy import FIXED, decide_a2
from .errors import (
    ClosestPairViolated,
    ContradictionDetected,
    EmptyInput,
    NotDisjoint,
    NotElliptic,
    TypePreservationViolation,
)
from .exact import Angle, Surd
from .lattice import (
    DEFAULT_PRECISION,
    FixedSet,
    LatticeVertex,
    MatrixIsometry,
    act,
    base_vertex,
    build_ball,
    busemann_wall_ray,
    classify_isometry,
    distance_squared,
    fixed_set,
    induced_action,
    link_direction,
    translation_length_squared,
    vertex_angle_at,
    vertex_link,
)

SCHEMA = "forge-trace/1"
ANGLE_BOUND = Angle.from_pi(Fraction(2, 3))


def _vertices(s):
    if isinstance(s, FixedSet):
        return list(s.vertices)
    return list(s)


@dataclass(frozen=True)
class ClosestPair:
    a0: LatticeVertex
    a1: LatticeVertex
    distance_squared: int

    @property
    def distance(self):
        return Surd.sqrt(self.distance_squared)


def closest_pair(A, B, ball=None):
    """Vertex pair realizing the distance between fixed sets ``A`` and ``B``.

    ``A`` and ``B`` are :class:`FixedSet` objects or vertex lists; ``ball``
    is accepted for symmetry with the other operations and not needed.
    """
    A, B = _vertices(A), _vertices(B)
    if not A or not B:
        raise EmptyInput("both fixed sets must be nonempty")
    if set(A) & set(B):
        raise NotDisjoint("the fixed sets intersect")
    best = None
    for a in sorted(A):
        for b in sorted(B):
            d2 = distance_squared(a, b)
            if best is None or d2 < best[2]:
                best = (a, b, d2)
    a0, a1, d2 = best
    # each is the closest-point projection of the other
    if any(distance_squared(a, a1) < d2 for a in A) or any(distance_squared(a0, b) < d2 for b in B):
        raise ContradictionDetected("closest pair is not mutually closest")
    return ClosestPair(a0, a1, d2)


def word_matrix(gens, word, p):
    """Matrix of a word read left to right (``word[0]`` acts first)."""
    m = MatrixIsometry.identity(p)
    for i in word:
        m = gens[i] @ m
    return m


@dataclass
class LocalStep:
    center: LatticeVertex
    word: tuple
    element: MatrixIsometry
    certificate: object
    link: object

    @property
    def angle(self):
        return self.certificate.angle


def local_step(gens, a, x, chamber=None, panel=None, link=None, p=None):
    """Run the A2 dichotomy for ``<gens>`` acting on the link at ``a``.

    Returns the element moving the chamber so that a panel opposite
    ``panel`` appears; the fixed-panel branch means the inputs were not a
    closest pair and raises :class:`ClosestPairViolated`.
    """
    from .replay import verify_certificate

    link = link or vertex_link(a)
    p = p or a.p
    auts = [induced_action(g, link) for g in gens]
    if not auts:
        auts = [Automorphism.identity(link)]
    G = close_group(auts)
    cert = decide_a2(G, x, chamber, panel)
    verify_certificate(cert, G)
    if cert.branch == FIXED:
        raise ClosestPairViolated(
            f"subgroup fixes panel {cert.panel} at angle {cert.angle} pi < pi/2 from x")
    element = word_matrix(gens, cert.word, p) if gens else MatrixIsometry.identity(p)
    if induced_action(element, link).perm != G.evaluate(cert.word).perm:
        raise ContradictionDetected("word matrix disagrees with the permutation closure")
    return LocalStep(a, tuple(cert.word), element, cert, link)


def validate_inputs(gens):
    """Report which reduction hypotheses each generator fails."""
    report = []
    for k, g in enumerate(gens):
        entry = {"index": k, "det_valuation": g.det_valuation, "issues": []}
        entry["type_preserving"] = g.is_type_preserving
        if not g.is_type_preserving:
            entry["issues"].append("type-rotating: det valuation is not 0 mod 3")
        ell2 = translation_length_squared(g)
        entry["translation_length"] = str(Surd.sqrt(ell2))
        entry["elliptic"] = ell2 == 0
        if ell2 != 0:
            entry["issues"].append("not elliptic: positive translation length")
        report.append(entry)
    return report


def _require_elliptic_type_preserving(gens, label):
    for entry in validate_inputs(gens):
        if not entry["type_preserving"]:
            raise TypePreservationViolation(f"{label}[{entry['index']}] is type-rotating")
        if not entry["elliptic"]:
            raise NotElliptic(f"{label}[{entry['index']}] is not elliptic")


@dataclass
class Chart:
    """Apartment coordinates of ``a_i``, ``a_(i+1)`` with ``xi`` along ``e1``."""

    index: int
    target: tuple  # coordinates of a_(i+1); a_i is the origin
    orientation: int  # +1 when e1 points to a type+1 vertex, -1 for type+2

    def to_json(self):
        return {"i": self.index, "a_next": [str(c) for c in self.target],
                "orientation": self.orientation}


@dataclass
class SynthesisTrace:
    q: int
    steps: int
    g0_gens: list
    g1_gens: list
    a0: LatticeVertex
    a1: LatticeVertex
    d2: int
    g1_word: tuple = None
    g2_word: tuple = None
    g1: MatrixIsometry = None
    g2: MatrixIsometry = None
    g: MatrixIsometry = None
    points: list = dc_field(default_factory=list)
    panels: list = dc_field(default_factory=list)  # p_i as vertices, i >= 1
    ray: dict = None
    angles: list = dc_field(default_factory=list)  # angle at a_i, i >= 1
    busemann: list = dc_field(default_factory=list)  # b(a_i), i >= 0
    charts: list = dc_field(default_factory=list)
    certificates: list = dc_field(default_factory=list)
    verdict: dict = None

    @property
    def d(self):
        return Surd.sqrt(self.d2)

    @property
    def increments(self):
        """``D_i = b(a_(i+1)) - b(a_i)`` for ``i >= 1``."""
        b = self.busemann
        return [b[i + 1] - b[i] for i in range(1, len(b) - 1)]

    def to_json(self):
        mat = lambda m: None if m is None else m.to_json()
        return {
            "schema": SCHEMA,
            "q": self.q,
            "steps": self.steps,
            "G0": [g.to_json() for g in self.g0_gens],
            "G1": [g.to_json() for g in self.g1_gens],
            "a0": self.a0.to_json(),
            "a1": self.a1.to_json(),
            "d2": self.d2,
            "d": str(self.d),
            "g1_word": None if self.g1_word is None else list(self.g1_word),
            "g2_word": None if self.g2_word is None else list(self.g2_word),
            "g1": mat(self.g1),
            "g2": mat(self.g2),
            "g": mat(self.g),
            "points": [v.to_json() for v in self.points],
            "panels": [v.to_json() for v in self.panels],
            "ray": self.ray,
            "angles": [a.to_json() for a in self.angles],
            "busemann": [str(b) for b in self.busemann],
            "increments": [str(x) for x in self.increments],
            "charts": [c.to_json() for c in self.charts],
            "certificates": self.certificates,
            "verdict": self.verdict,
        }

    def dumps(self):
        return json.dumps(self.to_json(), indent=1, sort_keys=True)


def _neighbor_toward(a, base, frame, dim, level):
    """The unique neighbour of ``a`` one unit further toward ``xi``."""
    from .lattice import vertex_neighbors

    hits = [n.vertex for n in vertex_neighbors(a)
            if busemann_wall_ray(base, frame, dim, n.vertex) == level - 1]
    if len(hits) != 1:
        raise ContradictionDetected(f"{len(hits)} neighbours lie on the ray toward xi")
    return hits[0]


def _chamber_through(link, x, p):
    """A chamber of ``link`` containing both the point ``x`` and the panel ``p``."""
    a = x.panel()
    if a is None:
        if p in x.flag:
            return x.flag
    elif a == p:
        return x.flag
    else:
        c = (p, a) if link.is_point(p) else (a, p)
        if c in link.incidence:
            return c
    raise ContradictionDetected("p is not a panel of a chamber containing x")


def _chart(i, a, p_i, b, d2, D):
    """Exact apartment coordinates for ``a_i = 0``, ``xi = e1`` and ``a_(i+1)``."""
    beta2 = Fraction(4, 3) * (d2 - D * D)
    beta = Surd.sqrt(beta2)
    if not beta.is_rational():
        raise ContradictionDetected("no flat chart: coordinate is irrational")
    beta = beta.coef
    alpha = -D - beta / 2
    if alpha.denominator != 1 or beta.denominator != 1:
        raise ContradictionDetected("chart coordinates are not a lattice point")
    orient = 1 if (p_i.type - a.type) % 3 == 1 else -1
    if (orient * int(alpha + 2 * beta)) % 3 != (b.type - a.type) % 3:
        raise ContradictionDetected("chart does not respect vertex types")
    chart = Chart(i, (alpha, beta), orient)
    # cross-check against the apartment model
    origin = ApartmentPoint(0, 0)
    target = ApartmentPoint(alpha, beta)
    ray = Ray(origin, (1, 0), A2_DATA)
    if busemann(ray, target) != D:
        raise ContradictionDetected("chart Busemann value disagrees")
    return chart, vertex_angle(origin, ray, target, A2_DATA)


def synthesize(g0_gens, g1_gens, ball=None, steps=6, q=2, radius=2):
    """Run the synthesis and return a :class:`SynthesisTrace`."""
    g0_gens, g1_gens = list(g0_gens), list(g1_gens)
    _require_elliptic_type_preserving(g0_gens, "G0")
    _require_elliptic_type_preserving(g1_gens, "G1")
    p = (g0_gens or g1_gens)[0].p if (g0_gens or g1_gens) else q
    if ball is None:
        ball = build_ball(p, radius)
    B0 = fixed_set(g0_gens, ball)
    B1 = fixed_set(g1_gens, ball)
    pair = closest_pair(B0, B1)
    a0, a1 = pair.a0, pair.a1
    trace = SynthesisTrace(p, steps, g0_gens, g1_gens, a0, a1, pair.distance_squared)
    trace.points = [a0, a1]
    cert_angles = []
    if steps < 2:
        return trace

    # step 1: the link at a1
    link1 = vertex_link(a1)
    x1 = link_direction(link1, a0)
    c1 = x1.flag
    s1 = local_step(g1_gens, a1, x1, c1, None, link1, p)
    p1 = s1.certificate.base_panel
    frame, dim = link1.frames[p1]
    base = a1
    trace.ray = {"base": a1.to_json(), "frame": [list(r) for r in frame], "dim": dim}
    trace.g1_word, trace.g1 = s1.word, s1.element
    trace.certificates.append(s1.certificate.to_json())
    cert_angles.append(s1.certificate.angle)
    a2 = act(s1.element, a0)
    if act(s1.element, a1) != a1:
        raise ContradictionDetected("g1 does not fix a1")
    trace.points.append(a2)
    panels = [link1.vertices[p1]]
    b = lambda v: busemann_wall_ray(base, frame, dim, v)

    if steps >= 3:
        g2_gens = [s.conjugate_by(s1.element) for s in g0_gens]
        link2 = vertex_link(a2)
        x2 = link_direction(link2, a1)
        p2v = _neighbor_toward(a2, base, frame, dim, b(a2))
        p2 = link2.index[p2v]
        c2 = _chamber_through(link2, x2, p2)
        s2 = local_step(g2_gens, a2, x2, c2, p2, link2, p)
        trace.g2_word, trace.g2 = s2.word, s2.element
        trace.certificates.append(s2.certificate.to_json())
        cert_angles.append(s2.certificate.angle)
        if act(s2.element, a2) != a2:
            raise ContradictionDetected("g2 does not fix a2")
        g = s2.element @ s1.element
        trace.g = g
        if act(g, a0) != a2:
            raise ContradictionDetected("a2 != g a0")
        a3 = act(s2.element, a1)
        if act(g, a1) != a3:
            raise ContradictionDetected("a3 != g a1")
        trace.points.append(a3)
        for i in range(4, steps + 1):
            trace.points.append(act(g, trace.points[i - 2]))
        panels.append(p2v)
        for i in range(3, steps):
            pi = _neighbor_toward(trace.points[i], base, frame, dim, b(trace.points[i]))
            if act(g, panels[i - 3]) != pi:
                raise ContradictionDetected(f"p_{i} != g p_{i - 2}")
            panels.append(pi)
    trace.panels = panels

    pts = trace.points
    trace.busemann = [b(v) for v in pts]
    d2 = pair.distance_squared
    for i in range(1, len(pts) - 1):
        ang = vertex_angle_at(pts[i], panels[i - 1], pts[i + 1])
        if ang < ANGLE_BOUND:
            raise ContradictionDetected(f"angle at a_{i} is {ang} < 2pi/3")
        if i <= 2 and ang != Angle.from_pi(cert_angles[i - 1]):
            raise ContradictionDetected("link angle disagrees with the dichotomy certificate")
        if distance_squared(pts[i], pts[i + 1]) != d2:
            raise ContradictionDetected("consecutive points are not at distance d")
        D = trace.busemann[i + 1] - trace.busemann[i]
        # b is convex with slope -cos(angle) at a_i, so D_i >= -d cos(angle);
        # equality means a_i, a_(i+1) and the ray lie in one flat
        bound = -Surd.sqrt(d2) * ang.cos
        if Surd.coerce(D) < bound:
            raise ContradictionDetected(f"Busemann increment at a_{i} below its angle bound")
        if Surd.coerce(D) == bound:
            chart, chart_angle = _chart(i, pts[i], panels[i - 1], pts[i + 1], d2, D)
            if chart_angle != ang:
                raise ContradictionDetected("chart angle disagrees")
            trace.charts.append(chart)
        trace.angles.append(ang)
    inc = trace.increments
    if inc:
        if len(set(inc)) != 1:
            raise ContradictionDetected("Busemann increments are not constant")
        if Surd.coerce(inc[0]) < trace.d / 2:
            raise ContradictionDetected("Busemann increment below d/2")
    for k in range(1, (len(pts) - 1) // 2 + 1):
        rise = trace.busemann[2 * k] - trace.busemann[0]
        if rise > 0 and rise * rise > distance_squared(pts[0], pts[2 * k]):
            raise ContradictionDetected("Busemann rise exceeds displacement")

    if trace.g is not None:
        verdict = classify_isometry(trace.g, ball=ball)
        if verdict.kind != "Hyperbolic":
            raise ContradictionDetected(f"g = g2 g1 classified {verdict.kind}")
        trace.verdict = {"verdict": verdict.kind,
                         "translation_length_squared": str(verdict.translation_length_squared),
                         "translation_length": str(verdict.translation_length)}
    return trace


def trace_to_svg(trace, size=480):
    """The points ``a_i`` developed into one apartment chart, with ``xi`` along ``e1``.

    Each step ``[a_i, a_(i+1)]`` is drawn with its own flat chart, glued at
    ``a_i``; the dashed line is the wall through ``a_1`` carrying the ray.
    """
    from .apartment import Wall, scene_to_svg

    pts = {"a1": ApartmentPoint(0, 0)}
    cur = ApartmentPoint(0, 0)
    for c in trace.charts:
        cur = cur.translate(c.target)
        pts[f"a{c.index + 1}"] = cur
    rays = {"xi": Ray(ApartmentPoint(0, 0), (-1, 0), A2_DATA)}
    return scene_to_svg(pts, rays, [Wall("b", (0, 1), 0)], size=size)


def standard_example(q=2):
    """``G0 = <s>`` and ``G1 = h <s> h^-1`` with ``h = diag(t, 1, 1/t)``."""
    from .lattice import singer_matrix

    s = singer_matrix(q)
    h = MatrixIsometry.diag(s.p, (1, 0, -1))
    return [s], [s.conjugate_by(h)]
