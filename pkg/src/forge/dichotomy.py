"""Deciders for the local fixed-point dichotomies on rank-2 spherical buildings.

For a group ``G`` acting on a generalized quadrangle (type C2) or projective
plane (type A2) and a point ``x`` of the CAT(1) realization, either some
element moves a chosen panel near ``x`` to an opposite panel, or ``G`` fixes
a panel within distance pi/2 of ``x``.  Every decision comes with a
certificate that :mod:`forge.replay` re-checks from scratch.
"""
from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import numpy as np

from .action import Automorphism, apply_to_realized, close_group, cyclic_subgroups, fixed_panels
from .errors import DichotomyViolated, GeometryMismatch, UnknownFlag
from .fields import format_pi, parse_pi
from .polygon import RealizedPoint, cat1_distance, panel_distance

logger = logging.getLogger(__name__)

OPPOSITE = "opposite"
FIXED = "fixed_panel"

C2_OPPOSITE_BOUND = Fraction(7, 8)
A2_OPPOSITE_BOUND = Fraction(2, 3)
FIXED_BOUND = Fraction(1, 2)


@dataclass(frozen=True)
class DichotomyCertificate:
    """Witness for one branch of the dichotomy.

    ``panel`` is the opposite image (``opposite`` branch) or the fixed panel
    (``fixed_panel`` branch).  ``word`` names the witness element: the
    element moving ``base_panel`` opposite, or, on the fixed branch, the
    element ``g0`` used to locate the fixed panel (empty when ``base_panel``
    itself is fixed).  ``angle`` is a multiple of pi.
    """

    kind: str
    branch: str
    word: tuple
    panel: int
    base_panel: int
    x: RealizedPoint
    angle: Fraction
    chamber: tuple = None

    @property
    def witness_element(self):
        return self.word if self.branch == OPPOSITE else None

    @property
    def witness_panel(self):
        return self.panel if self.branch == FIXED else None

    @property
    def measured_angle(self):
        return self.angle

    def to_json(self):
        out = {
            "kind": self.kind,
            "branch": self.branch,
            "word": list(self.word),
            "panel": self.panel,
            "base_panel": self.base_panel,
            "x": self.x.to_json(),
            "angle": format_pi(self.angle),
        }
        if self.chamber is not None:
            out["chamber"] = list(self.chamber)
        return out

    @classmethod
    def from_json(cls, geometry, data):
        return cls(
            kind=data["kind"],
            branch=data["branch"],
            word=tuple(data["word"]),
            panel=data["panel"],
            base_panel=data["base_panel"],
            x=RealizedPoint.from_json(geometry, data["x"]),
            angle=parse_pi(data["angle"]),
            chamber=tuple(data["chamber"]) if "chamber" in data else None,
        )


def nearest_panel(g, x):
    """A panel at minimum CAT(1) distance from ``x``.

    Only the two endpoints of ``x``'s arc can be nearest: any other panel is
    at least one full arc further along the graph.  Ties go to the point.
    """
    if x.n != g.n or x.flag not in g.incidence:
        raise UnknownFlag(f"{x!r} is not a point of {g.name}")
    return x.point if x.theta <= g.arc - x.theta else x.line


def _common_neighbor(g, a, b):
    common = set(g.neighbors[a]) & set(g.neighbors[b])
    if len(common) != 1:
        raise DichotomyViolated(f"panels {a}, {b} have {len(common)} common neighbours")
    return common.pop()


def _require_kind(G, kind):
    if G.geometry.kind != kind:
        raise GeometryMismatch(f"expected a geometry of type {kind}, got {G.geometry.kind}")


def decide_c2(G, x):
    """Decide the quadrangle dichotomy for group closure ``G`` at ``x``."""
    _require_kind(G, "C2")
    g = G.geometry
    D = g.distances
    p = nearest_panel(g, x)
    for a, word in zip(G.elements, G.words):
        if D[p, a.perm[p]] == g.n:
            angle = panel_distance(g, p, apply_to_realized(a, x))
            if angle < C2_OPPOSITE_BOUND:
                raise DichotomyViolated(f"opposite image but angle {format_pi(angle)}",
                                        _instance(G, x))
            return DichotomyCertificate("C2", OPPOSITE, word, a.perm[p], p, x, angle)
    fixed = fixed_panels(G)
    if p in fixed:
        witness, word = p, ()
    else:
        # every image of p meets p, so p and p^g0 share the unique panel q
        g0_index = next(i for i, a in enumerate(G.elements) if a.perm[p] != p)
        g0 = G.elements[g0_index]
        witness = _common_neighbor(g, p, g0.perm[p])
        word = G.words[g0_index]
        if witness not in fixed:
            raise DichotomyViolated("intersection panel is not fixed", _instance(G, x))
    angle = panel_distance(g, witness, x)
    if angle >= FIXED_BOUND:
        raise DichotomyViolated(f"fixed panel at {format_pi(angle)}", _instance(G, x))
    return DichotomyCertificate("C2", FIXED, word, witness, p, x, angle)


def decide_a2(G, x, c=None, panel=None):
    """Decide the projective-plane dichotomy at ``x`` on chamber ``c``.

    ``c`` defaults to ``x``'s own flag and ``panel`` (the panel ``p`` of
    ``c`` to move) defaults to the point of ``c``.
    """
    _require_kind(G, "A2")
    g = G.geometry
    D = g.distances
    c = tuple(c) if c is not None else x.flag
    if c not in g.incidence:
        raise UnknownFlag(f"{c} is not a chamber")
    if not (x.flag == c or x.panel() in c):
        raise ValueError(f"{x!r} does not lie on chamber {c}")
    p = c[0] if panel is None else panel
    if p not in c:
        raise ValueError(f"panel {p} is not a panel of chamber {c}")
    l = c[1] if p == c[0] else c[0]
    for a, word in zip(G.elements, G.words):
        image = a.perm[l]
        if D[p, image] != 1:
            angle = panel_distance(g, p, apply_to_realized(a, x))
            if angle < A2_OPPOSITE_BOUND:
                raise DichotomyViolated(f"opposite image but angle {format_pi(angle)}",
                                        _instance(G, x, c, p))
            return DichotomyCertificate("A2", OPPOSITE, word, image, p, x, angle, c)
    fixed = fixed_panels(G)
    if l in fixed:
        witness, word = l, ()
    else:
        # p lies on every image of l, and l^g meets l exactly in p
        g_index = next(i for i, a in enumerate(G.elements) if a.perm[l] != l)
        witness = _common_neighbor(g, l, G.elements[g_index].perm[l])
        word = G.words[g_index]
        if witness not in fixed:
            raise DichotomyViolated("intersection panel is not fixed", _instance(G, x, c, p))
    angle = panel_distance(g, witness, x)
    if angle >= FIXED_BOUND:
        raise DichotomyViolated(f"fixed panel at {format_pi(angle)}", _instance(G, x, c, p))
    return DichotomyCertificate("A2", FIXED, word, witness, p, x, angle, c)


def decide(G, x):
    if G.geometry.kind == "C2":
        return decide_c2(G, x)
    if G.geometry.kind == "A2":
        return decide_a2(G, x)
    raise GeometryMismatch(f"no dichotomy for type {G.geometry.kind}")


def _instance(G, x, c=None, p=None):
    return {
        "geometry": G.geometry.to_json(),
        "generators": [a.to_json() for a in G.generators],
        "x": x.to_json(),
        "chamber": list(c) if c else None,
        "panel": p,
    }


def flag_midpoints(g):
    return [g.midpoint(f) for f in g.flags()]


@dataclass
class SweepReport:
    geometry: str
    instances: int = 0
    cyclic_subgroups: int = 0
    random_subgroups: int = 0
    branches: dict = dc_field(default_factory=lambda: {OPPOSITE: 0, FIXED: 0})
    violations: int = 0
    min_opposite_angle: Fraction = None
    max_fixed_angle: Fraction = None

    def record(self, cert):
        self.instances += 1
        self.branches[cert.branch] += 1
        if cert.branch == OPPOSITE:
            if self.min_opposite_angle is None or cert.angle < self.min_opposite_angle:
                self.min_opposite_angle = cert.angle
        elif self.max_fixed_angle is None or cert.angle > self.max_fixed_angle:
            self.max_fixed_angle = cert.angle

    def to_json(self):
        fmt = lambda a: None if a is None else format_pi(a)
        return {
            "geometry": self.geometry,
            "instances": self.instances,
            "cyclic_subgroups": self.cyclic_subgroups,
            "random_subgroups": self.random_subgroups,
            "branches": dict(sorted(self.branches.items())),
            "violations": self.violations,
            "min_opposite_angle": fmt(self.min_opposite_angle),
            "max_fixed_angle": fmt(self.max_fixed_angle),
        }


def sweep_verify(group, samples, seed=0, generators=2, cyclic=True, points=None,
                 replay=True):
    """Run the dichotomy decider over many subgroups of ``group``.

    ``group`` is a closure of the full automorphism group.  Covers every
    cyclic subgroup (when ``cyclic`` and the group has at most 10**5
    elements) plus ``samples`` random subgroups on ``generators`` random
    elements drawn with ``seed``; ``x`` ranges over ``points`` (default: the
    midpoints of all flags).  ``samples == 0`` yields an empty report.
    Every certificate is replayed independently when ``replay`` is set.
    """
    from .replay import verify_certificate

    g = group.geometry
    if g.kind not in ("A2", "C2"):
        raise GeometryMismatch("sweeps need a geometry of type A2 or C2")
    report = SweepReport(g.name)
    if samples == 0:
        return report
    points = flag_midpoints(g) if points is None else list(points)
    subgroups = []
    if cyclic and group.order <= 10**5:
        cyc = [close_group([a]) for a in cyclic_subgroups(group)]
        report.cyclic_subgroups = len(cyc)
        subgroups.extend(cyc)
    rng = random.Random(seed)
    for _ in range(samples):
        gens = [group.elements[rng.randrange(group.order)] for _ in range(generators)]
        subgroups.append(close_group(gens))
    report.random_subgroups = samples
    for H in subgroups:
        for x in points:
            try:
                cert = decide(H, x)
            except DichotomyViolated as exc:
                report.violations += 1
                logger.error("dichotomy violated: %s", json.dumps(exc.instance))
                raise
            if replay:
                verify_certificate(cert, H)
            report.record(cert)
    return report


# -- hexagon exploration ----------------------------------------------------

@dataclass(frozen=True)
class G2Finding:
    """A subgroup and point where both branches of the C2-style statement fail."""

    trial: int
    generators: tuple
    x: RealizedPoint
    base_panel: int

    def to_json(self):
        return {
            "trial": self.trial,
            "generators": [list(map(int, s)) for s in self.generators],
            "x": self.x.to_json(),
            "base_panel": self.base_panel,
        }


@dataclass
class G2SearchReport:
    trials: int
    instances: int
    findings: list
    skipped: int = 0
    rechecked: int = 0

    def to_json(self):
        return {
            "trials": self.trials,
            "instances": self.instances,
            "findings": len(self.findings),
            "skipped": self.skipped,
            "rechecked": self.rechecked,
        }


def _orbit_labels(num, gens):
    parent = list(range(num))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for s in gens:
        for v in range(num):
            a, b = find(v), find(int(s[v]))
            if a != b:
                parent[max(a, b)] = min(a, b)
    return np.array([find(v) for v in range(num)])


def g2_search(max_generators, trials, seed=0, geometry=None, automorphisms=None,
              cap=None, recheck=True):
    """Look for failures of the quadrangle-style dichotomy on the hexagon H(2).

    Each trial draws between 1 and ``max_generators`` uniform elements of the
    full type-preserving automorphism group and tests every flag midpoint.
    Orbits are computed from the generators directly (a finite group's
    orbits are its generators' orbits).  Findings are rechecked by an
    independent verifier; trials whose subgroup exceeds ``cap`` during the
    recheck are skipped and counted.
    """
    from .polygon import build_split_cayley_hexagon
    from .replay import recheck_g2_finding
    from .search import automorphism_permutations

    if max_generators < 1:
        raise ValueError("max_generators must be >= 1")
    g = geometry or build_split_cayley_hexagon()
    A = automorphism_permutations(g) if automorphisms is None else automorphisms
    D = np.asarray(g.distances)
    flags = g.flags()
    xs = flag_midpoints(g)
    fpts = np.array([f[0] for f in flags])
    flns = np.array([f[1] for f in flags])
    rng = random.Random(seed)
    findings = []
    skipped = rechecked = 0
    for trial in range(trials):
        k = rng.randint(1, max_generators)
        gens = tuple(A[rng.randrange(len(A))] for _ in range(k))
        labels = _orbit_labels(g.num_panels, gens)
        counts = np.bincount(labels, minlength=g.num_panels)
        fixed = np.flatnonzero(counts[labels] == 1)
        # branch 1 per base point: some orbit member opposite it
        has_opposite = np.array([(D[p, labels == labels[p]] == g.n).any()
                                 for p in g.panels])
        if len(fixed):
            near = np.minimum(D[np.ix_(fixed, fpts)], D[np.ix_(fixed, flns)])
            # midpoint at graph distance k from a panel sits at (2k+1)/(2n) pi
            near_ok = ((2 * near + 1) < g.n).any(axis=0)
        else:
            near_ok = np.zeros(len(flags), dtype=bool)
        for i, x in enumerate(xs):
            p = nearest_panel(g, x)
            if has_opposite[p] or near_ok[i]:
                continue
            finding = G2Finding(trial, tuple(np.asarray(s) for s in gens), x, p)
            if recheck:
                verdict = recheck_g2_finding(g, finding, cap=cap)
                if verdict is None:
                    skipped += 1
                    continue
                rechecked += 1
            findings.append(finding)
    return G2SearchReport(trials, trials * len(xs), findings, skipped, rechecked)
