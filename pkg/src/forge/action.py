"""Type-preserving automorphisms of incidence geometries and finite groups.

Groups act on the right: ``p^(ab) = (p^a)^b``, so ``compose(a, b)`` means
"apply ``a``, then ``b``".
"""
from __future__ import annotations

import json
from collections import deque

from .errors import (
    ClosureCapExceeded,
    GeometryMismatch,
    NotAnAutomorphism,
    TypePreservationViolation,
)
from .polygon import RealizedPoint

DEFAULT_CAP = 1_000_000


def _same_geometry(g, h):
    return g is h or (
        g.num_points == h.num_points
        and g.num_lines == h.num_lines
        and g.incidence == h.incidence
    )


class Automorphism:
    """An incidence-preserving permutation of the panels of one geometry."""

    __slots__ = ("geometry", "perm", "_hash")

    def __init__(self, geometry, perm, check=True):
        perm = tuple(int(x) for x in perm)
        if check:
            _validate(geometry, perm)
        self.geometry = geometry
        self.perm = perm
        self._hash = hash(perm)

    @property
    def point_map(self):
        return self.perm[: self.geometry.num_points]

    @property
    def line_map(self):
        return self.perm[self.geometry.num_points:]

    def __call__(self, panel):
        return self.perm[panel]

    def __eq__(self, other):
        if not isinstance(other, Automorphism):
            return NotImplemented
        return self.perm == other.perm and _same_geometry(self.geometry, other.geometry)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        moved = sum(1 for i, x in enumerate(self.perm) if i != x)
        return f"Automorphism({self.geometry.name}, moves {moved} panels)"

    def is_identity(self):
        return all(i == x for i, x in enumerate(self.perm))

    def inverse(self):
        inv = [0] * len(self.perm)
        for i, x in enumerate(self.perm):
            inv[x] = i
        return Automorphism(self.geometry, inv, check=False)

    def to_json(self):
        return {"points": list(self.point_map), "lines": list(self.line_map)}

    # -- constructors -----------------------------------------------------
    @classmethod
    def identity(cls, geometry):
        return cls(geometry, range(geometry.num_panels), check=False)

    @classmethod
    def from_maps(cls, geometry, point_map, line_map):
        return cls(geometry, list(point_map) + list(line_map))

    @classmethod
    def from_point_map(cls, geometry, point_map):
        """Extend a collineation given on points to the lines."""
        lines = geometry.line_point_sets()
        line_map = []
        for l in geometry.lines:
            image = frozenset(point_map[p] for p in geometry.points_on(l))
            if image not in lines:
                raise NotAnAutomorphism("point map does not send lines to lines")
            line_map.append(lines[image])
        return cls.from_maps(geometry, point_map, line_map)

    @classmethod
    def from_matrix(cls, geometry, matrix):
        """Collineation induced by an invertible matrix acting on column vectors."""
        from .fields import field

        if geometry.coords is None or geometry.q is None:
            raise GeometryMismatch(f"{geometry.name} has no vector-space coordinates")
        F = field(geometry.q)
        index = {v: i for i, v in enumerate(geometry.coords)}
        point_map = []
        for v in geometry.coords:
            w = F.matvec(matrix, v)
            if not any(w):
                raise NotAnAutomorphism("singular matrix")
            image = index.get(F.normalize(w))
            if image is None:
                raise NotAnAutomorphism("matrix does not preserve the point set")
            point_map.append(image)
        return cls.from_point_map(geometry, point_map)

    @classmethod
    def from_json(cls, geometry, data):
        if "matrix" in data:
            return cls.from_matrix(geometry, data["matrix"])
        return cls.from_maps(geometry, data["points"], data["lines"])


def _validate(g, perm):
    if sorted(perm) != list(range(g.num_panels)):
        raise NotAnAutomorphism("not a permutation of the panels")
    P = g.num_points
    if any(perm[p] >= P for p in range(P)):
        raise TypePreservationViolation("maps a point to a line (duality)")
    for p, l in g.incidence:
        if (perm[p], perm[l]) not in g.incidence:
            raise NotAnAutomorphism(f"incidence ({p}, {l}) not preserved")


def compose(a, b):
    """``a`` then ``b``."""
    if not _same_geometry(a.geometry, b.geometry):
        raise GeometryMismatch("automorphisms of different geometries")
    pb = b.perm
    return Automorphism(a.geometry, [pb[x] for x in a.perm], check=False)


def apply_to_realized(a, x):
    """Image of a realized point: the flag moves, the arc offset is kept."""
    return RealizedPoint(a.perm[x.point], a.perm[x.line], x.theta, x.n)


class GroupClosure:
    """A finite group given by generators, with a shortest word per element.

    ``elements`` lists the group in shortlex order of the stored words, so
    the first element with a property is the one with the shortest word and
    the smallest generator indices.
    """

    def __init__(self, generators, elements, words):
        self.generators = list(generators)
        self.elements = elements
        self.words = words
        self.geometry = generators[0].geometry
        self._index = {e: i for i, e in enumerate(elements)}

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, a):
        return a in self._index

    @property
    def order(self):
        return len(self.elements)

    def word(self, a):
        return self.words[self._index[a]]

    def evaluate(self, word):
        result = Automorphism.identity(self.geometry)
        for i in word:
            result = compose(result, self.generators[i])
        return result

    def orbit(self, p):
        return orbit(self, p)

    def to_json(self):
        return {"generators": [a.to_json() for a in self.generators]}


def close_group(gens, cap=DEFAULT_CAP):
    """Breadth-first closure of ``gens`` by word length."""
    gens = list(gens)
    if not gens:
        raise ValueError("at least one generator is required")
    if cap < 1:
        raise ValueError("cap must be >= 1")
    g = gens[0].geometry
    for a in gens[1:]:
        if not _same_geometry(g, a.geometry):
            raise GeometryMismatch("generators act on different geometries")
    e = Automorphism.identity(g)
    elements, words = [e], [()]
    seen = {e.perm}
    queue = deque([0])
    while queue:
        i = queue.popleft()
        base = elements[i].perm
        for k, s in enumerate(gens):
            ps = s.perm
            img = tuple(ps[x] for x in base)
            if img in seen:
                continue
            if len(elements) >= cap:
                partial = GroupClosure(gens, elements, words)
                raise ClosureCapExceeded(f"closure exceeds cap {cap}", partial)
            seen.add(img)
            elements.append(Automorphism(g, img, check=False))
            words.append(words[i] + (k,))
            queue.append(len(elements) - 1)
    return GroupClosure(gens, elements, words)


def orbit(G, p):
    G.geometry.check_panel(p)
    return {a.perm[p] for a in G.elements}


def orbits(G):
    """Partition of the panels into orbits, each sorted, ordered by minimum."""
    seen = set()
    out = []
    for p in G.geometry.panels:
        if p not in seen:
            o = orbit(G, p)
            seen |= o
            out.append(sorted(o))
    return out


def fixed_panels(G):
    fixed = set(G.geometry.panels)
    for s in G.generators:
        fixed &= {p for p in fixed if s.perm[p] == p}
    return fixed


def stabilizer(G, panels):
    """Elements of ``G`` fixing every panel in ``panels`` (as a closure)."""
    for p in panels:
        G.geometry.check_panel(p)
    elems = [a for a in G.elements if all(a.perm[p] == p for p in panels)]
    return close_group(elems)


def cyclic_subgroups(G):
    """Distinct cyclic subgroups ``<a>`` of ``G``, one generator each."""
    seen = set()
    out = []
    for a in G.elements:
        powers = []
        x = a
        while True:
            powers.append(x.perm)
            if x.is_identity():
                break
            x = compose(x, a)
        key = frozenset(powers)
        if key not in seen:
            seen.add(key)
            out.append(a)
    return out


def load_group(geometry, data):
    """Parse group JSON (permutation or matrix generators)."""
    if isinstance(data, str):
        data = json.loads(data)
    gens = [Automorphism.from_json(geometry, d) for d in data["generators"]]
    return gens

