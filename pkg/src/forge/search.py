"""Type-preserving automorphisms and canonical forms of incidence geometries.

Canonical forms use individualization-refinement: colour refinement to an
equitable partition, then individualize each member of the first
non-singleton cell in turn.  Colours are relabelled by sorting signatures,
so the whole procedure commutes with isomorphisms.

Automorphisms come from the same tree: one leaf equivalent to the leftmost
leaf per child of each node on the leftmost path gives a strong generating
set, which is then closed by breadth-first multiplication.
"""
from __future__ import annotations

import numpy as np


def _refine(g, colors):
    colors = list(colors)
    ncls = len(set(colors))
    while True:
        sig = [(colors[v], tuple(sorted(colors[w] for w in g.neighbors[v])))
               for v in range(g.num_panels)]
        rank = {s: i for i, s in enumerate(sorted(set(sig)))}
        colors = [rank[s] for s in sig]
        if len(rank) == ncls:
            return colors
        ncls = len(rank)


def _initial_colors(g):
    return [0 if g.is_point(v) else 1 for v in g.panels]


def _leaves(g):
    """Yield discrete colourings (``colors[v]`` = canonical label of ``v``)."""
    stack = [_refine(g, _initial_colors(g))]
    N = g.num_panels
    while stack:
        colors = stack.pop()
        if len(set(colors)) == N:
            yield colors
            continue
        counts = {}
        for c in colors:
            counts[c] = counts.get(c, 0) + 1
        target = min(c for c, k in counts.items() if k > 1)
        for v in reversed([v for v in range(N) if colors[v] == target]):
            stack.append(_individualize(g, colors, v))


def _labeled_incidence(g, labels):
    return tuple(sorted((labels[p], labels[l]) for p, l in g.incidence))


def canonical_certificate(g):
    """An isomorphism-invariant certificate of the incidence structure.

    Two geometries have equal certificates exactly when a type-preserving
    isomorphism (points to points, lines to lines) exists between them.
    """
    best = min(_labeled_incidence(g, labels) for labels in _leaves(g))
    return (g.kind, g.num_points, g.num_lines, best)


def find_isomorphism(g, h):
    """A type-preserving isomorphism ``g -> h`` as an int array, or ``None``."""
    if (g.kind, g.num_points, g.num_lines) != (h.kind, h.num_points, h.num_lines):
        return None
    ref = next(_leaves(g))
    cert = _labeled_incidence(g, ref)
    for labels in _leaves(h):
        if _labeled_incidence(h, labels) == cert:
            inv = np.empty(h.num_panels, dtype=np.int64)
            inv[labels] = np.arange(h.num_panels)
            return inv[np.asarray(ref)]
    return None


def _individualize(g, colors, v):
    indiv = [2 * c + 1 for c in colors]
    indiv[v] = 2 * colors[v]
    return _refine(g, indiv)


def _target_cell(colors):
    counts = {}
    for c in colors:
        counts[c] = counts.get(c, 0) + 1
    multi = [c for c, k in counts.items() if k > 1]
    if not multi:
        return None
    target = min(multi)
    return [v for v, c in enumerate(colors) if c == target]


def _first_match(g, colors, cert):
    """DFS below ``colors`` for a leaf whose labelled incidence equals ``cert``."""
    stack = [colors]
    while stack:
        node = stack.pop()
        cell = _target_cell(node)
        if cell is None:
            if _labeled_incidence(g, node) == cert:
                return node
            continue
        for v in reversed(cell):
            stack.append(_individualize(g, node, v))
    return None


def automorphism_generators(g):
    """A strong generating set for the type-preserving automorphism group.

    Walks the leftmost path of the refinement tree; at each level, for every
    other vertex of the target cell, looks for one leaf equivalent to the
    reference leaf.  Each success is a coset representative of the pointwise
    stabilizer of the earlier individualized vertices.
    """
    path = [_refine(g, _initial_colors(g))]
    while _target_cell(path[-1]) is not None:
        path.append(_individualize(g, path[-1], _target_cell(path[-1])[0]))
    ref = path[-1]
    cert = _labeled_incidence(g, ref)
    N = g.num_panels
    gens = []
    # deepest level first, so gens found so far generate the relevant stabilizer
    for node in reversed(path[:-1]):
        cell = _target_cell(node)
        orbit = _orbit(cell[0], gens)
        for u in cell[1:]:
            if u in orbit:
                continue
            leaf = _first_match(g, _individualize(g, node, u), cert)
            if leaf is None:
                continue
            inv = np.empty(N, dtype=np.int64)
            inv[leaf] = np.arange(N)
            perm = inv[np.asarray(ref)]
            _check_automorphism(g, perm)
            gens.append(perm)
            orbit = _orbit(cell[0], gens)
    return gens


def _orbit(v, gens):
    seen = {v}
    frontier = [v]
    while frontier:
        frontier = [int(s[x]) for x in frontier for s in gens if int(s[x]) not in seen]
        seen.update(frontier)
    return seen


def _check_automorphism(g, perm):
    for p, l in g.incidence:
        if (int(perm[p]), int(perm[l])) not in g.incidence:
            raise AssertionError("search produced a non-automorphism")


def close_permutations(gens, size):
    """All products of ``gens`` (permutations of ``range(size)``), sorted."""
    identity = np.arange(size, dtype=np.int64)
    seen = {identity.tobytes()}
    elements = [identity]
    frontier = [identity]
    while frontier:
        nxt = []
        for a in frontier:
            for s in gens:
                c = s[a]
                key = c.tobytes()
                if key not in seen:
                    seen.add(key)
                    elements.append(c)
                    nxt.append(c)
        frontier = nxt
    out = np.array(elements, dtype=np.int64)
    return out[np.lexsort(out.T[::-1])]


def automorphism_permutations(g):
    """All type-preserving automorphisms of ``g`` as an ``(N, panels)`` array.

    Row ``k`` maps panel ``v`` to ``out[k, v]``; rows are sorted, so the
    identity comes first.
    """
    return close_permutations(automorphism_generators(g), g.num_panels)
