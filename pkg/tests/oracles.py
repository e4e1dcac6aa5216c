"""Brute-force reference computations shared by the tests.

None of these touch the library: they enumerate vectors, subspaces and
submodules directly.
"""
import itertools


def proj_points(p, dim):
    """Normalized nonzero vectors of F_p^dim (first nonzero coordinate is 1)."""
    out = []
    for v in itertools.product(range(p), repeat=dim):
        if any(v) and v[next(i for i, c in enumerate(v) if c)] == 1:
            out.append(v)
    return out


def rank_mod_p(rows, p):
    rows = [list(r) for r in rows]
    rank, col = 0, 0
    ncols = len(rows[0]) if rows else 0
    while rank < len(rows) and col < ncols:
        piv = next((i for i in range(rank, len(rows)) if rows[i][col] % p), None)
        if piv is None:
            col += 1
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = pow(rows[rank][col], -1, p)
        rows[rank] = [(x * inv) % p for x in rows[rank]]
        for i in range(len(rows)):
            if i != rank and rows[i][col] % p:
                f = rows[i][col]
                rows[i] = [(a - f * b) % p for a, b in zip(rows[i], rows[rank])]
        rank += 1
        col += 1
    return rank


def plane_counts(p):
    """(points, lines) of PG(2, p) from 1- and 2-subspaces of F_p^3."""
    pts = proj_points(p, 3)
    planes = {frozenset(v for v in pts if rank_mod_p([a, b, v], p) == 2)
              for a, b in itertools.combinations(pts, 2)}
    return len(pts), len(planes)


def quadrangle_counts(p):
    """(points, lines) of W(p): points of PG(3, p) and totally isotropic lines."""
    pts = proj_points(p, 4)

    def form(x, y):
        return (x[0] * y[2] - x[2] * y[0] + x[1] * y[3] - x[3] * y[1]) % p

    spans = set()
    for x, y in itertools.combinations(pts, 2):
        if form(x, y) == 0:
            spans.add(frozenset(v for v in pts if rank_mod_p([x, y, v], p) == 2))
    return len(pts), len(spans)


def hexagon_counts(q=2):
    """(points, lines) of the split Cayley hexagon H(q).

    Points are all points of the parabolic quadric
    ``x0 x4 + x1 x5 + x2 x6 = x3^2`` in PG(6, q), counted by enumeration;
    an order-(q, q) generalized hexagon has as many lines as points.
    """
    pts = [v for v in proj_points(q, 7)
           if (v[0] * v[4] + v[1] * v[5] + v[2] * v[6] - v[3] * v[3]) % q == 0]
    return len(pts), len(pts)


def submodule_count():
    """O-submodules of (F_2[t]/t^2)^3 not inside t(...), by brute force.

    Elements are 6-bit vectors (3 constant terms, then 3 t-coefficients);
    multiplication by t moves constant terms to the t slot.  These are the
    vertices within graph distance 2 of the standard vertex.
    """
    def t(v):
        return (v & 0b111) << 3

    spaces = {frozenset([0])}
    frontier = list(spaces)
    while frontier:
        nxt = []
        for s in frontier:
            for v in range(64):
                if v in s:
                    continue
                new = set(s)
                todo = [v]
                while todo:
                    w = todo.pop()
                    if w in new:
                        continue
                    new |= {w ^ x for x in new} | {w}
                    todo.append(t(w))
                new = frozenset(new)
                if new not in spaces:
                    spaces.add(new)
                    nxt.append(new)
        frontier = nxt
    return sum(1 for s in spaces if any(v & 0b111 for v in s))
