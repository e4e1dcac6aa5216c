"""Independent re-verification of dichotomy certificates and hexagon findings.

Nothing here reuses the cached distance matrix, the closure words or the
deciders: graph distances come from networkx, CAT(1) distances from a
Dijkstra run on the metric incidence graph with the two query points
spliced in, and groups are closed by naive repeated multiplication.
"""
from __future__ import annotations

import weakref
from fractions import Fraction

import networkx as nx
import numpy as np

from .errors import ReplayMismatch


_GRAPHS = weakref.WeakKeyDictionary()


def incidence_graph(g):
    G = nx.Graph()
    G.add_nodes_from(g.panels)
    G.add_edges_from(g.incidence)
    return G


def _cached(g):
    if g not in _GRAPHS:
        arc = Fraction(1, g.n)
        metric = nx.Graph()
        for p, l in g.incidence:
            metric.add_edge(p, l, weight=arc)
        dist = dict(nx.all_pairs_shortest_path_length(incidence_graph(g)))
        _GRAPHS[g] = (dist, metric)
    return _GRAPHS[g]


def _graph_distances(g):
    return _cached(g)[0]


def _metric_distance(g, x, y):
    """CAT(1) distance (multiple of pi) by Dijkstra with spliced-in endpoints."""
    arc = Fraction(1, g.n)
    G = _cached(g)[1]

    def splice(tag, pt):
        if pt.theta == 0:
            return pt.point
        if pt.theta == arc:
            return pt.line
        node = (tag, pt.point, pt.line)
        G.add_edge(node, pt.point, weight=pt.theta)
        G.add_edge(node, pt.line, weight=arc - pt.theta)
        return node

    sx = splice("x", x)
    sy = splice("y", y)
    if x.flag == y.flag and isinstance(sx, tuple) and isinstance(sy, tuple):
        G.add_edge(sx, sy, weight=abs(x.theta - y.theta))
    try:
        d = nx.dijkstra_path_length(G, sx, sy, weight="weight")
    finally:
        G.remove_nodes_from([n for n in (sx, sy) if isinstance(n, tuple)])
    return min(Fraction(d), Fraction(1))


def _apply(perm, x):
    from .polygon import RealizedPoint

    return RealizedPoint(int(perm[x.point]), int(perm[x.line]), x.theta, x.n)


def _word_element(generators, word, size):
    perm = np.arange(size)
    for i in word:
        perm = np.asarray(generators[i].perm)[perm]
    return perm


def _naive_closure(gens, size, cap=None):
    identity = tuple(range(size))
    elems = {identity}
    changed = True
    while changed:
        changed = False
        for a in list(elems):
            for s in gens:
                c = tuple(int(s[i]) for i in a)
                if c not in elems:
                    elems.add(c)
                    changed = True
                    if cap is not None and len(elems) > cap:
                        return None
    return elems


def verify_certificate(cert, G):
    """Re-check a dichotomy certificate against group closure ``G``.

    Raises :class:`ReplayMismatch` on any disagreement; returns True.
    """
    g = G.geometry
    dist = _graph_distances(g)
    x = cert.x
    p = cert.base_panel
    if cert.kind != g.kind:
        raise ReplayMismatch("certificate type does not match geometry")

    def panel_pt(a):
        return g.panel_point(a)

    if cert.kind == "C2":
        d_point = _metric_distance(g, panel_pt(x.point), x)
        d_line = _metric_distance(g, panel_pt(x.line), x)
        nearest = x.point if d_point <= d_line else x.line
        if p != nearest:
            raise ReplayMismatch(f"base panel {p} is not nearest to x (expected {nearest})")
    else:
        if cert.chamber is None or p not in cert.chamber:
            raise ReplayMismatch("A2 certificate lacks a chamber containing its panel")

    if cert.branch == "opposite":
        elem = _word_element(G.generators, cert.word, g.num_panels)
        moved = p if cert.kind == "C2" else [c for c in cert.chamber if c != p][0]
        if int(elem[moved]) != cert.panel:
            raise ReplayMismatch("witness word does not produce the recorded panel")
        if dist[p][cert.panel] != g.n:
            raise ReplayMismatch("recorded panel is not opposite the base panel")
        angle = _metric_distance(g, panel_pt(p), _apply(elem, x))
        bound = Fraction(7, 8) if cert.kind == "C2" else Fraction(2, 3)
        if angle != cert.angle or angle < bound:
            raise ReplayMismatch(f"angle {angle} vs recorded {cert.angle}, bound {bound}")
    elif cert.branch == "fixed_panel":
        for s in G.generators:
            if s.perm[cert.panel] != cert.panel:
                raise ReplayMismatch("witness panel is moved by a generator")
        angle = _metric_distance(g, panel_pt(cert.panel), x)
        if angle != cert.angle or angle >= Fraction(1, 2):
            raise ReplayMismatch(f"fixed-panel distance {angle} vs recorded {cert.angle}")
    else:
        raise ReplayMismatch(f"unknown branch {cert.branch!r}")
    return True


def recheck_g2_finding(g, finding, cap=None):
    """Confirm both branches fail for a hexagon finding.

    Returns True when confirmed, None when the subgroup exceeds ``cap``;
    raises :class:`ReplayMismatch` if either branch actually holds.
    """
    elems = _naive_closure(finding.generators, g.num_panels, cap)
    if elems is None:
        return None
    dist = _graph_distances(g)
    x = finding.x
    d_point = _metric_distance(g, g.panel_point(x.point), x)
    d_line = _metric_distance(g, g.panel_point(x.line), x)
    p = x.point if d_point <= d_line else x.line
    if p != finding.base_panel:
        raise ReplayMismatch("finding's base panel is not nearest")
    if any(dist[p][e[p]] == g.n for e in elems):
        raise ReplayMismatch("branch 1 holds: an element moves p opposite")
    for a in g.panels:
        if all(e[a] == a for e in elems):
            if _metric_distance(g, g.panel_point(a), x) < Fraction(1, 2):
                raise ReplayMismatch(f"branch 2 holds: panel {a} is fixed and near")
    return True


# -- synthesis traces -----------------------------------------------------
#
# Matrices are re-read from JSON as {exp: coeff} Laurent maps and multiplied
# with plain dict arithmetic; distances come from Smith elimination over
# truncated power series (not determinantal divisors), and Busemann values
# from the limit d(x, r_s) - s along explicit ray vertices.

def _pmul(a, b, p):
    out = {}
    for i, x in a.items():
        for j, y in b.items():
            out[i + j] = (out.get(i + j, 0) + x * y) % p
    return {k: c for k, c in out.items() if c}


def _padd(a, b, p, sign=1):
    out = dict(a)
    for k, c in b.items():
        out[k] = (out.get(k, 0) + sign * c) % p
    return {k: c for k, c in out.items() if c}


def _mat(data):
    return [[{int(k): int(c) for k, c in e.items() if int(c)} for e in row] for row in data]


def _basis(vertex):
    return [[{i: int(c) for i, c in enumerate(e) if int(c)} for e in row] for row in vertex["basis"]]


def _mm(a, b, p):
    out = []
    for i in range(3):
        row = []
        for j in range(3):
            e = {}
            for k in range(3):
                e = _padd(e, _pmul(a[i][k], b[k][j], p), p)
            row.append(e)
        out.append(row)
    return out


def _ident():
    return [[{0: 1} if i == j else {} for j in range(3)] for i in range(3)]


def _word(gens, word, p):
    m = _ident()
    for i in word:
        m = _mm(gens[i], m, p)
    return m


def _minor(m, rows, cols, p):
    (a, b), (c, d) = rows, cols
    return _padd(_pmul(m[a][c], m[b][d], p), _pmul(m[a][d], m[b][c], p), p, -1)


def _det(m, p):
    out = {}
    for j, sign in ((0, 1), (1, -1), (2, 1)):
        cols = [c for c in range(3) if c != j]
        out = _padd(out, _pmul(m[0][j], _minor(m, (1, 2), cols, p), p), p, sign)
    return out


def _adj(m, p):
    out = [[None] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(3):
            rows = [r for r in range(3) if r != j]
            cols = [c for c in range(3) if c != i]
            out[i][j] = _padd({}, _minor(m, rows, cols, p), p, 1 if (i + j) % 2 == 0 else -1)
    return out


def _v(e):
    return min(e) if e else None


def _series_inv(u, n, p):
    """Inverse of a unit series mod t^n."""
    inv = [0] * n
    inv[0] = pow(u[0], -1, p)
    for k in range(1, n):
        s = sum(u[i] * inv[k - i] for i in range(1, min(k, len(u) - 1) + 1))
        inv[k] = (-s * inv[0]) % p
    return inv


def _smith_valuations(m, p):
    """Valuations of the elementary divisors of ``m`` by pivoting."""
    low = min(_v(e) for row in m for e in row if e)
    m = [[{k - low: c for k, c in e.items()} for e in row] for row in m]
    dv = _v(_det(m, p))
    if dv is None:
        raise ReplayMismatch("singular lattice basis")
    n = dv + 1
    a = [[[e.get(k, 0) for k in range(n)] for e in row] for row in m]
    rows, cols, out = [0, 1, 2], [0, 1, 2], []

    def val(x):
        return next((k for k, c in enumerate(x) if c), n)

    while rows:
        v, i, j = min((val(a[r][c]), r, c) for r in rows for c in cols)
        if v >= n:
            raise ReplayMismatch("elimination ran past the truncation")
        inv = _series_inv(a[i][j][v:], n, p)
        for r in rows:
            if r == i:
                continue
            # f = a[r][j] / a[i][j], a series since val(a[r][j]) >= v
            q = a[r][j][v:] + [0] * v
            f = [sum(q[s] * inv[k - s] for s in range(k + 1)) % p for k in range(n)]
            for c in cols:
                prod = [sum(f[s] * a[i][c][k - s] for s in range(k + 1)) % p for k in range(n)]
                a[r][c] = [(x - y) % p for x, y in zip(a[r][c], prod)]
        out.append(v + low)
        rows.remove(i)
        cols.remove(j)
    if sum(out) != dv + 3 * low:
        raise ReplayMismatch("elimination lost the determinant valuation")
    return sorted(out)


def _shift_poly(m):
    low = min(_v(e) for row in m for e in row if e)
    return [[{k - low: c for k, c in e.items()} for e in row] for row in m]


def _d2(a, b, p):
    e = _smith_valuations(_mm(_adj(a, p), b, p), p)
    x, y = e[2] - e[0], e[1] - e[0]
    return x * x + y * y - x * y


def _ray_vertex(base, frame, dim, s, p):
    f = [[{0: int(c) % p} if int(c) % p else {} for c in row] for row in frame]
    diag = [[{} for _ in range(3)] for _ in range(3)]
    for i in range(3):
        diag[i][i] = {0 if i < dim else s: 1}
    return _mm(_mm(base, f, p), diag, p)


def _busemann_limit(x, base, frame, dim, p, start=8, cap=512):
    s = start
    while s <= cap:
        f = [_d2(x, _ray_vertex(base, frame, dim, s + k, p), p) for k in range(4)]
        d1 = [f[k + 1] - f[k] for k in range(3)]
        if d1[1] - d1[0] == 2 and d1[2] - d1[1] == 2:
            return Fraction(d1[0] - 2 * s - 1, 2)
        s *= 2
    raise ReplayMismatch("distance to the ray never became quadratic")


def _newton_length2(g, p):
    tr = _padd(_padd(g[0][0], g[1][1], p), g[2][2], p)
    c2 = {}
    for i, j in ((0, 1), (0, 2), (1, 2)):
        c2 = _padd(c2, _minor(g, (i, j), (i, j), p), p)
    pts = [(0, _v(_det(g, p))), (1, _v(c2)), (2, _v(tr)), (3, 0)]
    pts = [(i, Fraction(y)) for i, y in pts if y is not None]
    # a point is a hull vertex unless it lies on or above some chord
    hull = [pt for k, pt in enumerate(pts)
            if k in (0, len(pts) - 1)
            or not any(a[0] < pt[0] < b[0] and (pt[1] - a[1]) * (b[0] - a[0]) >= (b[1] - a[1]) * (pt[0] - a[0])
                       for a in pts for b in pts)]
    nu = []
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        nu += [-(y2 - y1) / (x2 - x1)] * (x2 - x1)
    s = sum(nu)
    return (3 * sum(x * x for x in nu) - s * s) / 2


def verify_trace(data):
    """Recompute a synthesis trace (a ``forge-trace/1`` dict) from its inputs.

    Raises :class:`ReplayMismatch` on the first disagreement; returns True.
    """
    from .exact import Angle, Surd

    if data.get("schema") != "forge-trace/1":
        raise ReplayMismatch(f"unknown schema {data.get('schema')!r}")
    p = int(data["q"])
    G0 = [_mat(g["entries"]) for g in data["G0"]]
    G1 = [_mat(g["entries"]) for g in data["G1"]]
    pts = [_basis(v) for v in data["points"]]
    d2 = int(data["d2"])

    def same(a, b):
        return _d2(a, b, p) == 0

    def act(g, v):
        return _shift_poly(_mm(g, v, p))

    a0, a1 = pts[0], pts[1]
    for s in G0:
        if not same(act(s, a0), a0):
            raise ReplayMismatch("a G0 generator moves a0")
    for s in G1:
        if not same(act(s, a1), a1):
            raise ReplayMismatch("a G1 generator moves a1")
    if _d2(a0, a1, p) != d2:
        raise ReplayMismatch("recorded distance between a0 and a1 is wrong")
    if data["g"] is None:
        return True

    g1 = _word(G1, data["g1_word"], p)
    w0 = _word(G0, data["g2_word"], p)
    g = _mm(g1, w0, p)  # g2 g1 = (g1 w0 g1^-1) g1
    if g1 != _mat(data["g1"]["entries"]):
        raise ReplayMismatch("g1 does not match its word")
    if g != _mat(data["g"]["entries"]):
        raise ReplayMismatch("g does not match g2 g1")
    if _mm(_mat(data["g2"]["entries"]), g1, p) != g:
        raise ReplayMismatch("recorded g2 is not g1 w g1^-1")
    if not same(act(g1, a1), a1):
        raise ReplayMismatch("g1 moves a1")
    if not same(act(g1, a0), pts[2]):
        raise ReplayMismatch("a2 != g1 a0")
    for i in range(3, len(pts)):
        if not same(act(g, pts[i - 2]), pts[i]):
            raise ReplayMismatch(f"a_{i} != g a_{i - 2}")

    ray = data["ray"]
    base, frame, dim = _basis(ray["base"]), ray["frame"], int(ray["dim"])
    b = [_busemann_limit(v, base, frame, dim, p) for v in pts]
    if [str(x) for x in b] != data["busemann"]:
        raise ReplayMismatch(f"Busemann values {b} differ from the trace")
    inc = [b[i + 1] - b[i] for i in range(1, len(b) - 1)]
    if [str(x) for x in inc] != data["increments"]:
        raise ReplayMismatch("increments differ from the trace")
    panels = [_basis(v) for v in data["panels"]]
    angles = []
    for i in range(1, len(pts) - 1):
        u = panels[i - 1]
        if _d2(pts[i], u, p) != 1:
            raise ReplayMismatch(f"p_{i} is not adjacent to a_{i}")
        if _busemann_limit(u, base, frame, dim, p) != b[i] - 1:
            raise ReplayMismatch(f"p_{i} is not one step toward the ray")
        x2, y2, z2 = 1, _d2(pts[i], pts[i + 1], p), _d2(u, pts[i + 1], p)
        num = Fraction(x2 + y2 - z2)
        ang = Angle(num * num / (4 * x2 * y2), (num > 0) - (num < 0))
        if ang < Fraction(2, 3):
            raise ReplayMismatch(f"angle at a_{i} below 2pi/3")
        angles.append(ang.to_json())
    if angles != data["angles"]:
        raise ReplayMismatch("angles differ from the trace")
    if inc and (len(set(inc)) != 1 or Surd.coerce(inc[0]) < Surd.sqrt(d2) / 2):
        raise ReplayMismatch("increments are not constant and at least d/2")

    ell2 = _newton_length2(g, p)
    verdict = data["verdict"]
    if verdict is not None:
        if Fraction(verdict["translation_length_squared"]) != ell2:
            raise ReplayMismatch(f"translation length squared {ell2} differs")
        if (verdict["verdict"] == "Hyperbolic") != (ell2 > 0):
            raise ReplayMismatch("verdict disagrees with the translation length")
    gk = _ident()
    for k in range(1, 5):
        gk = _mm(g, gk, p)
        if _d2(a0, act(gk, a0), p) < k * k * ell2:
            raise ReplayMismatch(f"g^{k} displaces a0 less than k * length")
    return True
