import itertools
import random
from fractions import Fraction

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from forge.errors import GeometryAxiomError, UnknownFlag, UnsupportedOrder
from oracles import hexagon_counts, plane_counts, quadrangle_counts
from forge.polygon import (
    IncidenceGeometry,
    RealizedPoint,
    build,
    build_projective_plane,
    build_symplectic_quadrangle,
    cat1_distance,
    dual,
    graph_distance,
    is_opposite,
    panel_distance,
)


@pytest.mark.parametrize("q", [2, 3])
def test_projective_plane_counts_match_subspace_enumeration(q, geometries):
    g = geometries[f"PG2_{q}"]
    assert (g.num_points, g.num_lines) == plane_counts(q) == (q * q + q + 1,) * 2
    s = g.verify()
    assert s["points_per_line"] == [q + 1] and s["lines_per_point"] == [q + 1]


@pytest.mark.parametrize("q", [2, 3])
def test_symplectic_quadrangle_counts(q, geometries):
    g = geometries[f"W{q}"]
    assert (g.num_points, g.num_lines) == quadrangle_counts(q)
    assert g.num_points == (q + 1) * (q * q + 1)
    s = g.verify()
    assert (s["girth"], s["diameter"]) == (8, 4)
    assert s["points_per_line"] == [q + 1] and s["lines_per_point"] == [q + 1]


def _nx_graph(g):
    G = nx.Graph()
    G.add_edges_from(g.incidence)
    return G


@pytest.mark.parametrize("name,n", [("PG2_2", 3), ("PG2_3", 3), ("W2", 4), ("W3", 4), ("H2", 6)])
def test_girth_and_diameter_against_networkx(name, n, geometries):
    g = geometries[name]
    G = _nx_graph(g)
    assert nx.is_bipartite(G)
    assert nx.diameter(G) == n
    assert nx.girth(G) == 2 * n
    s = g.verify()
    assert (s["girth"], s["diameter"]) == (2 * n, n)


def test_hexagon_counts(geometries):
    g = geometries["H2"]
    assert (g.num_points, g.num_lines) == hexagon_counts(2) == (63, 63)
    assert {len(g.neighbors[p]) for p in g.points} == {3}
    assert {len(g.neighbors[l]) for l in g.lines} == {3}


def test_graph_distance_matches_bfs(pg22, w2):
    for g in (pg22, w2):
        lengths = dict(nx.all_pairs_shortest_path_length(_nx_graph(g)))
        for a in g.panels:
            for b in g.panels:
                assert graph_distance(g, a, b) == lengths[a][b]


def test_graph_distance_examples(pg22, w2):
    p, l = next(iter(sorted(pg22.incidence)))
    assert graph_distance(pg22, p, p) == 0
    assert graph_distance(pg22, p, l) == 1
    assert all(graph_distance(pg22, a, b) == 2
               for a, b in itertools.combinations(pg22.points, 2))
    off = next(m for m in pg22.lines if (p, m) not in pg22.incidence)
    assert is_opposite(pg22, p, off)
    assert not is_opposite(pg22, p, p)
    x, y = w2.neighbors[w2.lines[0]][:2]
    assert not is_opposite(w2, x, y)


def test_unsupported_orders():
    with pytest.raises(UnsupportedOrder):
        build_projective_plane(6)
    with pytest.raises(UnsupportedOrder):
        build_symplectic_quadrangle(4)


def test_axiom_violation_detected():
    # two disjoint triangles: disconnected incidence graph
    tri = [(0, 6), (1, 6), (1, 7), (2, 7), (2, 8), (0, 8)]
    g = IncidenceGeometry("A2", 6, 6, tri + [(p + 3, l + 3) for p, l in tri])
    with pytest.raises(GeometryAxiomError):
        g.verify()
    # a quadrangle's incidence checked as a projective plane fails girth
    w = build("W2")
    bad = IncidenceGeometry("A2", w.num_points, w.num_lines, w.incidence)
    with pytest.raises(GeometryAxiomError):
        bad.verify()


def test_json_round_trip_and_dual(geometries):
    for g in geometries.values():
        h = IncidenceGeometry.from_json(g.to_json())
        assert h.incidence == g.incidence and h.kind == g.kind
        d = dual(g)
        assert (d.num_points, d.num_lines) == (g.num_lines, g.num_points)
        d.verify()


def test_realized_rejects_non_flags(pg22):
    p = pg22.points[0]
    off = next(m for m in pg22.lines if (p, m) not in pg22.incidence)
    with pytest.raises(UnknownFlag):
        pg22.realized(p, off)


# -- CAT(1) metric ---------------------------------------------------------

def _all_pairs_exhaustive(g):
    lengths = dict(nx.all_pairs_shortest_path_length(_nx_graph(g)))
    for a in g.panels:
        pa = g.panel_point(a)
        for b in g.panels:
            assert cat1_distance(g, pa, g.panel_point(b)) == Fraction(lengths[a][b], g.n)


@pytest.mark.parametrize("name", ["PG2_2", "W2"])
def test_panel_distances_are_scaled_graph_distances(name, geometries):
    _all_pairs_exhaustive(geometries[name])


def test_cat1_examples(pg22, w2):
    p, l = sorted(pg22.incidence)[0]
    assert cat1_distance(pg22, pg22.panel_point(p), pg22.panel_point(p)) == 0
    assert cat1_distance(pg22, pg22.panel_point(p), pg22.panel_point(l)) == Fraction(1, 3)
    off = next(m for m in pg22.lines if (p, m) not in pg22.incidence)
    assert cat1_distance(pg22, pg22.panel_point(p), pg22.panel_point(off)) == 1
    # midpoint of a quadrangle arc is pi/8 from both ends
    f = sorted(w2.incidence)[0]
    m = w2.midpoint(f)
    assert panel_distance(w2, f[0], m) == panel_distance(w2, f[1], m) == Fraction(1, 8)
    x = w2.realized(f[0], f[1], Fraction(1, 16))
    assert panel_distance(w2, f[0], x) == Fraction(1, 16)


def _metric_dijkstra(g, x, y):
    """Oracle: Dijkstra on the incidence graph subdivided at x and y."""
    G = nx.Graph()
    arc = Fraction(1, g.n)
    for p, l in g.incidence:
        G.add_edge(p, l, w=arc)

    def node(tag, z):
        if z.panel() is not None:
            return z.panel()
        G.remove_edge(z.point, z.line) if G.has_edge(z.point, z.line) else None
        G.add_edge(tag, z.point, w=z.theta)
        G.add_edge(tag, z.line, w=arc - z.theta)
        return tag

    a = node("x", x)
    if y.flag == x.flag and x.panel() is None and y.panel() is None:
        G.add_edge("x", "y", w=abs(x.theta - y.theta))
        G.add_edge("y", y.point, w=y.theta)
        G.add_edge("y", y.line, w=arc - y.theta)
        b = "y"
    else:
        b = node("y", y)
    return min(Fraction(nx.dijkstra_path_length(G, a, b, weight="w")), Fraction(1))


def _sample_point(g, rng):
    p, l = rng.choice(sorted(g.incidence))
    k = rng.randint(1, 4 * g.n - 1) if rng.random() < 0.8 else rng.choice([0, 4 * g.n])
    return g.realized(p, l, Fraction(k, 4 * g.n * g.n))


@pytest.mark.parametrize("name", ["PG2_2", "W2", "H2"])
def test_cat1_matches_dijkstra_oracle(name, geometries):
    g = geometries[name]
    rng = random.Random(7)
    for _ in range(150):
        x, y = _sample_point(g, rng), _sample_point(g, rng)
        assert cat1_distance(g, x, y) == _metric_dijkstra(g, x, y)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from(["PG2_2", "W2", "H2"]))
def test_cat1_metric_axioms(seed, name):
    g = build(name) if name not in _CACHE else _CACHE[name]
    _CACHE[name] = g
    rng = random.Random(seed)
    x, y, z = (_sample_point(g, rng) for _ in range(3))
    dxy = cat1_distance(g, x, y)
    assert dxy == cat1_distance(g, y, x)
    assert 0 <= dxy <= 1
    assert (dxy == 0) == (x == y)
    assert dxy <= cat1_distance(g, x, z) + cat1_distance(g, z, y)


_CACHE = {}
