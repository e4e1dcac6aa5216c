import json
import random
from fractions import Fraction

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from forge.action import Automorphism, apply_to_realized, close_group, fixed_panels, stabilizer
from forge.dichotomy import (
    FIXED,
    OPPOSITE,
    DichotomyCertificate,
    G2Finding,
    decide,
    decide_a2,
    decide_c2,
    flag_midpoints,
    g2_search,
    nearest_panel,
    sweep_verify,
)
from forge.errors import GeometryMismatch, ReplayMismatch
from forge.polygon import build, cat1_distance, panel_distance
from forge.replay import recheck_g2_finding, verify_certificate


def test_nearest_panel(w2):
    p, l = sorted(w2.incidence)[0]
    assert nearest_panel(w2, w2.panel_point(p)) == p
    assert nearest_panel(w2, w2.panel_point(l)) == l
    x = w2.realized(p, l, Fraction(1, 16))
    assert nearest_panel(w2, x) == p
    assert panel_distance(w2, p, x) == cat1_distance(w2, w2.panel_point(p), x) == Fraction(1, 16)
    m = w2.midpoint((p, l))
    assert panel_distance(w2, nearest_panel(w2, m), m) == Fraction(1, 8)


def test_c2_trivial_group_fixes_an_arc_end(w2):
    G = close_group([Automorphism.identity(w2)])
    f = sorted(w2.incidence)[3]
    cert = decide_c2(G, w2.midpoint(f))
    assert cert.branch == FIXED
    assert cert.panel in f
    assert cert.angle == Fraction(1, 8) <= Fraction(3, 8)
    verify_certificate(cert, G)


def test_c2_full_group_moves_opposite(w2, full_group):
    G = full_group(w2)
    for x in flag_midpoints(w2)[:10]:
        cert = decide_c2(G, x)
        assert cert.branch == OPPOSITE and cert.angle >= Fraction(7, 8)
        verify_certificate(cert, G)


def _transitive_proper_subgroup(g, G, seed=0):
    rng = random.Random(seed)
    while True:
        H = close_group(rng.sample(G.elements, 2))
        if len(H) < len(G) and len({a.perm[0] for a in H}) == g.num_points:
            return H


def test_c2_point_transitive_subgroup(w2, full_group):
    H = _transitive_proper_subgroup(w2, full_group(w2))
    x = w2.realized(*sorted(w2.incidence)[5], Fraction(1, 24))
    cert = decide_c2(H, x)
    assert cert.branch == OPPOSITE and cert.angle >= Fraction(7, 8)
    verify_certificate(cert, H)


def test_c2_flag_stabilizer_fixes_the_nearest_panel(w2, full_group):
    p, l = sorted(w2.incidence)[2]
    S = stabilizer(full_group(w2), [p, l])
    x = w2.realized(p, l, Fraction(1, 16))
    cert = decide_c2(S, x)
    assert cert.branch == FIXED and cert.panel == p
    # oracle: the witness is fixed and equals the meet of the images of p's line set
    assert cert.panel in fixed_panels(S)
    verify_certificate(cert, S)


def test_a2_cases(pg22, full_group):
    G = full_group(pg22)
    triv = close_group([Automorphism.identity(pg22)])
    f = sorted(pg22.incidence)[0]
    x = pg22.midpoint(f)
    cert = decide_a2(triv, x)
    assert cert.branch == FIXED and cert.panel == f[1] and cert.angle <= Fraction(1, 3)
    cert = decide_a2(G, x)
    assert cert.branch == OPPOSITE and cert.angle >= Fraction(2, 3)
    verify_certificate(cert, G)
    S = stabilizer(G, [f[1]])
    cert = decide_a2(S, pg22.realized(f[0], f[1], Fraction(1, 12)))
    assert cert.branch == FIXED and cert.angle < Fraction(1, 2)
    assert f[1] in fixed_panels(S)


def test_kind_mismatch(pg22, w2):
    with pytest.raises(GeometryMismatch):
        decide_c2(close_group([Automorphism.identity(pg22)]), pg22.midpoint(sorted(pg22.incidence)[0]))
    with pytest.raises(GeometryMismatch):
        decide_a2(close_group([Automorphism.identity(w2)]), w2.midpoint(sorted(w2.incidence)[0]))


def test_certificate_json_round_trip_and_tampering(pg22, full_group):
    G = full_group(pg22)
    x = pg22.midpoint(sorted(pg22.incidence)[4])
    cert = decide(G, x)
    again = DichotomyCertificate.from_json(pg22, json.loads(json.dumps(cert.to_json())))
    assert again == cert
    verify_certificate(again, G)
    bad = DichotomyCertificate(cert.kind, cert.branch, cert.word, cert.panel, cert.base_panel,
                               cert.x, cert.angle + Fraction(1, 12), cert.chamber)
    with pytest.raises(ReplayMismatch):
        verify_certificate(bad, G)


def _oracle_a2(G, x):
    """Brute force: does some element move the line of x's flag off its point?"""
    g = G.geometry
    D = dict(nx.all_pairs_shortest_path_length(nx.Graph(list(g.incidence))))
    p, l = x.flag
    movers = [a for a in G.elements if D[p][a.perm[l]] != 1]
    return bool(movers), movers


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 3))
def test_a2_decider_agrees_with_brute_force(seed, ngens):
    g = _PG22
    G_full = _full(g)
    rng = random.Random(seed)
    H = close_group(rng.sample(G_full.elements, ngens))
    x = g.realized(*rng.choice(sorted(g.incidence)), Fraction(rng.randint(0, 6), 18))
    cert = decide_a2(H, x)
    has_mover, _ = _oracle_a2(H, x)
    assert (cert.branch == OPPOSITE) == has_mover
    if cert.branch == OPPOSITE:
        # the bound, recomputed from scratch
        a = H.evaluate(cert.word)
        assert panel_distance(g, x.point, apply_to_realized(a, x)) == cert.angle >= Fraction(2, 3)
    else:
        assert cert.panel in fixed_panels(H) and cert.angle < Fraction(1, 2)
    verify_certificate(cert, H)


_PG22 = build("PG2_2")
_FULL = {}


def _full(g):
    if g.name not in _FULL:
        from forge.search import automorphism_generators
        _FULL[g.name] = close_group([Automorphism(g, p) for p in automorphism_generators(g)])
    return _FULL[g.name]


def test_sweep_with_no_samples_is_empty(pg22, full_group):
    r = sweep_verify(full_group(pg22), 0, cyclic=False)
    assert r.instances == 0 and r.violations == 0


def test_small_sweep(pg22, full_group):
    r = sweep_verify(full_group(pg22), 20, seed=3)
    assert r.violations == 0
    assert r.cyclic_subgroups == 79 and r.random_subgroups == 20
    assert r.instances == (79 + 20) * 21
    assert r.min_opposite_angle >= Fraction(2, 3) and r.max_fixed_angle < Fraction(1, 2)


def test_g2_search_small():
    rep = g2_search(2, 20, seed=1)
    assert rep.trials == 20
    assert rep.rechecked == len(rep.findings) - rep.skipped
    for f in rep.findings:
        assert set(f.generators[0]) == set(range(126))


def test_g2_trivial_and_transitive_subgroups_have_no_findings():
    h = build("H2")
    ident = tuple(range(h.num_panels))
    rep = g2_search(1, 1, geometry=h, automorphisms=[ident])
    assert rep.findings == []


def test_g2_recheck_rejects_a_false_finding():
    h = build("H2")
    ident = tuple(range(h.num_panels))
    x = h.midpoint(sorted(h.incidence)[0])
    fake = G2Finding(0, (ident,), x, x.point)
    with pytest.raises(ReplayMismatch):
        recheck_g2_finding(h, fake)
