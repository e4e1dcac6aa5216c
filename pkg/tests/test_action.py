import itertools
import random

import numpy as np
import pytest

from forge.action import (
    Automorphism,
    apply_to_realized,
    close_group,
    compose,
    cyclic_subgroups,
    fixed_panels,
    orbit,
    orbits,
    stabilizer,
)
from forge.errors import ClosureCapExceeded, NotAnAutomorphism, TypePreservationViolation
from forge.polygon import IncidenceGeometry, cat1_distance, dual
from forge.search import canonical_certificate, find_isomorphism

SINGER = ((0, 0, 1), (1, 0, 1), (0, 1, 0))  # companion of x^3 + x + 1 over F_2


def _invertible_mod2(n):
    count = 0
    for bits in itertools.product((0, 1), repeat=n * n):
        m = np.array(bits).reshape(n, n)
        if round(np.linalg.det(m)) % 2:
            count += 1
    return count


def _sp4_2_order():
    """Oracle: count 4x4 matrices over F_2 preserving the standard symplectic form."""
    J = np.array([[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]])
    cols = [np.array(v) for v in itertools.product((0, 1), repeat=4) if any(v)]
    # build matrices column by column under the constraints M^T J M = J
    count = 0
    for a in cols:
        for b in cols:
            if a @ J @ b % 2:
                continue
            for c in cols:
                if a @ J @ c % 2 != 1 or b @ J @ c % 2:
                    continue
                for d in cols:
                    if a @ J @ d % 2 == 0 and b @ J @ d % 2 == 1 and c @ J @ d % 2 == 0:
                        count += 1
    return count


def test_pg22_full_group_has_order_of_gl3_f2(pg22, full_group):
    assert len(full_group(pg22)) == _invertible_mod2(3) == 168


def test_w2_full_group_is_sp4_2(w2, full_group):
    assert len(full_group(w2)) == _sp4_2_order() == 720


def test_compose_identity_and_inverse(pg22, full_group):
    G = full_group(pg22)
    e = Automorphism.identity(pg22)
    rng = random.Random(1)
    for a in rng.sample(G.elements, 20):
        assert compose(e, a) == a
        assert compose(a, a.inverse()).is_identity()


def test_compose_matches_matrix_product(pg22):
    rng = random.Random(3)
    mats = []
    while len(mats) < 2:
        m = [[rng.randint(0, 1) for _ in range(3)] for _ in range(3)]
        if round(np.linalg.det(np.array(m))) % 2:
            mats.append(m)
    a, b = (Automorphism.from_matrix(pg22, m) for m in mats)
    # a then b acts on column vectors as B @ A
    prod = (np.array(mats[1]) @ np.array(mats[0]) % 2).tolist()
    assert compose(a, b) == Automorphism.from_matrix(pg22, prod)


def test_singer_orbit_and_fixed_points(pg22):
    s = Automorphism.from_matrix(pg22, SINGER)
    G = close_group([s])
    assert len(G) == 7
    for p in pg22.points:
        assert orbit(G, p) == set(pg22.points)
    assert fixed_panels(G) == set()
    assert orbits(G) == [list(pg22.points), list(pg22.lines)]


def test_trivial_group(pg22):
    G = close_group([Automorphism.identity(pg22)])
    assert len(G) == 1
    assert orbit(G, 0) == {0}
    assert fixed_panels(G) == set(pg22.panels)


def test_flag_stabilizer_fixes_its_point(pg22, full_group):
    G = full_group(pg22)
    p, l = sorted(pg22.incidence)[0]
    S = stabilizer(G, [p, l])
    assert orbit(S, p) == {p}
    assert len(S) == 168 // 21


def test_elations_fix_their_axis(pg22):
    # elations with axis x_2 = 0 over F_2: x -> x + (a x_2) e_0 + (b x_2) e_1
    F_line = next(l for l in pg22.lines if tuple(pg22.line_coords[l - pg22.num_points]) == (0, 0, 1))
    gens = []
    for a, b in [(1, 0), (0, 1), (1, 1)]:
        gens.append(Automorphism.from_matrix(pg22, [[1, 0, a], [0, 1, b], [0, 0, 1]]))
    G = close_group(gens)
    fixed = fixed_panels(G)
    assert F_line in fixed
    assert set(pg22.points_on(F_line)) <= fixed


def test_type_changing_maps_rejected(pg22):
    perm = list(range(pg22.num_points, pg22.num_panels)) + list(range(pg22.num_points))
    with pytest.raises((TypePreservationViolation, NotAnAutomorphism)):
        Automorphism(pg22, perm)
    bad = list(range(pg22.num_panels))
    bad[0], bad[1] = bad[1], bad[0]
    with pytest.raises(NotAnAutomorphism):
        Automorphism(pg22, bad)


def test_closure_cap(pg22, full_group):
    with pytest.raises(ClosureCapExceeded):
        close_group(full_group(pg22).generators, cap=10)


def test_action_is_isometric(w2, full_group):
    G = full_group(w2)
    rng = random.Random(5)
    flags = sorted(w2.incidence)
    from fractions import Fraction
    for _ in range(100):
        a = rng.choice(G.elements)
        x = w2.realized(*rng.choice(flags), Fraction(rng.randint(0, 4), 16))
        y = w2.realized(*rng.choice(flags), Fraction(rng.randint(0, 4), 16))
        assert cat1_distance(w2, x, y) == cat1_distance(w2, apply_to_realized(a, x),
                                                        apply_to_realized(a, y))
        assert apply_to_realized(Automorphism.identity(w2), x) == x


def test_cyclic_subgroups_of_pg22(pg22, full_group):
    # GL3(2) has 1 + 21 + 28 + 21 + 8 = 79 cyclic subgroups (orders 1, 2, 3, 4, 7)
    cyc = cyclic_subgroups(full_group(pg22))
    orders = sorted(len(close_group([a])) for a in cyc)
    assert len(cyc) == 79
    assert {k: orders.count(k) for k in set(orders)} == {1: 1, 2: 21, 3: 28, 4: 21, 7: 8}


def _relabel(g, rng):
    pts = list(g.points)
    lines = list(g.lines)
    rng.shuffle(pts)
    rng.shuffle(lines)
    pm = {p: i for i, p in enumerate(pts)}
    lm = {l: g.num_points + i for i, l in enumerate(lines)}
    return IncidenceGeometry(g.kind, g.num_points, g.num_lines,
                             [(pm[p], lm[l]) for p, l in g.incidence])


@pytest.mark.parametrize("name", ["PG2_2", "W2", "PG2_3"])
def test_certificate_is_relabeling_invariant(name, geometries):
    g = geometries[name]
    h = _relabel(g, random.Random(11))
    assert canonical_certificate(g) == canonical_certificate(h)
    iso = find_isomorphism(g, h)
    assert iso is not None
    assert all((int(iso[p]), int(iso[l])) in h.incidence for p, l in g.incidence)


def test_w2_is_self_dual(geometries):
    # W(q) is self-dual in characteristic 2
    w2 = geometries["W2"]
    assert find_isomorphism(dual(w2), w2) is not None
