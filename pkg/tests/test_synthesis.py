import copy
import json
from fractions import Fraction

import pytest

from forge.cli import main
from forge.errors import (
    ClosestPairViolated,
    EmptyInput,
    NotDisjoint,
    NotElliptic,
    ReplayMismatch,
    TypePreservationViolation,
)
from forge.exact import Angle, Surd
from forge.lattice import (
    MatrixIsometry,
    act,
    base_vertex,
    distance_squared,
    link_direction,
    singer_matrix,
    vertex_link,
    vertex_neighbors,
)
from forge.replay import verify_trace
from forge.synthesis import (
    SCHEMA,
    closest_pair,
    local_step,
    standard_example,
    synthesize,
    trace_to_svg,
    validate_inputs,
)

V0 = base_vertex(2)
H = MatrixIsometry.diag(2, (1, 0, -1))


@pytest.fixture(scope="module")
def trace(ball2):
    g0, g1 = standard_example()
    return synthesize(g0, g1, ball=ball2, steps=6)


def test_closest_pair_examples():
    hv = act(H, V0)
    assert closest_pair([V0], [hv]).distance == Surd.sqrt(3)
    nb = vertex_neighbors(V0)[3].vertex
    assert closest_pair([V0], [nb]).distance == 1
    with pytest.raises(NotDisjoint):
        closest_pair([V0], [V0])
    with pytest.raises(EmptyInput):
        closest_pair([], [V0])


def test_closest_pair_is_minimal_by_enumeration(ball2):
    import random
    rng = random.Random(4)
    for _ in range(20):
        A = rng.sample(ball2.vertices, 3)
        B = [v for v in rng.sample(ball2.vertices, 4) if v not in A]
        if not B:
            continue
        pair = closest_pair(A, B)
        assert pair.distance_squared == min(distance_squared(a, b) for a in A for b in B)


def test_local_step_examples():
    hv = act(H, V0)
    L = vertex_link(V0)
    x = link_direction(L, hv)
    step = local_step([singer_matrix(2)], V0, x, x.flag, None, L)
    assert step.certificate.branch == "opposite"
    assert step.angle >= Fraction(2, 3)
    with pytest.raises(ClosestPairViolated):
        local_step([], V0, x, x.flag, None, L)


def test_example_trace(trace):
    assert trace.d == Surd.sqrt(3)
    assert trace.verdict["verdict"] == "Hyperbolic"
    assert Fraction(trace.verdict["translation_length_squared"]) > 0
    pts = trace.points
    assert len(pts) == 7
    for i in range(2, 7):
        assert act(trace.g, pts[i - 2]) == pts[i]
    assert act(trace.g1, trace.a1) == trace.a1
    assert act(trace.g2, pts[2]) == pts[2]
    assert all(a >= Fraction(2, 3) for a in trace.angles)
    inc = trace.increments
    assert len(set(inc)) == 1 and Surd.coerce(inc[0]) >= trace.d / 2
    for k in range(1, 4):
        rise = trace.busemann[2 * k] - trace.busemann[0]
        assert rise * rise <= distance_squared(pts[0], pts[2 * k])


def test_example_values(trace):
    # frozen from the run: every angle is 5pi/6 and every increment is d cos(pi/6) = 3/2
    assert all(a == Fraction(5, 6) for a in trace.angles)
    assert trace.increments == [Fraction(3, 2)] * 5
    assert trace.verdict["translation_length"] == "3"


def test_translation_length_matches_newton_polygon(trace):
    from forge.lattice import eigenvalue_valuations, translation_length_squared
    nu = eigenvalue_valuations(trace.g)
    s = sum(nu)
    assert Fraction(trace.verdict["translation_length_squared"]) == (3 * sum(x * x for x in nu) - s * s) / 2
    assert translation_length_squared(trace.g) == 9


def test_replay_accepts_and_rejects(trace):
    data = json.loads(trace.dumps())
    assert data["schema"] == SCHEMA
    assert verify_trace(data)
    for field, tamper in [
        ("busemann", lambda d: d["busemann"].__setitem__(4, "5")),
        ("increments", lambda d: d["increments"].__setitem__(0, "1")),
        ("angles", lambda d: d["angles"][1].__setitem__("cos2", "1/4")),
        ("g1_word", lambda d: d.__setitem__("g1_word", d["g1_word"] + [0])),
        ("points", lambda d: d["points"].__setitem__(3, d["points"][4])),
        ("verdict", lambda d: d["verdict"].__setitem__("translation_length_squared", "3")),
        ("schema", lambda d: d.__setitem__("schema", "forge-trace/0")),
    ]:
        bad = copy.deepcopy(data)
        tamper(bad)
        with pytest.raises(ReplayMismatch):
            verify_trace(bad)


def test_synthesis_errors(ball2):
    g0, g1 = standard_example()
    with pytest.raises(NotDisjoint):
        synthesize(g0, g0, ball=ball2)
    with pytest.raises(NotElliptic):
        synthesize([H], g1, ball=ball2)
    with pytest.raises(TypePreservationViolation):
        synthesize([MatrixIsometry.diag(2, (1, 0, 0))], g1, ball=ball2)


def test_zero_steps(ball2):
    g0, g1 = standard_example()
    t = synthesize(g0, g1, ball=ball2, steps=0)
    assert t.verdict is None and t.g is None
    assert (t.a0, t.a1) == (V0, act(H, V0))
    assert verify_trace(json.loads(t.dumps()))


def test_validate_inputs():
    rep = validate_inputs([MatrixIsometry.diag(2, (1, 0, 0)), singer_matrix(2)])
    assert not rep[0]["type_preserving"] and rep[0]["issues"]
    assert rep[1]["type_preserving"] and rep[1]["elliptic"] and rep[1]["issues"] == []
    assert validate_inputs([]) == []


def test_svg(trace):
    svg = trace_to_svg(trace)
    assert svg.startswith("<svg") and svg.count("<circle") == 6


def test_cli_round_trip(tmp_path, capsys):
    g0, g1 = standard_example()
    f0, f1 = tmp_path / "g0.json", tmp_path / "g1.json"
    f0.write_text(json.dumps({"generators": [g.to_json() for g in g0]}))
    f1.write_text(json.dumps({"generators": [g.to_json() for g in g1]}))
    out = tmp_path / "trace.json"
    assert main(["synthesize", "--g0", str(f0), "--g1", str(f1), "--steps", "6",
                 "--out", str(out), "--svg", str(tmp_path / "t.svg")]) == 0
    assert main(["verify", "--trace", str(out)]) == 0
    data = json.loads(out.read_text())
    data["busemann"][2] = "0"
    out.write_text(json.dumps(data))
    assert main(["verify", "--trace", str(out)]) == 3
    assert main(["synthesize", "--g0", str(f0), "--g1", str(f0)]) == 2


def test_cli_other_commands(tmp_path, capsys):
    assert main(["geometry", "check", "W2"]) == 0
    assert json.loads(capsys.readouterr().out)["girth"] == 8
    assert main(["building", "ball", "--radius", "1", "--out", str(tmp_path / "b.json")]) == 0
    assert len(json.loads((tmp_path / "b.json").read_text())["vertices"]) == 15
    m = tmp_path / "h.json"
    m.write_text(json.dumps(H.to_json()))
    assert main(["building", "classify", "--matrix", str(m)]) == 0
    assert json.loads(capsys.readouterr().out)["verdict"] == "Hyperbolic"
    assert main(["building", "fixedset", "--gens", str(m)]) == 1  # EmptyOnBall
    assert main(["lemma", "decide", "--geometry", "PG2_2",
                 "--x", '{"flag": [0, 8], "theta": "1/6 pi"}']) == 0
    assert json.loads(capsys.readouterr().out)["branch"] == "opposite"
    assert main(["lemma", "decide", "--geometry", "PG2_2",
                 "--x", '{"flag": [0, 7], "theta": "1/6 pi"}']) == 1  # not a flag
    assert main(["hexagon", "search", "--trials", "2"]) == 0
