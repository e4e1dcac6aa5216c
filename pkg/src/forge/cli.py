"""Command line entry point: ``forge <group> <command>``.

Exit codes: 0 certified, 1 usage or other library error, 2 hypothesis
failure (bad inputs), 3 tripwire (an internal check contradicted itself).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .errors import ForgeError

log = logging.getLogger("forge")


def _emit(obj, out=None):
    text = obj if isinstance(obj, str) else json.dumps(obj, indent=1, sort_keys=True)
    if out:
        Path(out).write_text(text + "\n")
        log.info("wrote %s", out)
    else:
        print(text)


def _load_json(path):
    return json.loads(Path(path).read_text())


def _load_matrices(path):
    """Matrix JSON: one matrix, a list of them, or ``{"generators": [...]}``."""
    from .lattice import MatrixIsometry

    data = _load_json(path)
    if isinstance(data, dict) and "generators" in data:
        data = data["generators"]
    if isinstance(data, dict):
        data = [data]
    return [MatrixIsometry.from_json(d) for d in data]


def _geometry(name_or_path):
    from .polygon import IncidenceGeometry, build

    if Path(name_or_path).is_file():
        return IncidenceGeometry.from_json(Path(name_or_path).read_text())
    return build(name_or_path)


def _full_group(g):
    from .action import Automorphism, close_group
    from .search import automorphism_generators

    return close_group([Automorphism(g, p) for p in automorphism_generators(g)])


# -- geometry -------------------------------------------------------------

def cmd_geometry_build(args):
    g = _geometry(args.name)
    g.verify()
    _emit(g.to_json(), args.out)


def cmd_geometry_check(args):
    g = _geometry(args.geometry)
    _emit(g.verify())


# -- lemma ----------------------------------------------------------------

def cmd_lemma_decide(args):
    from .action import close_group, load_group
    from .dichotomy import decide, decide_a2
    from .polygon import RealizedPoint
    from .replay import verify_certificate

    g = _geometry(args.geometry)
    G = close_group(load_group(g, _load_json(args.group))) if args.group else _full_group(g)
    x = RealizedPoint.from_json(g, json.loads(args.x))
    if g.kind == "A2" and (args.chamber or args.panel is not None):
        chamber = tuple(int(c) for c in args.chamber.split(",")) if args.chamber else None
        cert = decide_a2(G, x, chamber, args.panel)
    else:
        cert = decide(G, x)
    verify_certificate(cert, G)
    _emit(cert.to_json())


def cmd_lemma_sweep(args):
    from .dichotomy import sweep_verify

    g = _geometry(args.geometry)
    report = sweep_verify(_full_group(g), args.samples, seed=args.seed,
                          generators=args.generators, cyclic=not args.no_cyclic)
    _emit(report.to_json(), args.out)


def cmd_hexagon_search(args):
    from .dichotomy import g2_search

    report = g2_search(args.max_generators, args.trials, seed=args.seed)
    out = report.to_json()
    if args.findings:
        out["finding_list"] = [f.to_json() for f in report.findings]
    _emit(out, args.out)


# -- building -------------------------------------------------------------

def cmd_building_ball(args):
    from .lattice import build_ball

    ball = build_ball(args.q, args.radius)
    log.info("%d vertices, %d edges, %d triangles",
             len(ball.vertices), len(ball.edges), len(ball.triangles))
    _emit(ball.to_json(), args.out)


def cmd_building_classify(args):
    from .lattice import build_ball, classify_isometry

    out = []
    for g in _load_matrices(args.matrix):
        ball = build_ball(g.p, args.radius)
        out.append(classify_isometry(g, radius=args.radius, ball=ball).to_json())
    _emit(out[0] if len(out) == 1 else out, args.out)


def cmd_building_fixedset(args):
    from .lattice import build_ball, fixed_set

    gens = _load_matrices(args.gens)
    ball = build_ball(gens[0].p if gens else args.q, args.radius)
    _emit(fixed_set(gens, ball).to_json(), args.out)


# -- synthesis ------------------------------------------------------------

def cmd_synthesize(args):
    from .lattice import build_ball
    from .synthesis import synthesize, trace_to_svg

    g0 = _load_matrices(args.g0)
    g1 = _load_matrices(args.g1)
    ball = build_ball(args.q, args.radius)
    trace = synthesize(g0, g1, ball=ball, steps=args.steps, q=args.q, radius=args.radius)
    _emit(trace.dumps(), args.out)
    if args.svg:
        Path(args.svg).write_text(trace_to_svg(trace))
    if trace.verdict:
        log.info("g = g2 g1 is %s, length %s", trace.verdict["verdict"],
                 trace.verdict["translation_length"])


def cmd_verify(args):
    from .replay import verify_trace

    verify_trace(_load_json(args.trace))
    print(f"{args.trace}: replay matches")


def build_parser():
    ap = argparse.ArgumentParser(prog="forge", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="group", required=True)

    geo = sub.add_parser("geometry", help="build or check generalized polygons").add_subparsers(
        dest="command", required=True)
    p = geo.add_parser("build", help="build PG2_q, W_q or H2 and print its JSON")
    p.add_argument("name")
    p.add_argument("--out")
    p.set_defaults(func=cmd_geometry_build)
    p = geo.add_parser("check", help="verify the axioms of a named or saved geometry")
    p.add_argument("geometry")
    p.set_defaults(func=cmd_geometry_check)

    lem = sub.add_parser("lemma", help="local dichotomy deciders").add_subparsers(
        dest="command", required=True)
    p = lem.add_parser("decide", help="decide one instance and print its certificate")
    p.add_argument("--geometry", required=True)
    p.add_argument("--group", help="group JSON (default: the full automorphism group)")
    p.add_argument("--x", required=True, help='e.g. \'{"flag": [0, 8], "theta": "1/6 pi"}\'')
    p.add_argument("--chamber", help="A2 only: chamber as 'point,line'")
    p.add_argument("--panel", type=int, help="A2 only: panel of the chamber to move")
    p.set_defaults(func=cmd_lemma_decide)
    p = lem.add_parser("sweep", help="sweep subgroups and flag midpoints")
    p.add_argument("--geometry", required=True)
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--generators", type=int, default=2)
    p.add_argument("--no-cyclic", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_lemma_sweep)

    hexa = sub.add_parser("hexagon", help="explore the hexagon H(2)").add_subparsers(
        dest="command", required=True)
    p = hexa.add_parser("search", help="random subgroups failing both branches")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--max-generators", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--findings", action="store_true", help="include every finding")
    p.add_argument("--out")
    p.set_defaults(func=cmd_hexagon_search)

    bld = sub.add_parser("building", help="the SL3 lattice building").add_subparsers(
        dest="command", required=True)
    p = bld.add_parser("ball", help="enumerate a ball around the standard vertex")
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--radius", type=int, default=2)
    p.add_argument("--out")
    p.set_defaults(func=cmd_building_ball)
    p = bld.add_parser("classify", help="elliptic / hyperbolic verdict for matrices")
    p.add_argument("--matrix", required=True)
    p.add_argument("--radius", type=int, default=2)
    p.add_argument("--out")
    p.set_defaults(func=cmd_building_classify)
    p = bld.add_parser("fixedset", help="common fixed simplices of generators in a ball")
    p.add_argument("--gens", required=True)
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--radius", type=int, default=2)
    p.add_argument("--out")
    p.set_defaults(func=cmd_building_fixedset)

    p = sub.add_parser("synthesize", help="build g = g2 g1 from two elliptic subgroups")
    p.add_argument("--g0", required=True)
    p.add_argument("--g1", required=True)
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--radius", type=int, default=2)
    p.add_argument("--steps", type=int, default=6)
    p.add_argument("--out")
    p.add_argument("--svg", help="also write the developed a_i diagram")
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("verify", help="replay a synthesis trace independently")
    p.add_argument("--trace", required=True)
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except ForgeError as e:
        print(f"forge: {type(e).__name__}: {e}", file=sys.stderr)
        return e.exit_code
    except (OSError, ValueError, KeyError) as e:
        print(f"forge: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
