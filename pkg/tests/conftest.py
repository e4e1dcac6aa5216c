import pytest

from forge.action import Automorphism, close_group
from forge.lattice import build_ball
from forge.polygon import build
from forge.search import automorphism_generators


@pytest.fixture(scope="session")
def geometries():
    return {name: build(name) for name in ("PG2_2", "PG2_3", "W2", "W3", "H2")}


@pytest.fixture(scope="session")
def pg22(geometries):
    return geometries["PG2_2"]


@pytest.fixture(scope="session")
def w2(geometries):
    return geometries["W2"]


@pytest.fixture(scope="session")
def full_group():
    cache = {}

    def get(g):
        if g.name not in cache:
            cache[g.name] = close_group([Automorphism(g, p) for p in automorphism_generators(g)])
        return cache[g.name]

    return get


@pytest.fixture(scope="session")
def ball1():
    return build_ball(2, 1)


@pytest.fixture(scope="session")
def ball2():
    return build_ball(2, 2)


ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
