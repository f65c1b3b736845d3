import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from laminar.bilayer_graph import PolarityWeights, build_semi_regular_ring
from laminar.kinetics import HillKinetics, linearize, solve_hss

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def hill():
    return HillKinetics()


@pytest.fixture(scope="session")
def hss(hill):
    return solve_hss(hill)


@pytest.fixture(scope="session")
def lin(hill, hss):
    return linearize(hill, *hss)


@pytest.fixture(scope="session")
def diffusion():
    return build_semi_regular_ring(30, (2, 4), label="diffusion")


@pytest.fixture(scope="session")
def contact():
    return build_semi_regular_ring(30, (2, 2), label="contact")


@pytest.fixture(scope="session")
def example_graphs(diffusion, contact):
    return [diffusion, contact]


def weights(a, b, w2=1.0):
    return [PolarityWeights(a, w2), PolarityWeights(b, w2)]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        ok, detail = mod.RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
