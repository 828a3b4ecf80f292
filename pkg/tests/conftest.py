import numpy as np
import pytest
from hypothesis import settings

from casimir_scattering import (
    Geometry,
    MirrorPair,
    PerfectReflector,
    QuadratureSpec,
    preset,
    response_kernel,
)

settings.register_profile("default", deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def gold():
    return preset("gold-plasma")


@pytest.fixture(scope="session")
def perfect():
    return PerfectReflector()


@pytest.fixture(scope="session")
def gold_pair_200nm(gold):
    return MirrorPair(gold, gold, Geometry(200e-9, 1e-4))


@pytest.fixture(scope="session")
def gold_kernel_kl1(gold_pair_200nm):
    """Kernel at kappa_C L = 1, shared by several modules."""
    L = gold_pair_200nm.geometry.separation_L
    return response_kernel(gold_pair_200nm, 1.0 / L, spec=QuadratureSpec(rel_tol=1e-5))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
