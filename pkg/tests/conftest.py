import numpy as np
import pytest

from curvedkakeya.construction import ConstructionPlan, build_stage
from curvedkakeya.family import preset


@pytest.fixture(scope="session")
def parabola():
    return preset("parabola")


@pytest.fixture(scope="session", params=["parabola", "parabola_plus_linear", "exponential"])
def any_family(request):
    return preset(request.param)


@pytest.fixture(scope="session")
def stage8(parabola):
    return build_stage(ConstructionPlan(parabola, M=8, cutoff="none"))


@pytest.fixture(scope="session")
def stage12(parabola):
    return build_stage(ConstructionPlan(parabola, M=12, cutoff="none"))


@pytest.fixture
def rng():
    return np.random.default_rng(0)
