"""Shared fixture instances; building them is the slow part, so they are cached per session."""
import numpy as np
import pytest

from lucp import crossed as C
from lucp.cohomology import induced_action
from lucp.instances import (
    build_galois_instance,
    build_twisted_group_algebra_instance,
    c2_sign_cocycle,
    cyclic_group,
)

_CACHE = {}


def fixture_instance(name):
    if name not in _CACHE:
        if name == "galois22":
            inst = build_galois_instance(2, 2)
        elif name == "galois32":
            inst = build_galois_instance(3, 2)
        elif name == "galois23":
            inst = build_galois_instance(2, 3)
        elif name == "twisted_plus":
            inst = build_twisted_group_algebra_instance(3, cyclic_group(2))
        elif name == "twisted_minus":
            inst = build_twisted_group_algebra_instance(3, cyclic_group(2), c2_sign_cocycle(3))
        else:
            raise KeyError(name)
        gm = induced_action(inst.G, [inst.theta_inv(x) for x in inst.G.elements()], inst.Z)
        base = C.factor_map_from_instance(inst, gm)
        _CACHE[name] = (inst, gm, base)
    return _CACHE[name]


FIXTURES = ["galois22", "galois32", "twisted_plus", "twisted_minus"]


@pytest.fixture(params=FIXTURES)
def fixture(request):
    return fixture_instance(request.param)


@pytest.fixture
def g22():
    return fixture_instance("galois22")


@pytest.fixture
def tw_plus():
    return fixture_instance("twisted_plus")


@pytest.fixture
def tw_minus():
    return fixture_instance("twisted_minus")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
