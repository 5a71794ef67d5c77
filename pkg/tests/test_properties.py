"""Randomized axiom checks driven by hypothesis."""
import itertools

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import fixture_instance
from lucp import crossed as C
from lucp import kernel as K
from lucp.cohomology import cochain_from_function, differential
from lucp.rings import finite_field, frobenius_matrix

primes = st.sampled_from([2, 3, 5, 7])


@st.composite
def system(draw):
    p = draw(primes)
    m = draw(st.integers(1, 5))
    n = draw(st.integers(1, 5))
    A = np.array(draw(st.lists(st.lists(st.integers(0, p - 1), min_size=n, max_size=n), min_size=m, max_size=m)))
    b = np.array(draw(st.lists(st.integers(0, p - 1), min_size=m, max_size=m)))
    return p, A, b


@given(system())
@settings(max_examples=150, deadline=None)
def test_solutions_satisfy_system(data):
    p, A, b = data
    sol = K.solve_linear_system(A, b, p)
    r = K.rank(A, p)
    consistent = K.rank(np.column_stack([A, b]), p) == r
    assert (sol is not None) == consistent
    if sol is not None:
        assert np.array_equal(A @ sol.particular % p, b % p)
        assert len(sol.kernel) == A.shape[1] - r
        for k in sol.kernel:
            assert not np.any(A @ k % p)


@given(st.lists(st.lists(st.integers(-20, 20), min_size=3, max_size=3), min_size=1, max_size=4))
@settings(max_examples=100, deadline=None)
def test_smith_form_reconstructs(A):
    D, U, V = K.smith_normal_form(A)
    UAV = (np.array(U, dtype=object) @ np.array(A, dtype=object) @ np.array(V, dtype=object)).tolist()
    assert UAV == D
    d = [D[i][i] for i in range(min(len(A), 3))]
    for a, b in zip(d, d[1:]):
        assert (b == 0) if a == 0 else (b % a == 0)


@given(st.integers(0, 2**31 - 1))
@settings(max_examples=40, deadline=None)
def test_frobenius_preserves_products(seed):
    F, _ = finite_field(3, 2)
    fr = frobenius_matrix(F)
    rng = np.random.default_rng(seed)
    a, b = rng.integers(0, 3, size=2), rng.integers(0, 3, size=2)
    assert np.array_equal(fr @ F.mul(a, b) % 3, F.mul(fr @ a % 3, fr @ b % 3))


@given(st.sampled_from(["galois22", "galois32", "twisted_plus", "twisted_minus"]), st.integers(0, 2**31 - 1))
@settings(max_examples=30, deadline=None)
def test_twisted_obstruction_is_differential(name, seed):
    inst, gm, base = fixture_instance(name)
    rng = np.random.default_rng(seed)
    one = gm.G.identity
    vals = {t: tuple(int(v) for v in rng.integers(0, 64, size=gm.rank)) for t in itertools.product(gm.G.elements(), repeat=2)}
    sigma = cochain_from_function(gm, 2, lambda x, y: gm.A.zero() if one in (x, y) else vals[(x, y)])
    assert C.obstruction(C.twist(base, sigma)) == differential(gm, sigma)
