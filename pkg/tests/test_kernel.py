import itertools

import numpy as np
import pytest

from lucp import kernel as K
from lucp.errors import GroupAxiomError


def brute_solutions(A, b, p):
    n = A.shape[1]
    return [np.array(x) for x in itertools.product(range(p), repeat=n)
            if np.array_equal(A @ np.array(x, dtype=np.int64) % p, b % p)]


def test_solve_identity():
    sol = K.solve_linear_system(np.eye(2, dtype=np.int64), np.array([1, 2]), 3)
    assert sol.particular.tolist() == [1, 2]
    assert sol.kernel.shape[0] == 0


def test_solve_inconsistent():
    assert K.solve_linear_system(np.zeros((1, 1), dtype=np.int64), np.array([1]), 2) is None


def test_solve_with_kernel():
    sol = K.solve_linear_system(np.array([[1, 1], [0, 0]]), np.array([1, 0]), 2)
    assert sol.particular.tolist() == [1, 0]
    assert [k.tolist() for k in sol.kernel] == [[1, 1]]


@pytest.mark.parametrize("seed", range(25))
def test_solve_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    p = int(rng.choice([2, 3, 5]))
    m, n = int(rng.integers(1, 4)), int(rng.integers(1, 4))
    A = rng.integers(0, p, size=(m, n))
    b = rng.integers(0, p, size=m)
    brute = brute_solutions(A, b, p)
    sol = K.solve_linear_system(A, b, p)
    if not brute:
        assert sol is None
        return
    assert sol is not None
    # the solution set is particular + span(kernel) and has the right size
    assert len(brute) == p ** len(sol.kernel)
    found = {tuple((sol.particular + K.fp(c, p) @ sol.kernel) % p) if len(sol.kernel) else tuple(sol.particular)
             for c in itertools.product(range(p), repeat=len(sol.kernel))}
    assert found == {tuple(x) for x in brute}


def test_rank_nullspace_inverse():
    A = np.array([[1, 2], [2, 4]])
    assert K.rank(A, 5) == 1
    N = K.nullspace(A, 5)
    assert not np.any(A @ N.T % 5)
    B = np.array([[1, 1], [0, 1]])
    assert np.array_equal(K.inverse(B, 3) @ B % 3, np.eye(2, dtype=np.int64))
    assert not K.is_invertible(A, 5)


@pytest.mark.parametrize("A,diag", [
    ([[3]], [3]),
    ([[2, 4], [6, 8]], [2, 4]),
    ([[0, 0], [0, 0]], [0, 0]),
])
def test_smith_examples(A, diag):
    D, U, V = K.smith_normal_form(A)
    assert [D[i][i] for i in range(len(diag))] == diag


def _check_snf(A):
    D, U, V = K.smith_normal_form(A)
    UAV = (np.array(U, dtype=object) @ np.array(A, dtype=object) @ np.array(V, dtype=object)).tolist()
    assert UAV == D
    assert abs(K.det_int(U)) == 1 and abs(K.det_int(V)) == 1
    m, n = len(A), len(A[0])
    d = [D[i][i] for i in range(min(m, n))]
    for i in range(m):
        for j in range(n):
            if i != j:
                assert D[i][j] == 0
    assert all(v >= 0 for v in d)
    for a, b in zip(d, d[1:]):
        assert (b == 0) if a == 0 else (b % a == 0)
    return d


@pytest.mark.parametrize("seed", range(30))
def test_smith_random_properties(seed):
    rng = np.random.default_rng(seed)
    m, n = int(rng.integers(1, 5)), int(rng.integers(1, 5))
    A = rng.integers(-9, 10, size=(m, n)).tolist()
    d = _check_snf(A)
    rows = list(rng.permutation(m))
    cols = list(rng.permutation(n))
    perm = [[A[i][j] for j in cols] for i in rows]
    assert _check_snf(perm) == d


@pytest.mark.parametrize("rels,factors", [
    ([[3]], [3]),
    ([[2, 0], [0, 2]], [2, 2]),
    ([[2, 4], [6, 8]], [2, 4]),
])
def test_group_from_relations(rels, factors):
    gens = len(rels[0])
    assert list(K.group_from_relations(gens, rels).invariant_factors) == factors


def test_abelian_group_arithmetic():
    A = K.AbelianGroup((2, 4))
    assert A.order == 8
    assert A.add((1, 3), (1, 2)) == (0, 1)
    assert A.neg((1, 1)) == (1, 3)
    assert len(list(A.elements())) == 8


def test_finite_group_table_checks():
    G = K.FiniteGroup.cyclic(3)
    assert G.mul(1, 2) == 0 and G.inv(1) == 2
    with pytest.raises(GroupAxiomError):
        K.FiniteGroup.from_table([[0, 1], [1, 1]])
