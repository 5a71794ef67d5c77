import itertools

import numpy as np
import pytest

from conftest import fixture_instance
from lucp import kernel as K
from lucp.bimodules import automorphisms, center_ring, regular, sub_bimodule, twisted_regular, unit_for_mixed
from lucp.errors import NotAutomorphism, NotInvertible, ProductNotR
from lucp.picard import (
    alpha_action,
    alpha_automorphism,
    alpha_formula,
    pic_class_eq,
    sigma_u,
    tensor_invertible,
    tilde,
    unit_decomposition,
    verify_inv_element,
    verify_invertible,
)
from lucp.rings import finite_field, frobenius_matrix, product_ring


@pytest.fixture(scope="module")
def F4():
    return finite_field(2, 2)[0]


def test_regular_and_twisted_are_invertible(F4):
    inv = verify_invertible(regular(F4))
    assert inv.Y.dim == 2
    fr = frobenius_matrix(F4)
    invx = verify_invertible(twisted_regular(F4, fr))
    assert pic_class_eq(invx.Y, twisted_regular(F4, fr))


def test_corner_is_not_invertible():
    R = product_ring(3, 2)
    Re1, _ = sub_bimodule(regular(R), np.array([[1], [0]]))
    with pytest.raises(NotInvertible):
        verify_invertible(Re1)


def test_unit_decomposition_regular():
    F3 = product_ring(3, 1)
    inv = verify_invertible(regular(F3))
    dec = unit_decomposition(inv, np.array([1]))
    assert len(dec.pairs) == 1
    assert inv.pair(*dec.pairs[0]).tolist() == [1]
    R = product_ring(3, 2)
    inv = verify_invertible(regular(R))
    e1 = np.array([1, 0])
    dec = unit_decomposition(inv, e1)
    total = sum(inv.pair(x, y) for x, y in dec.pairs) % 3
    assert total.tolist() == [1, 0]
    for x, y in dec.pairs:
        assert np.array_equal(R.mul(e1, x), x) and np.array_equal(R.mul(y, e1), y)


def test_tilde_examples(F4):
    Z = center_ring(F4)
    inv = verify_invertible(regular(F4))
    I = np.eye(2, dtype=np.int64)
    assert np.array_equal(tilde(inv, I, Z), I)
    w = F4.left_matrix(F4.basis(1))
    assert np.array_equal(tilde(inv, w, Z), w)
    F3 = product_ring(3, 1)
    inv3 = verify_invertible(regular(F3))
    assert tilde(inv3, np.array([[2]]), center_ring(F3)).tolist() == [[2]]


def test_tilde_rejects_non_automorphism(F4):
    inv = verify_invertible(regular(F4))
    with pytest.raises(NotAutomorphism):
        tilde(inv, np.zeros((2, 2), dtype=np.int64), center_ring(F4))


def test_alpha_examples(F4):
    Z = center_ring(F4)
    inv = verify_invertible(regular(F4))
    assert all(a == b for a, b in alpha_automorphism(inv, Z).items())
    invx = verify_invertible(twisted_regular(F4, frobenius_matrix(F4)))
    table = alpha_automorphism(invx, Z)
    w = F4.left_matrix(F4.basis(1))
    w2 = w @ w % 2
    assert table[Z.vec(w)] == Z.vec(w2)
    # alpha of R^x is an involution
    for u in Z.units:
        once = alpha_action(invx, u, Z)
        assert np.array_equal(alpha_action(invx, once, Z), u)


def test_alpha_formula_matches_tilde(fixture):
    inst = fixture[0]
    Z = inst.Z
    for x in inst.G.elements():
        inv = inst.theta_inv(x)
        for u in Z.units:
            assert np.array_equal(alpha_action(inv, u, Z), alpha_formula(inv, u))


def test_t_commutation_identity(fixture):
    inst = fixture[0]
    Z, R, p = inst.Z, inst.R, inst.p
    for x in inst.G.elements():
        inv = inst.theta_inv(x)
        X = inv.X
        for u in Z.units:
            xu = alpha_action(inv, u, Z)
            for k in range(X.dim):
                t = X.basis(k)
                e = unit_for_mixed(R, module_elems=[(X, t)])
                assert np.array_equal(X.ract(t, u @ e % p), X.lact(xu @ e % p, t))


def test_tilde_bijective_and_multiplicative(fixture):
    inst = fixture[0]
    Z, p = inst.Z, inst.p
    for x in inst.G.elements():
        inv = inst.theta_inv(x)
        auts = automorphisms(inv.X)
        images = [tilde(inv, s, Z) for s in auts]
        assert len({Z.vec(u) for u in images}) == len(auts) == len(Z.units)
        for (s, a), (t, b) in itertools.product(list(zip(auts, images))[:6], repeat=2):
            assert np.array_equal(tilde(inv, s @ t % p, Z), a @ b % p)


def test_alpha_multiplicative(fixture):
    inst = fixture[0]
    Z, p = inst.Z, inst.p
    for x in inst.G.elements():
        inv = inst.theta_inv(x)
        for u, v in itertools.product(Z.units, repeat=2):
            lhs = alpha_action(inv, u @ v % p, Z)
            rhs = alpha_action(inv, u, Z) @ alpha_action(inv, v, Z) % p
            assert np.array_equal(lhs, rhs)


def test_inv_elements():
    inst = fixture_instance("galois22")[0]
    verify_inv_element(inst.ext, inst.ext.emb, inst.ext.emb)
    verify_inv_element(inst.ext, inst.theta_cols[1], inst.theta_cols[1])
    inst3 = fixture_instance("galois23")[0]
    with pytest.raises(ProductNotR):
        verify_inv_element(inst3.ext, inst3.theta_cols[1], inst3.theta_cols[1])


def test_tensor_invertible_and_class_equality(F4):
    invx = verify_invertible(twisted_regular(F4, frobenius_matrix(F4)))
    sq = tensor_invertible(invx, invx)
    assert pic_class_eq(sq.X, regular(F4))
    assert not pic_class_eq(invx.X, regular(F4))


def test_sigma_u_is_automorphism(F4):
    Z = center_ring(F4)
    X = twisted_regular(F4, frobenius_matrix(F4))
    for u in Z.units:
        s = sigma_u(X, u)
        assert K.is_invertible(s, 2)
