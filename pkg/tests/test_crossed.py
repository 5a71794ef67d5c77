import itertools

import numpy as np
import pytest

from conftest import fixture_instance
from oracles import extra_gmodules
from lucp import crossed as C
from lucp.bimodules import automorphisms
from lucp.cohomology import add, cochain_from_function, cohomology_group, differential, identity_cochain
from lucp.errors import AssocFail, NotACocycle, UnitFail
from lucp.rings import find_algebra_isomorphism, finite_field, matrix_ring, product_ring


def random_normalized(gm, n, rng):
    one = gm.G.identity
    vals = {t: tuple(int(v) for v in rng.integers(0, 1 << 10, size=gm.rank))
            for t in itertools.product(gm.G.elements(), repeat=n)}
    return cochain_from_function(gm, n, lambda *t: gm.A.zero() if one in t else vals[t])


def sign_cochain(gm):
    return cochain_from_function(gm, 2, lambda x, y: (int(x == 1 and y == 1),))


def test_base_factor_maps_validate(fixture):
    _, _, base = fixture
    C.validate_factor_map(base)


def test_non_cocycle_scaling_breaks_associativity():
    # on C3 acting trivially on C2 every nonzero 2-cochain concentrated on one pair fails
    inst, gm, base = fixture_instance("galois22")
    sigma = cochain_from_function(gm, 2, lambda x, y: (1,) if (x, y) == (1, 1) else (0,))
    d = differential(gm, sigma)
    assert np.any(d.values)
    with pytest.raises(AssocFail):
        C.validate_factor_map(C.twist(base, sigma))


def test_bad_unit_map_is_reported(tw_plus):
    _, _, base = tw_plus
    broken = C.FactorMap(base.G, base.mods, base.F, 2 * base.iota % 3, base.Z, base.gm, base.invs)
    with pytest.raises(UnitFail):
        C.validate_factor_map(broken)


def test_crossed_product_rings():
    _, _, plus = fixture_instance("twisted_plus")
    _, _, minus = fixture_instance("twisted_minus")
    _, _, gal = fixture_instance("galois22")
    assert find_algebra_isomorphism(C.build_crossed_product(plus).ring, product_ring(3, 2)) is not None
    assert find_algebra_isomorphism(C.build_crossed_product(minus).ring, finite_field(3, 2)[0]) is not None
    assert find_algebra_isomorphism(C.build_crossed_product(gal).ring, matrix_ring(2, 2)) is not None


def test_obstruction_of_base_is_trivial(fixture):
    _, gm, base = fixture
    assert not np.any(C.obstruction(base).values)


@pytest.mark.parametrize("seed", range(5))
def test_obstruction_of_twist_is_coboundary(fixture, seed):
    _, gm, base = fixture
    sigma = random_normalized(gm, 2, np.random.default_rng(seed))
    ob = C.obstruction(C.twist(base, sigma))
    assert ob == differential(gm, sigma)
    assert C.three_cocycle_identity(gm, ob)


def test_obstruction_survives_transport(fixture):
    # a quasi factor map moved along component automorphisms keeps its obstruction
    inst, gm, base = fixture
    rng = np.random.default_rng(11)
    sigma = random_normalized(gm, 2, rng)
    quasi = C.twist(base, sigma)
    a = []
    for x in inst.G.elements():
        auts = automorphisms(base.mods[x])
        a.append(auts[int(rng.integers(len(auts)))])
    moved = C.transport(quasi, base.mods, a)
    assert C.obstruction(moved) == differential(gm, sigma)


def test_twist_rejects_unnormalized(tw_plus):
    _, gm, base = tw_plus
    bad = cochain_from_function(gm, 2, lambda x, y: (1,))
    with pytest.raises(NotACocycle):
        C.twist(base, bad)


def test_twist_by_identity_is_identity(fixture):
    _, gm, base = fixture
    tw = C.twist(base, identity_cochain(gm, 2))
    assert all(np.array_equal(tw.F[k], base.F[k]) for k in base.F)


def test_comparison_cocycle_examples(tw_plus):
    inst, gm, base = tw_plus
    ident = [np.eye(m.dim, dtype=np.int64) for m in base.mods]
    assert not np.any(C.comparison_cocycle(base, base, ident).values)
    tau = sign_cochain(gm)
    assert C.comparison_cocycle(base, C.twist(base, tau), ident) == tau


def test_comparison_rescaling_shifts_by_coboundary(fixture):
    inst, gm, base = fixture
    H2 = cohomology_group(gm, 2)
    rng = np.random.default_rng(5)
    for cls in H2.group.elements():
        sigma = H2.representative(cls)
        other = C.twist(base, sigma)
        ident = [np.eye(m.dim, dtype=np.int64) for m in base.mods]
        a = [ident[0]] + [automorphisms(base.mods[x])[int(rng.integers(len(automorphisms(base.mods[x]))))]
                          for x in inst.G.nonidentity()]
        tau = C.comparison_cocycle(base, other, a)
        assert H2.class_of(tau) == H2.class_of(sigma)


def test_coboundary_twist_is_isomorphic(fixture):
    inst, gm, base = fixture
    f = cochain_from_function(gm, 1, lambda x: (0,) * gm.rank if x == inst.G.identity else (1,) * gm.rank)
    tw = C.twist(base, differential(gm, f))
    C.validate_factor_map(tw)
    assert C.crossed_iso_test(base, tw)


def test_sign_twist_is_not_isomorphic(tw_plus):
    _, gm, base = tw_plus
    assert not C.crossed_iso_test(base, C.twist(base, sign_cochain(gm)))
    assert C.crossed_iso_test(base, base)


def test_sign_twist_gives_field(tw_plus):
    _, gm, base = tw_plus
    ring = C.build_crossed_product(C.twist(base, sign_cochain(gm))).ring
    assert find_algebra_isomorphism(ring, finite_field(3, 2)[0]) is not None


def test_graded_automorphisms_of_split_product(tw_plus):
    _, _, base = tw_plus
    # f_x = u(x) for a character u of C2 with values in F3^*
    assert len(C.graded_automorphisms(base)) == 2


def test_c_group_unit_and_inverse(tw_plus):
    _, gm, base = tw_plus
    H2 = cohomology_group(gm, 2)
    unit = C.unit_class(base)
    a = C.zeta_backward(sign_cochain(gm), base)
    prod = C.c_group_multiply(a, unit, base)
    assert H2.class_of(C.zeta_forward(prod, base)) == H2.class_of(C.zeta_forward(a, base))
    inv = C.c_group_inverse(a, base)
    both = C.c_group_multiply(a, inv, base)
    assert H2.is_trivial(C.zeta_forward(both, base))
    assert C.crossed_iso_test(both.fm, base)


def test_field_times_field_is_split(tw_plus):
    _, gm, base = tw_plus
    a = C.zeta_backward(sign_cochain(gm), base)
    sq = C.c_group_multiply(a, a, base)
    ring = C.build_crossed_product(sq.fm).ring
    assert find_algebra_isomorphism(ring, product_ring(3, 2)) is not None


def test_zeta_round_trip(fixture):
    inst, gm, base = fixture
    H2 = cohomology_group(gm, 2)
    assert H2.is_trivial(C.zeta_forward(C.unit_class(base), base))
    for sigma in H2.representatives():
        cls = C.zeta_backward(sigma, base)
        assert cls.in_c0
        assert H2.class_of(C.zeta_forward(cls, base)) == H2.class_of(sigma)


def test_c_group_commutative_and_associative(tw_plus):
    _, gm, base = tw_plus
    H2 = cohomology_group(gm, 2)
    elems = [C.unit_class(base), C.zeta_backward(sign_cochain(gm), base)]

    def cls(e):
        return H2.class_of(C.zeta_forward(e, base))

    for a, b in itertools.product(elems, repeat=2):
        assert cls(C.c_group_multiply(a, b, base)) == cls(C.c_group_multiply(b, a, base))
    a, b = elems[1], elems[1]
    c = elems[1]
    left = C.c_group_multiply(C.c_group_multiply(a, b, base), c, base)
    right = C.c_group_multiply(a, C.c_group_multiply(b, c, base), base)
    assert cls(left) == cls(right)


def test_product_of_twists_matches_cocycle_product(fixture):
    # zeta(twist by s) * zeta(twist by t) corresponds to s + t
    inst, gm, base = fixture
    H2 = cohomology_group(gm, 2)
    reps = H2.representatives()
    for s, t in itertools.product(reps, repeat=2):
        prod = C.c_group_multiply(C.zeta_backward(s, base), C.zeta_backward(t, base), base)
        assert H2.class_of(C.zeta_forward(prod, base)) == H2.class_of(add(gm, s, t))


def test_three_cocycle_identity_rejects_garbage():
    gm = extra_gmodules()["C3 on C3 trivial"]
    bad = cochain_from_function(gm, 3, lambda x, y, z: (int((x, y, z) == (1, 1, 1)),))
    assert not C.three_cocycle_identity(gm, bad)
