import numpy as np
import pytest

from conftest import fixture_instance
from lucp import crossed as C
from lucp import kernel as K
from lucp.bimodules import regular
from lucp.cohomology import cohomology_group, is_cocycle
from lucp.errors import LedgerIncomplete, NotInSubgroup, NotRRingAut
from lucp.sequence import (
    abelian_ledger,
    aut_to_cocycle,
    close_ledger,
    cocycle_to_aut,
    e_map,
    graded_aut_identity_holds,
    exactness_check,
    f_map,
    in_p_g,
    injectivity,
    is_homomorphism,
    is_r_ring_automorphism,
    junction,
    l_map,
    make_pclass,
    pclass_eq,
    pclass_mul,
    pic_ledger,
    pic_subgroups,
    preserves_grading,
    r_ring_automorphisms,
    s13_map,
    build_sequence,
    trivial_pclass,
)

_SEQ = {}


def sequence_of(name):
    if name not in _SEQ:
        _SEQ[name] = build_sequence(fixture_instance(name)[0])
    return _SEQ[name]


def test_ledger_of_cyclic_group():
    led = close_ledger("C6", 0, [1], lambda a, b: a == b, lambda a, b: (a + b) % 6)
    assert led.order == 6 and led.is_abelian()
    assert led.elements[led.inv(led.index(1))] == 5
    with pytest.raises(LedgerIncomplete):
        close_ledger("C6", 0, [1], lambda a, b: a == b, lambda a, b: (a + b) % 6, cap=3)


def test_junction_verdicts():
    A = abelian_ledger("C2", K.AbelianGroup((2,)))
    B = abelian_ledger("C4", K.AbelianGroup((4,)))
    dbl = [B.index((0,)), B.index((2,))]
    mod2 = [A.index((b[0] % 2,)) for b in B.elements]
    assert is_homomorphism(A, B, dbl) is None
    assert junction("C4", dbl, B, mod2, A).verdict == "PASS"
    assert injectivity("C2", dbl, A, B).verdict == "PASS"
    zero = [B.identity, B.identity]
    j = junction("C4", zero, B, mod2, A)
    assert j.verdict == "FAIL" and j.witness["side"] == "kernel outside image"
    assert injectivity("C2", zero, A, B).verdict == "FAIL"


def test_f_map_examples(fixture):
    inst = fixture[0]
    ident = np.eye(inst.S.dim, dtype=np.int64)
    assert np.array_equal(f_map(inst, inst.Z.identity()), ident)
    for u in inst.Z.units:
        f = f_map(inst, u)
        assert is_r_ring_automorphism(inst, f) and preserves_grading(inst, f)
        assert pclass_eq(e_map(inst, f), trivial_pclass(inst))


def test_f_map_is_trivial_for_central_units():
    inst = fixture_instance("twisted_plus")[0]
    for u in inst.Z.units:
        assert np.array_equal(f_map(inst, u), np.eye(inst.S.dim, dtype=np.int64))


def test_f_map_galois_is_conjugation():
    inst = fixture_instance("galois22")[0]
    w = [u for u in inst.Z.units if not np.array_equal(u, inst.Z.identity())][0]
    f = f_map(inst, w)
    assert not np.array_equal(f, np.eye(inst.S.dim, dtype=np.int64))
    # fixes R pointwise
    assert np.array_equal(f @ inst.ext.emb % 2, inst.ext.emb)


def test_e_map_rejects_non_automorphism():
    inst = fixture_instance("twisted_plus")[0]
    with pytest.raises(NotRRingAut):
        e_map(inst, np.zeros((inst.S.dim, inst.S.dim), dtype=np.int64))


def test_make_pclass_rejects_zero_phi():
    inst = fixture_instance("twisted_plus")[0]
    with pytest.raises(NotInSubgroup):
        make_pclass(inst.ext, regular(inst.R), regular(inst.S), np.zeros((2, 1), dtype=np.int64))


def test_aut_cocycle_round_trip_and_graded_identity(fixture):
    inst, gm, _ = fixture
    for f in r_ring_automorphisms(inst):
        if not preserves_grading(inst, f):
            continue
        assert graded_aut_identity_holds(inst, gm, f)
        c = aut_to_cocycle(inst, gm, f)
        assert is_cocycle(gm, c)
        assert np.array_equal(cocycle_to_aut(inst, c), f)


def test_graded_autos_of_split_twisted_algebra():
    inst, gm, _ = fixture_instance("twisted_plus")
    auts = r_ring_automorphisms(inst)
    # identity and g -> -g
    assert len(auts) == 2
    H1 = cohomology_group(gm, 1)
    classes = {H1.class_of(aut_to_cocycle(inst, gm, f)) for f in auts}
    assert len(classes) == 2


def test_pclass_products(fixture):
    inst = fixture[0]
    triv = trivial_pclass(inst)
    assert in_p_g(inst, triv)
    for f in r_ring_automorphisms(inst):
        e = e_map(inst, f)
        assert pclass_eq(pclass_mul(inst.ext, e, triv), e)


def test_l_of_regular_is_unit_class(fixture):
    inst, gm, base = fixture
    R = regular(inst.R)
    fm = l_map(inst, base, R, R)
    assert C.crossed_iso_test(fm, base)


def test_pic_ledgers():
    inst = fixture_instance("galois22")[0]
    pic = pic_ledger(inst)
    pics = pic_subgroups(inst, pic)
    assert pic.order == 2
    # the Frobenius twist is not Z-invariant
    assert pics.z == [0] and pics.zg == [0] and pics.pic0 == [0]


@pytest.mark.parametrize("name,orders", [
    ("galois22", {"H1": 1, "P_Z^G": 1, "Pic_Z^G": 1, "H2": 1, "B": 1, "H1bar": 1, "H3": 1, "U(Z)": 3}),
    ("galois32", {"H1": 1, "P_Z^G": 1, "Pic_Z^G": 1, "H2": 1, "B": 1, "H1bar": 1, "H3": 1, "U(Z)": 8}),
    ("twisted_plus", {"H1": 2, "P_Z^G": 2, "Pic_Z^G": 1, "H2": 2, "B": 2, "H1bar": 1, "H3": 2, "C": 2}),
    ("twisted_minus", {"H1": 2, "P_Z^G": 2, "Pic_Z^G": 1, "H2": 2, "B": 2, "H1bar": 1, "H3": 2, "C": 2}),
])
def test_group_orders(name, orders):
    _, report = sequence_of(name)
    assert report.verdict == "PASS"
    for k, v in orders.items():
        assert report.groups[k]["order"] == v, k


def test_s13_policies_agree(fixture):
    inst, gm, base = fixture
    data, _ = sequence_of([k for k, v in _fixture_names().items() if v is inst][0])
    H3 = data.H[3]
    pic = data.pics.pic
    for g in data.Z1.elements:
        a = s13_map(inst, base, g, pic, H3, "first")
        for seed in range(3):
            assert s13_map(inst, base, g, pic, H3, "random", np.random.default_rng(seed)) == a


def _fixture_names():
    return {n: fixture_instance(n)[0] for n in ("galois22", "galois32", "twisted_plus", "twisted_minus")}


def test_truncated_ledger_is_undecided():
    inst = fixture_instance("twisted_plus")[0]
    report = exactness_check(inst, cap=1)
    assert report.verdict == "UNDECIDED"
    assert report.undecided


def test_report_json_shape():
    _, report = sequence_of("twisted_minus")
    doc = report.to_json()
    assert doc["verdict"] == "PASS"
    assert [j["name"] for j in doc["junctions"]] == ["H1", "P_Z^G", "Pic_Z^G", "H2", "B", "H1bar"]
    assert all(v is True for v in doc["checks"].values())
