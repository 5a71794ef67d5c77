"""Factor maps, generalized crossed products and the groups C(Theta/R), C_0(Theta/R).

A factor map stores, for each pair (x, y), the multiplication
F_{x,y}: Theta_x (x)_R Theta_y -> Theta_{xy} as a matrix on the tensor
quotient.  Compositions are compared on plain tensor spaces, where two
balanced maps agree iff their matrices agree.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from . import kernel as K
from .bimodules import (
    Bimodule,
    CenterRing,
    SummandWitness,
    find_isomorphism,
    hom_space,
    is_bimodule_map,
    regular,
    summand_test,
    tensor,
    twist_map,
    unit_for_mixed,
    _combinations,
    EXHAUSTIVE_LIMIT,
)
from .cohomology import Cochain, GModule, cochain_from_function, is_normalized
from .errors import (
    AssocFail,
    NoSolution,
    NotACocycle,
    NotIso,
    SearchExhausted,
    SimilarityWitnessMissing,
    UnitFail,
)
from .picard import InvertibleBimodule, tilde, verify_invertible
from .rings import LocalUnitRing, unit_for, validate_ring


def _kron(*mats):
    return reduce(np.kron, mats)


def _eye(n):
    return np.eye(n, dtype=np.int64)


@dataclass(eq=False)
class FactorMap:
    """Components Theta_x, products F_{x,y} and the unit iso iota: R -> Theta_1.

    ``gm`` and ``Z`` describe the base G-module U(Z) in which all cocycles
    attached to this family live.
    """

    G: K.FiniteGroup
    mods: list
    F: dict
    iota: np.ndarray
    Z: CenterRing
    gm: GModule
    invs: list = field(default_factory=list)
    label: str = ""

    @property
    def R(self) -> LocalUnitRing:
        return self.Z.R

    @property
    def p(self) -> int:
        return self.Z.p

    def F_plain(self, x: int, y: int) -> np.ndarray:
        return self.F[(x, y)] @ tensor(self.mods[x], self.mods[y]).proj % self.p

    def inv(self, x: int) -> InvertibleBimodule:
        """Invertible structure on component x (built lazily from the right dual)."""
        if not self.invs:
            self.invs = [None] * self.G.order
        if self.invs[x] is None:
            self.invs[x] = verify_invertible(self.mods[x], Z=self.Z)
        return self.invs[x]


def factor_map_from_instance(inst, gm: GModule) -> FactorMap:
    """Factor map induced by the multiplication of S on the components Theta_x."""
    G, S, p = inst.G, inst.S, inst.p
    mods = [inst.theta(x) for x in G.elements()]
    F = {}
    for x, y in itertools.product(G.elements(), repeat=2):
        xy = G.mul(x, y)
        A, B, C = inst.theta_cols[x], inst.theta_cols[y], inst.theta_cols[xy]
        plain = np.zeros((C.shape[1], A.shape[1] * B.shape[1]), dtype=np.int64)
        for a in range(A.shape[1]):
            for b in range(B.shape[1]):
                s = S.mul(A[:, a], B[:, b])
                plain[:, a * B.shape[1] + b] = K.coords(C, s, p)
        F[(x, y)] = tensor(mods[x], mods[y]).induce(plain)
    one = G.identity
    iota = np.stack([K.coords(inst.theta_cols[one], inst.ext.emb[:, i], p) for i in range(inst.R.dim)], axis=1)
    invs = [inst.theta_inv(x) for x in G.elements()]
    return FactorMap(G, mods, F, iota, inst.Z, gm, invs, label=inst.name)


# --------------------------------------------------------------------------
# validation
# --------------------------------------------------------------------------


def check_isos(fm: FactorMap) -> None:
    p = fm.p
    for (x, y), A in fm.F.items():
        T = tensor(fm.mods[x], fm.mods[y])
        xy = fm.G.mul(x, y)
        if not is_bimodule_map(T.module, fm.mods[xy], A) or not K.is_invertible(A, p):
            raise NotIso(f"F_{x},{y} is not a bimodule isomorphism", witness=(x, y))
    Rb = regular(fm.R)
    if not is_bimodule_map(Rb, fm.mods[fm.G.identity], fm.iota) or not K.is_invertible(fm.iota, p):
        raise NotIso("iota is not a bimodule isomorphism", witness="iota")


def unit_triangles_fail(fm: FactorMap):
    """First x whose unit triangles fail, or None."""
    p, R = fm.p, fm.R
    one = fm.G.identity
    for x in fm.G.elements():
        M = fm.mods[x]
        # x (x) r -> x r  versus  F_{x,1} (1 (x) iota)
        canon = np.zeros((M.dim, M.dim * R.dim), dtype=np.int64)
        canon_l = np.zeros((M.dim, R.dim * M.dim), dtype=np.int64)
        for a in range(M.dim):
            for c in range(R.dim):
                canon[:, a * R.dim + c] = M.ract(M.basis(a), R.basis(c))
                canon_l[:, c * M.dim + a] = M.lact(R.basis(c), M.basis(a))
        right = fm.F_plain(x, one) @ _kron(_eye(M.dim), fm.iota) % p
        left = fm.F_plain(one, x) @ _kron(fm.iota, _eye(M.dim)) % p
        if not np.array_equal(canon, right) or not np.array_equal(canon_l, left):
            return x
    return None


def assoc_sides(fm: FactorMap, x: int, y: int, z: int):
    """((uv)w, u(vw)) as plain maps on Theta_x . Theta_y . Theta_z."""
    G, p = fm.G, fm.p
    dx, dy, dz = (fm.mods[t].dim for t in (x, y, z))
    A = fm.F_plain(G.mul(x, y), z) @ _kron(fm.F_plain(x, y), _eye(dz)) % p
    B = fm.F_plain(x, G.mul(y, z)) @ _kron(_eye(dx), fm.F_plain(y, z)) % p
    return A, B


def validate_factor_map(fm: FactorMap, quasi: bool = False) -> FactorMap:
    check_isos(fm)
    bad = unit_triangles_fail(fm)
    if bad is not None:
        raise UnitFail(f"unit triangle fails at {bad}", witness=bad)
    if not quasi:
        for x, y, z in itertools.product(fm.G.elements(), repeat=3):
            A, B = assoc_sides(fm, x, y, z)
            if not np.array_equal(A, B):
                raise AssocFail("associativity square fails", witness=(x, y, z))
    return fm


# --------------------------------------------------------------------------
# the crossed product ring
# --------------------------------------------------------------------------


@dataclass(eq=False)
class CrossedProduct:
    ring: LocalUnitRing
    fm: FactorMap
    offsets: list

    def component(self, x: int) -> np.ndarray:
        d = self.fm.mods[x].dim
        cols = np.zeros((self.ring.dim, d), dtype=np.int64)
        cols[self.offsets[x]:self.offsets[x] + d] = _eye(d)
        return cols


def build_crossed_product(fm: FactorMap) -> CrossedProduct:
    G, p = fm.G, fm.p
    offsets, off = [], 0
    for x in G.elements():
        offsets.append(off)
        off += fm.mods[x].dim
    n = off
    mult = np.zeros((n, n, n), dtype=np.int64)
    for x, y in itertools.product(G.elements(), repeat=2):
        xy = G.mul(x, y)
        P = fm.F_plain(x, y)
        dy = fm.mods[y].dim
        for a in range(fm.mods[x].dim):
            for b in range(dy):
                mult[offsets[x] + a, offsets[y] + b, offsets[xy]:offsets[xy] + fm.mods[xy].dim] = P[:, a * dy + b]
    one = G.identity
    E = []
    for e in fm.R.E:
        v = np.zeros(n, dtype=np.int64)
        v[offsets[one]:offsets[one] + fm.mods[one].dim] = fm.iota @ e % p
        E.append(v)
    ring = validate_ring(p, mult, E)
    return CrossedProduct(ring, fm, offsets)


# --------------------------------------------------------------------------
# cocycles attached to factor maps
# --------------------------------------------------------------------------


def base_unit_of_aut(fm: FactorMap, x: int, sigma) -> np.ndarray:
    """Unit of Z attached to an automorphism of component x."""
    return tilde(fm.inv(x), sigma, fm.Z)


def obstruction(fm: FactorMap) -> Cochain:
    """The 3-cochain x,y,z -> tilde(alpha_{x,y,z}) with alpha u(vw) = (uv)w."""
    validate_factor_map(fm, quasi=True)
    G, p, Z = fm.G, fm.p, fm.Z
    table = {}
    for x, y, z in itertools.product(G.elements(), repeat=3):
        A, B = assoc_sides(fm, x, y, z)
        xyz = G.mul(G.mul(x, y), z)
        if K.rank(B, p) != fm.mods[xyz].dim:
            raise NoSolution("u(vw) is not surjective", witness=(x, y, z))
        alpha = K.right_solve(B, A, p)
        if alpha is None or not np.array_equal(alpha @ B % p, A):
            raise NoSolution("no automorphism relates the two bracketings", witness=(x, y, z))
        table[(x, y, z)] = Z.vec(base_unit_of_aut(fm, xyz, alpha))
    c = cochain_from_function(fm.gm, 3, lambda x, y, z: table[(x, y, z)])
    if not is_normalized(fm.gm, c):
        raise NotACocycle("obstruction is not normalized")
    return c


def three_cocycle_identity(gm: GModule, b: Cochain) -> bool:
    """b(xy,z,t) b(x,y,zt) = x.b(y,z,t) b(x,yz,t) b(x,y,z), checked directly."""
    G, A = gm.G, gm.A
    for x, y, z, t in itertools.product(G.elements(), repeat=4):
        lhs = A.add(b(G.mul(x, y), z, t), b(x, y, G.mul(z, t)))
        rhs = A.add(A.add(gm.act(x, b(y, z, t)), b(x, G.mul(y, z), t)), b(x, y, z))
        if lhs != rhs:
            return False
    return True


def comparison_cocycle(fm_theta: FactorMap, fm_gamma: FactorMap, a: list) -> Cochain:
    """tau with tau_{x,y} F^Theta (a_x (x) a_y) = a_{xy} F^Gamma, as a 2-cochain."""
    G, p, Z = fm_theta.G, fm_theta.p, fm_theta.Z
    table = {}
    for x, y in itertools.product(G.elements(), repeat=2):
        xy = G.mul(x, y)
        if not K.is_invertible(a[x], p):
            raise NotIso("a_x is not invertible", witness=x)
        B = fm_theta.F_plain(x, y) @ _kron(a[x], a[y]) % p
        A = a[xy] @ fm_gamma.F_plain(x, y) % p
        tau = K.right_solve(B, A, p)
        if tau is None:
            raise NoSolution("tau has no solution", witness=(x, y))
        table[(x, y)] = Z.vec(base_unit_of_aut(fm_theta, xy, tau))
    c = cochain_from_function(fm_theta.gm, 2, lambda x, y: table[(x, y)])
    return c


def twist(fm: FactorMap, sigma: Cochain, label: str = "") -> FactorMap:
    """F'_{x,y}(u (x) v) = sigma_{x,y}(e) F_{x,y}(u (x) v), e a common unit of u, v."""
    G, p, Z, R = fm.G, fm.p, fm.Z, fm.R
    if not is_normalized(fm.gm, sigma):
        raise NotACocycle("twisting cochain must be normalized")
    newF = {}
    for x, y in itertools.product(G.elements(), repeat=2):
        Mx, My, Mxy = fm.mods[x], fm.mods[y], fm.mods[G.mul(x, y)]
        s = Z.elem(sigma(x, y))
        P = fm.F_plain(x, y)
        plain = np.zeros_like(P)
        for a in range(Mx.dim):
            for b in range(My.dim):
                e = unit_for_mixed(R, module_elems=[(Mx, Mx.basis(a)), (My, My.basis(b))])
                plain[:, a * My.dim + b] = Mxy.lact(s @ e % p, P[:, a * My.dim + b])
        newF[(x, y)] = tensor(Mx, My).induce(plain)
    return FactorMap(G, fm.mods, newF, fm.iota, Z, fm.gm, list(fm.invs), label or f"{fm.label}~")


def transport(fm: FactorMap, mods: list, a: list, label: str = "") -> FactorMap:
    """Move the structure along isomorphisms a_x: Theta_x -> mods[x]."""
    G, p = fm.G, fm.p
    ainv = [K.inverse(A, p) for A in a]
    F = {}
    for x, y in itertools.product(G.elements(), repeat=2):
        plain = a[G.mul(x, y)] @ fm.F_plain(x, y) @ _kron(ainv[x], ainv[y]) % p
        F[(x, y)] = tensor(mods[x], mods[y]).induce(plain)
    iota = a[G.identity] @ fm.iota % p
    return FactorMap(G, mods, F, iota, fm.Z, fm.gm, [], label)


# --------------------------------------------------------------------------
# morphisms
# --------------------------------------------------------------------------


def _isos(M: Bimodule, N: Bimodule, limit: int, trials: int, rng):
    H = hom_space(M, N)
    if M.dim != N.dim or len(H) == 0:
        return [], True
    out, exhaustive = [], True
    for A, exh in _combinations(H, M.p, limit, trials, rng):
        exhaustive = exh
        if K.is_invertible(A, M.p):
            out.append(A)
    return out, exhaustive


def crossed_isomorphism(fm1: FactorMap, fm2: FactorMap, limit: int = EXHAUSTIVE_LIMIT,
                        trials: int = 2000, rng=None):
    """Graded isomorphism (f_x) with f_{xy} F1 = F2 (f_x (x) f_y) and f_1 iota1 = iota2.

    Returns the list of f_x, or None after an exhaustive search.
    """
    G, p = fm1.G, fm1.p
    one = G.identity
    if any(fm1.mods[x].dim != fm2.mods[x].dim for x in G.elements()):
        return None
    f1 = fm2.iota @ K.inverse(fm1.iota, p) % p
    if not is_bimodule_map(fm1.mods[one], fm2.mods[one], f1):
        return None
    exhaustive = True
    cand_cache = {}

    def candidates(x):
        nonlocal exhaustive
        if x not in cand_cache:
            c, exh = _isos(fm1.mods[x], fm2.mods[x], limit, trials, rng)
            exhaustive = exhaustive and exh
            cand_cache[x] = c
        return cand_cache[x]

    def ok_pair(f, x, y):
        xy = G.mul(x, y)
        lhs = f[xy] @ fm1.F_plain(x, y) % p
        rhs = fm2.F_plain(x, y) @ _kron(f[x], f[y]) % p
        return np.array_equal(lhs, rhs)

    def propagate(f):
        changed = True
        while changed:
            changed = False
            for x, y in itertools.product(list(f), repeat=2):
                xy = G.mul(x, y)
                if xy in f:
                    continue
                rhs = fm2.F_plain(x, y) @ _kron(f[x], f[y]) % p
                sol = K.right_solve(fm1.F_plain(x, y), rhs, p)
                if sol is None or not K.is_invertible(sol, p):
                    return None
                f[xy] = sol
                changed = True
        for x, y in itertools.product(list(f), repeat=2):
            if G.mul(x, y) in f and not ok_pair(f, x, y):
                return None
        return f

    def search(f):
        f = propagate(dict(f))
        if f is None:
            return None
        missing = [x for x in G.elements() if x not in f]
        if not missing:
            return f
        x = missing[0]
        for A in candidates(x):
            g = dict(f)
            g[x] = A
            res = search(g)
            if res is not None:
                return res
        return None

    res = search({one: f1})
    if res is not None:
        return [res[x] for x in G.elements()]
    if not exhaustive:
        raise SearchExhausted("graded isomorphism search was sampled")
    return None


def crossed_iso_test(fm1: FactorMap, fm2: FactorMap, **kw) -> bool:
    return crossed_isomorphism(fm1, fm2, **kw) is not None


def graded_automorphisms(fm: FactorMap, limit: int = EXHAUSTIVE_LIMIT) -> list:
    """All graded automorphisms fixing iota (exhaustive over component isos)."""
    G = fm.G
    one = G.identity
    opts = [[np.eye(fm.mods[x].dim, dtype=np.int64)] if x == one else _isos(fm.mods[x], fm.mods[x], limit, 0, None)[0]
            for x in G.elements()]
    out = []
    for choice in itertools.product(*opts):
        f = list(choice)
        if all(np.array_equal(f[G.mul(x, y)] @ fm.F_plain(x, y) % fm.p, fm.F_plain(x, y) @ _kron(f[x], f[y]) % fm.p)
               for x, y in itertools.product(G.elements(), repeat=2)):
            out.append(f)
    return out


# --------------------------------------------------------------------------
# the group C(Theta/R)
# --------------------------------------------------------------------------


@dataclass(eq=False)
class CGroupElement:
    fm: FactorMap
    witnesses: dict  # x -> (summand witness Gamma_x | Theta_x, Theta_x | Gamma_x)
    iso_to_base: list | None = None  # a_x: Gamma_x -> Theta_x when all exist

    @property
    def in_c0(self) -> bool:
        return self.iso_to_base is not None


def make_class(fm: FactorMap, base: FactorMap, rng=None) -> CGroupElement:
    validate_factor_map(fm)
    wit, isos = {}, []
    for x in base.G.elements():
        A = find_isomorphism(fm.mods[x], base.mods[x], rng=rng)
        isos.append(A)
        if A is not None:
            wit[x] = (SummandWitness(1, A, K.inverse(A, fm.p)), SummandWitness(1, K.inverse(A, fm.p), A))
            continue
        w1 = summand_test(fm.mods[x], base.mods[x], rng=rng)
        w2 = summand_test(base.mods[x], fm.mods[x], rng=rng)
        if w1 is None or w2 is None:
            raise SimilarityWitnessMissing(f"component {x} is not similar to Theta_{x}", witness=x)
        wit[x] = (w1, w2)
    if all(A is not None for A in isos):
        # a_1 = iota_base iota^-1 keeps the comparison cocycle normalized
        isos[base.G.identity] = base.iota @ K.inverse(fm.iota, fm.p) % fm.p
        return CGroupElement(fm, wit, isos)
    return CGroupElement(fm, wit, None)


def _split_to_R(M: Bimodule, rng=None):
    Rb = regular(M.R)
    w = summand_test(M, Rb, rng=rng)
    if w is None:
        raise SimilarityWitnessMissing(f"{M.label} is not a summand of R^(n)")
    return w.split_data(Rb.dim)


def triple_product(A: FactorMap, B: FactorMap, C: FactorMap, label: str = "", rng=None) -> FactorMap:
    """Components A_x (x) B_{x^-1} (x) C_x with products

    A_x B_{x'} C_x A_y B_{y'} C_y  --T-->  A_x A_y B_{y'} B_{x'} C_x C_y  -->  A_xy B_{(xy)'} C_xy
    where T swaps B_{x'} C_x past A_y B_{y'}.
    """
    G, p, R = A.G, A.p, A.R
    inv = G.inv
    trip = {x: tensor(A.mods[x], B.mods[inv(x)], C.mods[x]) for x in G.elements()}
    mods = [trip[x].module for x in G.elements()]
    F = {}
    for x, y in itertools.product(G.elements(), repeat=2):
        xy = G.mul(x, y)
        Ax, Bx, Cx = A.mods[x], B.mods[inv(x)], C.mods[x]
        Ay, By, Cy = A.mods[y], B.mods[inv(y)], C.mods[y]
        TM = tensor(Bx, Cx)           # M = B_{x'} (x) C_x
        TN = tensor(Ay, By)           # N = A_y (x) B_{y'}
        M, N = TM.module, TN.module
        phis, psis = _split_to_R(M, rng)
        T = twist_map(M, N, phis, psis)  # M (x) N -> N (x) M
        TMN, TNM = tensor(M, N), tensor(N, M)
        # 6-fold plain (Ax Bx Cx Ay By Cy) -> Ax . [M (x) N] . Cy
        step1 = _kron(_eye(Ax.dim), TMN.proj @ _kron(TM.proj, TN.proj) % p, _eye(Cy.dim))
        step2 = _kron(_eye(Ax.dim), T, _eye(Cy.dim))
        lift = _kron(_eye(Ax.dim), _kron(TN.sect, TM.sect) @ TNM.sect % p, _eye(Cy.dim))
        # now plain Ax Ay By Bx Cx Cy
        fa = A.F_plain(x, y)
        fb = B.F_plain(inv(y), inv(x))
        fc = C.F_plain(x, y)
        step3 = trip[xy].proj @ _kron(fa, fb, fc) % p
        six = step3 @ lift % p @ step2 % p @ step1 % p
        src = tensor(mods[x], mods[y])
        full = six @ _kron(trip[x].sect, trip[y].sect) % p
        F[(x, y)] = src.induce(full)
    one = G.identity
    T1 = trip[one]
    plain = np.zeros((T1.plain_dim, R.dim), dtype=np.int64)
    for c in range(R.dim):
        r = R.basis(c)
        e = unit_for(R, [r])
        plain[:, c] = _kron(A.iota @ r % p, B.iota @ e % p, C.iota @ e % p)
    iota = T1.proj @ plain % p
    return FactorMap(G, mods, F, iota, A.Z, A.gm, [], label)


def c_group_multiply(a: CGroupElement, b: CGroupElement, base: FactorMap, rng=None) -> CGroupElement:
    for cls in (a, b):
        if not cls.witnesses:
            raise SimilarityWitnessMissing("class carries no similarity witnesses")
    fm = triple_product(a.fm, base, b.fm, label=f"({a.fm.label}*{b.fm.label})", rng=rng)
    return make_class(fm, base, rng=rng)


def c_group_inverse(a: CGroupElement, base: FactorMap, rng=None) -> CGroupElement:
    fm = triple_product(base, a.fm, base, label=f"{a.fm.label}^-1", rng=rng)
    return make_class(fm, base, rng=rng)


def unit_class(base: FactorMap) -> CGroupElement:
    return make_class(base, base)


def zeta_forward(cls: CGroupElement, base: FactorMap) -> Cochain:
    """C_0 -> Z^2: the comparison cocycle against the base."""
    if not cls.in_c0:
        raise NotIso("class is not in C_0: some component is not isomorphic to Theta_x")
    return comparison_cocycle(base, cls.fm, cls.iso_to_base)


def zeta_backward(sigma: Cochain, base: FactorMap) -> CGroupElement:
    fm = twist(base, sigma, label=f"{base.label}^sigma")
    return make_class(fm, base)
