"""The seven-term sequence attached to a graded extension, checked on finite ledgers.

Every group is enumerated from declared generators into a :class:`Ledger`
(elements plus full multiplication table).  Maps become index tables, and a
junction is exact when the image of one table equals the kernel of the next.
Searches that were sampled rather than exhausted surface as Undecided.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import crossed as C
from . import kernel as K
from .bimodules import (
    Bimodule,
    _combinations,
    extension_bimodule,
    find_isomorphism,
    hom_space,
    is_bimodule_map,
    is_similar,
    make_bimodule,
    regular,
    tensor,
    twisted_regular,
    unit_for_mixed,
)
from .cohomology import (
    Cochain,
    CohomologyGroup,
    GModule,
    cochain_from_function,
    cohomology_group,
    induced_action,
    is_cocycle,
    is_normalized,
)
from .errors import (
    LedgerIncomplete,
    NoRepresentative,
    NotInSubgroup,
    NotRRingAut,
    NotZInvariant,
    Undecided,
    ValueNotInPic0,
)
from .picard import alpha_action, tilde, verify_invertible
from .rings import algebra_automorphisms

DEFAULT_LEDGER_CAP = 64


# --------------------------------------------------------------------------
# ledgers
# --------------------------------------------------------------------------


@dataclass(eq=False)
class Ledger:
    """A finite group given by an element list and its multiplication table."""

    name: str
    elements: list
    table: list          # table[i][j] = index of elements[i] * elements[j]
    identity: int = 0
    labels: list = field(default_factory=list)
    eq: object = None

    @property
    def order(self) -> int:
        return len(self.elements)

    def mul(self, i: int, j: int) -> int:
        return self.table[i][j]

    def inv(self, i: int) -> int:
        for j in range(self.order):
            if self.table[i][j] == self.identity:
                return j
        raise LedgerIncomplete(f"{self.name}: element {i} has no inverse in the ledger", witness=i)

    def index(self, x) -> int | None:
        for i, y in enumerate(self.elements):
            if self.eq(x, y):
                return i
        return None

    def lookup(self, x, what: str = "") -> int:
        i = self.index(x)
        if i is None:
            raise LedgerIncomplete(f"{what or 'element'} not found in ledger {self.name}")
        return i

    def subgroup(self, indices, name: str) -> "Ledger":
        """Sub-ledger on ``indices`` (closure is checked)."""
        idx = sorted(set(indices) | {self.identity})
        pos = {i: k for k, i in enumerate(idx)}
        table = []
        for i in idx:
            row = []
            for j in idx:
                t = self.table[i][j]
                if t not in pos:
                    raise LedgerIncomplete(f"{name} is not closed under products", witness=(i, j))
                row.append(pos[t])
            table.append(row)
        sub = Ledger(name, [self.elements[i] for i in idx], table, pos[self.identity],
                     [self.labels[i] for i in idx], self.eq)
        sub.parent = idx
        return sub

    def generated(self, gens) -> list:
        """Indices of the subgroup generated by ``gens``."""
        seen = {self.identity}
        frontier = [self.identity]
        gens = list(gens)
        while frontier:
            nxt = []
            for a in frontier:
                for g in gens:
                    b = self.table[a][g]
                    if b not in seen:
                        seen.add(b)
                        nxt.append(b)
            frontier = nxt
        return sorted(seen)

    def cosets(self, sub) -> list:
        """coset[i] = smallest index in i * sub."""
        sub = list(sub)
        return [min(self.table[i][h] for h in sub) for i in range(self.order)]

    def is_abelian(self) -> bool:
        return all(self.table[i][j] == self.table[j][i] for i in range(self.order) for j in range(self.order))


def close_ledger(name: str, identity, generators, eq, mul, cap: int = DEFAULT_LEDGER_CAP,
                 label=lambda x, i: f"{i}") -> Ledger:
    """Enumerate the group generated by ``generators`` and tabulate it."""
    elems = [identity]

    def find(x):
        for i, y in enumerate(elems):
            if eq(x, y):
                return i
        return None

    for g in generators:
        if find(g) is None:
            elems.append(g)
            if len(elems) > cap:
                raise LedgerIncomplete(f"{name} exceeds the cap {cap}")
    table: dict = {}
    changed = True
    while changed:
        changed = False
        n = len(elems)
        for i, j in itertools.product(range(n), repeat=2):
            if (i, j) in table:
                continue
            prod = mul(elems[i], elems[j])
            k = find(prod)
            if k is None:
                elems.append(prod)
                k = len(elems) - 1
                changed = True
                if len(elems) > cap:
                    raise LedgerIncomplete(f"{name} exceeds the cap {cap}")
            table[(i, j)] = k
    n = len(elems)
    rows = [[table[(i, j)] for j in range(n)] for i in range(n)]
    led = Ledger(name, elems, rows, 0, [label(x, i) for i, x in enumerate(elems)], eq)
    for i in range(n):
        led.inv(i)
    return led


def abelian_ledger(name: str, A: K.AbelianGroup) -> Ledger:
    elems = list(A.elements())
    pos = {e: i for i, e in enumerate(elems)}
    table = [[pos[A.add(a, b)] for b in elems] for a in elems]
    return Ledger(name, elems, table, pos[A.zero()], [str(e) for e in elems], lambda a, b: a == b)


def is_homomorphism(src: Ledger, dst: Ledger, f: list):
    """First pair (i, j) with f(ij) != f(i) f(j), or None."""
    for i, j in itertools.product(range(src.order), repeat=2):
        if f[src.mul(i, j)] != dst.mul(f[i], f[j]):
            return (i, j)
    return None


@dataclass
class Junction:
    name: str
    verdict: str            # PASS, FAIL or UNDECIDED
    image: list
    kernel: list
    witness: object = None
    note: str = ""

    def to_json(self) -> dict:
        return {"name": self.name, "verdict": self.verdict, "image": self.image, "kernel": self.kernel,
                "witness": self.witness, "note": self.note}


def junction(name: str, f: list, mid: Ledger, g: list, dst: Ledger) -> Junction:
    img = sorted(set(f))
    ker = sorted(i for i in range(mid.order) if g[i] == dst.identity)
    if img == ker:
        return Junction(name, "PASS", img, ker)
    diff = sorted(set(img) ^ set(ker))
    side = "image outside kernel" if diff[0] in img else "kernel outside image"
    return Junction(name, "FAIL", img, ker, {"element": diff[0], "label": mid.labels[diff[0]], "side": side})


def injectivity(name: str, f: list, src: Ledger, dst: Ledger) -> Junction:
    ker = sorted(i for i in range(src.order) if f[i] == dst.identity)
    img = [src.identity]
    if ker == img:
        return Junction(name, "PASS", img, ker)
    other = next(i for i in ker if i != src.identity)
    return Junction(name, "FAIL", img, ker, {"element": other, "label": src.labels[other]})


# --------------------------------------------------------------------------
# ring automorphisms and the maps F, E
# --------------------------------------------------------------------------


def _s_basis_change(inst):
    """Columns of all Theta_x side by side, and its inverse."""
    B = np.concatenate([inst.theta_cols[x] for x in inst.G.elements()], axis=1) % inst.p
    return B, K.inverse(B, inst.p)


def is_r_ring_automorphism(inst, f) -> bool:
    S, emb, p = inst.S, inst.ext.emb, inst.p
    f = K.fp(f, p)
    if f.shape != (S.dim, S.dim) or not K.is_invertible(f, p):
        return False
    if not np.array_equal(f @ emb % p, emb % p):
        return False
    for i, j in itertools.product(range(S.dim), repeat=2):
        if not np.array_equal(f @ S.mul(S.basis(i), S.basis(j)) % p, S.mul(f[:, i], f[:, j])):
            return False
    return {tuple(f @ e % p) for e in S.E} == {tuple(e) for e in S.E}


def r_ring_automorphisms(inst, limit: int = 1 << 16) -> list:
    """Aut_{R-ring}(S): R-bilinear multiplicative bijections of S fixing R."""
    Sb = extension_bimodule(inst.ext)
    H = hom_space(Sb, Sb)
    if inst.p ** len(H) > limit:
        raise LedgerIncomplete(f"End_R-R(S) has {inst.p}^{len(H)} elements")
    ident = np.eye(inst.S.dim, dtype=np.int64)
    out = [ident]
    for A, _ in _combinations(H, inst.p, limit, 0, None):
        if not np.array_equal(A, ident) and is_r_ring_automorphism(inst, A):
            out.append(A)
    return out


def preserves_grading(inst, f) -> bool:
    p = inst.p
    return all(K.same_span((f @ inst.theta_cols[x] % p).T, inst.theta_cols[x].T, p) for x in inst.G.elements())


def _r_unit_for_s(inst, s) -> np.ndarray:
    """Local unit e of R whose image absorbs s."""
    S, emb, p = inst.S, inst.ext.emb, inst.p
    for e in inst.R.E:
        if S.absorbs(emb @ e % p, s):
            return e
    raise NotRRingAut("no local unit of R absorbs the element")


def f_map(inst, u) -> np.ndarray:
    """s -> u^-1(e) s u(e): the automorphism of S attached to a unit of Z."""
    Z, S, emb, p = inst.Z, inst.S, inst.ext.emb, inst.p
    ui = Z.inv(u)
    out = np.zeros((S.dim, S.dim), dtype=np.int64)
    for k in range(S.dim):
        s = S.basis(k)
        e = _r_unit_for_s(inst, s)
        out[:, k] = S.mul(S.mul(emb @ (ui @ e % p) % p, s), emb @ (u @ e % p) % p)
    if not is_r_ring_automorphism(inst, out):
        raise NotRRingAut("conjugation by a central unit is not an R-ring automorphism")
    return out


def aut_to_cocycle(inst, gm: GModule, f) -> Cochain:
    """x -> tilde(f restricted to Theta_x), a normalized 1-cocycle when f is graded."""
    p = inst.p
    vals = {}
    for x in inst.G.elements():
        cols = inst.theta_cols[x]
        img = f @ cols % p
        fx = np.stack([K.coords(cols, img[:, c], p) for c in range(cols.shape[1])], axis=1)
        vals[x] = inst.Z.vec(tilde(inst.theta_inv(x), fx, inst.Z))
    return cochain_from_function(gm, 1, lambda x: vals[x])


def cocycle_to_aut(inst, sigma: Cochain) -> np.ndarray:
    """The graded automorphism u -> sigma_x(e) u on each Theta_x."""
    Z, p = inst.Z, inst.p
    blocks = []
    for x in inst.G.elements():
        X = inst.theta(x)
        s = Z.elem(sigma(x))
        g = np.zeros((X.dim, X.dim), dtype=np.int64)
        for k in range(X.dim):
            t = X.basis(k)
            e = unit_for_mixed(inst.R, module_elems=[(X, t)])
            g[:, k] = X.lact(s @ e % p, t)
        blocks.append(g)
    B, Binv = _s_basis_change(inst)
    D = np.zeros_like(B)
    off = 0
    for g in blocks:
        d = g.shape[0]
        D[off:off + d, off:off + d] = g
        off += d
    f = B @ D % p @ Binv % p
    if not is_r_ring_automorphism(inst, f):
        raise NotRRingAut("cocycle does not give an R-ring automorphism")
    return f


def graded_aut_identity_holds(inst, gm: GModule, f) -> bool:
    """tilde(f_xy)(e) = tilde(f_x)(e) . x(tilde(f_y))(e) for every e in E, as elements of R."""
    Z, R, p = inst.Z, inst.R, inst.p
    G = inst.G
    tl = {}
    for x in G.elements():
        cols = inst.theta_cols[x]
        img = f @ cols % p
        fx = np.stack([K.coords(cols, img[:, c], p) for c in range(cols.shape[1])], axis=1)
        tl[x] = tilde(inst.theta_inv(x), fx, Z)
    for x, y in itertools.product(G.elements(), repeat=2):
        act = alpha_action(inst.theta_inv(x), tl[y], Z)
        for e in R.E:
            lhs = tl[G.mul(x, y)] @ e % p
            rhs = R.mul(tl[x] @ e % p, act @ e % p)
            if not np.array_equal(lhs, rhs):
                return False
    return True


# --------------------------------------------------------------------------
# the group P(S/R)
# --------------------------------------------------------------------------


def restrict_scalars(X: Bimodule, ext) -> Bimodule:
    """An S-bimodule viewed over R through the embedding."""
    R = ext.R
    left = np.stack([X.lmat(ext.emb[:, i]) for i in range(R.dim)])
    right = np.stack([X.rmat(ext.emb[:, i]) for i in range(R.dim)])
    return make_bimodule(R, left, right, X.label, check=False)


@dataclass(eq=False)
class PClass:
    """([P], phi, [X]) with P over R, X over S and phi: P -> X R-bilinear."""

    P: Bimodule
    X: Bimodule
    phi: np.ndarray
    left_iso: bool = False
    right_iso: bool = False
    label: str = ""


def make_pclass(ext, P: Bimodule, X: Bimodule, phi, label: str = "") -> PClass:
    p = ext.R.p
    phi = K.fp(phi, p)
    XR = restrict_scalars(X, ext)
    if not is_bimodule_map(P, XR, phi):
        raise NotInSubgroup("phi is not R-bilinear")
    Sb = extension_bimodule(ext)
    flags = []
    for side in ("l", "r"):
        T = tensor(P, Sb) if side == "l" else tensor(Sb, P)
        plain = np.zeros((X.dim, T.plain_dim), dtype=np.int64)
        for a in range(P.dim):
            for s in range(Sb.dim):
                if side == "l":
                    plain[:, a * Sb.dim + s] = X.ract(phi[:, a], ext.S.basis(s))
                else:
                    plain[:, s * P.dim + a] = X.lact(ext.S.basis(s), phi[:, a])
        M = T.induce(plain)
        flags.append(M.shape[0] == M.shape[1] and K.is_invertible(M, p))
    if not any(flags):
        raise NotInSubgroup("neither P (x) S -> X nor S (x) P -> X is bijective")
    return PClass(P, X, phi, flags[0], flags[1], label)


def e_map(inst, f, label: str = "") -> PClass:
    """([R], inclusion, [S_f]) with right S-action altered by f."""
    if not is_r_ring_automorphism(inst, f):
        raise NotRRingAut("not an R-ring automorphism of S")
    Sf = twisted_regular(inst.S, f, label="S_f")
    return make_pclass(inst.ext, regular(inst.R), Sf, inst.ext.emb, label or "E(f)")


def trivial_pclass(inst) -> PClass:
    return make_pclass(inst.ext, regular(inst.R), regular(inst.S), inst.ext.emb, "1")


def _all_isos(M: Bimodule, N: Bimodule, limit: int = 1 << 16):
    if M.dim != N.dim:
        return
    H = hom_space(M, N)
    if M.p ** len(H) > limit:
        raise Undecided(f"Hom has {M.p}^{len(H)} elements")
    for A, _ in _combinations(H, M.p, limit, 0, None):
        if K.is_invertible(A, M.p):
            yield A


def pclass_eq(a: PClass, b: PClass, limit: int = 1 << 16) -> bool:
    """Isomorphisms P -> P' and X -> X' that commute with the phi's."""
    p = a.P.p
    if a.P.dim != b.P.dim or a.X.dim != b.X.dim:
        return False
    HX = hom_space(a.X, b.X)
    if len(HX) == 0:
        return False
    for A in _all_isos(a.P, b.P, limit):
        target = b.phi @ A % p
        # sum_k c_k H_k phi_a = phi_b A
        cols = np.stack([(H @ a.phi % p).reshape(-1) for H in HX], axis=1)
        sol = K.solve_linear_system(cols, target.reshape(-1), p)
        if sol is None:
            continue
        ker = sol.kernel
        if p ** len(ker) > limit:
            raise Undecided("too many candidate isomorphisms of X")
        for c in itertools.product(range(p), repeat=len(ker)):
            coeff = (np.asarray(sol.particular) + sum((ci * np.asarray(k) for ci, k in zip(c, ker)),
                                                      np.zeros(len(HX), dtype=np.int64))) % p
            Bm = sum(int(ci) * H for ci, H in zip(coeff, HX)) % p
            if K.is_invertible(Bm, p):
                return True
    return False


def pclass_mul(ext, a: PClass, b: PClass) -> PClass:
    p = ext.R.p
    TP = tensor(a.P, b.P)
    TX = tensor(a.X, b.X)
    plain = np.zeros((TX.dim, TP.plain_dim), dtype=np.int64)
    for i in range(a.P.dim):
        for j in range(b.P.dim):
            plain[:, i * b.P.dim + j] = TX.proj @ np.kron(a.phi[:, i], b.phi[:, j]) % p
    phi = TP.induce(plain)
    return make_pclass(ext, TP.module, TX.module, phi, f"{a.label}*{b.label}")


def in_p_g(inst, pc: PClass) -> bool:
    """phi(P) Theta_x = Theta_x phi(P) inside X for every x."""
    p, X = inst.p, pc.X
    for x in inst.G.elements():
        cols = inst.theta_cols[x]
        right = [X.ract(pc.phi[:, a], cols[:, c]) for a in range(pc.P.dim) for c in range(cols.shape[1])]
        left = [X.lact(cols[:, c], pc.phi[:, a]) for a in range(pc.P.dim) for c in range(cols.shape[1])]
        if not K.same_span(K.row_basis(np.stack(right), p), K.row_basis(np.stack(left), p), p):
            return False
    return True


# --------------------------------------------------------------------------
# Picard ledgers
# --------------------------------------------------------------------------


def pic_eq(M: Bimodule, N: Bimodule) -> bool:
    return M.dim == N.dim and find_isomorphism(M, N) is not None


def pic_mul(M: Bimodule, N: Bimodule) -> Bimodule:
    return tensor(M, N).module


def pic_ledger(inst, cap: int = DEFAULT_LEDGER_CAP) -> Ledger:
    """Classes generated by the twists R^f (f an automorphism of R) and the declared generators."""
    R = inst.R
    gens = [twisted_regular(R, f, label=f"R^f{i}") for i, f in enumerate(algebra_automorphisms(R))]
    gens += list(inst.pic_generators)
    return close_ledger("Pic", regular(R), gens, pic_eq, pic_mul, cap, label=lambda x, i: x.label or f"P{i}")


def z_invariant(P: Bimodule, Z) -> bool:
    """z(e) p e' = e p z(e') for all z in Z, e, e' in E and basis p."""
    R, p = P.R, P.p
    for z in Z.basis:
        for e, e2 in itertools.product(R.E, repeat=2):
            for k in range(P.dim):
                t = P.basis(k)
                lhs = P.ract(P.lact(z @ e % p, t), e2)
                rhs = P.ract(P.lact(e, t), z @ e2 % p)
                if not np.array_equal(lhs, rhs):
                    return False
    return True


def conjugate(inst, P: Bimodule, x: int) -> Bimodule:
    """Theta_x (x) P (x) Theta_{x^-1}."""
    return tensor(inst.theta(x), P, inst.theta(inst.G.inv(x))).module


def g_invariant(inst, P: Bimodule) -> bool:
    return all(pic_eq(conjugate(inst, P, x), P) for x in inst.G.elements())


def paren_g_member(inst, P: Bimodule, Pinv: Bimodule) -> bool:
    """P (x) Theta_x (x) P^-1 is similar to Theta_x for every x."""
    return all(is_similar(tensor(P, inst.theta(x), Pinv).module, inst.theta(x)) for x in inst.G.elements())


@dataclass(eq=False)
class PicLedgers:
    pic: Ledger
    z: list
    zg: list
    zparen: list
    pic0: list


def pic_subgroups(inst, pic: Ledger) -> PicLedgers:
    Z = inst.Z
    z = [i for i, P in enumerate(pic.elements) if z_invariant(P, Z)]
    zg = [i for i in z if g_invariant(inst, pic.elements[i])]
    zparen = [i for i in z if paren_g_member(inst, pic.elements[i], pic.elements[pic.inv(i)])]
    pic0 = [i for i, P in enumerate(pic.elements) if is_similar(P, regular(inst.R))]
    for name, idx in (("Pic_Z", z), ("Pic_Z^G", zg), ("Pic_Z^(G)", zparen), ("Pic_0", pic0)):
        pic.subgroup(idx, name)
    return PicLedgers(pic, z, zg, zparen, pic0)


# --------------------------------------------------------------------------
# L: Pic_Z^(G) -> C
# --------------------------------------------------------------------------


def l_map(inst, base: C.FactorMap, P: Bimodule, Pinv: Bimodule, z_check: bool = True) -> C.FactorMap:
    """Omega_x = P (x) Theta_x (x) P^-1 with products through P^-1 (x) P = R."""
    Z, p, R, G = inst.Z, inst.p, inst.R, inst.G
    if z_check and not z_invariant(P, Z):
        raise NotZInvariant("P is not Z-invariant")
    inv = verify_invertible(P, Pinv, Z=Z)
    Q = inv.Y
    trip = {x: tensor(P, base.mods[x], Q) for x in G.elements()}
    mods = [trip[x].module for x in G.elements()]
    r_plain = inv.r @ tensor(Q, P).proj % p
    I = lambda n: np.eye(n, dtype=np.int64)
    F = {}
    for x, y in itertools.product(G.elements(), repeat=2):
        Tx = base.mods[x]
        act = np.zeros((Tx.dim, Tx.dim * R.dim), dtype=np.int64)
        for a in range(Tx.dim):
            for c in range(R.dim):
                act[:, a * R.dim + c] = Tx.ract(Tx.basis(a), R.basis(c))
        dy = base.mods[y].dim
        collapse = np.kron(np.kron(I(P.dim), act @ np.kron(I(Tx.dim), r_plain) % p), I(dy * Q.dim))
        prod = np.kron(np.kron(I(P.dim), base.F_plain(x, y)), I(Q.dim))
        full = trip[G.mul(x, y)].proj @ prod % p @ collapse % p
        full = full @ np.kron(trip[x].sect, trip[y].sect) % p
        F[(x, y)] = tensor(mods[x], mods[y]).induce(full)
    one = G.identity
    TPQ = tensor(P, Q)
    linv = K.inverse(inv.l, p)
    ins = np.zeros((trip[one].plain_dim, TPQ.plain_dim), dtype=np.int64)
    for a in range(P.dim):
        for b in range(Q.dim):
            e = unit_for_mixed(R, module_elems=[(P, P.basis(a)), (Q, Q.basis(b))])
            ins[:, a * Q.dim + b] = np.kron(np.kron(P.basis(a), base.iota @ e % p), Q.basis(b))
    ins_q = trip[one].proj @ ins % p
    ins_q = TPQ.induce(ins_q)
    iota = ins_q @ linv % p
    fm = C.FactorMap(G, mods, F, iota, Z, base.gm, [], label=f"L({P.label})")
    return C.validate_factor_map(fm)


# --------------------------------------------------------------------------
# zeta into Z^1(G, Pic_0), S13
# --------------------------------------------------------------------------


def pic0_action(inst, pic: Ledger, pic0: list) -> dict:
    """x.[P] = [Theta_x P Theta_{x^-1}] as an index table on Pic_0."""
    act = {}
    for x in inst.G.elements():
        for i in pic0:
            j = pic.lookup(conjugate(inst, pic.elements[i], x), "conjugate class")
            if j not in pic0:
                raise ValueNotInPic0("conjugate leaves Pic_0", witness=(x, i))
            act[(x, i)] = j
    return act


def z1_pic0(inst, pic: Ledger, pic0: list, act: dict, cap: int = 1 << 12) -> Ledger:
    """Normalized 1-cocycles G -> Pic_0 with pointwise product."""
    G = inst.G
    others = [x for x in G.elements() if x != G.identity]
    if len(pic0) ** len(others) > cap:
        raise LedgerIncomplete("Z^1(G, Pic_0) enumeration exceeds the cap")
    cocycles = []
    for vals in itertools.product(pic0, repeat=len(others)):
        g = {G.identity: pic.identity, **dict(zip(others, vals))}
        if all(g[G.mul(x, y)] == pic.mul(g[x], act[(x, g[y])]) for x, y in itertools.product(G.elements(), repeat=2)):
            cocycles.append(tuple(g[x] for x in G.elements()))
    ident = tuple(pic.identity for _ in G.elements())
    cocycles.sort(key=lambda c: (c != ident, c))
    pos = {c: i for i, c in enumerate(cocycles)}
    table = []
    for a in cocycles:
        row = []
        for b in cocycles:
            c = tuple(pic.mul(u, v) for u, v in zip(a, b))
            if c not in pos:
                raise LedgerIncomplete("Z^1(G, Pic_0) is not closed")  # pragma: no cover
            row.append(pos[c])
        table.append(row)
    return Ledger("Z1(G,Pic0)", cocycles, table, 0, [str(c) for c in cocycles], lambda a, b: a == b)


def zeta_1cocycle(inst, cls: C.CGroupElement, pic: Ledger, pic0: list) -> tuple:
    """x -> [Gamma_x (x) Theta_{x^-1}] in Pic_0."""
    if not cls.witnesses:
        raise ValueNotInPic0("class carries no similarity witnesses")
    out = []
    for x in inst.G.elements():
        M = tensor(cls.fm.mods[x], inst.theta(inst.G.inv(x))).module
        j = pic.index(M)
        if j is None or j not in pic0:
            raise ValueNotInPic0("Gamma_x Theta_x^-1 is not in the Pic_0 ledger", witness=x)
        out.append(j)
    return tuple(out)


def _choose_iso(M: Bimodule, N: Bimodule, policy: str, rng):
    if policy == "first":
        A = find_isomorphism(M, N)
    else:
        isos = list(_all_isos(M, N))
        A = isos[int(rng.integers(len(isos)))] if isos else None
    if A is None:
        raise NoRepresentative(f"no isomorphism {M.label} -> {N.label}")
    return A


def s13_factor_data(inst, base: C.FactorMap, g: tuple, pic: Ledger, policy: str = "first", rng=None) -> C.FactorMap:
    """U_x = g_x (x) Theta_x with chosen isomorphisms U_x U_y -> U_xy.

    Products with the unit component are the canonical ones, so the unit
    triangles hold; the others are arbitrary isomorphisms picked by ``policy``
    (``first`` or ``random``).
    """
    G, R, p = inst.G, inst.R, inst.p
    rng = rng if rng is not None else np.random.default_rng(0)
    mods = [tensor(pic.elements[g[x]], base.mods[x]).module for x in G.elements()]
    one = G.identity
    iota = _choose_iso(regular(R), mods[one], policy, rng)
    iinv = K.inverse(iota, p)
    F = {}
    for x, y in itertools.product(G.elements(), repeat=2):
        Mx, My = mods[x], mods[y]
        T = tensor(Mx, My)
        if x == one or y == one:
            plain = np.zeros((mods[G.mul(x, y)].dim, T.plain_dim), dtype=np.int64)
            for a in range(Mx.dim):
                for b in range(My.dim):
                    if x == one:
                        plain[:, a * My.dim + b] = My.lact(iinv @ Mx.basis(a) % p, My.basis(b))
                    else:
                        plain[:, a * My.dim + b] = Mx.ract(Mx.basis(a), iinv @ My.basis(b) % p)
            F[(x, y)] = T.induce(plain)
        else:
            F[(x, y)] = _choose_iso(T.module, mods[G.mul(x, y)], policy, rng)
    return C.FactorMap(G, mods, F, iota, inst.Z, base.gm, [], label=f"U{g}")


def s13_map(inst, base: C.FactorMap, g: tuple, pic: Ledger, H3: CohomologyGroup,
            policy: str = "first", rng=None) -> tuple:
    fm = s13_factor_data(inst, base, g, pic, policy, rng)
    return H3.class_of(C.obstruction(fm))


# --------------------------------------------------------------------------
# the report
# --------------------------------------------------------------------------


@dataclass
class SequenceReport:
    instance: str
    seed: int
    groups: dict
    maps: dict
    junctions: list
    checks: dict
    caps: dict
    undecided: list = field(default_factory=list)

    @property
    def verdict(self) -> str:
        if any(j.verdict == "FAIL" for j in self.junctions) or not all(v is True for v in self.checks.values()):
            return "FAIL"
        if self.undecided or any(j.verdict == "UNDECIDED" for j in self.junctions):
            return "UNDECIDED"
        return "PASS"

    def to_json(self) -> dict:
        return {
            "instance": self.instance,
            "seed": self.seed,
            "verdict": self.verdict,
            "groups": self.groups,
            "maps": self.maps,
            "junctions": [j.to_json() for j in self.junctions],
            "checks": self.checks,
            "caps": self.caps,
            "undecided": self.undecided,
        }


def _group_json(led: Ledger) -> dict:
    return {"order": led.order, "elements": led.labels}


@dataclass(eq=False)
class SequenceData:
    """Everything computed on the way to the report, for tests and the CLI."""

    gm: GModule
    base: C.FactorMap
    H: dict
    auts: list
    graded: list
    P: Ledger
    pics: PicLedgers
    C: Ledger
    c_cls: list
    Bcos: list
    Z1: Ledger
    H1bar: list


def build_sequence(inst, seed: int = 0, cap: int = DEFAULT_LEDGER_CAP) -> tuple[SequenceData, SequenceReport]:
    G, Z = inst.G, inst.Z
    rng = np.random.default_rng(seed)
    undecided = []
    checks = {}
    gm = induced_action(G, [inst.theta_inv(x) for x in G.elements()], Z)
    base = C.factor_map_from_instance(inst, gm)
    C.validate_factor_map(base)
    H = {n: cohomology_group(gm, n) for n in (1, 2, 3)}
    HL = {n: abelian_ledger(f"H{n}", H[n].group) for n in (1, 2, 3)}

    # automorphisms, Aut^(G) = Z^1, E and F
    auts = r_ring_automorphisms(inst, limit=inst.cap("aut", 1 << 16))
    graded = [f for f in auts if preserves_grading(inst, f)]
    checks["graded_aut_identity"] = all(graded_aut_identity_holds(inst, gm, f) for f in graded)
    cocs = [aut_to_cocycle(inst, gm, f) for f in graded]
    checks["aut_graded_cocycles"] = all(is_normalized(gm, c) and is_cocycle(gm, c) for c in cocs)
    checks["aut_graded_roundtrip"] = all(np.array_equal(cocycle_to_aut(inst, c), f) for c, f in zip(cocs, graded))

    # P_Z(S/R)^G ledger
    triv = trivial_pclass(inst)
    cands = [e_map(inst, f, label=f"E(f{i})") for i, f in enumerate(auts)]
    P = close_ledger("P_Z^G", triv, [c for c in cands if in_p_g(inst, c)], pclass_eq,
                     lambda a, b: pclass_mul(inst.ext, a, b), cap, label=lambda x, i: x.label or f"p{i}")
    checks["p_ledger_commutes_with_theta"] = all(in_p_g(inst, c) for c in P.elements)
    # E o F is trivial
    checks["e_of_f_trivial"] = all(pclass_eq(e_map(inst, f_map(inst, u)), triv) for u in Z.units)

    # Picard ledgers
    pic = pic_ledger(inst, cap)
    pics = pic_subgroups(inst, pic)
    PicZG = pic.subgroup(pics.zg, "Pic_Z^G")
    checks["pic_zg_in_paren"] = set(pics.zg) <= set(pics.zparen)

    # C ledger
    gens = [C.zeta_backward(r, base) for r in H[2].representatives()]
    L_of = {}
    for i in pics.zparen:
        fm = l_map(inst, base, pic.elements[i], pic.elements[pic.inv(i)])
        L_of[i] = C.make_class(fm, base, rng=rng)
    gens += list(L_of.values())
    for k, table in enumerate(inst.c_generators):
        sig = cochain_from_function(gm, 2, lambda x, y, t=table: Z.vec(t.get((x, y), Z.identity())))
        gens.append(C.zeta_backward(sig, base))
    Cl = close_ledger("C", C.unit_class(base), gens,
                      lambda a, b: C.crossed_iso_test(a.fm, b.fm, rng=np.random.default_rng(seed)),
                      lambda a, b: C.c_group_multiply(a, b, base, rng=np.random.default_rng(seed)),
                      cap, label=lambda x, i: f"c{i}")
    c0 = [i for i, c in enumerate(Cl.elements) if c.in_c0]
    Cl.subgroup(c0, "C_0")
    checks["invariant_l_lands_in_c0"] = all(Cl.lookup(L_of[i], "L(P)") in c0 for i in pics.zg)
    imL = Cl.generated([Cl.lookup(L_of[i], "L(P)") for i in pics.zparen])
    Bcos = Cl.cosets(imL)
    Bidx = sorted(set(Bcos))
    Bled = Ledger("B", [Cl.elements[i] for i in Bidx],
                  [[Bidx.index(Bcos[Cl.mul(i, j)]) for j in Bidx] for i in Bidx],
                  Bidx.index(Bcos[Cl.identity]), [f"c{i}+Im L" for i in Bidx], None)

    # Z^1(G, Pic_0) and its quotient
    act = pic0_action(inst, pic, pics.pic0)
    Z1 = z1_pic0(inst, pic, pics.pic0, act)
    zeta1 = [Z1.lookup(zeta_1cocycle(inst, c, pic, pics.pic0), "zeta(c)") for c in Cl.elements]
    checks["zeta1_hom"] = is_homomorphism(Cl, Z1, zeta1) is None
    imzl = Z1.generated([zeta1[Cl.lookup(L_of[i], "L(P)")] for i in pics.zparen])
    H1cos = Z1.cosets(imzl)
    Hidx = sorted(set(H1cos))
    Hbar = Ledger("H1bar", [Z1.elements[i] for i in Hidx],
                  [[Hidx.index(H1cos[Z1.mul(i, j)]) for j in Hidx] for i in Hidx],
                  Hidx.index(H1cos[Z1.identity]), [f"g{i}" for i in Hidx], None)

    # the maps
    s1 = [P.lookup(e_map(inst, cocycle_to_aut(inst, r)), "S1 value") for r in H[1].representatives()]
    for i, pc in enumerate(P.elements):
        if not z_invariant(pc.P, Z):
            raise NotZInvariant("P-ledger element has non Z-invariant P", witness=i)
    s2 = [PicZG.lookup(pc.P, "O_l value") for pc in P.elements]
    s3 = []
    for j in PicZG.parent:
        cls = L_of[j]
        s3.append(HL[2].lookup(H[2].class_of(C.zeta_forward(cls, base)), "S3 value"))
    s4 = []
    for r in H[2].representatives():
        ci = Cl.lookup(C.zeta_backward(r, base), "S4 value")
        s4.append(Bidx.index(Bcos[ci]))
    s5 = [Hidx.index(H1cos[zeta1[ci]]) for ci in Bidx]
    s6, s6_alt = [], []
    for gi in Hidx:
        g = Z1.elements[gi]
        s6.append(HL[3].lookup(s13_map(inst, base, g, pic, H[3], "first"), "S6 value"))
        s6_alt.append(HL[3].lookup(s13_map(inst, base, g, pic, H[3], "random", np.random.default_rng(seed + 1)),
                                   "S6 value"))
    checks["s13_choice_independent"] = s6 == s6_alt
    s13 = [HL[3].lookup(s13_map(inst, base, g, pic, H[3]), "S13 value") for g in Z1.elements]
    checks["s13_hom"] = is_homomorphism(Z1, HL[3], s13) is None
    checks["s13_kills_zeta"] = all(s13[z] == HL[3].identity for z in zeta1)
    checks["s5_well_defined"] = all(Hidx.index(H1cos[zeta1[i]]) == s5[Bidx.index(Bcos[i])] for i in range(Cl.order))
    checks["s6_well_defined"] = all(s13[i] == s6[Hidx.index(H1cos[i])] for i in range(Z1.order))

    H1, H2, H3 = HL[1], HL[2], HL[3]
    for name, src, dst, f in (("S1", H1, P, s1), ("S2", P, PicZG, s2), ("S3", PicZG, H2, s3),
                              ("S4", H2, Bled, s4), ("S5", Bled, Hbar, s5), ("S6", Hbar, H3, s6)):
        bad = is_homomorphism(src, dst, f)
        checks[f"{name}_hom"] = bad is None

    junctions = [
        injectivity("H1", s1, H1, P),
        junction("P_Z^G", s1, P, s2, PicZG),
        junction("Pic_Z^G", s2, PicZG, s3, H2),
        junction("H2", s3, H2, s4, Bled),
        junction("B", s4, Bled, s5, Hbar),
        junction("H1bar", s5, Hbar, s6, H3),
    ]
    groups = {led.name: _group_json(led) for led in (H1, P, PicZG, H2, Bled, Hbar, H3)}
    groups["H1"]["invariant_factors"] = list(H[1].group.invariant_factors)
    groups["H2"]["invariant_factors"] = list(H[2].group.invariant_factors)
    groups["H3"]["invariant_factors"] = list(H[3].group.invariant_factors)
    groups["C"] = _group_json(Cl)
    groups["Pic"] = _group_json(pic)
    groups["Z1(G,Pic0)"] = _group_json(Z1)
    groups["U(Z)"] = {"order": Z.unit_group.order, "invariant_factors": list(Z.unit_group.invariant_factors)}
    maps = {"S1": s1, "S2": s2, "S3": s3, "S4": s4, "S5": s5, "S6": s6, "zeta": zeta1, "S13": s13}
    report = SequenceReport(inst.name, seed, groups, maps, junctions, checks,
                            {"ledger": cap, "aut": inst.cap("aut", 1 << 16)}, undecided)
    data = SequenceData(gm, base, H, auts, graded, P, pics, Cl, Cl.elements, Bcos, Z1, H1cos)
    return data, report


def exactness_check(inst, seed: int = 0, cap: int = DEFAULT_LEDGER_CAP) -> SequenceReport:
    """Run every junction; ledger overflow or sampled searches give an Undecided report."""
    try:
        return build_sequence(inst, seed, cap)[1]
    except (LedgerIncomplete, Undecided) as exc:
        j = Junction("ledger", "UNDECIDED", [], [], None, str(exc))
        return SequenceReport(inst.name, seed, {}, {}, [j], {}, {"ledger": cap}, [type(exc).__name__ + ": " + str(exc)])
