"""Invertible bimodules, unit decompositions and the action of Pic(R) on U(Z)."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import kernel as K
from .bimodules import (
    Bimodule,
    CenterRing,
    find_isomorphism,
    hom_space,
    is_bimodule_map,
    make_bimodule,
    regular,
    tensor,
    unit_for_mixed,
)
from .errors import NotAutomorphism, NotInvertible, ProductNotR
from .rings import RingExtension, unit_for


@dataclass(eq=False)
class InvertibleBimodule:
    X: Bimodule
    Y: Bimodule
    l: np.ndarray  # X (x) Y -> R on the quotient
    r: np.ndarray  # Y (x) X -> R on the quotient
    _decomp: dict = field(default_factory=dict, repr=False)

    @property
    def R(self):
        return self.X.R

    @property
    def p(self) -> int:
        return self.X.p

    def l_plain(self) -> np.ndarray:
        return self.l @ tensor(self.X, self.Y).proj % self.p

    def r_plain(self) -> np.ndarray:
        return self.r @ tensor(self.Y, self.X).proj % self.p

    def pair(self, x, y) -> np.ndarray:
        return self.l @ tensor(self.X, self.Y).elem(x, y) % self.p

    def inverse(self) -> "InvertibleBimodule":
        return InvertibleBimodule(self.Y, self.X, self.r, self.l)


def _act_left_plain(f_plain, M: Bimodule):
    """(m_1 (x) .. (x) m_k) (x) n -> f(m_1..m_k) n  as a plain matrix."""
    out = np.einsum("iq,imc->mqc", f_plain, M.left)
    return out.reshape(M.dim, -1) % M.p


def _act_right_plain(f_plain, M: Bimodule):
    """n (x) (m_1 (x) .. (x) m_k) -> n f(m_1..m_k)  as a plain matrix."""
    out = np.einsum("iq,ima->maq", f_plain, M.right)
    return out.reshape(M.dim, -1) % M.p


def morita_compatible(X: Bimodule, Y: Bimodule, l, r) -> bool:
    p = X.p
    lp = l @ tensor(X, Y).proj % p
    rp = r @ tensor(Y, X).proj % p
    ok1 = np.array_equal(_act_left_plain(lp, X), _act_right_plain(rp, X))
    ok2 = np.array_equal(_act_left_plain(rp, Y), _act_right_plain(lp, Y))
    return ok1 and ok2


def right_dual(X: Bimodule) -> tuple[Bimodule, np.ndarray]:
    """Unital part of Hom_{-R}(X, R) and its evaluation pairing Y (x) X -> R (plain)."""
    R, p = X.R, X.p
    Rb = regular(R)
    d, m = R.dim, X.dim
    Im, Id = np.eye(m, dtype=np.int64), np.eye(d, dtype=np.int64)
    blocks = [np.kron(Id, X.right[i].T) - np.kron(Rb.right[i], Im) for i in range(d)]
    fs = K.nullspace(np.vstack(blocks) % p, p).reshape(-1, d, m)
    span = []
    for f in fs:
        for a, c in itertools.product(range(d), repeat=2):
            span.append((Rb.left[a] @ f @ X.left[c] % p).reshape(-1))
    basis = K.row_basis(np.stack(span), p) if span else np.zeros((0, d * m), dtype=np.int64)
    cols = basis.T

    def coords(mat):
        return K.coords(cols, mat.reshape(-1) % p, p)

    k = len(basis)
    mats = basis.reshape(k, d, m)
    left = np.stack([np.stack([coords(Rb.left[i] @ f % p) for f in mats], axis=1) for i in range(d)])
    right = np.stack([np.stack([coords(f @ X.left[i] % p) for f in mats], axis=1) for i in range(d)])
    Y = make_bimodule(R, left, right, f"{X.label or 'X'}*")
    pairing = np.zeros((d, k * m), dtype=np.int64)
    for j in range(k):
        for a in range(m):
            pairing[:, j * m + a] = mats[j][:, a]
    return Y, pairing


def _iso_to_R(M: Bimodule, rng=None):
    Rb = regular(M.R)
    A = find_isomorphism(M, Rb, rng=rng)
    if A is None:
        raise NotInvertible(f"{M.label or 'tensor'} is not isomorphic to R")
    return A


def verify_invertible(X: Bimodule, Y: Bimodule | None = None, l=None, r=None,
                      Z: CenterRing | None = None, rng=None) -> InvertibleBimodule:
    """Build and check a Morita context (l, r) for X.

    Missing pieces are constructed: Y as the unital right dual, r as the
    evaluation, l by isomorphism search; l is then rescaled by a unit of Z
    until both compatibility identities hold.
    """
    p = X.p
    if Y is None:
        Y, pairing = right_dual(X)
        TYX = tensor(Y, X)
        if not TYX.kills_relations(pairing):
            raise NotInvertible("evaluation pairing is not balanced")
        r = TYX.induce(pairing)
    TXY, TYX = tensor(X, Y), tensor(Y, X)
    Rb = regular(X.R)
    if r is None:
        r = _iso_to_R(TYX.module, rng)
    if l is None:
        l = _iso_to_R(TXY.module, rng)
    l, r = K.fp(l, p), K.fp(r, p)
    for name, T, f in (("l", TXY, l), ("r", TYX, r)):
        if f.shape != (Rb.dim, T.dim) or not K.is_invertible(f, p):
            raise NotInvertible(f"{name} is not bijective", witness=(f.shape, T.dim))
        if not is_bimodule_map(T.module, Rb, f):
            raise NotInvertible(f"{name} is not R-bilinear")
    if not morita_compatible(X, Y, l, r):
        if Z is None:
            from .bimodules import center_ring
            Z = center_ring(X.R)
        for u in Z.units:
            if morita_compatible(X, Y, u @ l % p, r):
                l = u @ l % p
                break
        else:
            raise NotInvertible("no rescaling of l gives a Morita context")
    return InvertibleBimodule(X, Y, l, r)


def from_extension(ext: RingExtension, Xcols, Ycols, X: Bimodule, Y: Bimodule) -> InvertibleBimodule:
    """Invertible bimodule from sub-bimodules X, Y of S with XY = R = YX.

    l and r are the multiplication of S followed by the inverse embedding.
    """
    S, p = ext.S, ext.R.p
    Xc, Yc = K.fp(Xcols, p), K.fp(Ycols, p)

    def mult_plain(A, B):
        out = np.zeros((ext.R.dim, A.shape[1] * B.shape[1]), dtype=np.int64)
        for a in range(A.shape[1]):
            for b in range(B.shape[1]):
                s = S.mul(A[:, a], B[:, b])
                sol = K.solve_linear_system(ext.emb, s, p)
                if sol is None:
                    raise ProductNotR("product leaves the image of R", witness=(a, b))
                out[:, a * B.shape[1] + b] = sol.particular
        return out

    l = tensor(X, Y).induce(mult_plain(Xc, Yc))
    r = tensor(Y, X).induce(mult_plain(Yc, Xc))
    return verify_invertible(X, Y, l, r)


# --------------------------------------------------------------------------
# unit decompositions, tilde, alpha
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class UnitDecomposition:
    e: np.ndarray
    pairs: tuple  # ((x, y), ...)


def _minimal_support_solution(A, b, p, max_support=2):
    n = A.shape[1]
    for size in range(1, max_support + 1):
        for supp in itertools.combinations(range(n), size):
            sub = A[:, supp]
            sol = K.solve_linear_system(sub, b, p)
            if sol is not None and all(sol.particular):
                v = np.zeros(n, dtype=np.int64)
                v[list(supp)] = sol.particular
                return v
    sol = K.solve_linear_system(A, b, p)
    return None if sol is None else sol.particular


def unit_decomposition(inv: InvertibleBimodule, e) -> UnitDecomposition:
    """e = sum l(x_e (x) y_e) with e x_e = x_e and y_e e = y_e."""
    e = K.fp(e, inv.p)
    key = e.tobytes()
    if key in inv._decomp:
        return inv._decomp[key]
    X, Y, p = inv.X, inv.Y, inv.p
    lp = inv.l_plain()
    v = _minimal_support_solution(lp, e, p)
    if v is None:
        raise NotInvertible("l is not surjective onto the local unit")
    v = v.reshape(X.dim, Y.dim)
    pairs = []
    for a in range(X.dim):
        if not np.any(v[a]):
            continue
        x = X.lact(e, X.basis(a))
        y = Y.ract(v[a] % p, e)
        pairs.append((x, y))
    total = sum((inv.pair(x, y) for x, y in pairs), np.zeros_like(e)) % p
    if not np.array_equal(total, e):
        raise NotInvertible("unit decomposition does not sum to e")
    out = UnitDecomposition(e, tuple(pairs))
    inv._decomp[key] = out
    return out


def is_automorphism(X: Bimodule, sigma) -> bool:
    return is_bimodule_map(X, X, sigma) and K.is_invertible(sigma, X.p)


def tilde(inv: InvertibleBimodule, sigma, Z: CenterRing, check: bool = True) -> np.ndarray:
    """The unit of Z attached to an automorphism of X: r -> sum l(sigma(x_e) (x) y_e) r."""
    X, R, p = inv.X, inv.R, inv.p
    sigma = K.fp(sigma, p)
    if not is_automorphism(X, sigma):
        raise NotAutomorphism("not a bimodule automorphism")
    out = np.zeros((R.dim, R.dim), dtype=np.int64)
    for c in range(R.dim):
        rc = R.basis(c)
        e = unit_for(R, [rc])
        dec = unit_decomposition(inv, e)
        val = sum((inv.pair(sigma @ x % p, y) for x, y in dec.pairs), R.zero()) % p
        out[:, c] = R.mul(val, rc)
    if not Z.is_unit(out):
        raise NotAutomorphism("tilde image is not a unit of Z")
    if check:
        for k in range(X.dim):
            t = X.basis(k)
            e = unit_for_mixed(R, module_elems=[(X, t)])
            if not np.array_equal(sigma @ t % p, X.lact(out @ e % p, t)):
                raise NotAutomorphism("sigma(t) differs from tilde(sigma)(e) t", witness=k)
    return out


def sigma_u(X: Bimodule, u) -> np.ndarray:
    """Automorphism t -> t u(e) of X, e a local unit of t."""
    p = X.p
    out = np.zeros((X.dim, X.dim), dtype=np.int64)
    for k in range(X.dim):
        t = X.basis(k)
        e = unit_for_mixed(X.R, module_elems=[(X, t)])
        out[:, k] = X.ract(t, K.fp(u, p) @ e % p)
    return out


def alpha_action(inv: InvertibleBimodule, u, Z: CenterRing) -> np.ndarray:
    """alpha_[X](u) as the tilde of t -> t u(e)."""
    return tilde(inv, sigma_u(inv.X, u), Z, check=False)


def alpha_formula(inv: InvertibleBimodule, u) -> np.ndarray:
    """alpha_[X](u)(r) = sum r l(x_e u(e1) (x) y_e), e1 a common unit of x_e, y_e."""
    X, Y, R, p = inv.X, inv.Y, inv.R, inv.p
    u = K.fp(u, p)
    out = np.zeros((R.dim, R.dim), dtype=np.int64)
    for c in range(R.dim):
        rc = R.basis(c)
        e = unit_for(R, [rc])
        acc = R.zero()
        for x, y in unit_decomposition(inv, e).pairs:
            e1 = unit_for_mixed(R, module_elems=[(X, x), (Y, y)])
            acc = acc + inv.pair(X.ract(x, u @ e1 % p), y)
        out[:, c] = R.mul(rc, acc % p)
    return out


def alpha_automorphism(inv: InvertibleBimodule, Z: CenterRing) -> dict:
    """alpha_[X] on every unit, keyed by exponent vector."""
    return {Z.vec(u): Z.vec(alpha_action(inv, u, Z)) for u in Z.units}


# --------------------------------------------------------------------------
# products, classes, Inv(R, S)
# --------------------------------------------------------------------------


def tensor_invertible(A: InvertibleBimodule, B: InvertibleBimodule, Z=None, rng=None) -> InvertibleBimodule:
    """[A.X (x) B.X] with partner B.Y (x) A.Y."""
    X = tensor(A.X, B.X).module
    Y = tensor(B.Y, A.Y).module
    return verify_invertible(X, Y, Z=Z, rng=rng)


def pic_class_eq(X1: Bimodule, X2: Bimodule, rng=None) -> bool:
    return find_isomorphism(X1, X2, rng=rng) is not None


@dataclass(frozen=True, eq=False)
class InvElement:
    ext: RingExtension
    X: np.ndarray  # columns spanning X inside S
    Y: np.ndarray


def product_span(ext: RingExtension, A, B) -> np.ndarray:
    S, p = ext.S, ext.R.p
    prods = [S.mul(A[:, a], B[:, b]) for a in range(A.shape[1]) for b in range(B.shape[1])]
    return K.row_basis(np.stack(prods), p) if prods else np.zeros((0, S.dim), dtype=np.int64)


def verify_inv_element(ext: RingExtension, Xcols, Ycols) -> InvElement:
    p = ext.R.p
    Xc, Yc = K.fp(Xcols, p), K.fp(Ycols, p)
    target = K.row_basis(ext.emb.T, p)
    for side, (A, B) in (("XY", (Xc, Yc)), ("YX", (Yc, Xc))):
        got = product_span(ext, A, B)
        if not K.same_span(got, target, p):
            raise ProductNotR(f"{side} is not the image of R", witness={"side": side, "span": got.tolist()})
    return InvElement(ext, Xc, Yc)


def hom_dims(M: Bimodule, N: Bimodule) -> tuple[int, int]:
    return len(hom_space(M, N)), len(hom_space(N, M))
