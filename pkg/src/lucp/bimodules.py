"""Unital bimodules over a ring with local units.

Convention: vectors are columns, ``left[i]`` is the matrix of m -> b_i m and
``right[i]`` the matrix of m -> m b_i.  A map M -> N is an (dim N x dim M)
matrix.

Tensor products over R are explicit quotients of the plain tensor space
(lexicographic index order) by the balancing relations.  Every map out of a
tensor product is first written on the plain space and then pushed through
the stored section, after checking that it kills the relations.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from . import kernel as K
from .errors import (
    BimoduleError,
    EnumerationCap,
    InvalidSplitData,
    NoCommonUnit,
    NotBimoduleMap,
    NotSummandOfFreeR,
    SearchExhausted,
)
from .rings import LocalUnitRing, RingExtension

EXHAUSTIVE_LIMIT = 1 << 16
SAMPLE_TRIALS = 100_000


@dataclass(frozen=True, eq=False)
class Bimodule:
    R: LocalUnitRing
    left: np.ndarray   # (dim R, m, m)
    right: np.ndarray  # (dim R, m, m)
    label: str = ""

    @property
    def dim(self) -> int:
        return self.left.shape[1]

    @property
    def p(self) -> int:
        return self.R.p

    def lmat(self, r) -> np.ndarray:
        return np.einsum("i,ijk->jk", np.asarray(r, dtype=np.int64), self.left) % self.p

    def rmat(self, r) -> np.ndarray:
        return np.einsum("i,ijk->jk", np.asarray(r, dtype=np.int64), self.right) % self.p

    def lact(self, r, m) -> np.ndarray:
        return self.lmat(r) @ np.asarray(m, dtype=np.int64) % self.p

    def ract(self, m, r) -> np.ndarray:
        return self.rmat(r) @ np.asarray(m, dtype=np.int64) % self.p

    def basis(self, i: int) -> np.ndarray:
        v = np.zeros(self.dim, dtype=np.int64)
        v[i] = 1
        return v

    def absorbs(self, e, m) -> bool:
        m = np.asarray(m, dtype=np.int64) % self.p
        return np.array_equal(self.lact(e, m), m) and np.array_equal(self.ract(m, e), m)


def _frozen(a):
    a = np.array(a, dtype=np.int64)
    a.setflags(write=False)
    return a


def make_bimodule(R: LocalUnitRing, left, right, label: str = "", check: bool = True) -> Bimodule:
    p = R.p
    left, right = K.fp(left, p), K.fp(right, p)
    M = Bimodule(R, _frozen(left), _frozen(right), label)
    if check:
        validate_bimodule(M)
    return M


def validate_bimodule(M: Bimodule) -> Bimodule:
    R, p, n = M.R, M.p, M.R.dim
    if M.left.shape != (n, M.dim, M.dim) or M.right.shape != M.left.shape:
        raise BimoduleError("action tensors have inconsistent shapes")
    for i, j in itertools.product(range(n), repeat=2):
        bij = R.mul(R.basis(i), R.basis(j))
        if not np.array_equal(M.left[i] @ M.left[j] % p, M.lmat(bij)):
            raise BimoduleError("left action is not associative", witness=(i, j))
        if not np.array_equal(M.right[j] @ M.right[i] % p, M.rmat(bij)):
            raise BimoduleError("right action is not associative", witness=(i, j))
        if not np.array_equal(M.left[i] @ M.right[j] % p, M.right[j] @ M.left[i] % p):
            raise BimoduleError("left and right actions do not commute", witness=(i, j))
    for k in range(M.dim):
        if not any(M.absorbs(e, M.basis(k)) for e in R.E):
            raise BimoduleError(f"basis vector {k} has no two-sided local unit", witness=k)
    return M


def unit_for_mixed(R: LocalUnitRing, ring_elems=(), module_elems=()) -> np.ndarray:
    """First e in E absorbing the ring elements and the (module, vector) pairs."""
    for e in R.E:
        if all(R.absorbs(e, r) for r in ring_elems) and all(M.absorbs(e, m) for M, m in module_elems):
            return e
    raise NoCommonUnit("no listed local unit absorbs all elements")


# --------------------------------------------------------------------------
# constructors
# --------------------------------------------------------------------------


def regular(R: LocalUnitRing, label: str = "R") -> Bimodule:
    left = np.stack([R.left_matrix(R.basis(i)) for i in range(R.dim)])
    right = np.stack([R.right_matrix(R.basis(i)) for i in range(R.dim)])
    return make_bimodule(R, left, right, label)


def twisted_regular(R: LocalUnitRing, f, label: str = "") -> Bimodule:
    """R with right action m.s = m f(s) (f a ring automorphism given as a matrix)."""
    f = K.fp(f, R.p)
    left = np.stack([R.left_matrix(R.basis(i)) for i in range(R.dim)])
    right = np.stack([R.right_matrix(f[:, i]) for i in range(R.dim)])
    return make_bimodule(R, left, right, label or "R^f")


def direct_sum(mods, label: str = "") -> tuple[Bimodule, list, list]:
    """Return (M_1 + ... + M_k, inclusions, projections)."""
    mods = list(mods)
    R = mods[0].R
    dims = [M.dim for M in mods]
    total = sum(dims)
    left = np.zeros((R.dim, total, total), dtype=np.int64)
    right = np.zeros_like(left)
    incs, projs = [], []
    off = 0
    for M, d in zip(mods, dims):
        left[:, off:off + d, off:off + d] = M.left
        right[:, off:off + d, off:off + d] = M.right
        inc = np.zeros((total, d), dtype=np.int64)
        inc[off:off + d] = np.eye(d, dtype=np.int64)
        incs.append(inc)
        projs.append(inc.T.copy())
        off += d
    return make_bimodule(R, left, right, label, check=False), incs, projs


def sub_bimodule(M: Bimodule, basis_cols, label: str = "") -> tuple[Bimodule, np.ndarray]:
    """Restrict M to the subspace spanned by the given columns (must be closed)."""
    p = M.p
    B = K.fp(basis_cols, p)
    if K.rank(B, p) != B.shape[1]:
        raise BimoduleError("sub-bimodule basis is not independent")
    R = M.R

    def restrict(A):
        out = np.zeros((B.shape[1], B.shape[1]), dtype=np.int64)
        img = A @ B % p
        for c in range(B.shape[1]):
            sol = K.solve_linear_system(B, img[:, c], p)
            if sol is None:
                raise BimoduleError("subspace is not closed under the actions")
            out[:, c] = sol.particular
        return out

    left = np.stack([restrict(M.left[i]) for i in range(R.dim)])
    right = np.stack([restrict(M.right[i]) for i in range(R.dim)])
    return make_bimodule(R, left, right, label), B


def extension_bimodule(ext: RingExtension, label: str = "S") -> Bimodule:
    """S viewed as an R-bimodule through the embedding."""
    S, R = ext.S, ext.R
    left = np.stack([S.left_matrix(ext.emb[:, i]) for i in range(R.dim)])
    right = np.stack([S.right_matrix(ext.emb[:, i]) for i in range(R.dim)])
    return make_bimodule(R, left, right, label)


def subspace_of_extension(ext: RingExtension, basis_cols, label: str = "") -> tuple[Bimodule, np.ndarray]:
    return sub_bimodule(extension_bimodule(ext), basis_cols, label)


# --------------------------------------------------------------------------
# maps
# --------------------------------------------------------------------------


def is_bimodule_map(M: Bimodule, N: Bimodule, A) -> bool:
    p = M.p
    A = K.fp(A, p)
    if A.shape != (N.dim, M.dim):
        return False
    for i in range(M.R.dim):
        if not np.array_equal(A @ M.left[i] % p, N.left[i] @ A % p):
            return False
        if not np.array_equal(A @ M.right[i] % p, N.right[i] @ A % p):
            return False
    return True


def check_bimodule_map(M: Bimodule, N: Bimodule, A) -> np.ndarray:
    if not is_bimodule_map(M, N, A):
        raise NotBimoduleMap(f"map {M.label or 'M'} -> {N.label or 'N'} does not intertwine the actions")
    return K.fp(A, M.p)


def hom_space(M: Bimodule, N: Bimodule) -> np.ndarray:
    """Basis (k, dim N, dim M) of Hom_{R-R}(M, N)."""
    p, m, n = M.p, M.dim, N.dim
    if M.R is not N.R and M.R.dim != N.R.dim:
        raise BimoduleError("modules over different rings")
    Im, In = np.eye(m, dtype=np.int64), np.eye(n, dtype=np.int64)
    blocks = []
    for i in range(M.R.dim):
        # row-major vec: vec(A X) = (I (x) X^T) vec A, vec(Y A) = (Y (x) I) vec A
        blocks.append(np.kron(In, M.left[i].T) - np.kron(N.left[i], Im))
        blocks.append(np.kron(In, M.right[i].T) - np.kron(N.right[i], Im))
    if not blocks or n * m == 0:
        return np.zeros((0, n, m), dtype=np.int64)
    ns = K.nullspace(np.vstack(blocks) % p, p)
    return ns.reshape(-1, n, m)


def combine(basis: np.ndarray, coeffs, p: int) -> np.ndarray:
    return np.tensordot(np.asarray(coeffs, dtype=np.int64), basis, axes=1) % p


def coords_in(basis: np.ndarray, A, p: int) -> np.ndarray:
    """Coordinates of matrix A in a basis of matrices."""
    flat = basis.reshape(len(basis), -1).T
    return K.coords(flat, K.fp(A, p).reshape(-1), p)


def _combinations(basis, p, limit, trials, rng, skip_zero=True):
    """Exhaustive enumeration when small enough, else seeded random samples.

    Yields (matrix, exhaustive_flag).
    """
    k = len(basis)
    if p**k <= limit:
        for c in itertools.product(range(p), repeat=k):
            if skip_zero and not any(c):
                continue
            yield combine(basis, c, p), True
    else:
        rng = rng if rng is not None else np.random.default_rng(0)
        for _ in range(trials):
            c = rng.integers(0, p, size=k)
            yield combine(basis, c, p), False


def find_isomorphism(M: Bimodule, N: Bimodule, limit: int = EXHAUSTIVE_LIMIT,
                     trials: int = SAMPLE_TRIALS, rng=None):
    """A bimodule isomorphism M -> N, or None if none exists.

    None is only returned after an exhaustive search; a sampled search that
    finds nothing raises SearchExhausted.
    """
    if M.dim != N.dim:
        return None
    p = M.p
    if M.dim == 0:
        return np.zeros((0, 0), dtype=np.int64)
    H = hom_space(M, N)
    if len(H) == 0 or len(H) != len(hom_space(N, M)):
        return None
    exhaustive = True
    for A, exhaustive in _combinations(H, p, limit, trials, rng):
        if K.is_invertible(A, p):
            return A
    if not exhaustive:
        raise SearchExhausted(f"no isomorphism among {trials} sampled maps (hom dim {len(H)})")
    return None


def is_isomorphic(M: Bimodule, N: Bimodule, **kw) -> bool:
    return find_isomorphism(M, N, **kw) is not None


def automorphisms(M: Bimodule, limit: int = EXHAUSTIVE_LIMIT) -> list[np.ndarray]:
    H = hom_space(M, M)
    if M.p ** len(H) > limit:
        raise EnumerationCap(f"End(M) has {M.p}^{len(H)} elements")
    return [A for A, _ in _combinations(H, M.p, limit, 0, None) if K.is_invertible(A, M.p)]


# --------------------------------------------------------------------------
# tensor products over R
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Tensor:
    """M_1 (x)_R ... (x)_R M_k as a quotient of the plain tensor space."""

    factors: tuple
    module: Bimodule
    proj: np.ndarray     # quotient x plain
    sect: np.ndarray     # plain x quotient
    relations: np.ndarray  # rows spanning the kernel of proj

    @property
    def dim(self) -> int:
        return self.module.dim

    @property
    def plain_dim(self) -> int:
        return self.proj.shape[1]

    @property
    def p(self) -> int:
        return self.module.p

    def elem(self, *vecs) -> np.ndarray:
        """Class of v_1 (x) ... (x) v_k."""
        plain = reduce(np.kron, [np.asarray(v, dtype=np.int64) for v in vecs]) % self.p
        return self.proj @ plain % self.p

    def kills_relations(self, A) -> bool:
        if len(self.relations) == 0:
            return True
        return not np.any(K.fp(A, self.p) @ self.relations.T % self.p)

    def induce(self, A, check: bool = True) -> np.ndarray:
        """Matrix on the quotient of a map given on the plain space."""
        A = K.fp(A, self.p)
        if check and not self.kills_relations(A):
            raise NotBimoduleMap("map on plain tensors is not balanced")
        return A @ self.sect % self.p


_TENSOR_CACHE: dict = {}


def tensor(*mods: Bimodule) -> Tensor:
    key = tuple(id(M) for M in mods)
    hit = _TENSOR_CACHE.get(key)
    if hit is not None:
        return hit[1]
    T = _build_tensor(mods)
    _TENSOR_CACHE[key] = (mods, T)
    return T


def _build_tensor(mods) -> Tensor:
    if not mods:
        raise ValueError("empty tensor product")
    R = mods[0].R
    p = R.p
    dims = [M.dim for M in mods]
    N = int(np.prod(dims)) if dims else 1
    eye = [np.eye(d, dtype=np.int64) for d in dims]
    rel_blocks = []
    for k in range(len(mods) - 1):
        pre = np.eye(int(np.prod(dims[:k])), dtype=np.int64)
        post = np.eye(int(np.prod(dims[k + 2:])), dtype=np.int64)
        for i in range(R.dim):
            a = np.kron(np.kron(pre, np.kron(mods[k].right[i], eye[k + 1])), post)
            b = np.kron(np.kron(pre, np.kron(eye[k], mods[k + 1].left[i])), post)
            rel_blocks.append(((a - b) % p).T)
    if rel_blocks and N:
        rels, piv = K.rref(np.vstack(rel_blocks), p)
        rels = rels[: len(piv)]
    else:
        rels, piv = np.zeros((0, N), dtype=np.int64), []
    free = [c for c in range(N) if c not in set(piv)]
    q = len(free)
    proj = np.zeros((q, N), dtype=np.int64)
    sect = np.zeros((N, q), dtype=np.int64)
    pos = {c: j for j, c in enumerate(free)}
    for j, c in enumerate(free):
        proj[j, c] = 1
        sect[c, j] = 1
    for r, c in enumerate(piv):
        # e_c == -(rest of its rref row) modulo relations
        for c2 in free:
            proj[pos[c2], c] = (-rels[r, c2]) % p
    left_plain = [np.kron(mods[0].left[i], np.eye(N // dims[0], dtype=np.int64)) for i in range(R.dim)] if dims[0] else []
    right_plain = [np.kron(np.eye(N // dims[-1], dtype=np.int64), mods[-1].right[i]) for i in range(R.dim)] if dims[-1] else []
    if N:
        left = np.stack([proj @ L @ sect % p for L in left_plain])
        right = np.stack([proj @ Rm @ sect % p for Rm in right_plain])
    else:
        left = right = np.zeros((R.dim, 0, 0), dtype=np.int64)
    label = " (x) ".join(M.label or "?" for M in mods)
    module = make_bimodule(R, left, right, label, check=False)
    return Tensor(tuple(mods), module, _frozen(proj), _frozen(sect), _frozen(rels))


def tensor_maps(src: Tensor, dst: Tensor, maps) -> np.ndarray:
    """f_1 (x) ... (x) f_k between tensor products."""
    plain = reduce(np.kron, [K.fp(f, src.p) for f in maps])
    return dst.proj @ src.induce(plain) % src.p


def regroup(src: Tensor, dst: Tensor, splits) -> np.ndarray:
    """Canonical isomorphism between two bracketings.

    ``src`` is a tensor whose factors may themselves be tensors (listed in
    ``splits`` as Tensor objects or None for plain factors); ``dst`` is the
    flat tensor of all underlying factors.
    """
    pieces = []
    for F, sp in zip(src.factors, splits):
        pieces.append(sp.sect if sp is not None else np.eye(F.dim, dtype=np.int64))
    plain = reduce(np.kron, pieces)
    return dst.proj @ plain @ src.sect % src.p


# --------------------------------------------------------------------------
# summands and similarity
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SummandWitness:
    k: int
    iota: np.ndarray  # M -> N^k
    pi: np.ndarray    # N^k -> M

    def split_data(self, dimN: int):
        """Components phi_i = pr_i iota and psi_i = pi in_i."""
        phis = [self.iota[i * dimN:(i + 1) * dimN] for i in range(self.k)]
        psis = [self.pi[:, i * dimN:(i + 1) * dimN] for i in range(self.k)]
        return phis, psis


def summand_test(M: Bimodule, N: Bimodule, k_max: int | None = None, limit: int = EXHAUSTIVE_LIMIT,
                 trials: int = SAMPLE_TRIALS, rng=None):
    """Find a split injection M -> N^k for some k <= k_max.

    Returns a SummandWitness, or None once every k <= k_max has been searched
    exhaustively.  A sampled search that fails raises SearchExhausted.
    Split injections are enumerated from Hom(M, N^k); for each injective one
    a left inverse is solved for linearly inside Hom(N^k, M).
    """
    p = M.p
    if k_max is None:
        k_max = max(1, M.dim)
    if M.dim == 0:
        z = np.zeros((N.dim, 0), dtype=np.int64)
        return SummandWitness(1, z, z.T.copy())
    if len(hom_space(M, N)) == 0:
        return None
    exhausted = True
    I = np.eye(M.dim, dtype=np.int64).reshape(-1)
    for k in range(1, k_max + 1):
        if k * N.dim < M.dim:
            continue
        Nk = direct_sum([N] * k)[0]
        H = hom_space(M, Nk)
        back = hom_space(Nk, M)
        if len(back) == 0:
            continue
        for iota, exh in _combinations(H, p, limit, trials, rng):
            exhausted = exhausted and exh
            if K.rank(iota, p) != M.dim:
                continue
            # sum_j c_j (B_j iota) = I
            A = np.stack([(B @ iota % p).reshape(-1) for B in back], axis=1)
            sol = K.solve_linear_system(A, I, p)
            if sol is not None:
                return SummandWitness(k, iota, combine(back, sol.particular, p))
    if not exhausted:
        raise SearchExhausted(f"summand search sampled {trials} maps per k up to {k_max}")
    return None


def is_similar(M: Bimodule, N: Bimodule, **kw) -> bool:
    return summand_test(M, N, **kw) is not None and summand_test(N, M, **kw) is not None


# --------------------------------------------------------------------------
# the ring Z = End_{R-R}(R) and its units
# --------------------------------------------------------------------------


@dataclass(eq=False)
class CenterRing:
    R: LocalUnitRing
    regular: Bimodule
    basis: np.ndarray          # (k, d, d)
    table: np.ndarray          # (k, k, k) composition constants
    units: list                # invertible elements (matrices), identity first
    unit_group: K.AbelianGroup
    presentation: K.QuotientPresentation
    _vec: dict = field(repr=False, default_factory=dict)
    _by_vec: dict = field(repr=False, default_factory=dict)

    @property
    def p(self) -> int:
        return self.R.p

    @staticmethod
    def key(z) -> bytes:
        return np.ascontiguousarray(z, dtype=np.int64).tobytes()

    def identity(self) -> np.ndarray:
        return np.eye(self.R.dim, dtype=np.int64)

    def vec(self, z) -> tuple:
        """Exponent vector of a unit."""
        try:
            return self._vec[self.key(K.fp(z, self.p))]
        except KeyError:
            raise BimoduleError("element is not a unit of Z") from None

    def elem(self, v) -> np.ndarray:
        return self._by_vec[self.unit_group.normalize(v)]

    def mul(self, a, b) -> np.ndarray:
        return K.fp(a, self.p) @ K.fp(b, self.p) % self.p

    def inv(self, z) -> np.ndarray:
        return self.elem(self.unit_group.neg(self.vec(z)))

    def is_unit(self, z) -> bool:
        return self.key(K.fp(z, self.p)) in self._vec

    def elements(self):
        for A, _ in _combinations(self.basis, self.p, 10**6, 0, None, skip_zero=False):
            yield A


def center_ring(R: LocalUnitRing, limit: int = 10**6) -> CenterRing:
    Rb = regular(R)
    B = hom_space(Rb, Rb)
    p = R.p
    if p ** len(B) > limit:
        raise EnumerationCap(f"|Z| = {p}^{len(B)} exceeds {limit}")
    k = len(B)
    table = np.zeros((k, k, k), dtype=np.int64)
    for a, b in itertools.product(range(k), repeat=2):
        table[a, b] = coords_in(B, B[a] @ B[b] % p, p)
        if not np.array_equal(B[a] @ B[b] % p, B[b] @ B[a] % p):
            raise BimoduleError("End(R) is not commutative", witness=(a, b))
    ident = np.eye(R.dim, dtype=np.int64)
    units = [ident] + [A for A, _ in _combinations(B, p, limit, 0, None)
                       if K.is_invertible(A, p) and not np.array_equal(A, ident)]
    key = CenterRing.key
    pres, table_vec, _ = K.abelian_structure(units, lambda a, b: a @ b % p, ident, key=key)
    Z = CenterRing(R, Rb, B, table, units, pres.group, pres)
    for u in units:
        v = table_vec[key(u)]
        Z._vec[key(u)] = v
        Z._by_vec[v] = u
    if len(Z._by_vec) != len(units):
        raise BimoduleError("unit coordinates are not injective")
    return Z


# --------------------------------------------------------------------------
# invariants functor, Z-module profiles and the twist
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Invariants:
    M: Bimodule
    basis: np.ndarray      # (k, dim M, dim R): basis of Hom(R, M)
    z_action: np.ndarray   # (len Z.basis, k, k): z.f = f o z in basis coordinates
    eta: np.ndarray        # quotient(R (x)_Z M^R) -> M
    quotient_dim: int


def z_action_matrices(Z: CenterRing, basis: np.ndarray) -> np.ndarray:
    p = Z.p
    if len(basis) == 0:
        return np.zeros((len(Z.basis), 0, 0), dtype=np.int64)
    mats = []
    for z in Z.basis:
        cols = [coords_in(basis, f @ z % p, p) for f in basis]
        mats.append(np.stack(cols, axis=1))
    return np.stack(mats)


def invariants_functor(M: Bimodule, Z: CenterRing, check_summand: bool = True) -> Invariants:
    """M^R = Hom(R, M) with its Z-action and the evaluation R (x)_Z M^R -> M."""
    p, R = M.p, M.R
    if check_summand and summand_test(M, Z.regular) is None:
        raise NotSummandOfFreeR(f"{M.label or 'M'} is not a summand of a free bimodule R^(n)")
    basis = hom_space(Z.regular, M)
    k, d = len(basis), R.dim
    act = z_action_matrices(Z, basis)
    # relations of R (x)_Z M^R: z(r) (x) f - r (x) z.f
    rels = []
    for zi, z in enumerate(Z.basis):
        for a in range(d):
            for b in range(k):
                v = np.zeros(d * k, dtype=np.int64)
                v += np.kron(z[:, a], np.eye(k, dtype=np.int64)[b])
                v -= np.kron(np.eye(d, dtype=np.int64)[a], act[zi][:, b])
                rels.append(v % p)
    plain_eta = np.zeros((M.dim, d * k), dtype=np.int64)
    for a in range(d):
        for b in range(k):
            plain_eta[:, a * k + b] = basis[b][:, a]
    # quotient by relations: image of plain_eta restricted to a complement
    if rels and d * k:
        relrows = K.row_basis(np.stack(rels), p)
        if np.any(plain_eta @ relrows.T % p):
            raise BimoduleError("evaluation map is not Z-balanced")
        qdim = d * k - len(relrows)
    else:
        qdim = d * k
    eta = plain_eta
    if K.rank(eta, p) != M.dim or qdim != M.dim:
        raise NotSummandOfFreeR("evaluation R (x)_Z M^R -> M is not bijective")
    return Invariants(M, basis, act, eta, qdim)


def z_idempotents(Z: CenterRing) -> list[np.ndarray]:
    p = Z.p
    return [A for A in Z.elements() if np.array_equal(A @ A % p, A)]


def z_module_profile(Z: CenterRing, action: np.ndarray) -> tuple[int, ...]:
    """Ranks of every idempotent of Z acting on a Z-module.

    For the semisimple commutative Z of the fixtures these ranks determine
    the module up to isomorphism.
    """
    p = Z.p
    out = []
    for e in z_idempotents(Z):
        c = coords_in(Z.basis, e, p)
        if action.shape[1] == 0:
            out.append(0)
            continue
        mat = np.tensordot(c, action, axes=1) % p
        out.append(K.rank(mat, p))
    return tuple(out)


def z_tensor_profile(Z: CenterRing, act1: np.ndarray, act2: np.ndarray) -> tuple[int, ...]:
    """Profile of P (x)_Z Q from the action matrices of P and Q."""
    p = Z.p
    k1, k2 = act1.shape[1], act2.shape[1]
    if k1 * k2 == 0:
        return tuple(0 for _ in z_idempotents(Z))
    rels = []
    for zi in range(len(Z.basis)):
        rels.append((np.kron(act1[zi], np.eye(k2, dtype=np.int64)) - np.kron(np.eye(k1, dtype=np.int64), act2[zi])).T % p)
    relrows = K.row_basis(np.vstack(rels), p)
    plain = [np.kron(act1[zi], np.eye(k2, dtype=np.int64)) % p for zi in range(len(Z.basis))]
    # action on the quotient: complement coordinates via rref
    _, piv = K.rref(relrows, p) if len(relrows) else (None, [])
    free = [c for c in range(k1 * k2) if c not in set(piv)]
    proj = np.zeros((len(free), k1 * k2), dtype=np.int64)
    sect = np.zeros((k1 * k2, len(free)), dtype=np.int64)
    pos = {c: j for j, c in enumerate(free)}
    for j, c in enumerate(free):
        proj[j, c] = 1
        sect[c, j] = 1
    for r, c in enumerate(piv):
        for c2 in free:
            proj[pos[c2], c] = (-relrows[r, c2]) % p
    act = np.stack([proj @ A @ sect % p for A in plain]) if free else np.zeros((len(plain), 0, 0), dtype=np.int64)
    return z_module_profile(Z, act)


def twist_map(M: Bimodule, N: Bimodule, phis, psis) -> np.ndarray:
    """The swap M (x)_R N -> N (x)_R M, x (x) y -> sum phi_i(x) y (x) psi_i(e).

    ``phis``: maps M -> R, ``psis``: maps R -> M with sum psi_i phi_i = id_M;
    e is the first local unit absorbing x and y.
    """
    p, R = M.p, M.R
    acc = np.zeros((M.dim, M.dim), dtype=np.int64)
    for f, g in zip(phis, psis):
        acc = acc + K.fp(g, p) @ K.fp(f, p)
    if not np.array_equal(acc % p, np.eye(M.dim, dtype=np.int64)):
        raise InvalidSplitData("sum psi_i phi_i is not the identity of M")
    src, dst = tensor(M, N), tensor(N, M)
    plain = np.zeros((dst.plain_dim, src.plain_dim), dtype=np.int64)
    for a in range(M.dim):
        x = M.basis(a)
        for b in range(N.dim):
            y = N.basis(b)
            e = unit_for_mixed(R, module_elems=[(M, x), (N, y)])
            col = np.zeros(dst.plain_dim, dtype=np.int64)
            for f, g in zip(phis, psis):
                col += np.kron(N.lact(K.fp(f, p) @ x % p, y), K.fp(g, p) @ e % p)
            plain[:, a * N.dim + b] = col % p
    T = dst.proj @ src.induce(plain) % p
    if not is_bimodule_map(src.module, dst.module, T) or not K.is_invertible(T, p):
        raise InvalidSplitData("twist is not a bimodule isomorphism")
    return T
