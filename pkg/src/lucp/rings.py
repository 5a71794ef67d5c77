"""Finite-dimensional F_p-algebras presented with a list of local units.

Elements are coordinate vectors (numpy int64) relative to the ring basis.
The structure tensor stores ``b_i * b_j = sum_k mult[i, j, k] b_k``.

No global identity is ever asked for: every "multiply by one" goes through
:func:`unit_for`, which scans the ordered list ``E``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import kernel as K
from .errors import (
    EnumerationCap,
    NoCommonUnit,
    NoLocalUnit,
    NonAssociative,
    NotIdempotent,
    NotMultiplicative,
    RingValidationError,
    UnitSetMismatch,
)


def _freeze(a):
    a = np.array(a, dtype=np.int64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class LocalUnitRing:
    p: int
    mult: np.ndarray
    E: tuple
    labels: tuple = field(default=())

    @property
    def dim(self) -> int:
        return self.mult.shape[0]

    def basis(self, i: int) -> np.ndarray:
        v = np.zeros(self.dim, dtype=np.int64)
        v[i] = 1
        return v

    def zero(self) -> np.ndarray:
        return np.zeros(self.dim, dtype=np.int64)

    def mul(self, a, b) -> np.ndarray:
        return np.einsum("i,j,ijk->k", np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64), self.mult) % self.p

    def left_matrix(self, a) -> np.ndarray:
        """Matrix of x -> a x."""
        return np.einsum("i,ijk->kj", np.asarray(a, dtype=np.int64), self.mult) % self.p

    def right_matrix(self, a) -> np.ndarray:
        """Matrix of x -> x a."""
        return np.einsum("j,ijk->ki", np.asarray(a, dtype=np.int64), self.mult) % self.p

    def absorbs(self, e, x) -> bool:
        return np.array_equal(self.mul(e, x), x % self.p) and np.array_equal(self.mul(x, e), x % self.p)

    def elements(self, limit: int = 10**6):
        if self.p**self.dim > limit:
            raise EnumerationCap(f"|R| = {self.p}^{self.dim} exceeds {limit}")
        for c in itertools.product(range(self.p), repeat=self.dim):
            yield np.array(c, dtype=np.int64)

    def to_json(self) -> dict:
        d = {"dim": self.dim, "mult": self.mult.tolist(), "E": [list(map(int, e)) for e in self.E]}
        if self.labels:
            d["labels"] = list(self.labels)
        return d


def validate_ring(p: int, mult, E, labels=()) -> LocalUnitRing:
    """Check associativity, idempotency of E and the local-unit axioms."""
    mult = K.fp(mult, p)
    n = mult.shape[0]
    if mult.shape != (n, n, n):
        raise RingValidationError(f"structure tensor has shape {mult.shape}")
    E = tuple(_freeze(K.fp(e, p)) for e in E)
    ring = LocalUnitRing(p, _freeze(mult), E, tuple(labels))
    # (b_i b_j) b_k == b_i (b_j b_k)
    lhs = np.einsum("ijm,mkl->ijkl", mult, mult) % p
    rhs = np.einsum("jkm,iml->ijkl", mult, mult) % p
    bad = np.argwhere(np.any(lhs != rhs, axis=3))
    if len(bad):
        raise NonAssociative("multiplication is not associative", witness=tuple(int(x) for x in bad[0]))
    for idx, e in enumerate(E):
        if e.shape != (n,):
            raise RingValidationError(f"local unit {idx} has wrong length", witness=idx)
        if not np.array_equal(ring.mul(e, e), e):
            raise NotIdempotent(f"E[{idx}] is not idempotent", witness=idx)
    for i in range(n):
        if not any(ring.absorbs(e, ring.basis(i)) for e in E):
            raise NoLocalUnit(f"basis element {i} has no two-sided unit in E", witness=i)
    for a, b in itertools.combinations_with_replacement(range(len(E)), 2):
        if not any(ring.absorbs(g, E[a]) and ring.absorbs(g, E[b]) for g in E):
            raise NoLocalUnit(f"no common unit for E[{a}], E[{b}]", witness=(a, b))
    return ring


def unit_for(ring: LocalUnitRing, elems) -> np.ndarray:
    """First e in E with e r = r e = r for every r in ``elems``."""
    elems = [K.fp(x, ring.p) for x in elems]
    if not elems:
        raise ValueError("unit_for needs at least one element")
    for e in ring.E:
        if all(ring.absorbs(e, x) for x in elems):
            return e
    raise NoCommonUnit("no listed local unit absorbs all elements", witness=[x.tolist() for x in elems])


@dataclass(frozen=True, eq=False)
class RingExtension:
    R: LocalUnitRing
    S: LocalUnitRing
    emb: np.ndarray  # dim_S x dim_R

    def __call__(self, r) -> np.ndarray:
        return (self.emb @ np.asarray(r, dtype=np.int64)) % self.R.p

    def image_basis(self) -> np.ndarray:
        return K.row_basis(self.emb.T, self.R.p)


def validate_extension(R: LocalUnitRing, S: LocalUnitRing, emb) -> RingExtension:
    p = R.p
    if S.p != p:
        raise RingValidationError("base and over-ring have different primes")
    emb = K.fp(emb, p)
    if emb.shape != (S.dim, R.dim):
        raise RingValidationError(f"embedding has shape {emb.shape}")
    if K.rank(emb, p) != R.dim:
        raise NotMultiplicative("embedding is not injective")
    for i, j in itertools.product(range(R.dim), repeat=2):
        lhs = emb @ R.mul(R.basis(i), R.basis(j)) % p
        rhs = S.mul(emb[:, i], emb[:, j])
        if not np.array_equal(lhs, rhs):
            raise NotMultiplicative("embedding is not multiplicative", witness=(i, j))
    img = {tuple((emb @ e) % p) for e in R.E}
    if img != {tuple(e) for e in S.E}:
        raise UnitSetMismatch("emb(E_R) differs from E_S")
    return RingExtension(R, S, _freeze(emb))


# --------------------------------------------------------------------------
# constructors used by the fixtures
# --------------------------------------------------------------------------


def _poly_irreducible(coeffs, p):
    """coeffs: monic f as list low->high. Irreducible iff no roots/factors of degree <= n/2."""
    n = len(coeffs) - 1
    for d in range(1, n // 2 + 1):
        for tail in itertools.product(range(p), repeat=d):
            g = list(tail) + [1]
            # polynomial remainder f mod g
            r = list(coeffs)
            while len(r) >= len(g):
                c = r[-1]
                shift = len(r) - len(g)
                for k in range(len(g)):
                    r[shift + k] = (r[shift + k] - c * g[k]) % p
                r.pop()
            if not any(r):
                return False
    return True


def first_irreducible(p: int, n: int) -> list[int]:
    """Lexicographically first monic irreducible polynomial of degree n."""
    for tail in itertools.product(range(p), repeat=n):
        coeffs = list(reversed(tail)) + [1]
        if coeffs[0] and _poly_irreducible(coeffs, p):
            return coeffs
    raise ValueError("no irreducible polynomial")  # pragma: no cover


def finite_field(p: int, n: int, modulus=None) -> tuple[LocalUnitRing, list[int]]:
    """F_{p^n} = F_p[t]/(f), basis 1, t, ..., t^{n-1}; E = [1]."""
    f = list(modulus) if modulus is not None else first_irreducible(p, n)
    mult = np.zeros((n, n, n), dtype=np.int64)
    for i, j in itertools.product(range(n), repeat=2):
        poly = [0] * (2 * n - 1)
        poly[i + j] = 1
        for deg in range(2 * n - 2, n - 1, -1):
            c = poly[deg]
            if c:
                for k in range(n + 1):
                    poly[deg - n + k] = (poly[deg - n + k] - c * f[k]) % p
        mult[i, j] = poly[:n]
    one = np.zeros(n, dtype=np.int64)
    one[0] = 1
    labels = ["1"] + [f"t^{k}" if k > 1 else "t" for k in range(1, n)]
    return validate_ring(p, mult, [one], labels), f


def frobenius_matrix(F: LocalUnitRing) -> np.ndarray:
    """Matrix of a -> a^p on a finite field given by ``finite_field``."""
    n, p = F.dim, F.p
    M = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        b = F.basis(i)
        acc = b
        for _ in range(p - 1):
            acc = F.mul(acc, b)
        M[:, i] = acc
    return M


def product_ring(p: int, k: int) -> LocalUnitRing:
    """F_p^k with orthogonal idempotents; E = [e_1, ..., e_k, sum]."""
    mult = np.zeros((k, k, k), dtype=np.int64)
    for i in range(k):
        mult[i, i, i] = 1
    E = [np.eye(k, dtype=np.int64)[i] for i in range(k)] + [np.ones(k, dtype=np.int64)]
    return validate_ring(p, mult, E, [f"e{i + 1}" for i in range(k)])


def matrix_ring(p: int, n: int) -> LocalUnitRing:
    """M_n(F_p), basis E_ij row-major; E = [E_11, ..., E_nn, I] (noncommuting allowed)."""
    d = n * n
    mult = np.zeros((d, d, d), dtype=np.int64)
    for i, j, k, l in itertools.product(range(n), repeat=4):
        if j == k:
            mult[i * n + j, k * n + l, i * n + l] = 1
    E = []
    for i in range(n):
        e = np.zeros(d, dtype=np.int64)
        e[i * n + i] = 1
        E.append(e)
    E.append(np.eye(n, dtype=np.int64).reshape(-1))
    return validate_ring(p, mult, E, [f"E{i + 1}{j + 1}" for i in range(n) for j in range(n)])


def is_ring_automorphism(R: LocalUnitRing, M) -> bool:
    M = K.fp(M, R.p)
    if not K.is_invertible(M, R.p):
        return False
    for i, j in itertools.product(range(R.dim), repeat=2):
        if not np.array_equal(M @ R.mul(R.basis(i), R.basis(j)) % R.p, R.mul(M[:, i], M[:, j])):
            return False
    return {tuple((M @ e) % R.p) for e in R.E} == {tuple(e) for e in R.E}


# --------------------------------------------------------------------------
# small-algebra invariants and isomorphism search
# --------------------------------------------------------------------------


def ring_invariants(A: LocalUnitRing, limit: int = 10**6) -> dict:
    """Counts that separate small algebras (field vs split, etc.)."""
    n_units = n_idem = n_nilp = 0
    for x in A.elements(limit):
        L = A.left_matrix(x)
        if K.is_invertible(L, A.p) and K.is_invertible(A.right_matrix(x), A.p):
            n_units += 1
        if np.array_equal(A.mul(x, x), x):
            n_idem += 1
        y = x
        for _ in range(A.dim):
            y = A.mul(y, x)
        if not np.any(y):
            n_nilp += 1
    comm = all(np.array_equal(A.mul(A.basis(i), A.basis(j)), A.mul(A.basis(j), A.basis(i)))
               for i in range(A.dim) for j in range(A.dim))
    return {"dim": A.dim, "units": n_units, "idempotents": n_idem, "nilpotents": n_nilp,
            "commutative": comm, "is_field": comm and n_units == A.p**A.dim - 1}


def _algebra_isomorphisms(A: LocalUnitRing, B: LocalUnitRing, limit: int, match_units: bool):
    """Yield every F_p-algebra isomorphism A -> B by backtracking over basis images."""
    if A.p != B.p or A.dim != B.dim:
        return
    if A.p ** (A.dim * A.dim) > limit:
        raise EnumerationCap("isomorphism search space too large")
    p, n = A.p, A.dim
    elems = list(B.elements())
    targets = {tuple(e) for e in B.E}

    def consistent(trial):
        k = len(trial) - 1
        M = np.zeros((n, n), dtype=np.int64)
        for t, v in enumerate(trial):
            M[:, t] = v
        for i in range(k + 1):
            for a, b in {(i, k), (k, i)}:
                prod = A.mult[a, b]
                # only products that land in the span of the images fixed so far
                if np.any(prod[k + 1:]):
                    continue
                if not np.array_equal(M @ prod % p, B.mul(trial[a], trial[b])):
                    return False
        return True

    def extend(images):
        if len(images) == n:
            M = np.stack(images, axis=1)
            if not K.is_invertible(M, p):
                return
            if match_units and {tuple(M @ e % p) for e in A.E} != targets:
                return
            yield M
            return
        for cand in elems:
            trial = images + [cand]
            if consistent(trial):
                yield from extend(trial)

    yield from extend([])


def find_algebra_isomorphism(A: LocalUnitRing, B: LocalUnitRing, limit: int = 1 << 26,
                              match_units: bool = False):
    """Search for an F_p-algebra isomorphism A -> B.

    With ``match_units`` the map must also send E_A onto E_B as a set.

    Returns the matrix, or None when the exhaustive search finds nothing.
    Raises EnumerationCap if the search space exceeds ``limit``.
    """
    return next(_algebra_isomorphisms(A, B, limit, match_units), None)


def algebra_automorphisms(A: LocalUnitRing, limit: int = 1 << 26, match_units: bool = True) -> list:
    """All F_p-algebra automorphisms of A (sending E onto E by default)."""
    return list(_algebra_isomorphisms(A, A, limit, match_units))
