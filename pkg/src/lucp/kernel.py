"""Exact linear algebra over F_p and Z, finite abelian groups, group tables.

F_p matrices are plain ``numpy`` int64 arrays with entries in ``[0, p)``;
the prime travels alongside as an argument. Integer matrices (Smith form)
are lists of Python ints so nothing can overflow.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import prod
from typing import Iterable, Sequence

import numpy as np

from .errors import FreeRankError, GroupAxiomError, ShapeMismatch

# --------------------------------------------------------------------------
# F_p
# --------------------------------------------------------------------------


def fp(a, p: int) -> np.ndarray:
    """Coerce to an int64 array reduced mod p."""
    return np.asarray(a, dtype=np.int64) % p


def matmul(a, b, p: int) -> np.ndarray:
    return (np.asarray(a, dtype=np.int64) @ np.asarray(b, dtype=np.int64)) % p


def kron(a, b, p: int) -> np.ndarray:
    return np.kron(np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)) % p


def rref(a, p: int):
    """Reduced row echelon form. Returns (R, pivot_columns)."""
    m = fp(a, p).copy()
    if m.ndim != 2:
        raise ShapeMismatch("rref expects a 2-d array")
    rows, cols = m.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(m[r:, c])[0]
        if len(nz) == 0:
            continue
        i = r + nz[0]
        if i != r:
            m[[r, i]] = m[[i, r]]
        m[r] = (m[r] * pow(int(m[r, c]), -1, p)) % p
        col = m[:, c].copy()
        col[r] = 0
        nzr = np.nonzero(col)[0]
        if len(nzr):
            m[nzr] = (m[nzr] - np.outer(col[nzr], m[r])) % p
        pivots.append(c)
        r += 1
    return m, pivots


def rank(a, p: int) -> int:
    a = np.asarray(a)
    if a.size == 0:
        return 0
    return len(rref(a, p)[1])


def nullspace(a, p: int) -> np.ndarray:
    """Basis (as rows) of {x : a x = 0}."""
    a = fp(a, p)
    n = a.shape[1]
    if a.shape[0] == 0:
        return np.eye(n, dtype=np.int64)
    r, piv = rref(a, p)
    free = [c for c in range(n) if c not in piv]
    basis = np.zeros((len(free), n), dtype=np.int64)
    for k, f in enumerate(free):
        basis[k, f] = 1
        for i, c in enumerate(piv):
            basis[k, c] = (-r[i, f]) % p
    return basis


@dataclass(frozen=True)
class Solution:
    """Affine solution set ``particular + span(kernel)``."""

    particular: np.ndarray
    kernel: np.ndarray

    def contains(self, a, x, p: int) -> bool:
        return not np.any((fp(a, p) @ fp(x, p) - fp(a, p) @ self.particular) % p)


def solve_linear_system(a, b, p: int) -> Solution | None:
    """All x with a x = b over F_p, or None if inconsistent."""
    a = fp(a, p)
    b = fp(b, p).reshape(-1)
    if a.ndim != 2 or a.shape[0] != b.shape[0]:
        raise ShapeMismatch(f"matrix {a.shape} vs rhs {b.shape}")
    n = a.shape[1]
    aug = np.concatenate([a, b[:, None]], axis=1)
    r, piv = rref(aug, p)
    if n in piv:
        return None
    x = np.zeros(n, dtype=np.int64)
    for i, c in enumerate(piv):
        x[c] = r[i, n]
    return Solution(x, nullspace(a, p))


def row_basis(vectors, p: int, n: int | None = None) -> np.ndarray:
    """RREF basis (rows) of the span of the given row vectors."""
    v = np.asarray(vectors, dtype=np.int64)
    if v.size == 0:
        return np.zeros((0, n if n is not None else (v.shape[1] if v.ndim == 2 else 0)), dtype=np.int64)
    r, piv = rref(v, p)
    return r[: len(piv)]


def same_span(a, b, p: int) -> bool:
    ra, rb = row_basis(a, p), row_basis(b, p)
    return ra.shape == rb.shape and np.array_equal(ra, rb)


def in_span(basis, v, p: int) -> bool:
    basis = np.asarray(basis, dtype=np.int64)
    if basis.size == 0:
        return not np.any(fp(v, p))
    return rank(np.vstack([basis, fp(v, p)[None, :]]), p) == rank(basis, p)


def coords(basis_cols, v, p: int) -> np.ndarray:
    """Coordinates of v in the column basis ``basis_cols`` (must be in span)."""
    sol = solve_linear_system(basis_cols, v, p)
    if sol is None:
        raise ValueError("vector not in span")
    return sol.particular


def inverse(a, p: int) -> np.ndarray:
    a = fp(a, p)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ShapeMismatch("inverse of non-square matrix")
    r, piv = rref(np.concatenate([a, np.eye(n, dtype=np.int64)], axis=1), p)
    if piv[:n] != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    return r[:, n:]


def is_invertible(a, p: int) -> bool:
    a = np.asarray(a)
    return a.shape[0] == a.shape[1] and rank(a, p) == a.shape[0]


def right_solve(a, b, p: int) -> np.ndarray | None:
    """Unique X with X a = b when a has full row rank; None if none exists."""
    a, b = fp(a, p), fp(b, p)
    # X a = b  <=>  a^T X^T = b^T, solved column by column
    out = np.zeros((b.shape[0], a.shape[0]), dtype=np.int64)
    for i in range(b.shape[0]):
        sol = solve_linear_system(a.T, b[i], p)
        if sol is None:
            return None
        out[i] = sol.particular
    return out


def enumerate_span(basis, p: int, limit: int | None = None):
    """Yield every F_p-combination of the rows of ``basis`` (zero first)."""
    basis = np.asarray(basis, dtype=np.int64)
    k = len(basis)
    if limit is not None and p**k > limit:
        raise OverflowError(f"span has {p}^{k} elements, limit {limit}")
    for c in itertools.product(range(p), repeat=k):
        if k == 0:
            yield None, c
        else:
            yield (np.asarray(c, dtype=np.int64) @ basis) % p, c


# --------------------------------------------------------------------------
# Integers: Smith normal form
# --------------------------------------------------------------------------


def _identity(n):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def _matmul_int(a, b):
    if not a or not b:
        return [[0] * (len(b[0]) if b else 0) for _ in a]
    bt = list(zip(*b))
    return [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a]


def smith_normal_form(a: Sequence[Sequence[int]]):
    """Smith form D = U A V with U, V unimodular and d_i | d_{i+1}.

    Pivot choice: nonzero entry of smallest absolute value in the active
    submatrix, ties broken in row-major order.
    """
    A = [list(map(int, row)) for row in a]
    m = len(A)
    n = len(A[0]) if m else 0
    U = _identity(m)
    V = _identity(n)

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(dst, src, k):  # row dst += k * row src
        A[dst] = [x + k * y for x, y in zip(A[dst], A[src])]
        U[dst] = [x + k * y for x, y in zip(U[dst], U[src])]

    def add_col(dst, src, k):
        for row in A:
            row[dst] += k * row[src]
        for row in V:
            row[dst] += k * row[src]

    for t in range(min(m, n)):
        while True:
            best = None
            for i in range(t, m):
                for j in range(t, n):
                    if A[i][j] and (best is None or abs(A[i][j]) < abs(A[best[0]][best[1]])):
                        best = (i, j)
            if best is None:
                return A, U, V
            swap_rows(t, best[0])
            swap_cols(t, best[1])
            piv = A[t][t]
            dirty = False
            for i in range(t + 1, m):
                if A[i][t]:
                    add_row(i, t, -(A[i][t] // piv))
                    dirty |= A[i][t] != 0
            for j in range(t + 1, n):
                if A[t][j]:
                    add_col(j, t, -(A[t][j] // piv))
                    dirty |= A[t][j] != 0
            if dirty:
                continue
            bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n) if A[i][j] % piv), None)
            if bad is None:
                break
            add_row(t, bad[0], 1)
        if A[t][t] < 0:
            A[t] = [-x for x in A[t]]
            U[t] = [-x for x in U[t]]
    return A, U, V


def det_int(a) -> int:
    """Exact determinant (Bareiss)."""
    M = [list(map(int, r)) for r in a]
    n = len(M)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if M[k][k] == 0:
            sw = next((i for i in range(k + 1, n) if M[i][k]), None)
            if sw is None:
                return 0
            M[k], M[sw] = M[sw], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


def inverse_unimodular(a):
    """Integer inverse of a unimodular matrix via Smith form."""
    n = len(a)
    D, U, V = smith_normal_form(a)
    # D = U A V with D = diag(+-1) -> A^{-1} = V D^{-1} U
    Dinv = [[D[i][i] if i == j else 0 for j in range(n)] for i in range(n)]
    if any(abs(D[i][i]) != 1 for i in range(n)):
        raise ValueError("matrix is not unimodular")
    return _matmul_int(_matmul_int(V, Dinv), U)


# --------------------------------------------------------------------------
# Finite abelian groups
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class AbelianGroup:
    """Z/d1 x ... x Z/dk with d1 | d2 | ... | dk, each >= 2."""

    invariant_factors: tuple[int, ...] = ()

    def __post_init__(self):
        d = tuple(int(x) for x in self.invariant_factors)
        object.__setattr__(self, "invariant_factors", d)
        if any(x < 2 for x in d):
            raise ValueError(f"invariant factors must be >= 2: {d}")
        if any(d[i + 1] % d[i] for i in range(len(d) - 1)):
            raise ValueError(f"divisibility chain violated: {d}")

    @property
    def rank(self) -> int:
        return len(self.invariant_factors)

    @property
    def order(self) -> int:
        return prod(self.invariant_factors)

    def zero(self) -> tuple[int, ...]:
        return (0,) * self.rank

    def normalize(self, v) -> tuple[int, ...]:
        return tuple(int(x) % d for x, d in zip(v, self.invariant_factors))

    def add(self, a, b) -> tuple[int, ...]:
        return self.normalize(x + y for x, y in zip(a, b))

    def neg(self, a) -> tuple[int, ...]:
        return self.normalize(-x for x in a)

    def sub(self, a, b) -> tuple[int, ...]:
        return self.add(a, self.neg(b))

    def scale(self, k: int, a) -> tuple[int, ...]:
        return self.normalize(k * x for x in a)

    def elements(self) -> Iterable[tuple[int, ...]]:
        return itertools.product(*(range(d) for d in self.invariant_factors))

    def __str__(self):
        if not self.invariant_factors:
            return "1"
        return " x ".join(f"C{d}" for d in self.invariant_factors)


@dataclass(frozen=True)
class QuotientPresentation:
    """Z^gens / rowspan(rels) together with the coordinate change.

    ``to_group`` sends an integer vector of generator exponents to its
    canonical exponent vector; ``from_group`` lifts back.
    """

    group: AbelianGroup
    V: tuple
    Vinv: tuple
    keep: tuple[int, ...]

    def to_group(self, x) -> tuple[int, ...]:
        x = [int(t) for t in x]
        y = [sum(x[i] * self.V[i][j] for i in range(len(x))) for j in range(len(self.V[0]) if self.V else 0)]
        return self.group.normalize(y[j] for j in self.keep)

    def from_group(self, y) -> list[int]:
        n = len(self.V)
        full = [0] * n
        for j, val in zip(self.keep, y):
            full[j] = int(val)
        return [sum(full[j] * self.Vinv[j][i] for j in range(n)) for i in range(n)]


def presentation_from_relations(gens: int, rels) -> QuotientPresentation:
    rels = [list(map(int, r)) for r in rels]
    for r in rels:
        if len(r) != gens:
            raise ShapeMismatch(f"relation of length {len(r)} for {gens} generators")
    if gens == 0:
        return QuotientPresentation(AbelianGroup(()), (), (), ())
    if not rels:
        raise FreeRankError(f"free rank {gens} in a group expected to be finite")
    D, U, V = smith_normal_form(rels)
    diag = [D[i][i] if i < len(D) else 0 for i in range(gens)]
    free = sum(1 for d in diag if d == 0)
    if free:
        raise FreeRankError(f"free rank {free} in a group expected to be finite")
    keep = tuple(i for i, d in enumerate(diag) if d != 1)
    group = AbelianGroup(tuple(diag[i] for i in keep))
    Vinv = inverse_unimodular(V)
    return QuotientPresentation(group, tuple(map(tuple, V)), tuple(map(tuple, Vinv)), keep)


def group_from_relations(gens: int, rels) -> AbelianGroup:
    """Invariant-factor form of Z^gens / rowspan(rels) (must be finite)."""
    return presentation_from_relations(gens, rels).group


def abelian_structure(elements, mul, identity, key=lambda x: x):
    """Present a finite abelian group given by its elements and product.

    Generators are picked greedily in the given order; each new generator
    contributes the relation "its order modulo the span so far". Returns
    (QuotientPresentation, {key(element): canonical exponent vector}).
    """
    elements = list(elements)
    span = {key(identity): ((), identity)}  # key -> (exponents over gens, element)
    gens = []
    rels = []
    for g in elements:
        if key(g) in span:
            continue
        # smallest k with g^k in span
        k, cur = 1, g
        while key(cur) not in span:
            cur = mul(cur, g)
            k += 1
        v, _ = span[key(cur)]
        ng = len(gens) + 1
        rels = [r + [0] for r in rels]
        rels.append([-x for x in v] + [0] * (ng - 1 - len(v)) + [k])
        gens.append(g)
        new_span = {}
        for kk, (vec, el) in span.items():
            vec = tuple(vec) + (0,) * (ng - 1 - len(vec))
            cur = el
            for j in range(k):
                new_span[key(cur)] = (vec + (j,), cur)
                cur = mul(cur, g)
        span = new_span
    if len(span) != len({key(e) for e in elements} | {key(identity)}):
        raise GroupAxiomError("elements do not form a closed group")
    pres = presentation_from_relations(len(gens), rels)
    table = {k: pres.to_group(list(vec) + [0] * (len(gens) - len(vec))) for k, (vec, _) in span.items()}
    return pres, table, gens


# --------------------------------------------------------------------------
# Finite groups by multiplication table
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class FiniteGroup:
    table: tuple
    identity: int
    inverse: tuple
    labels: tuple = field(default=())

    @classmethod
    def from_table(cls, table, labels=None) -> "FiniteGroup":
        t = tuple(tuple(int(x) for x in row) for row in table)
        n = len(t)
        if any(len(row) != n for row in t):
            raise GroupAxiomError("table is not square")
        if any(not 0 <= x < n for row in t for x in row):
            raise GroupAxiomError("table entry out of range")
        ident = next((e for e in range(n) if all(t[e][a] == a == t[a][e] for a in range(n))), None)
        if ident is None:
            raise GroupAxiomError("no identity element")
        inv = []
        for a in range(n):
            b = next((b for b in range(n) if t[a][b] == ident == t[b][a]), None)
            if b is None:
                raise GroupAxiomError(f"element {a} has no inverse", witness=a)
            inv.append(b)
        for a, b, c in itertools.product(range(n), repeat=3):
            if t[t[a][b]][c] != t[a][t[b][c]]:
                raise GroupAxiomError("table is not associative", witness=(a, b, c))
        labels = tuple(labels) if labels else tuple(str(i) for i in range(n))
        return cls(t, ident, tuple(inv), labels)

    @classmethod
    def cyclic(cls, n: int) -> "FiniteGroup":
        return cls.from_table([[(i + j) % n for j in range(n)] for i in range(n)],
                              labels=["1"] + [f"g^{i}" if i > 1 else "g" for i in range(1, n)])

    @property
    def order(self) -> int:
        return len(self.table)

    def mul(self, a: int, b: int) -> int:
        return self.table[a][b]

    def inv(self, a: int) -> int:
        return self.inverse[a]

    def elements(self) -> range:
        return range(self.order)

    def nonidentity(self) -> list[int]:
        return [g for g in self.elements() if g != self.identity]
