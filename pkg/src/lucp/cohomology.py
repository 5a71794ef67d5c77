"""Cohomology of a finite group with coefficients in a finite abelian G-module.

Multiplicative groups are handled in additive exponent coordinates, so the
differential is the usual alternating sum and everything reduces to integer
linear algebra through the Smith normal form.

Orientation: in degree 2 the differential is the negative of the usual bar
differential, i.e. (d s)(x,y,z) = s(x,y) + s(xy,z) - xs(y,z) - s(x,yz).
This is the orientation in which the associativity defect of a product
rescaled by s is exactly d s (see ``crossed.obstruction``).  Kernels, images
and the cohomology groups are the same for either orientation.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import kernel as K
from .errors import CapExceeded, NotACocycle, NotAnAction

MAX_DEGREE = 3


@dataclass(frozen=True, eq=False)
class GModule:
    G: K.FiniteGroup
    A: K.AbelianGroup
    action: tuple  # action[x]: integer matrix, row i = image of generator i

    @property
    def rank(self) -> int:
        return self.A.rank

    def act(self, x: int, a) -> tuple:
        M = self.action[x]
        k = self.rank
        return self.A.normalize(sum(int(a[i]) * M[i][j] for i in range(k)) for j in range(k))


def make_gmodule(G: K.FiniteGroup, A: K.AbelianGroup, action) -> GModule:
    """Validate that each x acts by an automorphism and x -> action is a homomorphism."""
    act = tuple(tuple(tuple(int(v) for v in row) for row in np.asarray(M).reshape(A.rank, A.rank)) if A.rank else ()
                for M in action)
    gm = GModule(G, A, act)
    elems = list(A.elements())
    for x in G.elements():
        imgs = {gm.act(x, a) for a in elems}
        if len(imgs) != len(elems):
            raise NotAnAction(f"element {x} does not act bijectively", witness=x)
        for a, b in itertools.product(elems[: min(len(elems), 64)], repeat=2):
            if gm.act(x, A.add(a, b)) != A.add(gm.act(x, a), gm.act(x, b)):
                raise NotAnAction(f"element {x} does not act additively", witness=x)
    for a in elems:
        if gm.act(G.identity, a) != a:
            raise NotAnAction("identity acts nontrivially")
        for x, y in itertools.product(G.elements(), repeat=2):
            if gm.act(x, gm.act(y, a)) != gm.act(G.mul(x, y), a):
                raise NotAnAction("x(y a) != (xy) a", witness=(x, y))
    return gm


def trivial_gmodule(G: K.FiniteGroup, A: K.AbelianGroup) -> GModule:
    return make_gmodule(G, A, [np.eye(A.rank, dtype=np.int64)] * G.order)


def gmodule_from_maps(G: K.FiniteGroup, A: K.AbelianGroup, maps) -> GModule:
    """``maps[x]`` sends an exponent vector to an exponent vector."""
    k = A.rank
    gens = [tuple(int(i == j) for j in range(k)) for i in range(k)]
    action = [np.array([maps[x](g) for g in gens], dtype=np.int64).reshape(k, k) for x in G.elements()]
    gm = make_gmodule(G, A, action)
    for x in G.elements():
        for a in A.elements():
            if gm.act(x, a) != A.normalize(maps[x](a)):
                raise NotAnAction("action is not additive on exponent vectors", witness=(x, a))
    return gm


# --------------------------------------------------------------------------
# cochains
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Cochain:
    degree: int
    values: np.ndarray  # shape (|G|,)*n + (rank,)

    def __call__(self, *args) -> tuple:
        return tuple(int(v) for v in self.values[tuple(args)])

    def key(self) -> bytes:
        return np.ascontiguousarray(self.values).tobytes()

    def __eq__(self, other):
        return isinstance(other, Cochain) and self.degree == other.degree and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash((self.degree, self.key()))


def _empty(gm: GModule, n: int) -> np.ndarray:
    return np.zeros((gm.G.order,) * n + (gm.rank,), dtype=np.int64)


def cochain_from_function(gm: GModule, n: int, f) -> Cochain:
    vals = _empty(gm, n)
    for t in itertools.product(gm.G.elements(), repeat=n):
        vals[t] = gm.A.normalize(f(*t))
    return Cochain(n, vals)


def identity_cochain(gm: GModule, n: int) -> Cochain:
    return Cochain(n, _empty(gm, n))


def is_normalized(gm: GModule, c: Cochain) -> bool:
    one = gm.G.identity
    for t in itertools.product(gm.G.elements(), repeat=c.degree):
        if one in t and any(c(*t)):
            return False
    return True


def add(gm: GModule, a: Cochain, b: Cochain) -> Cochain:
    mods = np.array(gm.A.invariant_factors, dtype=np.int64)
    return Cochain(a.degree, (a.values + b.values) % mods if gm.rank else a.values)


def neg(gm: GModule, a: Cochain) -> Cochain:
    mods = np.array(gm.A.invariant_factors, dtype=np.int64)
    return Cochain(a.degree, (-a.values) % mods if gm.rank else a.values)


def _sign(n: int) -> int:
    return -1 if n == 2 else 1


def differential(gm: GModule, c: Cochain) -> Cochain:
    n = c.degree
    if n > MAX_DEGREE:
        raise CapExceeded(f"differential of degree {n} not supported")
    G, A = gm.G, gm.A
    s = _sign(n)

    def value(*t):
        acc = list(gm.act(t[0], c(*t[1:])))
        for i in range(1, n + 1):
            merged = t[: i - 1] + (G.mul(t[i - 1], t[i]),) + t[i + 1:]
            v = c(*merged)
            sg = -1 if i % 2 else 1
            acc = [a + sg * b for a, b in zip(acc, v)]
        last = c(*t[:n])
        sg = -1 if (n + 1) % 2 else 1
        acc = [s * (a + sg * b) for a, b in zip(acc, last)]
        return A.normalize(acc)

    return cochain_from_function(gm, n + 1, value)


def differential0(gm: GModule, a) -> Cochain:
    """(d a)(x) = x a - a."""
    return cochain_from_function(gm, 1, lambda x: gm.A.sub(gm.act(x, a), a))


def is_cocycle(gm: GModule, c: Cochain) -> bool:
    return not np.any(differential(gm, c).values)


# --------------------------------------------------------------------------
# cohomology via integer lattices
# --------------------------------------------------------------------------


def _tuples(gm: GModule, n: int):
    return list(itertools.product(gm.G.nonidentity(), repeat=n))


def _delta_matrix(gm: GModule, n: int) -> list[list[int]]:
    """Integer matrix of the normalized differential C^n -> C^{n+1} (column convention)."""
    G, k = gm.G, gm.rank
    src = _tuples(gm, n)
    dst = _tuples(gm, n + 1)
    sidx = {t: i for i, t in enumerate(src)}
    s = _sign(n)
    rows = len(dst) * k
    cols = len(src) * k
    M = [[0] * cols for _ in range(rows)]

    def put(row_t, col_t, coeff_mat):
        if col_t not in sidx:
            return  # identity somewhere: normalized cochain vanishes
        ci = sidx[col_t]
        for a in range(k):
            for b in range(k):
                M[row_t * k + a][ci * k + b] += s * coeff_mat[a][b]

    ident = [[int(a == b) for b in range(k)] for a in range(k)]
    minus = [[-v for v in r] for r in ident]
    for ri, t in enumerate(dst):
        if n == 0:
            act = gm.action[t[0]]
            # x a - a, column convention: out_a = sum_b act[b][a] in_b
            for a in range(k):
                for b in range(k):
                    M[ri * k + a][b] += act[b][a] - ident[a][b]
            continue
        act = gm.action[t[0]]
        put(ri, t[1:], [[act[b][a] for b in range(k)] for a in range(k)])
        for i in range(1, n + 1):
            merged = t[: i - 1] + (G.mul(t[i - 1], t[i]),) + t[i + 1:]
            put(ri, merged, minus if i % 2 else ident)
        put(ri, t[:n], minus if (n + 1) % 2 else ident)
    return M


def _diag_moduli(gm: GModule, count: int) -> list[int]:
    return list(gm.A.invariant_factors) * count


def _integer_kernel(A: list[list[int]], ncols: int) -> list[list[int]]:
    if not A:
        return [[int(i == j) for j in range(ncols)] for i in range(ncols)]
    D, U, V = K.smith_normal_form(A)
    r = sum(1 for i in range(min(len(D), ncols)) if D[i][i] != 0)
    return [[V[i][j] for i in range(ncols)] for j in range(r, ncols)]


def _lattice_basis(gens: list[list[int]], n: int):
    """SNF data for the row lattice of ``gens``: basis rows d_i * Vinv_i and V."""
    if not gens:
        return [], [], _identity(n)
    D, U, V = K.smith_normal_form(gens)
    Vinv = K.inverse_unimodular(V)
    ds = [D[i][i] for i in range(min(len(D), n)) if D[i][i] != 0]
    basis = [[ds[i] * Vinv[i][j] for j in range(n)] for i in range(len(ds))]
    return basis, ds, V


def _identity(n):
    return [[int(i == j) for j in range(n)] for i in range(n)]


@dataclass(eq=False)
class CohomologyGroup:
    gm: GModule
    degree: int
    group: K.AbelianGroup
    presentation: K.QuotientPresentation | None
    basis: list          # basis rows of the cocycle lattice (flat normalized coordinates)
    ds: list
    V: list
    tuples: list
    _reps: dict = field(default_factory=dict, repr=False)

    @property
    def order(self) -> int:
        return self.group.order

    def flatten(self, c: Cochain) -> list[int]:
        out = []
        for t in self.tuples:
            out.extend(int(v) for v in c.values[t])
        return out

    def unflatten(self, flat) -> Cochain:
        vals = _empty(self.gm, self.degree)
        k = self.gm.rank
        for i, t in enumerate(self.tuples):
            vals[t] = self.gm.A.normalize(flat[i * k:(i + 1) * k])
        return Cochain(self.degree, vals)

    def class_of(self, c: Cochain) -> tuple:
        if not is_normalized(self.gm, c):
            raise NotACocycle("cochain is not normalized")
        if not is_cocycle(self.gm, c):
            raise NotACocycle(f"not a {self.degree}-cocycle")
        if self.presentation is None:
            return ()
        flat = self.flatten(c)
        n = len(flat)
        y = [sum(flat[i] * self.V[i][j] for i in range(n)) for j in range(len(self.ds))]
        coords = []
        for v, d in zip(y, self.ds):
            if v % d:
                raise NotACocycle("cochain is outside the cocycle lattice")
            coords.append(v // d)
        return self.presentation.to_group(coords)

    def is_trivial(self, c: Cochain) -> bool:
        return not any(self.class_of(c))

    def representative(self, cls) -> Cochain:
        cls = self.group.normalize(cls)
        if cls not in self._reps:
            if self.presentation is None:
                self._reps[cls] = identity_cochain(self.gm, self.degree)
            else:
                x = self.presentation.from_group(cls)
                flat = [sum(x[i] * self.basis[i][j] for i in range(len(x))) for j in range(len(self.tuples) * self.gm.rank)]
                self._reps[cls] = self.unflatten(flat)
        return self._reps[cls]

    def representatives(self) -> list[Cochain]:
        return [self.representative(c) for c in self.group.elements()]


def cohomology_group(gm: GModule, n: int, cap: int = 1 << 14) -> CohomologyGroup:
    """H^n(G, A) on normalized cochains: ker d^n / im d^{n-1}."""
    if not 1 <= n <= MAX_DEGREE:
        raise CapExceeded(f"degree {n} outside 1..{MAX_DEGREE}")
    k = gm.rank
    tuples = _tuples(gm, n)
    N = len(tuples) * k
    if N > cap:
        raise CapExceeded(f"{N} cochain coordinates exceed the cap {cap}")
    if N == 0:
        return CohomologyGroup(gm, n, K.AbelianGroup(()), None, [], [], [], tuples)
    mods_n = _diag_moduli(gm, len(tuples))
    delta = _delta_matrix(gm, n)
    mods_next = _diag_moduli(gm, len(_tuples(gm, n + 1)))
    # cocycle lattice: c with delta c in D Z^{N'}
    aug = [row + [-(mods_next[i] if i == j else 0) for j in range(len(mods_next))] for i, row in enumerate(delta)]
    ker = _integer_kernel(aug, N + len(mods_next))
    gens = [v[:N] for v in ker]
    gens += [[mods_n[i] if i == j else 0 for j in range(N)] for i in range(N)]
    basis, ds, V = _lattice_basis(gens, N)
    if len(ds) != N:
        raise NotACocycle("cocycle lattice is not of full rank")  # pragma: no cover
    # coboundaries plus D Z^N, in basis coordinates
    bgens = [[mods_n[i] if i == j else 0 for j in range(N)] for i in range(N)]
    prev = _delta_matrix(gm, n - 1)
    prev_cols = len(prev[0]) if prev else 0
    for j in range(prev_cols):
        bgens.append([prev[i][j] for i in range(N)])
    rels = []
    for b in bgens:
        y = [sum(b[i] * V[i][j] for i in range(N)) for j in range(N)]
        if any(y[j] % ds[j] for j in range(N)):
            raise NotACocycle("coboundary outside the cocycle lattice")  # pragma: no cover
        rels.append([y[j] // ds[j] for j in range(N)])
    pres = K.presentation_from_relations(N, rels)
    return CohomologyGroup(gm, n, pres.group, pres, basis, ds, V, tuples)


# --------------------------------------------------------------------------
# brute-force oracle
# --------------------------------------------------------------------------


def brute_force_cohomology(gm: GModule, n: int, limit: int = 1 << 20):
    """Enumerate every normalized cochain.

    Returns (cocycles, coboundary set) with cochains as tuples of values on
    the non-identity n-tuples.  Uses its own evaluation of the differential.
    """
    G, A = gm.G, gm.A
    tuples = list(itertools.product(G.nonidentity(), repeat=n))
    elems = list(A.elements())
    if len(elems) ** len(tuples) > limit:
        raise CapExceeded("brute force space too large")

    def ev(table, t):
        if G.identity in t:
            return A.zero()
        return table[t]

    def dcheck(table, deg):
        # plain alternating sum; zero-ness does not depend on orientation
        out = {}
        for t in itertools.product(G.nonidentity(), repeat=deg + 1):
            acc = gm.act(t[0], ev(table, t[1:]))
            for i in range(1, deg + 1):
                m = t[: i - 1] + (G.mul(t[i - 1], t[i]),) + t[i + 1:]
                acc = A.add(acc, A.scale((-1) ** i, ev(table, m)))
            acc = A.add(acc, A.scale((-1) ** (deg + 1), ev(table, t[:deg])))
            out[t] = acc
        return out

    cocycles = []
    for vals in itertools.product(elems, repeat=len(tuples)):
        table = dict(zip(tuples, vals))
        if all(not any(v) for v in dcheck(table, n).values()):
            cocycles.append(tuple(vals))
    cobs = set()
    if n == 1:
        for a in elems:
            cobs.add(tuple(A.sub(gm.act(x, a), a) for (x,) in tuples))
    else:
        prev = list(itertools.product(G.nonidentity(), repeat=n - 1))
        for vals in itertools.product(elems, repeat=len(prev)):
            d = dcheck(dict(zip(prev, vals)), n - 1)
            cobs.add(tuple(d[t] for t in tuples))
    return cocycles, cobs


# --------------------------------------------------------------------------
# the action of G on U(Z) induced by Theta
# --------------------------------------------------------------------------


def induced_action(G: K.FiniteGroup, theta_invs, Z) -> GModule:
    """x.u = alpha_[Theta_x](u), verified to be an action."""
    from .picard import alpha_automorphism

    maps = []
    for x in G.elements():
        table = alpha_automorphism(theta_invs[x], Z)
        maps.append(lambda a, table=table: table[Z.unit_group.normalize(a)])
    return gmodule_from_maps(G, Z.unit_group, maps)
