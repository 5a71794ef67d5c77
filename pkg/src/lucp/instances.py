"""Instances: a ring extension R in S graded by a finite group, plus ledger generators.

The builtin generators produce skew group rings of finite Galois extensions
and twisted group algebras over F_p; both are crossed products
sum_x R u_x with (a u_x)(b u_y) = a x(b) sigma(x, y) u_{xy}.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import kernel as K
from .bimodules import Bimodule, CenterRing, center_ring, subspace_of_extension
from .errors import NotACocycle, SizeCap
from .picard import InvertibleBimodule, from_extension
from .rings import (
    LocalUnitRing,
    RingExtension,
    finite_field,
    frobenius_matrix,
    validate_extension,
    validate_ring,
)


@dataclass(eq=False)
class Instance:
    name: str
    ext: RingExtension
    G: K.FiniteGroup
    theta_cols: list            # per group element: columns of S spanning Theta_x
    pic_generators: list = field(default_factory=list)  # list of Bimodule
    c_generators: list = field(default_factory=list)    # 2-cochain tables: {(x, y): Z-unit matrix}
    caps: dict = field(default_factory=dict)
    seed: int = 0
    source: dict | None = None  # canonical JSON description when known
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def R(self) -> LocalUnitRing:
        return self.ext.R

    @property
    def S(self) -> LocalUnitRing:
        return self.ext.S

    @property
    def p(self) -> int:
        return self.R.p

    @property
    def Z(self) -> CenterRing:
        if "Z" not in self._cache:
            self._cache["Z"] = center_ring(self.R)
        return self._cache["Z"]

    def theta(self, x: int) -> Bimodule:
        key = ("theta", x)
        if key not in self._cache:
            self._cache[key] = subspace_of_extension(self.ext, self.theta_cols[x], f"Theta_{self.G.labels[x]}")[0]
        return self._cache[key]

    def theta_inv(self, x: int) -> InvertibleBimodule:
        key = ("inv", x)
        if key not in self._cache:
            xi = self.G.inv(x)
            self._cache[key] = from_extension(self.ext, self.theta_cols[x], self.theta_cols[xi],
                                              self.theta(x), self.theta(xi))
        return self._cache[key]

    def cap(self, name: str, default: int) -> int:
        return int(self.caps.get(name, default))


def crossed_product_ring(R: LocalUnitRing, G: K.FiniteGroup, auts, sigma) -> tuple[LocalUnitRing, np.ndarray]:
    """Structure constants of sum_x R u_x for commutative R.

    ``auts[x]`` is the matrix of the automorphism x of R, ``sigma[(x, y)]`` an
    element of R.  Basis index of b_i u_x is x * dim R + i.
    """
    n, p, m = R.dim, R.p, G.order
    d = n * m
    mult = np.zeros((d, d, d), dtype=np.int64)
    for x, y in itertools.product(range(m), repeat=2):
        xy = G.mul(x, y)
        s = np.asarray(sigma[(x, y)], dtype=np.int64)
        for i, j in itertools.product(range(n), repeat=2):
            prod = R.mul(R.mul(R.basis(i), auts[x][:, j]), s)
            mult[x * n + i, y * n + j, xy * n:(xy + 1) * n] = prod
    emb = np.zeros((d, n), dtype=np.int64)
    one = G.identity
    emb[one * n:(one + 1) * n, :] = np.eye(n, dtype=np.int64)
    E = [emb @ e % p for e in R.E]
    labels = [f"{R.labels[i] if R.labels else i}*u_{G.labels[x]}" for x in range(m) for i in range(n)]
    return validate_ring(p, mult, E, labels), emb


def _component_cols(n: int, x: int, d: int) -> np.ndarray:
    cols = np.zeros((d, n), dtype=np.int64)
    cols[x * n:(x + 1) * n, :] = np.eye(n, dtype=np.int64)
    return cols


def build_galois_instance(p: int, n: int) -> Instance:
    """Skew group ring of F_{p^n} over F_p with the cyclic Galois group."""
    if p**n > 1 << 10:
        raise SizeCap(f"p^n = {p**n} exceeds 1024")
    if n < 2:
        raise SizeCap("the Galois instance needs n >= 2")
    R, _ = finite_field(p, n)
    G = K.FiniteGroup.cyclic(n)
    frob = frobenius_matrix(R)
    auts = [np.eye(n, dtype=np.int64)]
    for _ in range(1, n):
        auts.append(frob @ auts[-1] % p)
    one = R.E[0]
    sigma = {(x, y): one for x in range(n) for y in range(n)}
    S, emb = crossed_product_ring(R, G, auts, sigma)
    ext = validate_extension(R, S, emb)
    cols = [_component_cols(n, x, S.dim) for x in range(n)]
    return Instance(f"galois({p},{n})", ext, G, cols, caps={}, seed=0)


def cyclic_group(m: int) -> K.FiniteGroup:
    return K.FiniteGroup.cyclic(m)


def check_group_cocycle(G: K.FiniteGroup, p: int, sigma: dict) -> None:
    """Normalized 2-cocycle in F_p^* with trivial action."""
    for x in G.elements():
        if sigma[(G.identity, x)] % p != 1 or sigma[(x, G.identity)] % p != 1:
            raise NotACocycle("cocycle is not normalized", witness=x)
    for x, y, z in itertools.product(G.elements(), repeat=3):
        lhs = sigma[(x, y)] * sigma[(G.mul(x, y), z)]
        rhs = sigma[(y, z)] * sigma[(x, G.mul(y, z))]
        if (lhs - rhs) % p:
            raise NotACocycle("cocycle identity fails", witness=(x, y, z))


def build_twisted_group_algebra_instance(p: int, G: K.FiniteGroup, cocycle: dict | None = None,
                                         name: str | None = None) -> Instance:
    """F_p^sigma[G] with trivial Theta (every Theta_x = R)."""
    R = validate_ring(p, np.ones((1, 1, 1), dtype=np.int64), [np.ones(1, dtype=np.int64)], ["1"])
    sigma = {(x, y): 1 for x in G.elements() for y in G.elements()}
    if cocycle:
        sigma.update({tuple(k): int(v) % p for k, v in cocycle.items()})
    if any(v % p == 0 for v in sigma.values()):
        raise NotACocycle("cocycle takes the value 0")
    check_group_cocycle(G, p, sigma)
    auts = [np.eye(1, dtype=np.int64)] * G.order
    S, emb = crossed_product_ring(R, G, auts, {k: np.array([v]) for k, v in sigma.items()})
    ext = validate_extension(R, S, emb)
    cols = [_component_cols(1, x, S.dim) for x in G.elements()]
    tag = name or f"twisted({p},C{G.order},{'+' if all(v == 1 for v in sigma.values()) else '-'})"
    return Instance(tag, ext, G, cols)


def c2_sign_cocycle(p: int = 3) -> dict:
    """sigma(g, g) = -1 on C2."""
    return {(1, 1): p - 1}
