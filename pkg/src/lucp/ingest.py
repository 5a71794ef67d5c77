"""JSON instance files: loading with located errors, canonical serialization, hashing.

Instance layout (all numbers are integers, residues mod p)::

    {"schema": 1, "name": ..., "p": 2,
     "ring": {"mult": [[[...]]], "E": [[...]], "labels": [...]},
     "over_ring": {"mult": ..., "E": ...},
     "embedding": [[...]],                     # dim S rows, dim R columns
     "group": {"table": [[...]], "labels": [...]},
     "theta": [[[...], ...], ...],             # per group element, basis vectors of Theta_x in S
     "pic_generators": [{"left": ..., "right": ..., "label": ...}],
     "c_generators": [[{"x": 1, "y": 1, "unit": [[...]]}, ...]],
     "caps": {}, "seed": 0}
"""
from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from . import kernel as K
from .bimodules import make_bimodule
from .errors import (
    BimoduleError,
    GroupAxiomError,
    LucpError,
    NotIdempotent,
    ParseError,
    RingValidationError,
    SizeCap,
    ValidationError,
)
from .instances import Instance
from .picard import verify_inv_element
from .rings import validate_extension, validate_ring

SCHEMA = 1
MAX_DIM = 64
MAX_BYTES = 1 << 24


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def instance_hash(doc: dict) -> str:
    return hashlib.sha256(canonical_json(doc).encode()).hexdigest()


def _ints(x):
    return [int(v) for v in x]


def _ring_json(ring) -> dict:
    d = {"mult": ring.mult.tolist(), "E": [_ints(e) for e in ring.E]}
    if ring.labels:
        d["labels"] = list(ring.labels)
    return d


def serialize(inst: Instance) -> dict:
    """Canonical JSON description of an instance."""
    G, p = inst.G, inst.p
    doc = {
        "schema": SCHEMA,
        "name": inst.name,
        "p": p,
        "ring": _ring_json(inst.R),
        "over_ring": _ring_json(inst.S),
        "embedding": inst.ext.emb.tolist(),
        "group": {"table": [list(r) for r in G.table], "labels": list(G.labels)},
        "theta": [[_ints(c) for c in (inst.theta_cols[x] % p).T] for x in G.elements()],
        "pic_generators": [{"left": M.left.tolist(), "right": M.right.tolist(), "label": M.label}
                           for M in inst.pic_generators],
        "c_generators": [[{"x": int(x), "y": int(y), "unit": np.asarray(u).tolist()}
                          for (x, y), u in sorted(t.items())] for t in inst.c_generators],
        "caps": {k: int(v) for k, v in sorted(inst.caps.items())},
        "seed": int(inst.seed),
    }
    return doc


# --------------------------------------------------------------------------
# loading
# --------------------------------------------------------------------------


def _require(doc: dict, key: str, where: str):
    if not isinstance(doc, dict) or key not in doc:
        raise ValidationError(f"{where}/{key}", "missing field")
    return doc[key]


def _int_array(x, where: str, ndim: int) -> np.ndarray:
    def check(v, path, depth):
        if depth == 0:
            if isinstance(v, bool) or not isinstance(v, int):
                raise ValidationError(path, f"expected an integer, got {type(v).__name__}")
            return
        if not isinstance(v, list):
            raise ValidationError(path, "expected a list")
        for i, w in enumerate(v):
            check(w, f"{path}/{i}", depth - 1)

    check(x, where, ndim)
    try:
        a = np.array(x, dtype=np.int64)
    except ValueError:
        raise ValidationError(where, "ragged array") from None
    if a.ndim != ndim:
        raise ValidationError(where, f"expected {ndim} dimensions, got {a.ndim}")
    return a


def _load_ring(doc: dict, where: str, p: int):
    block = _require(doc, where.strip("/"), "")
    mult = _int_array(_require(block, "mult", where), f"{where}/mult", 3)
    n = mult.shape[0]
    if n > MAX_DIM:
        raise SizeCap(f"{where}: dimension {n} exceeds {MAX_DIM}")
    if mult.shape != (n, n, n):
        raise ValidationError(f"{where}/mult", f"structure tensor has shape {mult.shape}")
    E = _require(block, "E", where)
    if not isinstance(E, list) or not E:
        raise ValidationError(f"{where}/E", "expected a non-empty list of local units")
    units = []
    for i, e in enumerate(E):
        v = _int_array(e, f"{where}/E/{i}", 1)
        if v.shape != (n,):
            raise ValidationError(f"{where}/E/{i}", f"expected length {n}")
        units.append(v)
    labels = block.get("labels", [])
    try:
        return validate_ring(p, mult, units, labels)
    except NotIdempotent as exc:
        raise ValidationError(f"{where}/E/{exc.witness}", str(exc), exc.witness) from None
    except RingValidationError as exc:
        loc = f"{where}/E" if "unit" in str(exc) else f"{where}/mult"
        raise ValidationError(loc, str(exc), exc.witness) from None


def _is_prime(p: int) -> bool:
    return p >= 2 and all(p % d for d in range(2, int(p**0.5) + 1))


def parse_instance(doc: dict) -> Instance:
    if not isinstance(doc, dict):
        raise ValidationError("", "instance must be a JSON object")
    schema = _require(doc, "schema", "")
    if schema != SCHEMA:
        raise ValidationError("/schema", f"unsupported schema {schema!r}")
    p = _require(doc, "p", "")
    if isinstance(p, bool) or not isinstance(p, int) or not _is_prime(p):
        raise ValidationError("/p", "p must be a prime integer")
    R = _load_ring(doc, "/ring", p)
    S = _load_ring(doc, "/over_ring", p)
    emb = _int_array(_require(doc, "embedding", ""), "/embedding", 2)
    try:
        ext = validate_extension(R, S, emb)
    except LucpError as exc:
        raise ValidationError("/embedding", str(exc), exc.witness) from None
    gblock = _require(doc, "group", "")
    table = _int_array(_require(gblock, "table", "/group"), "/group/table", 2)
    try:
        G = K.FiniteGroup.from_table(table.tolist(), gblock.get("labels"))
    except GroupAxiomError as exc:
        raise ValidationError("/group/table", str(exc), exc.witness) from None
    theta = _require(doc, "theta", "")
    if not isinstance(theta, list):
        raise ValidationError("/theta", "expected a list")
    cols = []
    for x in G.elements():
        if x >= len(theta):
            raise ValidationError(f"/theta/{x}", f"missing Theta for group element {G.labels[x]}")
        B = _int_array(theta[x], f"/theta/{x}", 2)
        if B.ndim != 2 or B.shape[1] != S.dim:
            raise ValidationError(f"/theta/{x}", f"basis vectors must have length {S.dim}")
        cols.append(B.T % p)
    if len(theta) > G.order:
        raise ValidationError(f"/theta/{G.order}", "more Theta entries than group elements")
    stacked = np.concatenate(cols, axis=1)
    if stacked.shape[1] != S.dim or K.rank(stacked, p) != S.dim:
        raise ValidationError("/theta", "the Theta_x do not form a direct sum decomposition of S")
    inst = Instance(str(doc.get("name", "instance")), ext, G, cols)
    for x in G.elements():
        try:
            inst.theta(x)
        except BimoduleError as exc:
            raise ValidationError(f"/theta/{x}", str(exc), exc.witness) from None
    for x in G.elements():
        try:
            verify_inv_element(ext, cols[x], cols[G.inv(x)])
        except LucpError as exc:
            raise ValidationError(f"/theta/{x}", f"Theta_x Theta_x^-1 check failed: {exc}", exc.witness) from None
        for y in G.elements():
            prods = [S.mul(cols[x][:, a], cols[y][:, b]) for a in range(cols[x].shape[1]) for b in range(cols[y].shape[1])]
            span = K.row_basis(np.stack(prods), p)
            if not K.same_span(span, cols[G.mul(x, y)].T, p):
                raise ValidationError(f"/theta/{G.mul(x, y)}", f"Theta_x Theta_y differs from Theta_xy for x={x}, y={y}")
    for i, gen in enumerate(doc.get("pic_generators", [])):
        where = f"/pic_generators/{i}"
        left = _int_array(_require(gen, "left", where), f"{where}/left", 3)
        right = _int_array(_require(gen, "right", where), f"{where}/right", 3)
        try:
            inst.pic_generators.append(make_bimodule(R, left, right, gen.get("label", f"P{i}")))
        except LucpError as exc:
            raise ValidationError(where, str(exc), exc.witness) from None
    for i, gen in enumerate(doc.get("c_generators", [])):
        table_c = {}
        for j, entry in enumerate(gen):
            where = f"/c_generators/{i}/{j}"
            x, y = _require(entry, "x", where), _require(entry, "y", where)
            u = _int_array(_require(entry, "unit", where), f"{where}/unit", 2)
            if not inst.Z.is_unit(u % p):
                raise ValidationError(f"{where}/unit", "not a unit of End(R)")
            table_c[(int(x), int(y))] = u % p
        inst.c_generators.append(table_c)
    caps = doc.get("caps", {})
    if not isinstance(caps, dict) or any(isinstance(v, bool) or not isinstance(v, int) for v in caps.values()):
        raise ValidationError("/caps", "caps must map names to integers")
    inst.caps = dict(caps)
    seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ValidationError("/seed", "seed must be a non-negative integer")
    inst.seed = seed
    inst.source = doc
    return inst


def loads_instance(text: str) -> Instance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return parse_instance(doc)


def load_instance(path) -> Instance:
    path = Path(path)
    if path.stat().st_size > MAX_BYTES:
        raise SizeCap(f"{path} is larger than {MAX_BYTES} bytes")
    return loads_instance(path.read_text())


def dump_instance(inst: Instance, path) -> str:
    text = json.dumps(serialize(inst), sort_keys=True, indent=1)
    Path(path).write_text(text + "\n")
    return text
