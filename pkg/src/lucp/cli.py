"""Command line entry point: ``lucp <command> --instance FILE`` or ``--builtin NAME``."""
from __future__ import annotations

import argparse
import json
import os
import re
import sys
from pathlib import Path

from . import __version__
from . import crossed as C
from .cohomology import cohomology_group, induced_action
from .errors import LucpError, Undecided, ValidationError
from .ingest import dump_instance, instance_hash, load_instance, serialize
from .instances import (
    build_galois_instance,
    build_twisted_group_algebra_instance,
    c2_sign_cocycle,
    cyclic_group,
)
from .rings import ring_invariants
from .sequence import DEFAULT_LEDGER_CAP, exactness_check

COMMANDS = ("validate", "cohomology", "crossed-product", "sequence-check", "report", "export")
EXIT_PASS, EXIT_FAIL, EXIT_UNDECIDED = 0, 1, 2


def builtin_instance(name: str):
    """galois(p,n) or twisted(p,Cm,+) / twisted(p,C2,-)."""
    m = re.fullmatch(r"galois\((\d+),(\d+)\)", name.replace(" ", ""))
    if m:
        return build_galois_instance(int(m[1]), int(m[2]))
    m = re.fullmatch(r"twisted\((\d+),C(\d+),([+-])\)", name.replace(" ", ""))
    if m:
        p, order, sign = int(m[1]), int(m[2]), m[3]
        if sign == "-":
            if order != 2:
                raise ValidationError("/builtin", "the sign cocycle is only defined on C2")
            return build_twisted_group_algebra_instance(p, cyclic_group(2), c2_sign_cocycle(p))
        return build_twisted_group_algebra_instance(p, cyclic_group(order))
    raise ValidationError("/builtin", f"unknown builtin instance {name!r}")


def _cohomology_section(inst) -> tuple[dict, object]:
    G, Z = inst.G, inst.Z
    gm = induced_action(G, [inst.theta_inv(x) for x in G.elements()], Z)
    out = {
        "unit_group": list(Z.unit_group.invariant_factors),
        "action": {G.labels[x]: [list(row) for row in gm.action[x]] for x in G.elements()},
        "H": {},
    }
    for n in (1, 2, 3):
        H = cohomology_group(gm, n)
        out["H"][str(n)] = {"invariant_factors": list(H.group.invariant_factors), "order": H.order}
    return out, gm


def _crossed_section(inst, gm) -> dict:
    base = C.factor_map_from_instance(inst, gm)
    C.validate_factor_map(base)
    ob = C.obstruction(base)
    H2 = cohomology_group(gm, 2)
    classes = []
    for cls in H2.group.elements():
        fm = C.twist(base, H2.representative(cls))
        ring = C.build_crossed_product(fm).ring
        classes.append({"class": list(cls), "ring": {"mult": ring.mult.tolist(), "E": [list(map(int, e)) for e in ring.E]},
                        "invariants": ring_invariants(ring)})
    return {"base_factor_map_valid": True, "obstruction_trivial": not any(ob.values.reshape(-1)),
            "classes": classes}


def run(command: str, inst, seed: int, cap: int) -> tuple[dict, int]:
    """Build the report bundle for one command; returns (bundle, exit code)."""
    doc = serialize(inst)
    bundle = {
        "schema": 1,
        "command": command,
        "provenance": {"instance": inst.name, "instance_sha256": instance_hash(doc), "tool_version": __version__,
                       "seed": seed, "cap": cap},
    }
    code = EXIT_PASS
    if command == "validate":
        gm = induced_action(inst.G, [inst.theta_inv(x) for x in inst.G.elements()], inst.Z)
        C.validate_factor_map(C.factor_map_from_instance(inst, gm))
        bundle["validate"] = {"ok": True, "dim_R": inst.R.dim, "dim_S": inst.S.dim, "group_order": inst.G.order}
    if command in ("cohomology", "crossed-product", "report"):
        section, gm = _cohomology_section(inst)
        bundle["cohomology"] = section
        if command in ("crossed-product", "report"):
            bundle["crossed_product"] = _crossed_section(inst, gm)
    if command in ("sequence-check", "report"):
        rep = exactness_check(inst, seed=seed, cap=cap)
        bundle["sequence"] = rep.to_json()
        code = {"PASS": EXIT_PASS, "FAIL": EXIT_FAIL, "UNDECIDED": EXIT_UNDECIDED}[rep.verdict]
    if command == "export":
        bundle["instance"] = doc
    return bundle, code


def summary(bundle: dict) -> str:
    lines = [f"{bundle['command']} on {bundle['provenance']['instance']} (seed {bundle['provenance']['seed']})"]
    if "validate" in bundle:
        lines.append("instance is valid")
    if "cohomology" in bundle:
        c = bundle["cohomology"]
        lines.append(f"U(Z) invariant factors {c['unit_group']}")
        for n, h in c["H"].items():
            lines.append(f"H^{n}: order {h['order']}, invariant factors {h['invariant_factors']}")
    if "crossed_product" in bundle:
        for cls in bundle["crossed_product"]["classes"]:
            inv = cls["invariants"]
            lines.append(f"class {cls['class']}: dim {inv['dim']}, field {inv['is_field']}, idempotents {inv['idempotents']}")
    if "sequence" in bundle:
        s = bundle["sequence"]
        for j in s["junctions"]:
            lines.append(f"junction {j['name']}: {j['verdict']}")
        lines.append(f"sequence verdict: {s['verdict']}")
    return "\n".join(lines)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="lucp", description="Crossed products over rings with local units.")
    ap.add_argument("command", choices=COMMANDS)
    src = ap.add_mutually_exclusive_group(required=True)
    src.add_argument("--instance", help="instance JSON file")
    src.add_argument("--builtin", help="builtin instance, e.g. galois(2,2) or twisted(3,C2,-)")
    ap.add_argument("--out", help="directory for the JSON bundle")
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--cap", type=int, default=DEFAULT_LEDGER_CAP, help="ledger size cap")
    args = ap.parse_args(argv)
    try:
        inst = load_instance(args.instance) if args.instance else builtin_instance(args.builtin)
        seed = args.seed if args.seed is not None else inst.seed
        if os.environ.get("LUCP_SEED"):
            seed = int(os.environ["LUCP_SEED"])
        bundle, code = run(args.command, inst, seed, args.cap)
    except ValidationError as exc:
        print(f"validation error at {exc.location or '/'}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except Undecided as exc:
        print(f"undecided: {exc}", file=sys.stderr)
        return EXIT_UNDECIDED
    except (LucpError, OSError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    text = json.dumps(bundle, sort_keys=True, indent=1)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{args.command}.json").write_text(text + "\n")
        (out / f"{args.command}.txt").write_text(summary(bundle) + "\n")
        if args.command == "export":
            dump_instance(inst, out / "instance.json")
    print(summary(bundle))
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
