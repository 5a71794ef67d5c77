import copy
import json

import pytest

from lucp import cli
from lucp.errors import ParseError, SizeCap, ValidationError
from lucp.ingest import canonical_json, dump_instance, instance_hash, load_instance, loads_instance, serialize

BUILTINS = ["galois(2,2)", "galois(3,2)", "galois(2,3)", "twisted(3,C2,+)", "twisted(3,C2,-)", "twisted(3,C3,+)"]


@pytest.fixture(scope="module")
def docs():
    return {name: serialize(cli.builtin_instance(name)) for name in BUILTINS}


@pytest.mark.parametrize("name", BUILTINS)
def test_round_trip(docs, name):
    doc = docs[name]
    again = serialize(loads_instance(json.dumps(doc)))
    assert canonical_json(again) == canonical_json(doc)
    assert instance_hash(again) == instance_hash(doc)


def test_dump_and_load(tmp_path, docs):
    inst = cli.builtin_instance("twisted(3,C2,-)")
    path = tmp_path / "x.json"
    dump_instance(inst, path)
    assert canonical_json(serialize(load_instance(path))) == canonical_json(docs["twisted(3,C2,-)"])


def _located(doc):
    with pytest.raises(ValidationError) as exc:
        loads_instance(json.dumps(doc))
    return exc.value.location


def test_bad_local_unit_location(docs):
    doc = copy.deepcopy(docs["twisted(3,C2,+)"])
    doc["over_ring"]["E"].append([2, 0])
    assert _located(doc) == "/over_ring/E/1"


def test_non_integer_entry(docs):
    doc = copy.deepcopy(docs["galois(2,2)"])
    doc["ring"]["E"][0][1] = 0.5
    assert _located(doc) == "/ring/E/0/1"


def test_missing_theta(docs):
    doc = copy.deepcopy(docs["galois(2,2)"])
    doc["theta"].pop()
    assert _located(doc) == "/theta/1"


def test_theta_not_a_direct_sum(docs):
    doc = copy.deepcopy(docs["galois(2,2)"])
    doc["theta"][1] = doc["theta"][0]
    assert _located(doc) == "/theta"


def test_bad_group_and_prime(docs):
    doc = copy.deepcopy(docs["twisted(3,C2,+)"])
    doc["group"]["table"] = [[0, 1], [1, 1]]
    assert _located(doc) == "/group/table"
    doc = copy.deepcopy(docs["twisted(3,C2,+)"])
    doc["p"] = 4
    assert _located(doc) == "/p"


def test_bad_embedding(docs):
    doc = copy.deepcopy(docs["twisted(3,C2,+)"])
    doc["embedding"] = [[2], [0]]
    assert _located(doc) == "/embedding"


def test_bad_c_generator(docs):
    doc = copy.deepcopy(docs["twisted(3,C2,+)"])
    doc["c_generators"] = [[{"x": 1, "y": 1, "unit": [[0]]}]]
    assert _located(doc) == "/c_generators/0/0/unit"


def test_invalid_json_and_size(tmp_path, monkeypatch):
    with pytest.raises(ParseError):
        loads_instance("{not json")
    big = tmp_path / "big.json"
    big.write_text("{}")
    monkeypatch.setattr("lucp.ingest.MAX_BYTES", 1)
    with pytest.raises(SizeCap):
        load_instance(big)


def test_exit_codes(tmp_path, docs, capsys):
    good = tmp_path / "good.json"
    good.write_text(json.dumps(docs["galois(2,2)"]))
    assert cli.main(["sequence-check", "--instance", str(good)]) == 0
    bad_doc = copy.deepcopy(docs["galois(2,2)"])
    bad_doc["ring"]["E"][0] = [0, 1]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(bad_doc))
    assert cli.main(["validate", "--instance", str(bad)]) == 1
    assert "/ring/E/0" in capsys.readouterr().err
    assert cli.main(["sequence-check", "--builtin", "twisted(3,C2,+)", "--cap", "1"]) == 2
    assert cli.main(["validate", "--instance", str(tmp_path / "missing.json")]) == 1


def test_cohomology_command(tmp_path):
    assert cli.main(["cohomology", "--builtin", "twisted(3,C2,+)", "--out", str(tmp_path)]) == 0
    bundle = json.loads((tmp_path / "cohomology.json").read_text())
    assert bundle["schema"] == 1
    assert bundle["cohomology"]["H"]["2"]["invariant_factors"] == [2]
    assert (tmp_path / "cohomology.txt").read_text().startswith("cohomology on twisted(3,C2,+)")


def test_crossed_product_command():
    bundle, code = cli.run("crossed-product", cli.builtin_instance("twisted(3,C2,+)"), 0, 64)
    assert code == 0
    fields = sorted(c["invariants"]["is_field"] for c in bundle["crossed_product"]["classes"])
    assert fields == [False, True]


def test_export_writes_instance(tmp_path):
    assert cli.main(["export", "--builtin", "galois(2,2)", "--out", str(tmp_path)]) == 0
    inst = load_instance(tmp_path / "instance.json")
    assert inst.name == "galois(2,2)"


def test_unknown_builtin():
    with pytest.raises(ValidationError):
        cli.builtin_instance("galois(2)")


def test_report_is_deterministic(tmp_path, monkeypatch):
    inst = cli.builtin_instance("twisted(3,C2,-)")
    a, _ = cli.run("report", inst, 5, 64)
    b, _ = cli.run("report", cli.builtin_instance("twisted(3,C2,-)"), 5, 64)
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
    monkeypatch.setenv("LUCP_SEED", "9")
    assert cli.main(["sequence-check", "--builtin", "galois(2,2)", "--out", str(tmp_path)]) == 0
    assert json.loads((tmp_path / "sequence-check.json").read_text())["provenance"]["seed"] == 9
