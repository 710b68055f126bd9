import json
import random

import pytest

from _cli_cases import run_cli, verb_cases, write_inputs
from _factories import random_c2_complex
from ratmodel.burnside import BurnsideElement, idempotent_basis, table_of_marks
from ratmodel.cli import main
from ratmodel.dgmod import homology_dims
from ratmodel.permgrp import group_from_spec


@pytest.fixture(scope="module")
def paths(tmp_path_factory):
    return write_inputs(tmp_path_factory.mktemp("cli"))


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_split_json(capsys):
    code, out, _ = run(capsys, "split", "C2", "--json")
    assert code == 0
    data = json.loads(out)
    assert len(data["idempotents"]) == 2
    assert set(data["checks"].values()) == {"pass"}


def test_marks_tsv_matches_table(capsys):
    code, out, _ = run(capsys, "marks", "S3")
    assert code == 0
    rows = [line.split("\t") for line in out.strip().split("\n")]
    assert len(rows) == 5 and all(len(r) == 5 for r in rows)
    body = [[int(x) for x in r[1:]] for r in rows[1:]]
    assert body == [[6, 0, 0, 0], [3, 1, 0, 0], [2, 0, 2, 0], [1, 1, 1, 1]]
    tom = table_of_marks(group_from_spec("S3"))
    assert body == [[int(x) for x in row] for row in tom.matrix]


def test_skew_dihedral_text(capsys):
    code, out, _ = run(capsys, "skew-dihedral", "--n", "3")
    assert code == 0
    assert out.splitlines()[0] == "iso verified, dim 6"


def test_weyl_and_powers(capsys):
    code, out, _ = run(capsys, "weyl", "S4", "--subgroup", "gens:(0 1 2)", "--json")
    assert code == 0 and json.loads(out)["weyl_order"] == 2
    code, out, _ = run(capsys, "powers", "S3", "--subgroup", "1", "--i", "3", "--json")
    data = json.loads(out)
    assert code == 0 and data["check"] == "pass"
    assert {m["class"]: m["multiplicity"] for m in data["multiplicities"]} == {0: 4, 1: 1}


def test_restrict(capsys):
    code, out, _ = run(capsys, "restrict", "S3", "--subgroup", "gens:(0 1 2)", "--element", '["1", 0, 0, 0]',
                       "--json")
    assert code == 0
    assert json.loads(out)["restriction"] == ["2", "0"]


def test_homology_and_formality(capsys, paths):
    code, out, _ = run(capsys, "homology", paths["complex"], "--json")
    assert code == 0
    assert json.loads(out)["homology"]["0"]["character"] == ["1", "1"]
    assert run(capsys, "formality", paths["formal"])[0] == 0
    code, out, _ = run(capsys, "formality", paths["not_formal"], "--json")
    assert code == 1
    data = json.loads(out)
    assert data["verdict"] is False and data["offending_homs"]


def test_ea_and_morita(capsys, paths):
    code, out, _ = run(capsys, "ea", "C2", "--max-power", "3", "--json")
    data = json.loads(out)
    assert code == 0 and data["hom_dims"][1] == [1, 2, 4, 8]
    code, out, _ = run(capsys, "morita-check", paths["complex"], "--weyl", "C2", "--json")
    assert code == 0 and json.loads(out)["passed"] is True
    code, _, err = run(capsys, "morita-check", paths["complex"], "--weyl", "S3")
    assert code == 2 and "not S3" in err


def test_usage_errors(capsys, paths):
    assert run(capsys, "marks", "Z9")[0] == 2
    assert run(capsys, "ea", "C2")[0] == 2
    assert run(capsys, "nonsense")[0] == 2
    assert run(capsys, "skew-dihedral", "--n", "0")[0] == 2
    assert run(capsys, "powers", "S4", "--subgroup", "0", "--i", "3", "--size-bound", "100")[0] == 2
    assert run(capsys, "box-check", "C2", "--max-power", "-1")[0] == 2
    assert run(capsys, "marks", "S3", "--threads", "0")[0] == 2
    code, _, err = run(capsys, "homology", paths["broken"])
    assert code == 2
    assert err.strip().endswith("broken.json:2:11: malformed JSON (Expecting ',' delimiter)")
    code, _, err = run(capsys, "restrict", "S3", "--subgroup", "0", "--element", "[1,")
    assert code == 2 and "malformed JSON" in err
    code, _, err = run(capsys, "restrict", "S3", "--subgroup", "0", "--element", '["1/0", 0, 0, 0]')
    assert code == 2


def test_order_cap_env(monkeypatch, capsys):
    monkeypatch.setenv("RATMODEL_ORDER_CAP", "10")
    code, _, err = run(capsys, "marks", "S4")
    assert code == 2 and "10" in err
    monkeypatch.setenv("RATMODEL_ORDER_CAP", "lots")
    assert run(capsys, "marks", "S3")[0] == 2
    monkeypatch.delenv("RATMODEL_ORDER_CAP")
    assert run(capsys, "marks", "S4")[0] == 0


def test_version(capsys):
    assert run(capsys, "--version")[0] == 0


def test_complex_json_roundtrip_through_cli(capsys, tmp_path):
    X = random_c2_complex(random.Random(4))
    p = tmp_path / "x.json"
    p.write_text(json.dumps(X.to_json("C2")))
    code, out, _ = run(capsys, "homology", str(p), "--json")
    assert code == 0
    assert {int(n): v["dim"] for n, v in json.loads(out)["homology"].items()} == homology_dims(X)


def test_split_json_roundtrip(capsys):
    G = group_from_spec("S4")
    code, out, _ = run(capsys, "split", "S4", "--json")
    assert code == 0
    got = [BurnsideElement.from_json(G, e["coefficients"]) for e in json.loads(out)["idempotents"]]
    assert got == idempotent_basis(G)


@pytest.mark.parametrize("idx", range(12))
def test_verbs_are_deterministic(paths, idx):
    args = verb_cases(paths)[idx]
    outs = set()
    for seed, threads in [("0", "1"), ("1", "1"), ("2", "4")]:
        for fmt in ([], ["--json"]):
            r = run_cli(args + fmt + ["--threads", threads], hashseed=seed)
            assert r.returncode == 0, r.stderr
            outs.add((tuple(fmt), r.stdout))
    assert len(outs) == 2
