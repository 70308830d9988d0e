import json
import shutil
from pathlib import Path

import jsonschema
import pytest

import sfgkat
from sfgkat.cli import main
from sfgkat.config import ATOM_CAP_ENV

SCHEMAS = Path(sfgkat.__file__).parent / "schemas"
CORPUS = Path(sfgkat.__file__).parent / "corpus"
PROGRAMS = Path(__file__).resolve().parent.parent / "programs"
HEADER = "tests: t;\nactions: p, q;\n"


@pytest.fixture(autouse=True)
def _restore_cap(monkeypatch):
    # --max-tests writes the environment variable; keep it local to each test
    monkeypatch.delenv(ATOM_CAP_ENV, raising=False)


def schema(name):
    return json.loads((SCHEMAS / f"{name}.schema.json").read_text())


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


# check


def test_check_diverging_loop_lang(tmp_path, capsys):
    a, b = write(tmp_path, "a.sf", HEADER + "p *[1] q"), write(tmp_path, "b.sf", HEADER + "0")
    assert run(capsys, "check", a, b, "--semantics", "lang")[0] == 0


def test_check_diverging_loop_bisim(tmp_path, capsys):
    a, b = write(tmp_path, "a.sf", HEADER + "p *[1] q"), write(tmp_path, "b.sf", HEADER + "0")
    code, out, _ = run(capsys, "check", a, b)
    assert code == 1
    assert "reject-vs-step" in out


def test_check_same_file(tmp_path, capsys):
    a = write(tmp_path, "a.sf", HEADER + "p")
    for sem in ("bisim", "lang"):
        assert run(capsys, "check", a, a, "--semantics", sem)[0] == 0


def test_check_json_verdicts_validate(tmp_path, capsys):
    a, b = write(tmp_path, "a.sf", HEADER + "p . q"), write(tmp_path, "b.sf", HEADER + "p . (q +[t] p)")
    for sem in ("bisim", "lang"):
        code, out, _ = run(capsys, "check", a, b, "--semantics", sem, "--format", "json")
        assert code == 1
        jsonschema.validate(json.loads(out), schema("verdict"))
    code, out, _ = run(capsys, "check", a, a, "--format", "json")
    assert code == 0
    jsonschema.validate(json.loads(out), schema("verdict"))


def test_check_mismatched_headers(tmp_path, capsys):
    a = write(tmp_path, "a.sf", HEADER + "p")
    b = write(tmp_path, "b.sf", "tests: t, s;\nactions: p, q;\np")
    code, _, err = run(capsys, "check", a, b)
    assert code == 2
    assert "mismatched headers" in err


def test_check_headerless_files_share_a_universe(tmp_path, capsys):
    a, b = write(tmp_path, "a.sf", "p +[t] q"), write(tmp_path, "b.sf", "q +[!t] p")
    assert run(capsys, "check", a, b)[0] == 0


def test_check_parse_error(tmp_path, capsys):
    a, b = write(tmp_path, "a.sf", HEADER + "p +[t] (q"), write(tmp_path, "b.sf", HEADER + "p")
    code, _, err = run(capsys, "check", a, b)
    assert code == 2
    assert "a.sf:3:10:" in err


def test_check_gkat_and_star(tmp_path, capsys):
    g1 = write(tmp_path, "a.gkat", HEADER + "0")
    g2 = write(tmp_path, "b.gkat", HEADER + "p . 0")
    assert run(capsys, "check", g1, g2)[0] == 1
    assert run(capsys, "check", g1, g2, "--semantics", "lang")[0] == 0
    s1 = write(tmp_path, "a.star", HEADER + "a0.p + a1.p")
    s2 = write(tmp_path, "b.star", HEADER + "a1.p + a0.p")
    assert run(capsys, "check", s1, s2)[0] == 0
    assert run(capsys, "check", s1, s2, "--semantics", "lang")[0] == 2


def test_fizzbuzz_programs(capsys):
    a, b = str(PROGRAMS / "fizzbuzz1.sf"), str(PROGRAMS / "fizzbuzz2.sf")
    assert run(capsys, "check", a, b)[0] == 0
    assert run(capsys, "check", a, b, "--semantics", "lang")[0] == 0


def test_missing_file(capsys):
    assert run(capsys, "check", "/nonexistent.sf", "/nonexistent.sf")[0] == 2


def test_bad_subcommand(capsys):
    assert run(capsys, "frobnicate")[0] == 2


# translate and prune


def test_translate_to_star(tmp_path, capsys):
    a = write(tmp_path, "a.sf", HEADER + "p")
    code, out, _ = run(capsys, "translate", a, "--to", "star")
    assert code == 0
    assert out.strip().splitlines()[-1] == "a0.p + a1.p"


def test_translate_round_trip_verified(tmp_path, capsys):
    a = write(tmp_path, "a.sf", HEADER + "p *[t] q")
    code, out, err = run(capsys, "translate", a, "--to", "star", "--verify")
    assert code == 0 and "verified" in err
    b = write(tmp_path, "b.star", out)
    code, out, _ = run(capsys, "translate", b, "--to", "skipfree", "--verify", "--format", "json")
    assert code == 0
    obj = json.loads(out)
    assert obj["verified"] is True
    jsonschema.validate(obj, schema("expression"))


def test_translate_nondeterministic_star(tmp_path, capsys):
    a = write(tmp_path, "a.star", HEADER + "a0.p + a0.q")
    code, _, err = run(capsys, "translate", a, "--to", "skipfree")
    assert code == 2
    assert "not separated" in err


def test_prune(tmp_path, capsys):
    a = write(tmp_path, "a.sf", HEADER + "p . (q . 0)")
    code, out, _ = run(capsys, "prune", a)
    assert (code, out) == (0, "0\n")
    code, out, _ = run(capsys, "prune", a, "--format", "json")
    jsonschema.validate(json.loads(out), schema("expression"))


# automaton


def test_automaton_json_and_dot(tmp_path, capsys):
    a = write(tmp_path, "a.sf", HEADER + "p *[t] q")
    code, out, _ = run(capsys, "automaton", a)
    assert code == 0
    obj = json.loads(out)
    jsonschema.validate(obj, schema("automaton"))
    assert obj["kind"] == "skipfree"
    code, out, _ = run(capsys, "automaton", a, "--format", "dot")
    assert out.startswith("digraph")


def test_automaton_prune(tmp_path, capsys):
    a = write(tmp_path, "a.sf", HEADER + "p *[1] q")
    code, out, _ = run(capsys, "automaton", a, "--prune")
    assert json.loads(out)["transitions"] == []


def test_max_tests_cap(tmp_path, capsys):
    a = write(tmp_path, "a.sf", "tests: t, s, u;\nactions: p;\np")
    assert run(capsys, "--max-tests", "2", "automaton", a)[0] == 2
    assert run(capsys, "--max-tests", "3", "automaton", a)[0] == 0


# solve


def test_solve_star_expression(tmp_path, capsys):
    a = write(tmp_path, "a.star", HEADER + "a0.p * a1.q")
    code, out, _ = run(capsys, "solve", a, "--format", "json")
    assert code == 0
    obj = json.loads(out)
    jsonschema.validate(obj, schema("solution"))
    assert all(s["verified"] for s in obj["solutions"])


def test_solve_lts_json_with_labelling(tmp_path, capsys):
    lts = {
        "kind": "lts",
        "tests": ["t"],
        "actions": ["p"],
        "states": [{"id": 0, "label": "x"}],
        "start": 0,
        "transitions": [{"from": 0, "atoms": [0], "action": "p", "to": 0}, {"from": 0, "atoms": [1], "action": "p", "to": "accept"}],
    }
    a = write(tmp_path, "l.json", json.dumps(lts))
    empty = write(tmp_path, "none.json", json.dumps({"entries": []}))
    code, out, _ = run(capsys, "solve", a, "--labelling", empty)
    assert code == 1 and "no body loops" in out
    loop = write(tmp_path, "loop.json", json.dumps({"entries": [{"from": 0, "atom": 0, "action": "p", "to": 0}]}))
    code, out, _ = run(capsys, "solve", a, "--labelling", loop)
    assert code == 0
    assert run(capsys, "solve", a)[0] == 0


def test_solve_malformed_labelling(tmp_path, capsys):
    a = write(tmp_path, "a.star", HEADER + "a0.p")
    bad = write(tmp_path, "bad.json", "{}")
    assert run(capsys, "solve", a, "--labelling", bad)[0] == 2


# prove


def test_prove_corpus(capsys):
    for path in sorted(CORPUS.glob("*.json")):
        code, out, _ = run(capsys, "prove", str(path), "--format", "json")
        assert code == 0, path.name
        jsonschema.validate(json.loads(out), schema("prove-result"))


def test_corpus_validates_against_script_schema():
    for path in sorted(CORPUS.glob("*.json")):
        jsonschema.validate(json.loads(path.read_text()), schema("proof-script"))


def test_prove_rejected(tmp_path, capsys):
    data = json.loads((CORPUS / "loop-into-zero.json").read_text())
    data["system"] = "skipfree-bisim"
    data["steps"][0]["premise"]["system"] = "skipfree-bisim"
    path = write(tmp_path, "s.json", json.dumps(data))
    code, out, _ = run(capsys, "prove", path)
    assert code == 1
    assert out.startswith("rejected")


def test_prove_invalid_json(tmp_path, capsys):
    assert run(capsys, "prove", write(tmp_path, "s.json", "{"))[0] == 2
    assert run(capsys, "prove", write(tmp_path, "t.json", '{"system": "skipfree-bisim"}'))[0] == 2


def test_prove_copied_corpus_file(tmp_path, capsys):
    dst = tmp_path / "copy.json"
    shutil.copy(CORPUS / "guarded-loop-body.json", dst)
    assert run(capsys, "prove", str(dst))[1].strip() == "ok"


# fuzz


def test_fuzz_is_deterministic(capsys):
    code1, out1, _ = run(capsys, "fuzz", "--seed", "7", "--count", "100")
    code2, out2, _ = run(capsys, "fuzz", "--seed", "7", "--count", "100")
    assert out1 == out2
    assert code1 == code2 == 0
    report = json.loads(out1)
    jsonschema.validate(report, schema("fuzz-report"))
    assert report["first_discrepancy"] is None


def test_fuzz_single_check_text(capsys):
    code, out, _ = run(capsys, "fuzz", "--check", "pruning", "--count", "5", "--format", "text")
    assert code == 0
    assert out.startswith("pruning")


def test_fuzz_unknown_check(capsys):
    assert run(capsys, "fuzz", "--check", "nope")[0] == 2
