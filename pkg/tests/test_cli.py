import io
import json

import pytest

from cohlab import cli, corpus
from cohlab.definability import EquivariantFamily
from cohlab.logic import Context
from cohlab.models import enumerate_models


def call(*argv):
    buf = io.StringIO()
    code = cli.run(list(argv), out=buf)
    return code, buf.getvalue()


def call_json(*argv):
    code, text = call(*argv, "--format", "json")
    return code, json.loads(text)


def test_check_bundled_theory():
    code, rep = call_json("check", "groups")
    assert code == 0 and rep["status"] == "ok"
    assert rep["schema"] == "cohlab-report/1"


def test_json_is_sorted_and_echoes_config():
    code, text = call("models", "posets", "-n", "3", "--format", "json")
    data = json.loads(text)
    assert text == json.dumps(data, sort_keys=True, indent=2) + "\n"
    assert data["config"]["n"] == 3 and "cache_dir" not in data["config"]


@pytest.mark.parametrize("sequent, code, status", [
    ("[x:G] true |- mul(x, inv(x)) = e", 0, "pass"),
    ("[x:G] true |- x = e", 1, "fail"),
])
def test_prove_exit_codes(sequent, code, status):
    got, rep = call_json("prove", "groups", sequent)
    assert (got, rep["status"]) == (code, status)


def test_prove_axiom_instance():
    code, rep = call_json("prove", "abelian_groups", "[x:G, y:G] true |- add(x, y) = add(y, x)")
    assert code == 0 and rep["status"] == "pass"


def test_prove_commutativity_of_groups_is_unknown():
    code, rep = call_json("prove", "groups", "[x:G, y:G] true |- mul(x, y) = mul(y, x)")
    # every group of order below six is abelian, so no small countermodel exists
    assert code == 2 and rep["status"] == "unknown"


def test_input_errors(tmp_path):
    bad = tmp_path / "bad.thy"
    bad.write_text("theory bad\nsort X\nrel P : X\naxiom [x:X] true |- not P(x)\n")
    code, out = call("check", str(bad))
    assert code == 3 and out == ""
    code, rep = call_json("check", str(bad))
    assert code == 3 and rep["status"] == "input-error" and "4" in rep["error"]
    assert call("check", str(tmp_path / "missing.thy"))[0] == 3
    assert call("diagram", "groups", "--model", "99", "-n", "2")[0] == 3
    assert call("check", "groups", "-n", "0")[0] == 3
    assert call("prove", "groups", "[x:G] true |- frob(x) = x")[0] == 3


def test_theory_file_on_disk(tmp_path):
    p = tmp_path / "t.thy"
    p.write_text("theory t\nsort X\nrel P : X\naxiom [x:X] true |- P(x)\n")
    assert call("check", str(p))[0] == 0
    code, rep = call_json("models", str(p), "-n", "3")
    assert code == 0


@pytest.mark.parametrize("argv", [
    ("morleyize", "posets"),
    ("diagram", "groups", "--model", "1", "-n", "2"),
    ("copower", "pointed_sets"),
    ("spectrum", "pointed_sets", "-n", "2", "--budget", "1"),
    ("spectrum", "pointed_sets", "-n", "2", "--budget", "1", "--dot"),
])
def test_constructions_succeed(argv):
    code, out = call(*argv)
    assert code == 0 and out.strip()


def test_compare_identity_and_failures(tmp_path):
    ident = tmp_path / "id.json"
    ident.write_text(json.dumps({"source": "groups", "target": "groups", "identity": True}))
    code, rep = call_json("compare", str(ident), "-n", "3", "--depth", "2")
    assert code == 0 and rep["status"] == "pass"
    quot = tmp_path / "q.json"
    quot.write_text(json.dumps({
        "source": {"text": "theory predicate\nsort X\nrel P : X\n"},
        "target": {"text": "theory predicate_total\nsort X\nrel P : X\naxiom [x:X] true |- P(x)\n"},
        "sorts": {"X": "X"},
    }))
    code, rep = call_json("compare", str(quot), "-n", "3", "--depth", "2")
    assert code == 1 and rep["status"] == "fail"
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"source": "groups", "target": "nowhere"}))
    assert call("compare", str(bad))[0] == 3


def test_isotropy_and_local():
    code, out = call("isotropy", "abelian_groups", "-n", "3", "--model", "2", "--depth", "2")
    assert code == 0 and "normality: pass" in out
    code, rep = call_json("local", "groups", "-n", "2", "--model", "1")
    assert code == 0 and rep["status"] == "pass"


def test_closure_labels():
    # the unit of Z2 must go to the unit of the target, so exactly one target label works
    codes = [call("closure", "abelian_groups", "-n", "4", "--model", "1", "--label", "k0=1",
                  "--target", "3", "--target-label", f"k0={a}")[0] for a in range(4)]
    assert sorted(codes) == [0, 1, 1, 1]
    assert call("closure", "groups", "-n", "2", "--model", "1", "--label", "oops", "--target", "1")[0] == 3


def test_definable_from_family_file(tmp_path):
    mc = enumerate_models(corpus.theory("groups"), 4)
    ctx = Context((("x0", "G"),))
    fam = EquivariantFamily.from_function(mc, ctx, lambda M: {(M.apply("mul", y, y),) for y in range(M.sizes["G"])})
    p = tmp_path / "fam.json"
    p.write_text(json.dumps(fam.to_json()))
    code, out = call("definable", "groups", str(p), "--depth", "2")
    assert code == 0 and out.strip() == "[x0:G] exists y:G. mul(y, y) = x0"
    code, out = call("definable", "groups", str(p), "--depth", "1")
    assert code == 2
