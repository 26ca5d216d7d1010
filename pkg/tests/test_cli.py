import json

import pytest

from takiff.algebra import builtin, spec_to_json
from takiff.cli import main

A1 = '{"kind":"A","flow":0,"n":"1","tn":"1/3"}'
A2 = '{"kind":"A","flow":0,"n":"1/2","tn":"1/6"}'


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_verma_multiplicities_csv(capsys):
    code, out, _ = run(capsys, "verma", "--cutoff", "2", "--multiplicities")
    assert code == 0
    rows = out.splitlines()
    assert rows[0] == "grade,n_offset,dimension"
    assert "2,0,56" in rows
    assert sum(int(r.split(",")[2]) for r in rows[1:] if r.startswith("1,")) == 32


def test_verma_json_and_singular(capsys):
    code, out, _ = run(capsys, "verma", "--cutoff", "1", "--singular",
                       "--weight", '{"n":"2/3","e":"1/5","tn":"0","te":"0"}')
    d = json.loads(out)
    assert code == 0 and d["grade_dims"] == [4, 32]
    assert d["singular"][0]["singular"] == [[["tpsi-_0 |v>", "1"]]]


def test_verlinde_atypical_pair(capsys):
    code, out, _ = run(capsys, "verlinde", "--a", A1, "--b", A2)
    d = json.loads(out)
    assert code == 0 and d["status"] == "Grothendieck"
    assert d["terms"] == [{"coeff": 1, "kind": "A", "n": "3/2", "e": "0", "tn": "1/2", "flow": 0}]
    assert d["delta_trace"] and len(d["delta_trace"][0]["constraints"]) == 4


def test_fusion_status_tags(capsys):
    _, out, _ = run(capsys, "fusion", "--a", A1, "--b", A2)
    assert json.loads(out)["status"] == "deduced"
    flowed = A2.replace('"flow":0', '"flow":1')
    _, out, _ = run(capsys, "fusion", "--a", A1, "--b", flowed)
    d = json.loads(out)
    assert d["status"] == "conjectural-per-paper" and d["summands"][0]["flow"] == 1


def test_malformed_json_is_usage_error(capsys):
    code, out, err = run(capsys, "verlinde", "--a", '{"kind":"A",', "--b", A2)
    assert code == 2 and not out
    assert "line 1 column 13" in err


def test_bad_label_is_usage_error(capsys):
    code, _, err = run(capsys, "verlinde", "--a", '{"kind":"S","n":"0","e":"0"}', "--b", A2)
    assert code == 2 and "bad class label" in err


def test_unknown_subcommand(capsys):
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys)[0] == 2


def test_check_jacobi_exit_codes(capsys, tmp_path):
    code, out, _ = run(capsys, "check-jacobi", "--spec", "gl11_takiff")
    assert code == 0 and json.loads(out)["passed"]
    bad = spec_to_json(builtin("gl11").with_bracket("psi+", "psi-", {"N": 1}))
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(bad))
    code, out, _ = run(capsys, "check-jacobi", "--spec", str(path))
    d = json.loads(out)
    assert code == 1 and not d["passed"] and d["residual"] == {"psi+": "2"}
    path.write_text('{"basis": [')
    code, _, err = run(capsys, "check-jacobi", "--spec", str(path))
    assert code == 2 and "line 1" in err


def test_extend_writes_file(capsys, tmp_path):
    out = tmp_path / "double.json"
    code, text, _ = run(capsys, "extend", "--spec", "sl2", "--out", str(out))
    assert code == 0 and not text
    d = json.loads(out.read_text())
    assert len(d["basis"]) == 6 and d["takiff_of_dim"] == 3


def test_tensor(capsys):
    w = '{"left":{"n":"0","e":"1"},"right":{"n":"0","e":"-1"}}'
    code, out, _ = run(capsys, "tensor", "--left", "S", "--right", "S", "--weights", w, "--full-structure")
    d = json.loads(out)
    assert code == 0 and [s["kind"] for s in d["summands"]] == ["P"]
    assert sorted(f["n"] for f in d["factors"]) == ["-1", "0", "0", "1"]
    _, out, _ = run(capsys, "tensor", "--left", "S", "--right", "S", "--weights", w)
    assert "summands" not in json.loads(out)


def test_character_with_eval(capsys):
    lab = '{"kind":"T","n":"0","e":"1","tn":"0","te":"1/3"}'
    code, out, _ = run(capsys, "character", "--label", lab, "--cutoff", "2", "--super",
                       "--eval", "tau=0.1+2j,nu=0.2")
    d = json.loads(out)
    assert code == 0 and d["supercharacter"] and d["q_offset"] == "1/9"
    assert [-1, 0, 1] in d["terms"]
    assert float(d["eval"]["error_bound"]) < 1e-6
    code, _, err = run(capsys, "character", "--label", lab, "--cutoff", "2", "--eval", "nu=0.2")
    assert code == 2 and "tau" in err


def test_sugawara_check(capsys):
    code, out, _ = run(capsys, "sugawara-check", "--spec", "sl2_takiff", "--levels", '{"k":"5/3","tk":"2/7"}',
                       "--cutoff", "2", "--mode-range", "1")
    d = json.loads(out)
    assert code == 0 and d["central_charge"] == "6" and d["passed"]


def test_deterministic_output_and_manifest(capsys, tmp_path):
    outs = []
    for i in range(2):
        m = tmp_path / f"m{i}.json"
        code, out, _ = run(capsys, "verlinde", "--a", A1, "--b", A2, "--manifest", str(m))
        outs.append((out, json.loads(m.read_text())))
    (o1, m1), (o2, m2) = outs
    assert o1 == o2
    assert m1["output_digest"] == m2["output_digest"] and m1["input_digest"] == m2["input_digest"]
    assert m1["exact"] is True and m1["command"] == "verlinde"


def test_pretty(capsys):
    code, out, _ = run(capsys, "fusion", "--a", A1, "--b", A2, "--pretty")
    assert code == 0 and out.startswith("reason") and "status" in out
    with pytest.raises(json.JSONDecodeError):
        json.loads(out)


def test_selftest_subset(capsys):
    code, out, err = run(capsys, "selftest", "--criteria", "1,4", "--jobs", "2")
    d = json.loads(out)
    assert code == 0 and [c["criterion"] for c in d["criteria"]] == [1, 4]
    assert "PASS criterion 1" in err
    assert run(capsys, "selftest", "--criteria", "12")[0] == 2
