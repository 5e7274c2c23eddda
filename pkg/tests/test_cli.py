import json

import pytest

from gqm.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip() else None


def test_cl_mixed_d4(capsys):
    code, doc = run(capsys, "cl", "r r", "--ctx", "d4")
    assert code == 0
    assert doc["results"]["result"]["kind"] == "exact" and doc["results"]["result"]["value"] == 1
    assert doc["results"]["witness_verified"]


def test_cl_identity_and_plain(capsys):
    assert run(capsys, "cl", "", "--ctx", "d4")[1]["results"]["result"]["value"] == 0
    code, doc = run(capsys, "cl", "[a,b]", "--plain", "--ctx", "f2")
    assert doc["results"]["result"] == {"kind": "upper-bound", "value": 1, "witness": [["a", "b"]]}


def test_exit_codes(capsys):
    assert run(capsys, "cl", "x", "--ctx", "f2")[0] == 2
    assert run(capsys, "cl", "a", "--ctx", "no-such-file.json")[0] == 2
    assert run(capsys, "cl", "[a,b]^3", "--ctx", "f2", "--ball-radius", "3", "--max-factors", "3", "--budget-ms", "0")[0] == 3
    assert run(capsys, "section-constants", "--ctx", "f2")[0] == 2
    code, doc = run(capsys, "cl", "[a,b]^3", "--ctx", "f2", "--ball-radius", "1", "--max-factors", "1")
    assert code == 0 and doc["results"]["result"]["kind"] == "not-found"


def test_scl_finite_collapses(capsys):
    code, doc = run(capsys, "scl", "r r", "--ctx", "d4")
    assert code == 0 and doc["results"]["scl_GN"]["upper"] == "0"


def test_scl_f2_with_qm_and_lp(capsys):
    code, doc = run(capsys, "scl", "[a,b]", "--ctx", "f2", "--qm-file", "f2_qm", "--with-lp", "--support-radius", "2")
    res = doc["results"]["scl_GN"]
    assert code == 0 and res["lower"] == "1/2" and res["upper"] == "1"
    assert any(c["source"] == "lp" for c in res["upper_certificates"])


def test_scl_separation_report(capsys):
    code, doc = run(capsys, "scl", "[a,b]", "--ctx", "swap", "--qm-file", "f2_qm", "--compare-normal",
                    "--powers", "1,2,4,6,8")
    res = doc["results"]
    assert code == 0
    assert res["scl_GN"]["lower"] == "0" and res["scl_GN"]["upper"] == "1/8"
    assert res["scl_N"]["lower"] == "1/2"


def test_fill_and_dual(capsys):
    code, doc = run(capsys, "fill", "[a,b]", "--ctx", "f2", "--support-radius", "2", "--emit-dual")
    res = doc["results"]
    assert code == 0 and res["value"] == "3" and res["dual_feasible"] and res["dual_objective"] == "3"
    assert res["witness_boundary_ok"]


def test_surface_commands(capsys, tmp_path):
    code, doc = run(capsys, "surface", "from-decomp", "--ctx", "f4", "--m", "2")
    rep = doc["results"]["report"]
    assert (rep["s"], rep["e"], rep["p"], rep["genus"]) == (7, 11, 1, 2)
    path = tmp_path / "surf.json"
    path.write_text(json.dumps(doc["results"]["surface"]))
    code, doc = run(capsys, "surface", "validate", "--ctx", "f4", "--surface-file", str(path))
    assert code == 0 and doc["results"]["report"]["genus"] == 2
    code, doc = run(capsys, "surface", "from-chain", "--ctx", "f2", "--g", "a", "--h", "b")
    assert doc["results"]["report"]["genus"] == 1
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"triangles": [{"sign": 3, "faces": [0, 0, 0]}], "edges": [{"label": "a"}]}))
    assert run(capsys, "surface", "validate", "--ctx", "f2", "--surface-file", str(bad))[0] == 2


def test_qm_commands(capsys):
    code, doc = run(capsys, "qm", "eval", "[a,b]", "--ctx", "f2", "--qm-file", "f2_qm")
    assert doc["results"]["values"] == {"a b A B": "1"}
    code, doc = run(capsys, "qm", "bavard", "[a,b]", "--ctx", "f2", "--qm-file", "f2_qm")
    assert doc["results"]["lower"] == "1/2"
    # element after the options
    code, doc = run(capsys, "qm", "bavard", "--ctx", "f2", "--qm-file", "f2_qm", "a b A B")
    assert code == 0 and doc["results"]["lower"] == "1/2"
    code, _ = run(capsys, "qm", "bavard", "--ctx", "f2", "--qm-file", "f2_qm", "--bogus")
    assert code == 2
    code, doc = run(capsys, "qm", "defect", "--ctx", "f2", "--qm-file", "f2_qm", "--radius", "2")
    assert code == 0
    for method in ("averaging", "section"):
        code, doc = run(capsys, "qm", "extend", "--ctx", "swap", "--qm-file", "swap_qm", "--radius", "3",
                        "--method", method)
        assert code == 0 and doc["results"]["restricts_to_f_on_ball"]


def test_freeproduct_quotient(capsys):
    code, doc = run(capsys, "freeproduct-quotient", "--a", "Z4", "--b", "Z6")
    assert code == 0 and doc["results"]["agree"] and doc["results"]["presentation"]["invariant_factors"] == [2]
    code, doc = run(capsys, "freeproduct-quotient", "--a", "Z2", "--b", "Z3")
    assert doc["results"]["tensor"]["invariant_factors"] == []


def test_section_constants(capsys):
    code, doc = run(capsys, "section-constants", "--ctx", "s3")
    assert code == 0 and doc["results"]["M(s)"] >= 1


def test_reports_are_deterministic(capsys):
    _, a = run(capsys, "cl", "r r", "--ctx", "d4")
    _, b = run(capsys, "cl", "r r", "--ctx", "d4")
    a.pop("timing_ms"), b.pop("timing_ms")
    assert a == b


def test_out_file(capsys, tmp_path):
    path = tmp_path / "r.json"
    code = main(["cl", "r r", "--ctx", "d4", "--out", str(path)])
    assert code == 0 and json.loads(path.read_text())["results"]["result"]["value"] == 1


def test_verify_quick_suite(capsys):
    code, doc = run(capsys, "verify", "quick")
    assert code == 0 and doc["results"]["ok"]
    assert len(doc["results"]["checks"]) == 11
