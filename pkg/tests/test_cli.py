import json
import subprocess
import sys

import pytest

from tgs import zoo
from tgs.cli import main
from tgs.model import save_model
from tgs.modules import regular_module


@pytest.fixture
def files(tmp_path):
    out = {}
    for name in ["boolean", "mod3", "sum-mod3", "mod4", "boolean-square"]:
        p = tmp_path / f"{name}.json"
        save_model(zoo.NAMED[name](), p)
        out[name] = p
    return out


def _run(capsys, *argv):
    code = main([str(a) for a in argv])
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def test_check_model_ok(capsys, files):
    code, out, _ = _run(capsys, "check-model", files["boolean"])
    assert code == 0
    data = json.loads(out)
    assert data["axioms"]["passed"] and data["identity_idempotents"] == [1]


def test_check_model_reports_findings(capsys, files):
    code, out, _ = _run(capsys, "check-model", files["sum-mod3"])
    assert code == 1
    data = json.loads(out)
    t6 = [w for w in data["axioms"]["witnesses"] if w["axiom"] == "T6"]
    assert any(w["elements"] == [0, 1, 1] and w["lhs"] == 2 for w in t6)
    assert data["zero_ideal"]["witness"] == ["absorb", 0, 0, 0, 1, 1]


def test_malformed_input_exits_2(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    code, _, err = _run(capsys, "check-model", bad)
    assert code == 2 and json.loads(err)["error"] == "StructuralError"
    code, _, err = _run(capsys, "spec", tmp_path / "missing.json")
    assert code == 2


def test_spec(capsys, files):
    code, out, _ = _run(capsys, "spec", files["boolean"])
    assert code == 0
    data = json.loads(out)
    assert data["primes"] == [[0]] and data["prime_incidence"] == [[1]]


def test_out_directory(capsys, files, tmp_path):
    out = tmp_path / "o"
    code, stdout, _ = _run(capsys, "spec", files["boolean-square"], "--out", out)
    assert code == 0 and stdout == ""
    assert json.loads((out / "spec.json").read_text())["primes"] == [[0, 1], [0, 2]]


def test_graph_dot(capsys, files):
    code, out, _ = _run(capsys, "graph", files["boolean-square"], "--dot")
    assert code == 0 and out.startswith("graph spectrum {")
    code, out, _ = _run(capsys, "graph", files["boolean-square"])
    assert json.loads(out)["laplacian_nullity"] == 2


def test_fuzzy(capsys, files):
    code, out, _ = _run(capsys, "fuzzy", files["boolean-square"], "--theta", "1/2")
    assert code == 0
    data = json.loads(out)
    assert data["theta"] == "1/2" and data["crisp_reduction"]["passed"]


def test_fuzzy_with_weights_file(capsys, files, tmp_path):
    w = tmp_path / "w.json"
    w.write_text(json.dumps({"scheme": "file", "weights": {"0": "1/4", "1": "3/4"}}))
    code, out, _ = _run(capsys, "fuzzy", files["boolean-square"], "--weights", w, "--theta", "0.5")
    assert code == 0
    closures = json.loads(out)["closures"]
    # keyed by member bitmask: D({0,1}) = {p1}, D({0,2}) = {p0}
    assert closures == {"1": [], "3": [1], "5": []}


def test_fuzzy_rejects_bad_threshold(capsys, files):
    code, _, err = _run(capsys, "fuzzy", files["boolean"], "--theta", "abc")
    assert code == 2 and "abc" in err


def test_homology(capsys, files, tmp_path):
    R = tmp_path / "r.json"
    R.write_text(json.dumps(regular_module(zoo.mod4()).to_dict(zoo.mod4())))
    code, out, _ = _run(capsys, "homology", R, R, "--model", files["mod4"])
    assert code == 0
    data = json.loads(out)
    assert data["ext"][0]["cyclic_orders"] == [4] and data["ext"][1]["cyclic_orders"] == []


def test_homology_unsupported(capsys, files, tmp_path):
    R = tmp_path / "r.json"
    R.write_text(json.dumps(regular_module(zoo.boolean()).to_dict(zoo.boolean())))
    code, _, err = _run(capsys, "homology", R, R, "--model", files["boolean"])
    assert code == 2 and json.loads(err)["error"] == "UnsupportedMode"


def test_fingerprint_exit_codes(capsys, files):
    code, out, _ = _run(capsys, "fingerprint", files["boolean"])
    assert code == 0 and json.loads(out)["fpv"] == 1
    code, out, _ = _run(capsys, "fingerprint", files["mod3"])
    assert code == 1 and json.loads(out)["findings"]


def test_census_stdout(capsys):
    code, out, _ = _run(capsys, "census", 2, 1)
    lines = out.splitlines()
    assert code == 0 and len(lines) == 5
    assert json.loads(lines[-1])["count"] == 4


def test_census_guard(capsys):
    code, _, err = _run(capsys, "census", 5, 1)
    assert code == 2 and "GuardExceeded" in err


def test_run_and_resume(capsys, tmp_path):
    out = tmp_path / "run"
    code, stdout, _ = _run(capsys, "run", 2, 1, "--out", out)
    first = json.loads(stdout)
    assert code in (0, 1)
    assert sorted(first["artifacts"]) == sorted(f"{s}.ndjson" for s in ["census", "spectrum", "homology", "fuzzy", "fingerprint"])
    code2, stdout2, _ = _run(capsys, "run", 2, 1, "--out", out, "--resume")
    assert code2 == code and stdout2 == stdout


def test_zoo(capsys):
    code, out, _ = _run(capsys, "zoo", "mod3")
    assert code == 0 and json.loads(out)["n"] == 3


def test_module_entry_point(files):
    proc = subprocess.run(
        [sys.executable, "-m", "tgs", "check-model", str(files["sum-mod3"])], capture_output=True, text=True
    )
    assert proc.returncode == 1
    assert json.loads(proc.stdout)["axioms"]["passed"] is False
