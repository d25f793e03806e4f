import json
import subprocess
import sys

import pytest

from carnot_mehler.cli import main
from carnot_mehler.verify import Report, ReportItem, report_render

FAST = ["--samples", "20000", "--steps", "64"]


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_group_info(capsys):
    code, out, _ = run(capsys, "group", "info", "--group", "h1")
    data = json.loads(out)
    assert code == 0
    assert data["homogeneous_dimension"] == 4 and data["layer_dims"] == [2, 1]


def test_unknown_group_exit_code(capsys):
    code, _, err = run(capsys, "group", "info", "--group", "nope")
    assert code == 2 and "unknown group" in err


def test_bad_flag_exit_code(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["group", "--no-such-flag"])
    assert exc.value.code == 2


def test_group_validate(capsys, tmp_path):
    good = tmp_path / "g.json"
    good.write_text(json.dumps({"name": "h1c", "layer_dims": [2, 1], "brackets": [
        {"i": 1, "j": 2, "terms": [{"m": 3, "c": "-4"}]}]}))
    code, out, _ = run(capsys, "group", "validate", str(good))
    assert code == 0 and json.loads(out)["valid"]
    bad = tmp_path / "b.json"
    bad.write_text(json.dumps({"layer_dims": [2, 1], "brackets": [
        {"i": 1, "j": 2, "terms": [{"m": 1, "c": "1"}]}]}))
    code, out, _ = run(capsys, "group", "validate", str(bad))
    assert code == 2 and json.loads(out)["error"] == "GradingViolation"
    code, out, _ = run(capsys, "group", "info", "--group", str(good), "--format", "text")
    assert code == 0 and "Q = 4" in out


def test_hermite_generate(capsys):
    code, out, _ = run(capsys, "hermite", "--group", "h1", "--degree", "2")
    assert code == 0
    assert json.loads(out)["basis"] == ["x^2 - 1", "x*y", "y^2 - 1", "u"]
    code, out, _ = run(capsys, "hermite", "check", "--group", "engel", "--degree", "3")
    assert code == 0 and json.loads(out)["passed"]


def test_generating(capsys, tmp_path):
    code, out, _ = run(capsys, "generating", "--mu", "0", "--mu-prime", "0", "--degree", "2")
    data = json.loads(out)
    assert code == 0 and data["in_eigenspace"]
    assert data["text"] == "-1/2*x^2 - 1/2*y^2 - 1/2i*u + 1"
    export = tmp_path / "eig.json"
    code, out, _ = run(capsys, "generating", "--group", "free2-3", "--covector",
                       "0.1,-0.2,0.3,1,0.5,-0.7", "--mu", "1", "--mu-prime", "0",
                       "--degree", "3", "--export", str(export))
    data = json.loads(export.read_text())
    assert code == 0 and data["relative_residual"] < 1e-9
    assert data["representation"]["k"] == 1


def test_moments(capsys):
    code, out, _ = run(capsys, "moments", "--poly", "u^2", "--format", "text")
    assert code == 0 and out.strip() == "E[u^2] = 4"
    code, out, _ = run(capsys, "moments", "--max-degree", "2")
    rows = json.loads(out)["moments"]
    assert {r["monomial"]: r["moment"] for r in rows}["x^2"] == "1"


def test_mehler(capsys):
    code, out, _ = run(capsys, "mehler", "exact", "--poly", "x^2", "--c", "3/5", "--s", "4/5",
                       "--format", "text")
    assert code == 0 and out.strip() == "9/25*x^2 + 16/25"
    code, out, _ = run(capsys, "mehler", "mc", "--poly", "x*u - 2*y", "--gamma", "1,1,1",
                       "--t", "0.5", *FAST)
    data = json.loads(out)
    assert code == 0 and abs(data["z"]) <= 4 and data["estimate"]["seed"] == 42


def test_kernel(capsys):
    code, out, _ = run(capsys, "kernel", "eval", "--point", "0,0,0")
    assert code == 0 and abs(json.loads(out)["density"] - 1 / 16) < 1e-6
    code, out, _ = run(capsys, "kernel", "pde", "--point", "1,1,1", "--t", "4")
    assert code == 0 and json.loads(out)["passed"]
    code, _, _ = run(capsys, "kernel", "eval", "--group", "engel")
    assert code == 2


def test_sample_csv(capsys, tmp_path):
    path = tmp_path / "s.csv"
    code, out, _ = run(capsys, "sample", "--samples", "10", "--steps", "4", "--out", str(path))
    assert code == 0 and path.read_text().startswith("x,y,u\n")


def test_verify_exact_and_byte_identical(capsys):
    code, first, _ = run(capsys, "verify", "exact", "--group", "h1", "--max-degree", "6")
    assert code == 0
    _, second, _ = run(capsys, "verify", "exact", "--group", "h1", "--max-degree", "6")
    assert first == second
    data = json.loads(first)
    identities = {it["identity"] for it in data["items"]}
    for needed in ("commutator [L,A]=2L", "intertwining", "rotation invariance",
                   "energy identities", "eigen N h = n h"):
        assert needed in identities


def test_verify_all_fast(capsys, tmp_path):
    out_path = tmp_path / "r.json"
    argv = ["verify", "all", "--group", "h1", "--max-degree", "6", *FAST, "--out", str(out_path)]
    code, first, _ = run(capsys, *argv)
    assert code == 0
    _, second, _ = run(capsys, *argv)
    assert first == second
    mc = [it for it in json.loads(first)["items"] if "z" in it["extra"]]
    assert mc and all("seed" in it["extra"] for it in mc)
    code, text, _ = run(capsys, "report", str(out_path), "--format", "text")
    assert code == 0 and text.strip().endswith("passed")


def test_report_empty_and_failure(capsys, tmp_path):
    assert report_render(Report(), "json") == json.dumps(
        {"items": [], "n_failed": 0, "n_items": 0, "passed": True}, indent=2, sort_keys=True)
    bad = Report([ReportItem("demo", "h1", "x", "1/2", "1/3", False, "demo identity")])
    path = tmp_path / "bad.json"
    path.write_text(report_render(bad))
    code, out, _ = run(capsys, "report", str(path), "--format", "text")
    assert code == 1
    assert "FAIL h1 demo [x] lhs=1/2 rhs=1/3" in out


def test_report_ordering():
    items = [ReportItem("b", "h2", "", "", "", True, "", 1),
             ReportItem("a", "h2", "", "", "", True, "", 2),
             ReportItem("a", "h1", "", "", "", True, "", 3),
             ReportItem("a", "h2", "", "", "", True, "", 1)]
    order = [(it["group"], it["identity"], it["degree"])
             for it in json.loads(report_render(Report(items)))["items"]]
    assert order == [("h1", "a", 3), ("h2", "a", 1), ("h2", "a", 2), ("h2", "b", 1)]


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "carnot_mehler", "group", "info", "--format",
                          "text"], capture_output=True, text=True)
    assert out.returncode == 0 and "Q = 4" in out.stdout
