import json
import subprocess
import sys

import pytest

from pkit.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture()
def dlie_path():
    from pathlib import Path

    import pkit.protoperad

    return str(Path(pkit.protoperad.__file__).with_name("data") / "dlie.json")


def test_check_dlie_certified(capsys, dlie_path):
    code, out, _ = run(capsys, "check", dlie_path, "--max-arity", "5")
    report = json.loads(out)
    assert code == 0 and report["status"] == "CertifiedThroughArity(5)"
    assert report["schema"] == "pkit/1"
    assert [a["n"] for a in report["arities"]] == [2, 3, 4, 5]
    first = report["arities"][1]
    assert first["hilbert"]["algebra"] == [1, 3, 7, 15, 31, 63, 127]
    assert first["homology"][1]["homology"] == {"1": 0, "2": 2}


def test_check_arity_two(capsys, dlie_path):
    code, out, _ = run(capsys, "check", dlie_path, "--max-arity", "2", "--bar-arity", "2", "--format", "text")
    assert code == 0 and out.startswith("CertifiedThroughArity(2)")


def test_check_negative_control(capsys, fixtures_dir):
    code, out, _ = run(capsys, "check", str(fixtures_dir / "negative_control.json"))
    report = json.loads(out)
    assert code == 2 and report["status"] == "Inconclusive"
    (fail,) = report["algebra"]["witness"]["failures"]
    assert fail["monomial"] == ["x", "x", "x"]
    forms = [[(t["word"], t["coeff"]) for t in nf] for nf in fail["normal_forms"]]
    assert sorted(forms) == sorted([[(["y", "y", "x"], "1")], [(["x", "y", "x"], "1")]])


def test_check_negative_control_text_shows_two_traces(capsys, fixtures_dir):
    code, out, _ = run(capsys, "check", str(fixtures_dir / "negative_control.json"), "--format", "text")
    assert code == 2
    assert "left first" in out and "right first" in out
    assert "normal forms: y y x | x y x" in out


def test_malformed_term_reports_field_path(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"generators": [{"name": "x"}], "relations3": [{"terms": [
        {"bottom_brick": [1, 2], "top_brick": [2, 3], "bottom_gen": "x", "top_gen": "x", "coef": "1"}]}]}))
    code, _, err = run(capsys, "check", str(bad))
    assert code == 1 and "relations3[0].terms[0].coeff" in err


@pytest.mark.parametrize("content, needle", [
    ("{not json", "invalid JSON"),
    ('{"schema": "pkit/9", "generators": []}', "schema"),
    ('[1, 2]', "top level"),
])
def test_input_errors(capsys, tmp_path, content, needle):
    path = tmp_path / "in.json"
    path.write_text(content)
    code, _, err = run(capsys, "check", str(path))
    assert code == 1 and needle in err


def test_missing_file_and_bad_flags(capsys, dlie_path):
    assert run(capsys, "check", "/nonexistent/p.json")[0] == 1
    assert run(capsys, "check", dlie_path, "--bar-arity", "6", "--max-arity", "5")[0] == 1
    with pytest.raises(SystemExit) as exc:
        main(["check", dlie_path, "--bogus"])
    assert exc.value.code == 1


def test_threads_env(capsys, dlie_path, monkeypatch):
    monkeypatch.setenv("PKIT_THREADS", "zero")
    assert run(capsys, "check", dlie_path, "--max-arity", "2", "--bar-arity", "2")[0] == 1
    monkeypatch.setenv("PKIT_THREADS", "2")
    code, out, _ = run(capsys, "check", dlie_path, "--max-arity", "3")
    assert code == 0 and json.loads(out)["status"] == "CertifiedThroughArity(3)"


def test_report_is_deterministic(capsys, fixtures_dir, tmp_path):
    out = tmp_path / "report.json"
    code, _, _ = run(capsys, "check", str(fixtures_dir / "full_arity2.json"), "--max-arity", "3", "--out", str(out))
    assert code == 0
    assert out.read_bytes() == (fixtures_dir / "full_arity2.report.json").read_bytes()


def test_free_symmetric(capsys, fixtures_dir):
    code, out, _ = run(capsys, "check", str(fixtures_dir / "free_symmetric.json"), "--max-arity", "3")
    assert code == 0 and json.loads(out)["status"] == "CertifiedThroughArity(3)"


def test_dual_round_trip(capsys, dlie_path, tmp_path):
    dcom = tmp_path / "dcom.json"
    code, _, err = run(capsys, "dual", dlie_path, "--out", str(dcom))
    assert code == 0 and "arity 3 = 4" in err and "double dual equal: true" in err
    data = json.loads(dcom.read_text())
    assert data["generators"] == [{"name": "x*", "symmetry": "antisymmetric"}]
    assert len(data["relations3"]) == 4 and len(data["relations2"]) == 1
    code, _, err = run(capsys, "dual", str(dcom))
    assert code == 0 and "arity 3 = 2" in err


def test_dual_algebra_w3(capsys):
    code, out, _ = run(capsys, "dual", "--algebra", "n=3", "--format", "text")
    assert code == 0
    assert set(out.splitlines()) == {
        "x12* x12* ~> 0", "x13* x13* ~> 0", "x23* x23* ~> 0",
        "x23* x13* ~> -x12* x23*", "x13* x12* ~> -x12* x23*",
        "x23* x12* ~> -x12* x13*", "x13* x23* ~> x12* x13*",
    }
    assert run(capsys, "dual", "--algebra", "m=3")[0] == 1


def test_dual_of_algebra_file(capsys, fixtures_dir):
    code, out, err = run(capsys, "dual", str(fixtures_dir / "negative_control.json"))
    assert code == 0 and "double dual equal: true" in err
    assert len(json.loads(out)["relations"]) == 3


@pytest.mark.parametrize("args, count", [(["3", "2"], 6), (["2", "1"], 1), (["1", "1"], 0)])
def test_walls(capsys, args, count):
    code, out, _ = run(capsys, "walls", *args, "--sizes", "2")
    report = json.loads(out)
    assert code == 0 and report["count"] == count == len(report["walls"])


@pytest.mark.parametrize("n, weight, degree, dim", [(3, 2, 2, 2), (2, 1, 1, 1), (4, 3, 3, 6)])
def test_bar(capsys, n, weight, degree, dim):
    code, out, _ = run(capsys, "bar", "--n", str(n), "--weight", str(weight))
    report = json.loads(out)
    assert code == 0 and report["agreement"] is True
    top = {row["degree"]: row["dim"] for row in report["connected_bar"]}
    assert top[degree] == dim


def test_module_entry_point(fixtures_dir):
    proc = subprocess.run([sys.executable, "-m", "pkit", "check", str(fixtures_dir / "negative_control.json")],
                          capture_output=True, text=True)
    assert proc.returncode == 2
    assert json.loads(proc.stdout)["status"] == "Inconclusive"


def test_check_defaults_to_shipped_file(capsys):
    assert main(["check", "--max-arity", "3"]) == 0
    assert json.loads(capsys.readouterr().out)["status"] == "CertifiedThroughArity(3)"
