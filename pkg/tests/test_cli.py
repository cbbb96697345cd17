import json
import subprocess
import sys
from fractions import Fraction as F

import pytest

from bfpp.cli import main
from bfpp.witness import history_to_json
from bfpp.witness import verify as V


@pytest.fixture(scope="module")
def history_file(tmp_path_factory, small_history):
    path = tmp_path_factory.mktemp("hist") / "h.json"
    path.write_text(json.dumps(history_to_json(*small_history)))
    return path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, "--json", *argv)
    return code, json.loads(out)


def write_map(path, breakpoints):
    path.write_text(json.dumps({"breakpoints": [[str(t), str(v)] for t, v in breakpoints]}))
    return path


class TestConstruct:
    def test_minimal_run(self, capsys, tmp_path):
        out = tmp_path / "h.json"
        code, _, _ = run(capsys, "construct", "--stages", 1, "--out", out)
        assert code == 0 and len(json.loads(out.read_text())) == 2

    def test_zero_stages_is_usage_error(self, capsys, tmp_path):
        assert run(capsys, "construct", "--stages", 0, "--out", tmp_path / "h.json")[0] == 2

    def test_byte_identical_reruns(self, capsys, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        run(capsys, "construct", "--stages", 4, "--out", a)
        run(capsys, "construct", "--stages", 4, "--out", b)
        assert a.read_bytes() == b.read_bytes()

    def test_unwritable_path(self, capsys, tmp_path):
        assert run(capsys, "construct", "--stages", 1, "--out", tmp_path / "missing" / "h.json")[0] == 2

    def test_summary(self, capsys, tmp_path):
        code, rep = run_json(capsys, "construct", "--stages", 3, "--out", tmp_path / "h.json")
        assert code == 0 and rep["pass"]
        assert rep["data"]["stages"] == 3 and rep["data"]["skeleton_size"] == 2 + 2 * 9 + 2 * 67


class TestVerify:
    def test_fresh_history(self, capsys, history_file):
        assert run(capsys, "verify", history_file)[0] == 0

    def test_decremented_k(self, capsys, tmp_path, history_file):
        data = json.loads(history_file.read_text())
        data[3]["certificate"]["k"] -= 1
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(data))
        code, out, _ = run(capsys, "verify", bad)
        assert code == 1 and "stage 2" in out and V.K_BOUND in out

    def test_truncated_file(self, capsys, tmp_path, history_file):
        cut = tmp_path / "cut.json"
        cut.write_text(history_file.read_text()[:500])
        assert run(capsys, "verify", cut)[0] == 2

    def test_missing_and_malformed(self, capsys, tmp_path):
        assert run(capsys, "verify", tmp_path / "nope.json")[0] == 2
        weird = tmp_path / "w.json"
        weird.write_text(json.dumps([{"skeleton": ["0/1", "2/4"], "radius": "1/4", "certificate": None}]))
        assert run(capsys, "verify", weird)[0] == 2


class TestCoverage:
    def test_affine_family(self, capsys, history_file):
        code, rep = run_json(capsys, "coverage", "--history", history_file, "--stage", 2,
                             "--family", "affine", "--trials", 100)
        assert code == 0 and rep["data"]["trials"] == 100

    def test_all_families_with_reports(self, capsys, history_file):
        code, rep = run_json(capsys, "coverage", "--history", history_file, "--stage", 3,
                             "--trials", 10, "--reports")
        assert code == 0
        assert all(r["pass"] and r["witness_j"] >= 1 for r in rep["data"]["reports"])

    def test_steep_map_rejected(self, capsys, tmp_path, history_file):
        m = write_map(tmp_path / "m.json", [("0/1", "0/1"), ("1/1", "1/1")])
        code, rep = run_json(capsys, "coverage", "--history", history_file, "--stage", 0, "--map", m)
        assert code == 1 and rep["data"]["offending_map"]["breakpoints"][1] == ["1/1", "1/1"]

    def test_hand_map_within_ratio(self, capsys, tmp_path, history_file):
        m = write_map(tmp_path / "m.json", [("0/1", "1/4"), ("1/1", "3/4")])
        assert run(capsys, "coverage", "--history", history_file, "--stage", 0, "--map", m)[0] == 0

    def test_usage_errors(self, capsys, history_file):
        assert run(capsys, "coverage", "--history", history_file, "--stage", 2, "--trials", 0)[0] == 2
        assert run(capsys, "coverage", "--history", history_file, "--stage", 1)[0] == 2
        assert run(capsys, "coverage", "--history", history_file, "--stage", 99)[0] == 2

    def test_broken_stage_is_a_failure(self, capsys, tmp_path, history_file):
        data = json.loads(history_file.read_text())
        data[3]["certificate"]["d"] = "1/3"
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(data))
        assert run(capsys, "coverage", "--history", bad, "--stage", 2, "--trials", 5)[0] == 1


class TestDemo:
    def test_segment(self, capsys):
        code, rep = run_json(capsys, "demo", "segment", "--pairs", 10000, "--seed", 1)
        assert code == 0 and rep["data"]["violations"] == [] and rep["data"]["pairs_checked"] == 10000

    def test_gdelta_point(self, capsys, history_file):
        code, out, _ = run(capsys, "demo", "gdelta", "--point", "1/2", "--history", history_file)
        assert code == 0 and '"Out"' in out and '"translate": "1/2"' in out

    def test_wave(self, capsys):
        code, rep = run_json(capsys, "demo", "wave", "--pairs", 10000)
        assert code == 0 and F(rep["data"]["max_ratio"]) >= F(99, 100)

    def test_accumulation(self, capsys):
        code, rep = run_json(capsys, "demo", "accumulation", "--pairs", 100)
        assert code == 0 and rep["data"]["pairs_checked"] == 4950

    def test_fsigma(self, capsys, history_file):
        code, rep = run_json(capsys, "demo", "fsigma", "--points", 200, "--history", history_file)
        assert code == 0 and sum(rep["data"]["verdicts"].values()) == 200
        code, rep = run_json(capsys, "demo", "fsigma", "--point", "0", "--history", history_file)
        assert rep["data"]["verdict"]["verdict"] == "Unknown"

    def test_bad_point(self, capsys):
        assert run(capsys, "demo", "gdelta", "--point", "3/2")[0] == 2
        assert run(capsys, "demo", "gdelta", "--point", "2/4")[0] == 2


class TestIterate:
    def test_worked_example(self, capsys, tmp_path):
        m = write_map(tmp_path / "m.json", [("0/1", "1/4"), ("1/1", "3/4")])
        code, rep = run_json(capsys, "iterate", "--map", m, "--x0", "0", "--tol", "1/1024")
        assert code == 0
        assert rep["data"]["certificate"] == {"q": "1/2", "n": 9, "x_n": "511/1024", "bound": "1/1024"}

    def test_identity_rejected(self, capsys, tmp_path):
        m = write_map(tmp_path / "m.json", [("0/1", "0/1"), ("1/1", "1/1")])
        assert run(capsys, "iterate", "--map", m, "--tol", "1/2")[0] == 1

    def test_bad_tolerance(self, capsys, tmp_path):
        m = write_map(tmp_path / "m.json", [("0/1", "1/4"), ("1/1", "3/4")])
        assert run(capsys, "iterate", "--map", m, "--tol", "0")[0] == 2
        assert run(capsys, "iterate", "--map", m, "--tol", "-1/2")[0] == 2
        assert run(capsys, "iterate", "--map", tmp_path / "none.json", "--tol", "1/2")[0] == 2


def test_module_entry_point(tmp_path):
    m = write_map(tmp_path / "m.json", [("0/1", "1/4"), ("1/1", "3/4")])
    proc = subprocess.run([sys.executable, "-m", "bfpp", "iterate", "--map", str(m), "--tol", "1/1024"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "511/1024" in proc.stdout


def test_no_command_is_usage_error(capsys):
    assert run(capsys)[0] == 2
