"""Command-line driver: output shapes, exit codes, seed resolution."""

import json

import pytest

from fop.cli import main
from fop.fileio import problem_doc, save_json


@pytest.fixture()
def odd_cubic(tmp_path):
    doc = problem_doc(
        {"kind": "cyclic", "n": 2},
        {"kind": "weights", "weights": [1]},
        {"kind": "weights", "weights": [1]},
        3,
        terms=[((1,), 0, 1.0), ((3,), 0, -1.0)],
    )
    path = tmp_path / "odd_cubic.json"
    save_json(path, doc)
    return str(path)


@pytest.fixture()
def pure_cubic(tmp_path):
    doc = problem_doc(
        {"kind": "cyclic", "n": 2},
        {"kind": "weights", "weights": [1]},
        {"kind": "weights", "weights": [1]},
        3,
        terms=[((3,), 0, 1.0)],
    )
    path = tmp_path / "pure_cubic.json"
    save_json(path, doc)
    return str(path)


@pytest.fixture()
def system_file(tmp_path):
    doc = {
        "format": "fop.system/1",
        "nvars": 1,
        "equations": [
            [
                {"exponents": [2], "coefficient": [1.0, 0.0]},
                {"exponents": [0], "coefficient": [-4.0, 0.0]},
            ]
        ],
    }
    path = tmp_path / "system.json"
    save_json(path, doc)
    return str(path)


class TestBasis:
    def test_text_listing(self, odd_cubic, capsys):
        assert main(["basis", odd_cubic]) == 0
        out = capsys.readouterr().out
        assert "dimension 2" in out
        assert "z^3" in out

    def test_json_listing(self, odd_cubic, capsys):
        assert main(["basis", odd_cubic, "--json"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["dimension"] == 2
        assert len(doc["maps"]) == 2
        assert sorted(m["degree"] for m in doc["maps"]) == [1, 3]


class TestStrata:
    def test_table(self, odd_cubic, capsys):
        assert main(["strata", odd_cubic]) == 0
        out = capsys.readouterr().out
        assert "dimension audit: ok" in out

    def test_json(self, odd_cubic, capsys):
        assert main(["strata", odd_cubic, "--json"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert len(doc["strata"]) == 2
        assert doc["dimension_audit"]["ok"] is True


class TestEuler:
    def test_stdout_report(self, odd_cubic, capsys):
        assert main(["euler", odd_cubic]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["total_weighted"] == 3
        assert doc["consistent"] is True
        assert [s["chi"] for s in doc["strata"]] == [1, 1]

    def test_output_file_and_reproducibility(self, pure_cubic, tmp_path, capsys):
        out1 = tmp_path / "r1.json"
        out2 = tmp_path / "r2.json"
        assert main(["euler", pure_cubic, "--seed", "5", "--output", str(out1)]) == 0
        assert main(["euler", pure_cubic, "--seed", "5", "--output", str(out2)]) == 0
        capsys.readouterr()
        assert out1.read_bytes() == out2.read_bytes()
        doc = json.loads(out1.read_text())
        assert doc["perturbed"] is True and doc["seed"] == 5

    def test_env_seed(self, pure_cubic, capsys, monkeypatch):
        monkeypatch.setenv("FOP_SEED", "11")
        assert main(["euler", pure_cubic, "--json"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["seed"] == 11

    def test_flag_beats_env(self, pure_cubic, capsys, monkeypatch):
        monkeypatch.setenv("FOP_SEED", "11")
        assert main(["euler", pure_cubic, "--json", "--seed", "4"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["seed"] == 4

    def test_bad_env_seed(self, pure_cubic, capsys, monkeypatch):
        monkeypatch.setenv("FOP_SEED", "eleven")
        assert main(["euler", pure_cubic]) == 2

    def test_degree_override_warns(self, odd_cubic, capsys):
        assert main(["euler", odd_cubic, "--degree-override", "4"]) == 0
        captured = capsys.readouterr()
        assert "overriding" in captured.err
        assert json.loads(captured.out)["degree"] == 4


class TestSolve:
    def test_deterministic_json(self, system_file, capsys):
        assert main(["solve", system_file, "--json"]) == 0
        first = capsys.readouterr().out
        assert main(["solve", system_file, "--json"]) == 0
        second = capsys.readouterr().out
        assert first == second
        doc = json.loads(first)
        assert doc["bezout"] == 2 and doc["distinct"] == 2
        roots = sorted(p[0][0] for p in doc["points"])
        assert roots == pytest.approx([-2.0, 2.0])


class TestAudit:
    def test_clean_problem(self, odd_cubic, capsys):
        assert main(["audit", odd_cubic]) == 0
        assert "audit: ok" in capsys.readouterr().out

    def test_json(self, odd_cubic, capsys):
        assert main(["audit", odd_cubic, "--json"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["ok"] is True and doc["proper"] is True


class TestExitCodes:
    def test_validation_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text('{"format": "fop.problem/1"}')
        assert main(["euler", str(bad)]) == 2
        assert "error:" in capsys.readouterr().err

    def test_numerical_error(self, pure_cubic, capsys):
        # perturbations far too small to clear the degenerate germ
        assert main(["euler", pure_cubic, "--magnitude", "1e-30"]) == 3
        assert "persistent degeneracy" in capsys.readouterr().err

    def test_not_json(self, tmp_path, capsys):
        bad = tmp_path / "garbage.json"
        bad.write_text("not json {")
        assert main(["euler", str(bad)]) == 2


class TestSelftest:
    def test_single_criterion(self, capsys):
        assert main(["selftest", "--only", "9"]) == 0
        out = capsys.readouterr().out
        assert "[ 9] PASS" in out
        assert "1/1 criteria passed" in out

    def test_unknown_criterion_rejected(self, capsys):
        assert main(["selftest", "--only", "99"]) == 2

    def test_malformed_only_rejected(self, capsys):
        assert main(["selftest", "--only", "nine"]) == 2
