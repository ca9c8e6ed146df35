import csv
import io
import json
import subprocess
import sys

import pytest

from qwitness.cli import main
from qwitness.documents import dumps_document, golden_triple, triple_to_document
from qwitness.matcore import Density2, Hermitian2, MixedState, PureState
from qwitness.witness import WitnessTriple


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def write_triple(path, t):
    path.write_text(dumps_document(triple_to_document(t)))
    return str(path)


class TestVerify:
    def test_bundled(self, capsys):
        code, out, _ = run(capsys, "verify", "--triple", "eq15.json")
        rep = json.loads(out)
        assert code == 0
        assert rep["ordering"]["ordered"] and rep["violation"]["witnessed"]
        assert rep["violation"]["second_gap"] == pytest.approx(-0.0590, abs=5e-4)

    def test_b_above_identity(self, capsys, tmp_path):
        g = golden_triple()
        t = WitnessTriple.from_matrices(g.A.m, Hermitian2.diag(1.0, 1.5), g.state)
        code, out, _ = run(capsys, "verify", "--triple", write_triple(tmp_path / "t.json", t))
        assert code == 2
        assert json.loads(out)["ordering"]["eig_IminusB_min"] == pytest.approx(-0.5)

    def test_truncated(self, capsys, tmp_path):
        p = tmp_path / "t.json"
        p.write_text(dumps_document(triple_to_document(golden_triple()))[:100])
        code, _, err = run(capsys, "verify", "--triple", str(p))
        assert code == 3
        assert "line" in err

    def test_missing_field(self, capsys, tmp_path):
        doc = triple_to_document(golden_triple())
        del doc["B"]["a12_im"]
        p = tmp_path / "t.json"
        p.write_text(json.dumps(doc))
        code, _, err = run(capsys, "verify", "--triple", str(p))
        assert code == 3 and "B.a12_im" in err

    def test_missing_file(self, capsys, tmp_path):
        assert run(capsys, "verify", "--triple", str(tmp_path / "none.json"))[0] == 3


class TestOptimize:
    def test_document(self, capsys, tmp_path):
        out_path = tmp_path / "opt.json"
        code, out, _ = run(capsys, "optimize", "--grid", "0.001", "--tol", "1e-8", "--out", str(out_path))
        assert code == 0
        doc = json.loads(out_path.read_text())
        assert doc["A"]["a11"] == pytest.approx(0.724, abs=2e-3)
        assert doc["B"]["a22"] == pytest.approx(0.309, abs=2e-3)
        meta = doc["metadata"]["optimizer"]
        assert {"step", "tol", "evaluations", "objective", "slacks"} <= set(meta)
        assert json.loads(out)["objective"] == pytest.approx(-0.0590170, abs=1e-6)
        # the optimizer's own output always verifies
        assert run(capsys, "verify", "--triple", str(out_path))[0] == 0

    def test_full(self, capsys):
        code, out, err = run(capsys, "optimize", "--grid", "0.001", "--full")
        assert code == 0 and "objective" in err
        slacks = json.loads(out)["metadata"]["full_search"]["slacks"]
        assert all(0 <= s < 0.004 for s in slacks)

    @pytest.mark.parametrize("flags", [["--grid", "0.5"], ["--grid", "0"], ["--tol", "0"], ["--full", "--full-step", "0.1"], ["--grid", "abc"]])
    def test_bad_flags(self, capsys, flags):
        assert run(capsys, "optimize", *flags)[0] == 3

    def test_stdout_is_byte_identical(self, capsys):
        a = run(capsys, "optimize", "--grid", "0.001")[1]
        b = run(capsys, "optimize", "--grid", "0.001")[1]
        assert a == b


class TestSimulate:
    def test_golden(self, capsys):
        code, out, _ = run(capsys, "simulate", "--triple", "eq15.json", "--shots", "1000000", "--seed", "42")
        rep = json.loads(out)
        assert code == 0
        assert rep["stage1_pass"] and rep["stage2_violation"]
        assert rep["z_score"] >= 5
        assert rep["settings"]["probes"] == 103

    def test_past_threshold(self, capsys):
        code, out, _ = run(
            capsys, "simulate", "--triple", "eq15.json", "--shots", "100000", "--seed", "42", "--noise", "depolarizing:0.35"
        )
        assert code == 1
        assert not json.loads(out)["stage2_violation"]

    def test_exact(self, capsys):
        code, out, _ = run(capsys, "simulate", "--triple", "eq15.json", "--seed", "0", "--exact", "--grid-points", "0")
        rep = json.loads(out)
        assert code == 0 and rep["z_score"] == "inf"

    def test_mixed_probe_document(self, capsys, tmp_path):
        g = golden_triple()
        path = write_triple(tmp_path / "m.json", g.with_state(MixedState(Density2.maximally_mixed())))
        code, out, _ = run(capsys, "simulate", "--triple", path, "--seed", "1", "--shots", "20000", "--grid-points", "0")
        assert code == 1
        assert json.loads(out)["best_state"]["kind"] == "mixed"

    @pytest.mark.parametrize(
        "flags",
        [
            ["--shots", "0"],
            ["--shots", "1"],
            ["--noise", "loud"],
            ["--noise", "depolarizing:2"],
            ["--significance", "-1"],
            ["--batch-size", "0"],
            ["--seed", "-3"],
        ],
    )
    def test_bad_flags(self, capsys, flags):
        argv = ["simulate", "--triple", "eq15.json", "--seed", "1"] + flags
        assert run(capsys, *argv)[0] == 3

    def test_seed_required(self, capsys):
        code, _, err = run(capsys, "simulate", "--triple", "eq15.json")
        assert code == 3 and "--seed" in err

    def test_byte_identical(self, capsys):
        argv = ["simulate", "--triple", "eq15.json", "--shots", "20000", "--seed", "5", "--noise", "jitter:3:500"]
        assert run(capsys, *argv)[1] == run(capsys, *argv)[1]


class TestSweep:
    def test_golden(self, capsys, tmp_path):
        out_path = tmp_path / "sweep.csv"
        argv = ["sweep", "--triple", "eq15.json", "--seed", "42", "--from", "0", "--to", "0.4", "--steps", "81", "--shots", "100000"]
        code, out, _ = run(capsys, *argv, "--out", str(out_path))
        assert code == 0
        rows = list(csv.reader(io.StringIO(out_path.read_text())))
        assert rows[0] == ["p", "first_gap", "first_gap_se", "second_gap", "second_gap_se", "z", "stage1_pass", "stage2_violation"]
        assert len(rows) == 82
        summary = json.loads(out)
        assert summary["zero_crossing"] == pytest.approx(0.211, abs=0.01)
        assert summary["closed_form_threshold"] == pytest.approx(0.211, abs=0.002)
        # stdout mode prints the same table
        code, table, err = run(capsys, *argv)
        assert table == out_path.read_text()
        assert "zero crossing" in err

    def test_two_steps(self, capsys):
        code, out, _ = run(capsys, "sweep", "--triple", "eq15.json", "--seed", "1", "--steps", "2", "--shots", "1000")
        assert code == 0
        assert len(out.strip().splitlines()) == 3

    @pytest.mark.parametrize(
        "flags",
        [["--from", "0.5", "--to", "0.1"], ["--steps", "1"], ["--to", "1.5"], ["--out", "/nonexistent/dir/x.csv"]],
    )
    def test_bad_flags(self, capsys, flags):
        assert run(capsys, "sweep", "--triple", "eq15.json", "--seed", "1", *flags)[0] == 3


class TestAngles:
    def test_golden(self, capsys):
        code, out, _ = run(capsys, "angles", "--triple", "eq15.json")
        rep = json.loads(out)
        assert code == 0
        assert rep["basis_rotation_deg"] == pytest.approx(19.0, abs=0.5)
        assert rep["state_angle_deg"] == pytest.approx(67.0, abs=0.5)
        assert rep["outcome_values_B"] == pytest.approx([1.0, 0.309], abs=5e-4)
        assert rep["outcome_values_A"] == pytest.approx([0.809, 0.0], abs=5e-4)

    def test_diagonal(self, capsys, tmp_path):
        t = WitnessTriple.from_matrices(Hermitian2.diag(0.4, 0.1), Hermitian2.diag(1.0, 0.5), PureState(0.6, 0.8))
        code, out, _ = run(capsys, "angles", "--triple", write_triple(tmp_path / "d.json", t))
        assert code == 0 and json.loads(out)["basis_rotation_deg"] == 0.0

    def test_mixed(self, capsys, tmp_path):
        t = golden_triple().with_state(MixedState(Density2.maximally_mixed()))
        code, _, err = run(capsys, "angles", "--triple", write_triple(tmp_path / "m.json", t))
        assert code == 2 and "pure" in err


def test_no_subcommand(capsys):
    assert run(capsys)[0] == 3
    assert run(capsys, "bogus")[0] == 3


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "qwitness", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.startswith("qwitness ")
    out = subprocess.run([sys.executable, "-m", "qwitness", "verify", "--triple", "eq15.json"], capture_output=True, text=True)
    assert out.returncode == 0 and json.loads(out.stdout)["ordering"]["ordered"]
