import json
import subprocess
import sys

import pytest

from qcatn import __version__
from qcatn.cli import main, parse_channel_spec
from qcatn.lattice import Lattice


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_classify_example1(capsys):
    code, out, _ = run(capsys, "classify", "--channel", "builtin:example1", "--lattice", "1d,M=4,open")
    assert code == 0
    rep = json.loads(out)
    assert rep["verdicts"]["is_cpqc"] and not rep["verdicts"]["is_lpqc"]
    assert rep["version"] == __version__ and rep["tolerance"] == 1e-8 and rep["region_policy"] == "default"


def test_classify_csv(capsys, tmp_path):
    target = tmp_path / "r.csv"
    code, out, _ = run(capsys, "classify", "--channel", "builtin:identity", "--lattice", "1d,M=4",
                       "--format", "csv", "--output", str(target))
    assert code == 0 and out == ""
    assert target.read_text().splitlines()[0].startswith("A,cpqc_residual")


def test_run_example3_mi(capsys):
    code, out, _ = run(capsys, "run-example", "--name", "example3", "--lattice", "1d,M=4,open", "--report", "mi")
    assert code == 0
    mi = json.loads(out)["mutual_information"]
    assert [p["mutual_information"] for p in mi["per_pair"]] == pytest.approx([1.0, 1.0], abs=1e-9)
    assert mi["left_half_mutual_information"] == pytest.approx(mi["straddling_pairs"], abs=1e-9)


def test_build_pepu(capsys):
    code, out, _ = run(capsys, "build-pepu", "--channel", "builtin:shift", "--lattice", "1d,M=5,periodic",
                       "--seed", "11")
    assert code == 0
    data = json.loads(out)
    assert data["report"]["bond_dim"] == 4 and data["report"]["seed"] == 11
    assert data["report"]["reconstruction_residual"] <= 1e-8
    assert len(data["network"]["tensors"]) == 5


def test_audit_is_deterministic(capsys):
    argv = ["audit-arealaw", "--family", "builtin:brickwork?layers=1&seed=4", "--lattice", "1d,open",
            "--sizes", "4,5", "--samples", "3", "--seed", "9"]
    first = run(capsys, *argv)
    second = run(capsys, *argv)
    assert first[0] == 0 and first[1] == second[1]
    rep = json.loads(first[1])
    assert rep["seed"] == 9 and rep["sizes"] == [4, 5]


def test_audit_csv(capsys):
    code, out, _ = run(capsys, "audit-arealaw", "--family", "builtin:example3", "--sizes", "4,6",
                       "--metric", "mi", "--regions", "half", "--samples", "1", "--format", "csv")
    assert code == 0
    rows = out.strip().splitlines()
    assert rows[0] == "M,size_A,boundary_A,value" and len(rows) == 3


def test_selftest(capsys):
    code, out, _ = run(capsys, "selftest")
    assert code == 0
    assert all(c["passed"] for c in json.loads(out)["checks"])


@pytest.mark.parametrize("argv, code_name", [
    ([], "USAGE"),
    (["classify", "--lattice", "1d,M=4"], "USAGE"),
    (["classify", "--channel", "builtin:nope", "--lattice", "1d,M=4"], "SPEC"),
    (["classify", "--channel", "missing.json", "--lattice", "1d,M=4"], "SPEC"),
    (["classify", "--channel", "builtin:example1", "--lattice", "1d,open"], "LATTICE"),
    (["classify", "--channel", "builtin:example1", "--lattice", "1d,M=4,periodic"], "EMPTY_S"),
    (["build-pepu", "--channel", "builtin:swap", "--lattice", "1d,M=4"], "NOT_QCA"),
    (["run-example", "--name", "example1", "--lattice", "1d,M=4", "--report", "mi"], "USAGE"),
])
def test_error_paths(capsys, argv, code_name):
    code, _, err = run(capsys, *argv)
    assert code == 1
    lines = err.strip().splitlines()
    assert len(lines) == 1 and lines[0].startswith(f"error[{code_name}]: ")


def test_dense_cap_error(capsys, monkeypatch):
    monkeypatch.setenv("QCATN_DENSE_CAP", "8")
    code, _, err = run(capsys, "classify", "--channel", "builtin:identity", "--lattice", "1d,M=4")
    assert code == 1 and err.startswith("error[DENSE_CAP]: ") and "cap 8" in err


def test_malformed_channel_file(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, err = run(capsys, "classify", "--channel", str(bad), "--lattice", "1d,M=4")
    assert code == 1 and err.startswith("error[SPEC]")
    other = tmp_path / "other.json"
    other.write_text(json.dumps({"foo": 1}))
    code, _, err = run(capsys, "classify", "--channel", str(other), "--lattice", "1d,M=4")
    assert code == 1 and err.startswith("error[INPUT]")


def test_inconsistency_exit_code(capsys, monkeypatch):
    import qcatn.classify as cl

    def broken(report):
        raise cl.TaxonomyInconsistency("forced", report)
    monkeypatch.setattr(cl, "_check_consistency", broken)
    code, out, err = run(capsys, "classify", "--channel", "builtin:identity", "--lattice", "1d,M=4")
    assert code == 2 and err.startswith("error[INCONSISTENT]")
    assert "inconsistent verdicts" in json.loads(out)["notes"][-1]


def test_channel_spec_parameters():
    make, ident = parse_channel_spec("builtin:swap?sites=0-2")
    ch = make(Lattice(1, 4))
    assert ch.meta["sites"] == [0, 2] and ident == "builtin:swap?sites=0-2"


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qcatn.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and __version__ in proc.stdout
