import json
import subprocess
import sys

import numpy as np
import pytest

from povm_order import cli
from povm_order import povm as pv


def write(tmp_path, name, P):
    path = tmp_path / name
    path.write_text(json.dumps(P.to_json()))
    return str(path)


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_incompat_trine(tmp_path, capsys):
    files = [write(tmp_path, f"t{i}.json", P) for i, P in enumerate(pv.make_trine(0.75))]
    code, out, _ = run(capsys, "incompat", *files)
    data = json.loads(out)
    assert code == 0
    assert data["verdict"] == "incompatible" and data["height"] > 2 and data["threshold"] == 2
    assert "margin" in data


def test_order_equivalent(tmp_path, capsys):
    a = write(tmp_path, "a.json", pv.random_povm(2, 3, 0))
    code, out, _ = run(capsys, "order", a, a)
    assert code == 0 and json.loads(out)["relation"] == "equivalent"


def test_height_of_sharp_mub_pair(tmp_path, capsys):
    A, B = pv.make_fourier_pair(2, 1, 1)
    code, out, _ = run(capsys, "height", write(tmp_path, "x.json", A), write(tmp_path, "y.json", B), "--certificate")
    data = json.loads(out)
    assert code == 0 and abs(data["value"] - 3) < 1e-9
    assert len(data["dual_Y"]) == 2


def test_validation_exit_code(tmp_path, capsys):
    obj = pv.make_qubit_dichotomic(1, [0, 0, 1]).to_json()
    obj["effects"][0][1][1] = [1.5, 0]
    obj["effects"][1][1][1] = [-0.5, 0]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(obj))
    code, _, err = run(capsys, "validate", str(path))
    assert code == 2 and "effect 1" in err
    code, _, _ = run(capsys, "validate", str(tmp_path / "missing.json"))
    assert code == 2
    (tmp_path / "junk.json").write_text("{not json")
    code, _, _ = run(capsys, "validate", str(tmp_path / "junk.json"))
    assert code == 2


def test_solver_exit_code(tmp_path, capsys, monkeypatch):
    from povm_order.errors import SolverStall

    def boom(*a, **k):
        raise SolverStall("forced")

    monkeypatch.setattr(cli.ic, "joint_measurement", boom)
    a = write(tmp_path, "a.json", pv.random_povm(2, 2, 0))
    code, _, err = run(capsys, "joint", a, a)
    assert code == 3 and "forced" in err


def test_simplify_round_trip(tmp_path, capsys):
    E = np.diag([1.0, 0.0])
    P = pv.validate([E / 4, 3 * E / 4, np.diag([0.0, 1.0])])
    src = write(tmp_path, "p.json", P)
    dst = str(tmp_path / "s.json")
    code, out, _ = run(capsys, "simplify", src, "-o", dst)
    assert code == 0 and len(json.loads(out)["effects"]) == 2
    code, out, _ = run(capsys, "validate", dst)
    assert code == 0 and json.loads(out)["length"] == 2


def test_fisher_rho_sources(tmp_path, capsys):
    x = write(tmp_path, "x.json", pv.make_qubit_dichotomic(0.7, [1, 0, 0]))
    code, out, _ = run(capsys, "fisher", x, "--rho", "bloch:0,0,0.5")
    assert code == 0 and abs(json.loads(out)["trace"] - 1.49) < 1e-9
    rho_path = tmp_path / "rho.json"
    rho_path.write_text(json.dumps({"rho": [[[0.6, 0], [0, 0]], [[0, 0], [0.4, 0]]]}))
    code, out, _ = run(capsys, "fisher", x, "--rho", str(rho_path), "--truncated")
    assert code == 0 and json.loads(out)["truncated"] is True
    code, _, _ = run(capsys, "fisher", x, "--rho", "bloch:1,1,0")
    assert code == 2


def test_ft_and_joint(tmp_path, capsys):
    code, out, _ = run(capsys, "ft", "--etas", "0.6,0.6,0.6", "--axes", "trine")
    assert code == 0 and json.loads(out)["compatible"] is True
    code, out, _ = run(capsys, "ft", "--etas", "0.6,0.6,0.6", "--axes", "1,0,0;0,1,0;0,0,1")
    assert json.loads(out)["compatible"] is False
    a = write(tmp_path, "a.json", pv.make_qubit_dichotomic(0.5, [1, 0, 0]))
    b = write(tmp_path, "b.json", pv.make_qubit_dichotomic(0.5, [0, 0, 1]))
    code, out, _ = run(capsys, "joint", a, b)
    data = json.loads(out)
    assert data["feasible"] and len(data["joint"]["effects"]) == 4


def test_outcome_bound_and_pgm(tmp_path, capsys):
    files = [write(tmp_path, f"m{i}.json", P) for i, P in enumerate(pv.make_fourier_pair(2, 1, 1))]
    code, out, _ = run(capsys, "outcome-bound", *files)
    assert code == 0 and json.loads(out)["outcome_bound"] >= 3 - 1e-9
    code, out, _ = run(capsys, "incompat", *files, "--pgm", "--format", "csv")
    header, _ = out.strip().split("\n")
    assert header.startswith("verdict,height,threshold,margin")
    code, out, _ = run(capsys, "incompat", *files, "--format", "human")
    assert "verdict: incompatible" in out


def test_scan_csv(capsys):
    code, out, _ = run(capsys, "scan", "planar", "--M", "2", "--grid", "3", "--format", "csv")
    lines = out.strip().split("\n")
    assert code == 0 and lines[0] == "lam,height,zhu_verdict,analytic_flag,oracle_verdict"
    assert len(lines) == 4
    code, out, _ = run(capsys, "scan", "qubit-triple", "--axes", "xyz", "--pattern", "*,0.5,0.5", "--grid", "3")
    assert code == 0 and len(json.loads(out)["records"]) == 3


def test_json_output_is_strict(capsys):
    _, out, _ = run(capsys, "scan", "fourier", "--d", "2", "--grid", "3")
    json.loads(out, parse_constant=lambda c: pytest.fail(f"non-strict constant {c}"))


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "povm_order", "ft", "--etas", "0.5,0.5,0.5"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and json.loads(proc.stdout)["compatible"]


def test_scan_accepts_mixed_bloch_keyword(capsys):
    assert cli.main(["scan", "qubit-pair", "--bloch", "mixed", "--pattern", "*,0.5", "--grid", "2"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["records"][0]["v1"] == 0.5
    assert abs(data["records"][0]["v2"] - 1 / 3) < 1e-9
