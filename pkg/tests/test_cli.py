import json
import subprocess
import sys

import numpy as np
import pytest

from qrigid import cli, opsys
from qrigid import linalg as la
from qrigid.superop import KrausTuple, kraus_to_json


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_range():
    assert cli.parse_range("3") == [3]
    assert cli.parse_range("3..6") == [3, 4, 5, 6]
    assert cli.parse_range("2,4, 7") == [2, 4, 7]
    with pytest.raises(cli.UsageError):
        cli.parse_range("5..3")


def test_certify_fixture(capsys):
    code, out, _ = run(capsys, "certify", "--fixture", "paper-n7-d4")
    obj = json.loads(out)
    assert code == 0
    assert obj["rank"] == 49 and obj["verdict"] == "CERTIFIED_RIGID" and obj["schema"] == 1


def test_certify_exact_sample(capsys):
    code, out, _ = run(capsys, "certify", "--sample", "3", "2", "--seed", "7", "--backend", "exact")
    assert code == 0
    assert json.loads(out)["backend"] == "exact"


def test_certify_inconclusive_exit_1(tmp_path, capsys):
    path = tmp_path / "single.json"
    tup = opsys.OperatorTuple((np.diag([1.0, 2.0, -3.0]).astype(complex),))
    path.write_text(opsys.dumps(opsys.tuple_to_json(tup)))
    code, out, _ = run(capsys, "certify", "--input", str(path))
    assert code == 1
    assert json.loads(out)["closure_dimension"] == 3


def test_certify_dependent_tuple_exit_2(tmp_path, capsys):
    t = np.diag([1.0, -1.0, 0.0]).astype(complex)
    path = tmp_path / "dependent_tuple.json"
    path.write_text(opsys.dumps(opsys.tuple_to_json(opsys.OperatorTuple((t, 2 * t)))))
    code, _, err = run(capsys, "certify", "--input", str(path))
    assert code == 2
    assert "GramSingular" in err


@pytest.mark.parametrize("text", ["{not json", '{"n": 2}'])
def test_certify_malformed_exit_2(tmp_path, capsys, text):
    path = tmp_path / "bad.json"
    path.write_text(text)
    code, _, _ = run(capsys, "certify", "--input", str(path))
    assert code == 2


def test_certify_needs_one_source(capsys):
    assert run(capsys, "certify")[0] == 2
    assert run(capsys, "certify", "--fixture", "paper-n7-d4", "--sample", "3", "2")[0] == 2


def test_sweep_byte_identical(tmp_path, capsys):
    args = ["sweep", "--n", "3", "--d", "2", "--trials", "1", "--seed", "1"]
    code1, out1, _ = run(capsys, *args)
    code2, out2, _ = run(capsys, *args)
    assert code1 == code2 == 0
    assert out1 == out2
    csv1 = run(capsys, *args, "--format", "csv")[1]
    assert csv1 == run(capsys, *args, "--format", "csv")[1]
    assert csv1.startswith("n,d,trials,certified,min_margin,seconds\n")


def test_sweep_timings_flag(capsys):
    out = run(capsys, "sweep", "--n", "3", "--d", "2", "--trials", "1", "--timings")[1]
    assert "seconds" in json.loads(out)["cells"][0]


def test_sweep_n2_vacuous(capsys):
    code, out, _ = run(capsys, "sweep", "--n", "2")
    assert code == 0
    assert json.loads(out)["cells"] == []


@pytest.mark.parametrize("bad", [["--n", "0"], ["--n", "100"], ["--n", "5..3"], ["--trials", "0"]])
def test_sweep_invalid_range(capsys, bad):
    assert run(capsys, "sweep", *bad)[0] == 2


@pytest.mark.parametrize("backend", ["float", "exact"])
def test_check_axioms_full(capsys, backend):
    code, out, _ = run(capsys, "check-axioms", "--system", "full", "--n", "4", "--backend", backend)
    obj = json.loads(out)
    assert code == 0 and obj["all_pass"]


def test_check_axioms_random_system(capsys):
    code, out, _ = run(capsys, "check-axioms", "--system", "random", "--n", "3", "--d", "2")
    obj = json.loads(out)
    assert obj["reflexive"] and obj["self_adjoint"] and obj["completely_positive"]
    assert code == (0 if obj["all_pass"] else 1)


def test_check_axioms_exact_random_rejected(capsys):
    code, _, err = run(capsys, "check-axioms", "--system", "random", "--n", "3", "--d", "2", "--backend", "exact")
    assert code == 2 and "ExactBackendUnsupported" in err


def test_choi_round_trip(tmp_path, capsys):
    rng = np.random.default_rng(0)
    ys = tuple(rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)) for _ in range(2))
    kraus = tmp_path / "kraus.json"
    kraus.write_text(opsys.dumps(kraus_to_json(KrausTuple(ys))))
    choi_path = tmp_path / "choi.json"
    assert run(capsys, "choi", "--input", str(kraus), "--output", str(choi_path))[0] == 0
    assert json.loads(choi_path.read_text())["bipartite"] is True
    code, out, _ = run(capsys, "choi", "--input", str(choi_path), "--direction", "from-choi")
    rep = la.matrix_from_json(json.loads(out)["rep"])
    expected = sum(np.kron(y, y.conj()) for y in ys)
    assert code == 0 and np.allclose(rep, expected)


def test_fixture_bytes(capsys):
    code, out, _ = run(capsys, "fixture", "--name", "paper-n7-d4")
    assert code == 0
    assert out == opsys.fixture_text("paper-n7-d4")


def test_entry_point_subprocess():
    proc = subprocess.run([sys.executable, "-m", "qrigid", "certify", "--fixture", "paper-n7-d4", "--format", "pretty"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert "CERTIFIED_RIGID" in proc.stdout
