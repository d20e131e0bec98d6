import json
import subprocess
import sys

import pytest

from stochlie import models
from stochlie.cli import EXIT_ERROR, EXIT_NEGATIVE, EXIT_OK, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def report(capsys, *argv):
    code, out, err = run(capsys, *argv)
    return code, json.loads(out), err


def test_classify_exit_codes(capsys):
    code, rep, _ = report(capsys, "classify", "--model", "oscillator-white-noise")
    assert code == EXIT_OK and rep["result"]["dim"] == 4
    code, rep, _ = report(capsys, "classify", "--model", "sis-strat")
    assert code == EXIT_NEGATIVE and rep["result"]["verdict"] == "NotWithinBounds"


def test_classify_ito_autoconverts_with_notice(capsys):
    code, rep, _ = report(capsys, "classify", "--model", "satellite")
    assert code == EXIT_OK and rep["notices"]


def test_classify_foliated(capsys):
    _, rep, _ = report(capsys, "classify", "--model", "jacobi-sis")
    assert rep["result"]["foliated"] == "yes"


def test_report_deterministic(capsys, tmp_path):
    out, csv = tmp_path / "r.json", tmp_path / "r.csv"
    runs = []
    for _ in range(2):
        assert main(["simulate", "--model", "gbm", "--seed", "7", "--N", "64", "--paths", "5", "--out", str(out), "--csv", str(csv)]) == 0
        runs.append((out.read_bytes(), csv.read_bytes()))
    assert runs[0] == runs[1]
    header = csv.read_text().splitlines()[0]
    assert header == "path,t,X"
    capsys.readouterr()


def test_convert_and_roundtrip(capsys):
    code, rep, _ = report(capsys, "convert", "--model", "sis-ito-100", "--to", "ito")
    assert code == EXIT_OK
    for i in models.ids():
        code, rep, _ = report(capsys, "convert", "--model", i, "--roundtrip")
        assert code == EXIT_OK and rep["result"]["roundtrip_identity"] is True


def test_simulate_interpretation_guard(capsys):
    code, _, err = run(capsys, "simulate", "--model", "oscillator-white-noise", "--scheme", "em", "--N", "10")
    assert code == EXIT_ERROR and "error" in err
    code, rep, _ = report(capsys, "simulate", "--model", "oscillator-white-noise", "--scheme", "em", "--N", "10", "--auto-convert")
    assert code == EXIT_OK and rep["notices"]


def test_dirichlet_cli(capsys):
    code, rep, _ = report(capsys, "analyze", "dirichlet", "--model", "oscillator-white-noise", "--set", "k=0,σ=0", "--f", "(x^2+y^2)/2", "--at", "0,0")
    assert code == EXIT_OK and rep["result"]["conclusion"] == "almost surely stable"


def test_verify_sr_cli(capsys):
    args = ["analyze", "verify-sr", "--model", "oscillator-white-noise", "--trials", "3", "--N", "2000"]
    code, rep, _ = report(capsys, *args, "--rule", "linear2")
    assert code == EXIT_OK and rep["result"]["pass"]
    code, rep, _ = report(capsys, *args, "--rule", "wrong-product")
    assert code == EXIT_NEGATIVE and not rep["result"]["pass"]


def test_hamiltonian_cli(capsys):
    code, rep, _ = report(capsys, "analyze", "hamiltonian", "--model", "sis-hamiltonian")
    assert code == EXIT_OK and rep["result"]["dim"] == 2


def test_casimir_cli(capsys):
    code, rep, _ = report(capsys, "analyze", "casimir", "--model", "sl2-symplectic")
    assert code == EXIT_OK


def test_catalog(capsys):
    code, out, _ = run(capsys, "catalog", "list")
    assert code == EXIT_OK and "riccati" in out
    code, rep, _ = report(capsys, "catalog", "export", "gbm", "--set", "a=2")
    assert code == EXIT_OK and rep["params"]["a"] == "2"


@pytest.mark.parametrize(
    "argv",
    [
        ["classify", "--model", "no-such-thing"],
        ["classify", "--model", "gbm", "--set", "zzz=1"],
        ["classify", "--model", "gbm", "--set", "a=x"],
        ["classify", "--model", "gbm", "--set", "a"],
    ],
)
def test_user_errors_exit_1(capsys, argv):
    assert main(argv) == EXIT_ERROR
    assert "error" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [["classify"], ["frobnicate"], ["simulate", "--model", "gbm", "--N", "ten"]])
def test_usage_errors_exit_1(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == EXIT_ERROR


@pytest.mark.parametrize("content", ["", "{", '{"vars": ["x"], "interpretation": "ito", "drift": [{"field": ["x**"]}]}'])
def test_bad_model_files(capsys, tmp_path, content):
    f = tmp_path / "m.json"
    f.write_text(content)
    assert main(["classify", "--model", str(f)]) == EXIT_ERROR
    err = capsys.readouterr().err
    assert err.startswith("error:") and "Traceback" not in err


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "stochlie", "catalog", "list"], capture_output=True, text=True)
    assert res.returncode == 0 and "gbm" in res.stdout
