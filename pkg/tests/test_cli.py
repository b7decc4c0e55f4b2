import json
import subprocess
import sys

import numpy as np
import pytest

from matrixchaos.cli import main
from matrixchaos.ensembles import regular_lyapunov_closed_form

from _util import random_hermitian


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def csv_rows(text):
    lines = [l for l in text.splitlines() if not l.startswith("#")]
    header = lines[0].split(",")
    return header, [l.split(",") for l in lines[1:]]


@pytest.fixture
def matrix_file(tmp_path, rng):
    H = random_hermitian(rng, 5)
    p = tmp_path / "h.json"
    p.write_text(json.dumps(H.to_document()))
    return str(p), H


def test_inspect(matrix_file, capsys):
    path, H = matrix_file
    code, out, _ = run(["inspect", "--input", path, "--format", "json"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["V"] == 5 and doc["config"]["input"] == path
    assert "threads" not in doc["config"]


def test_sweep_regular_matches_closed_form(capsys):
    code, out, _ = run(["sweep", "--ensemble", "regular", "--d", "3", "--v", "8",
                        "--egrid=-2:2:5", "--per-vertex"], capsys)
    assert code == 0
    assert out.startswith("# matrixchaos {")
    header, rows = csv_rows(out)
    assert header[:8] == ["E", "lambda_mean", "lambda_var", "local_min", "local_max", "gap",
                          "abs_zeta", "status"]
    assert len(header) == 8 + 8
    for r in rows:
        E, lam = float(r[0]), float(r[1])
        assert lam == pytest.approx(regular_lyapunov_closed_form(3, E), abs=1e-12)
        assert r[7] == "ok"


def test_sweep_records_failing_points(capsys):
    # K4 has triangles, so every bipartite reduction fails
    code, out, _ = run(["sweep", "--ensemble", "regular", "--d", "3", "--v", "4",
                        "--kind", "complete", "--egrid=0:1:2", "--bipartite-reduce"], capsys)
    assert code == 0
    _, rows = csv_rows(out)
    assert all(r[7] == "error:NotBipartiteError" for r in rows)


def test_spectrum_matches_eigvalsh(matrix_file, capsys):
    path, H = matrix_file
    code, out, _ = run(["spectrum", "--input", path], capsys)
    assert code == 0
    _, rows = csv_rows(out)
    got = np.repeat([float(r[0]) for r in rows], [int(r[1]) for r in rows])
    np.testing.assert_allclose(got, np.linalg.eigvalsh(H.data), atol=1e-8)


def test_secular_and_markov(matrix_file, capsys):
    path, _ = matrix_file
    code, out, _ = run(["secular", "--input", path, "--egrid=-1:1:3"], capsys)
    assert code == 0 and len(csv_rows(out)[1]) == 3
    code, out, _ = run(["markov", "--input", path, "--energy", "0.2"], capsys)
    assert code == 0
    B = np.loadtxt(out.splitlines()[1:], delimiter=",")
    np.testing.assert_allclose(B.sum(axis=0), 1.0, atol=1e-12)
    code, out, _ = run(["markov", "--input", path, "--energy", "0.2", "--format", "json"],
                       capsys)
    assert json.loads(out)["eigenvalues"][0] == pytest.approx([1.0, 0.0], abs=1e-12)


def test_lyapunov_json(capsys):
    code, out, _ = run(["lyapunov", "--ensemble", "spin", "--alpha", "1", "--energy", "0.5",
                        "--mc-samples", "2000", "--mc-steps", "20", "--seed", "3"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["config"]["seed"] == 3
    assert doc["lambda_mean"] == pytest.approx(doc["lambda_thermo"], abs=1e-6)
    assert doc["methods"]["lambda_mc"] == "monte-carlo"


def test_otoc_columns(capsys):
    code, out, _ = run(["otoc", "--ensemble", "regular", "--d", "3", "--v", "4", "--kind",
                        "complete", "--energy", "0.3", "--t-max", "4", "--b", "5"], capsys)
    assert code == 0
    header, rows = csv_rows(out)
    assert header[:5] == ["t", "a", "b", "lhs", "rhs_formula"]
    for r in rows:
        assert float(r[3]) == pytest.approx(float(r[4]), abs=1e-12)


def test_otoc_skips_enumeration_past_cap(capsys):
    code, out, _ = run(["otoc", "--ensemble", "regular", "--d", "3", "--v", "4", "--kind",
                        "complete", "--energy", "0", "--t-max", "13", "--b", "11"], capsys)
    assert code == 0
    _, rows = csv_rows(out)
    assert rows[11][6] == "44287"
    assert rows[12][6:] == ["", "", ""]


def test_ensemble_round_trip(tmp_path, capsys):
    out_path = tmp_path / "gbe.json"
    code, _, _ = run(["ensemble", "--ensemble", "gbe", "--v", "10", "--beta", "2",
                      "--seed", "4", "--out", str(out_path)], capsys)
    assert code == 0
    code, out, _ = run(["spectrum", "--input", str(out_path), "--format", "json"], capsys)
    assert code == 0 and len(json.loads(out)["roots"]) == 10


@pytest.mark.parametrize(
    "argv, code",
    [
        (["sweep", "--ensemble", "regular", "--d", "3", "--v", "8"], 2),
        (["spectrum"], 2),
        (["sweep", "--ensemble", "regular", "--d", "3", "--v", "8", "--egrid", "x"], 2),
        (["inspect", "--ensemble", "regular", "--d", "3", "--v", "7"], 3),
        (["ensemble", "--ensemble", "spin", "--n-spins", "13"], 3),
        (["otoc", "--ensemble", "regular", "--d", "3", "--v", "4", "--energy", "0",
          "--b", "99"], 2),
    ],
)
def test_exit_codes(argv, code, capsys):
    assert main(argv) == code
    assert capsys.readouterr().err


def test_bad_input_file(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{"v": 2, "entries": [[0, 1, 0, 1]]}')
    assert main(["inspect", "--input", str(p)]) == 3
    assert "HermiticityError" in capsys.readouterr().err


def test_argparse_usage_exit():
    with pytest.raises(SystemExit) as exc:
        main(["nonsense"])
    assert exc.value.code == 2


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "matrixchaos", "inspect", "--ensemble", "regular", "--d", "2",
         "--v", "5"],
        capture_output=True, text=True, check=True,
    )
    assert "D=10" in res.stdout
