import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from orbitkit.cli import main
from orbitkit.matrixio import save_matrix
from orbitkit.partition import log_partition_gradient


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


@pytest.fixture
def diag312(tmp_path):
    p = tmp_path / "d.json"
    save_matrix(p, np.diag([3.0, 1.0, 2.0]))
    return str(p)


def test_min_eig_text_and_json(diag312, tmp_path):
    code, text = run("min-eig", diag312)
    assert code == 0 and float(text.split()[0]) == 1.0
    code, text = run("min-eig", diag312, "--output", "json")
    body = json.loads(text)
    assert body["value"] == 1.0 and np.allclose(np.abs(body["witness_re"]), [0, 1, 0])
    p = tmp_path / "swap.json"
    save_matrix(p, np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert float(run("min-eig", str(p))[1].split()[0]) == pytest.approx(-1.0, abs=1e-15)


def test_min_eig_errors(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{"n": 2, "re": [[1, 0], [0, 1]]}')
    assert run("min-eig", str(p))[0] == 2
    assert "'im'" in capsys.readouterr().err
    p.write_text('{"n": 2, "re": [[1, 2], [0, 1]], "im": [[0, 0], [0, 0]]}')
    assert run("min-eig", str(p))[0] == 2
    assert "Hermitian" in capsys.readouterr().err


def test_partition_output():
    assert run("partition", "--lambda", "0,1") == (0, "0.6321205588285577\n")
    code, text = run("partition", "--lambda", "5")
    assert float(text) == pytest.approx(math.exp(-5), rel=1e-15)
    code, text = run("partition", "--lambda", "0,0")
    near = float(run("partition", "--lambda", "0,1e-6")[1])
    assert code == 0 and abs(float(text) - near) <= 1e-6
    assert run("partition", "--lambda", "0,abc")[0] == 2
    assert run("partition")[0] == 2


def test_seventeen_digit_output():
    text = run("partition", "--lambda", "0,1,2")[1].strip()
    assert float(text) == float(repr(float(text)))


def test_hciz_methods():
    assert float(run("hciz", "--y", "0", "--lambda", "7")[1]) == 1.0
    assert float(run("hciz", "--y", "0,1", "--lambda", "0,1", "--method", "det")[1]) == \
        pytest.approx(1 - math.exp(-1), rel=1e-14)
    texts = [run("hciz", "--y", "0,1,2", "--lambda", "0,1,3", "--method", m)[1]
             for m in ("det", "weyl")]
    assert texts[0] == texts[1]
    vals = [float(t) for t in texts]
    ind = float(run("hciz", "--y", "0,1,2", "--lambda", "0,1,3", "--method", "induction",
                    "--quad-points", "80")[1])
    assert ind == pytest.approx(vals[1], rel=1e-8)
    assert run("hciz", "--y", "0,1", "--lambda", "1,1", "--method", "weyl")[0] == 2
    assert run("hciz", "--y", "0,1", "--lambda", "1")[0] == 2


def test_horn_command():
    code, text = run("horn", "--v", "0.7,0.3", "--lambda", "0,1")
    body = json.loads(text)
    U = np.array(body["re"]) + 1j * np.array(body["im"])
    assert code == 0
    assert np.allclose(np.diagonal(U @ np.diag([0.0, 1.0]) @ U.conj().T).real, [0.7, 0.3])
    assert run("horn", "--v", "2,0", "--lambda", "1,1")[0] == 2


def test_sample_determinism(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert run("sample", "haar", "--n", "2", "--count", "3", "--seed", "7", "--out", str(p))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert lines[0] == "u0_0_re,u0_0_im,u0_1_re,u0_1_im,u1_0_re,u1_0_im,u1_1_re,u1_1_im"
    assert len(lines) == 4
    U = np.array([float(x) for x in lines[1].split(",")]).view(complex).reshape(2, 2)
    assert np.allclose(U @ U.conj().T, np.eye(2), atol=1e-14)


def test_sample_seed_from_environment(monkeypatch):
    monkeypatch.setenv("ORBITKIT_SEED", "11")
    env = run("sample", "orbit", "--lambda", "0,1", "--count", "2")[1]
    flag = run("sample", "orbit", "--lambda", "0,1", "--count", "2", "--seed", "11")[1]
    assert env == flag
    monkeypatch.setenv("ORBITKIT_SEED", "-3")
    assert run("sample", "orbit", "--lambda", "0,1")[0] == 2


def test_sample_minors_mean():
    text = run("sample", "minors", "--lambda", "0,1", "--count", "10000", "--seed", "3")[1]
    a = np.array([float(x) for x in text.splitlines()[1:]])
    assert a.size == 10_000
    assert abs(a.mean() - 0.5) <= 3 * a.std(ddof=1) / math.sqrt(a.size)


def test_sample_bingham_gradient_mean(tmp_path):
    A = np.diag([0.0, 1.0, 2.5])
    p = tmp_path / "A.json"
    save_matrix(p, A)
    text = run("sample", "bingham", "--matrix", str(p), "--count", "10000", "--seed", "1")[1]
    rows = np.array([[float(x) for x in line.split(",")] for line in text.splitlines()[1:]])
    v = rows.view(complex)
    x = np.abs(v) ** 2
    g = log_partition_gradient(np.diag(A))
    se = x.std(axis=0, ddof=1) / math.sqrt(x.shape[0])
    assert np.all(np.abs(x.mean(axis=0) - g) <= 3 * se)


def test_sample_json_and_simplex():
    body = json.loads(run("sample", "simplex", "--lambda", "0,1,2", "--count", "4",
                          "--method", "rejection", "--format", "json", "--seed", "2")[1])
    pts = np.array(body["samples"])
    assert pts.shape == (4, 3) and np.allclose(pts.sum(axis=1), 1)
    body = json.loads(run("sample", "haar", "--n", "2", "--format", "json")[1])
    assert set(body["samples"][0]) == {"n", "re", "im"}


@pytest.mark.parametrize("argv", [
    ("sample", "wishart", "--n", "2"),
    ("sample", "haar"),
    ("sample", "minors", "--n", "3", "--lambda", "0,1"),
    ("sample", "orbit", "--lambda", "0,1", "--method", "rejection"),
    ("sample", "haar", "--n", "2", "--count", "0"),
    ("sample", "haar", "--n", "2", "--seed", "x"),
])
def test_sample_usage_errors(argv):
    assert run(*argv)[0] == 2


def test_verify_partition_pass():
    code, text = run("verify", "partition", "--lambda", "0,1,2", "--trials", "1000000",
                     "--seed", "3")
    body = json.loads(text)
    assert code == 0 and body["pass"] is True
    assert set(body) == {"closed_form", "mc_mean", "mc_stderr", "n_samples", "z_score", "pass"}
    assert body["z_score"] == pytest.approx(
        (body["closed_form"] - body["mc_mean"]) / body["mc_stderr"], rel=1e-12)


def test_verify_hciz_and_threads():
    args = ("verify", "hciz", "--y", "0,1,2", "--lambda", "0,1,3", "--trials", "1000000")
    code, one = run(*args)
    assert code == 0 and json.loads(one)["pass"]
    assert run(*args, "--threads", "4")[1] == one


def test_verify_bombieri_all_pass():
    code, text = run("verify", "bombieri", "--n", "3", "--trials", "1000000", "--seed", "1")
    body = json.loads(text)
    assert code == 0 and len(body) == 20 and all(r["pass"] for r in body)


def test_verify_baryshnikov_and_bingham(tmp_path):
    code, text = run("verify", "baryshnikov", "--lambda", "0,1,2", "--trials", "100000")
    assert code == 0 and json.loads(text)["closed_form"] == pytest.approx(19 / 12, rel=1e-13)
    p = tmp_path / "A.json"
    save_matrix(p, np.array([[1.0, 0.5j], [-0.5j, 0.0]]))
    code, text = run("verify", "bingham", "--matrix", str(p), "--trials", "100000")
    assert code == 0 and len(json.loads(text)) == 2


def test_verify_failure_exit_code(monkeypatch):
    # a wrong closed form must be reported as a failure with the full report
    import orbitkit.verify as verify

    monkeypatch.setattr(verify, "partition_p1", lambda lam: 0.5)
    code, text = run("verify", "partition", "--lambda", "0,1,2", "--trials", "100000")
    assert code == 1 and json.loads(text)["pass"] is False


def test_verify_usage_errors():
    assert run("verify", "partition", "--trials", "10")[0] == 2
    assert run("verify", "nonsense")[0] == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "orbitkit", "partition", "--lambda", "0,1"],
                          capture_output=True, text=True, check=True)
    assert proc.stdout == "0.6321205588285577\n"
