import io
import json
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from planarswitch.cli import parse_beta_grid, run_command

ROOT = Path(__file__).resolve().parents[1]
SPECS = ROOT / "specs"


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run_command(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def write_spec(tmp_path, obj, name="s.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def test_check_rotations_example():
    code, out, _ = run("check", "--spec", str(SPECS / "ex2_a1_b3.json"))
    assert code == 0
    res = json.loads(out)
    assert res["holds"] is True
    assert res["lhs"] == pytest.approx(-7.1111, abs=1e-4)
    assert res["rhs"] == pytest.approx(-4.0)
    assert len(res["lambda_window"]) == 2


def test_check_matrix_spec_matches_family_spec():
    a = json.loads(run("check", "--spec", str(SPECS / "ex2_matrices.json"))[1])
    b = json.loads(run("check", "--spec", str(SPECS / "ex2_a1_b3.json"))[1])
    assert a["lhs"] == pytest.approx(b["lhs"]) and a["lambda_window"] == pytest.approx(b["lambda_window"])


def test_not_hurwitz_exit_2():
    code, out, err = run("check", "--spec", str(SPECS / "not_hurwitz.json"))
    assert code == 2 and out == ""
    assert err.strip() == "A0 not Hurwitz"


def test_criterion_failure_is_named(tmp_path):
    spec = write_spec(tmp_path, {"A0": [[-1, 0], [0, -2]], "A1": [[-2, 0], [0, -1]], "lambda": 0.5})
    code, out, _ = run("check", "--spec", spec)
    assert code == 0 and json.loads(out)["holds"] is False
    code, _, err = run("classify", "--spec", spec)
    assert code == 2 and err.startswith("criterion fails")


def test_no_transition_message(tmp_path):
    spec = write_spec(tmp_path, {"family": "rotations", "a": 1, "b": 2})
    code, _, err = run("beta-c", "--spec", spec)
    assert code == 2 and err.startswith("no transition: b <= 1+sqrt(1+a^2)")


def test_usage_and_io_exit_codes(tmp_path):
    assert run("frobnicate", "--spec", str(SPECS / "ex1_b2.json"))[0] == 64
    assert run("check")[0] == 64
    assert run("check", "--spec", str(SPECS / "ex1_b2.json"), "--seed", "-1")[0] == 64
    assert run("check", "--spec", str(tmp_path / "missing.json"))[0] == 66
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run("check", "--spec", str(bad))[0] == 66
    assert run("check", "--spec", write_spec(tmp_path, {"family": "rotations", "b": 3}))[0] == 2
    assert run("check", "--spec", write_spec(tmp_path, {"A0": [[-1, 0], [0, -1]], "A1": [1, 2]}))[0] == 2


def test_chi_mc_is_byte_reproducible():
    args = ("chi-mc", "--spec", str(SPECS / "ex2_a1_b3.json"), "--seed", "7", "--horizon", "2000",
            "--replicas", "4")
    a, b = run(*args), run(*args)
    assert a[0] == 0 and a == b
    res = json.loads(a[1])
    assert res["seed"] == 7 and res["replicas"] == 4


def test_chi_mc_warns_for_two_classes():
    code, out, err = run("chi-mc", "--spec", str(SPECS / "ex1_b2.json"), "--horizon", "500", "--replicas", "2")
    assert code == 0 and "two recurrent classes" in err


def test_classify_and_certificate():
    res = json.loads(run("classify", "--spec", str(SPECS / "ex1_b2.json"))[1])
    assert res["label"] == "e" and res["invariant_interval"][1] == pytest.approx(math.pi / 2)
    res = json.loads(run("certificate", "--spec", str(SPECS / "ex2_a1_b3.json"))[1])
    assert set(res) >= {"rho", "kappa0", "kappa1", "beta1", "beta_c"}
    assert 0 < res["beta1"] <= res["beta_c"]


def test_expm_command():
    code, out, _ = run("expm", "--spec", str(SPECS / "ex1_b2.json"), "--t", "0.5")
    res = json.loads(out)
    e = math.exp(-0.5)
    # exp(t (-I + 2b N)) = e^{-t} (I + 2b t N) with b = 2, t = 1/2
    assert np.allclose(res["expm"], [[e, 2.0 * e], [0.0, e]], rtol=1e-14)


def test_chi_exact_and_beta_c_json():
    res = json.loads(run("chi-exact", "--spec", str(SPECS / "ex2_a1_b3.json"))[1])
    assert res["beta"] == 2.0 and res["chi_exact"] < 0
    res = json.loads(run("beta-c", "--spec", str(SPECS / "ex2_a1_b3.json"))[1])
    assert res["beta_c"] == pytest.approx(7.177385516, rel=1e-9)
    code, _, err = run("chi-exact", "--spec", str(SPECS / "ex2_matrices.json"))
    assert code == 2 and "family" in err


def read_csv(text):
    meta = [l for l in text.splitlines() if l.startswith("#")]
    body = [l for l in text.splitlines() if not l.startswith("#")]
    return meta, body[0].split(","), [list(map(float, l.split(",")[:2])) + l.split(",")[2:] for l in body[1:]]


def test_density_csv(tmp_path):
    out = tmp_path / "d.csv"
    code, stdout, _ = run("density", "--spec", str(SPECS / "ex2_a1_b3.json"), "--bins", "64", "--out", str(out))
    assert code == 0 and stdout == ""
    meta, header, rows = read_csv(out.read_text())
    assert header == ["theta", "weight_i0", "weight_i1"]
    assert len(rows) == 64
    assert any(m.startswith("# seed:") for m in meta)


def test_sweep_csv_columns_and_order(tmp_path):
    out = tmp_path / "s.csv"
    code, _, _ = run("sweep", "--spec", str(SPECS / "ex2_a1_b3.json"), "--beta-grid", "8:1:3",
                     "--horizon", "200", "--replicas", "2", "--out", str(out))
    # lo > hi is a usage error
    assert code == 64
    code, _, _ = run("sweep", "--spec", str(SPECS / "ex2_a1_b3.json"), "--beta-grid", "1:8:3:log",
                     "--horizon", "200", "--replicas", "2", "--out", str(out))
    assert code == 0
    text = out.read_text()
    body = [l for l in text.splitlines() if not l.startswith("#")]
    assert body[0] == "beta,chi_exact,chi_mc,chi_mc_stderr"
    betas = [float(l.split(",")[0]) for l in body[1:]]
    assert betas == sorted(betas) and len(betas) == 3
    code, _, _ = run("sweep", "--spec", str(SPECS / "ex2_matrices.json"), "--beta-grid", "1:2:2",
                     "--horizon", "100", "--replicas", "2", "--out", str(out))
    assert out.read_text().splitlines()[-3] == "beta,chi_mc,chi_mc_stderr"


def test_products_command(tmp_path):
    out = tmp_path / "p.csv"
    code, stdout, _ = run("products", "--spec", str(SPECS / "ex2_a1_b3.json"), "--steps", "5000",
                          "--replicas", "2", "--trace-every", "500", "--out", str(out))
    assert code == 0
    res = json.loads(stdout)
    assert res["variant"] == "alternating" and "predicted" in res
    body = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    assert body[0] == "k,running_estimate" and len(body) == 11


def test_beta_grid_parser():
    assert list(parse_beta_grid("1:3:3")) == [1.0, 2.0, 3.0]
    assert parse_beta_grid("1:100:3:log")[1] == pytest.approx(10.0)
    for bad in ("1:2", "1:2:x", "0:1:3:log", "1:2:3:lin"):
        with pytest.raises(Exception):
            parse_beta_grid(bad)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "planarswitch", "check", "--spec", str(SPECS / "ex2_a1_b3.json")],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and json.loads(proc.stdout)["holds"] is True
