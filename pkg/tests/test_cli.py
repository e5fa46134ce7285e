import json
import math
import subprocess
import sys

import pytest

from multop.cli import main


def write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(cfg if isinstance(cfg, str) else json.dumps(cfg))
    return str(p)


def finite_cfg(symbol, **task):
    cfg = {"version": 1, "space": {"mode": "finite", "atoms": [0.0, 0.5, 1.0]}, "symbol": symbol,
           "norm": {"type": "lp", "p": 2}}
    if task:
        cfg["task"] = task
    return cfg


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_analyze_scalar_identity(tmp_path, capsys):
    path = write(tmp_path, finite_cfg({"kind": "constant", "matrix": [[2, 0], [0, 2]]}))
    code, out, _ = run(["analyze", "--config", path], capsys)
    rep = json.loads(out)
    assert code == 0
    assert rep["operator_norm"] == 2 and rep["invertible"] is True
    assert rep["spectrum"]["points"] == [{"re": 2.0, "im": 0.0}]
    assert rep["essential_range"] == "not-applicable"


def test_analyze_out_file(tmp_path, capsys):
    path = write(tmp_path, finite_cfg({"kind": "table", "matrices": [1, {"re": 0, "im": 2}, "-3"]}))
    out = tmp_path / "rep.json"
    code, stdout, _ = run(["analyze", "--config", path, "--out", str(out)], capsys)
    rep = json.loads(out.read_text())
    assert code == 0 and stdout == ""
    assert rep["operator_norm"] == 3 and rep["closed_range"] is True
    assert len(rep["essential_range"]["points"]) == 3


def test_malformed_json(tmp_path, capsys):
    code, _, err = run(["analyze", "--config", write(tmp_path, '{"version": 1, "space": {')], capsys)
    assert code == 2 and "malformed JSON" in err


@pytest.mark.parametrize("mutate, key", [
    (lambda c: c.pop("space"), "space"),
    (lambda c: c.update(version=2), "version"),
    (lambda c: c["space"].update(mode="weird"), "space.mode"),
    (lambda c: c["symbol"].update(kind="lazy"), "symbol.kind"),
    (lambda c: c["symbol"].update(matrix=[["1+"]]), "symbol.matrix[0][0]"),
    (lambda c: c["norm"].update(p="two"), "norm.p"),
    (lambda c: c.update(task={"t_grid": [0, 2, 1]}), "task.t_grid"),
])
def test_config_errors_name_key(tmp_path, capsys, mutate, key):
    cfg = finite_cfg({"kind": "expr", "matrix": [["x"]]})
    mutate(cfg)
    code, _, err = run(["analyze", "--config", write(tmp_path, cfg)], capsys)
    assert code == 2
    assert f"'{key}'" in err


def test_nonfinite_symbol_exit_3(tmp_path, capsys):
    path = write(tmp_path, finite_cfg({"kind": "expr", "matrix": [["1/x"]]}))
    code, _, err = run(["analyze", "--config", path], capsys)
    assert code == 3 and "atom_index=0" in err


def test_evolve_decay(tmp_path, capsys):
    path = write(tmp_path, finite_cfg({"kind": "constant", "matrix": [[-1]]}, t_grid=[0, 1], initial=[1]))
    summary = tmp_path / "s.json"
    code, out, _ = run(["evolve", "--config", path, "--summary", str(summary)], capsys)
    assert code == 0
    rows = [r.split(",") for r in out.splitlines()]
    assert rows[0] == ["t", "atom_index", "component", "re", "im"]
    assert len(rows) == 7
    for r in rows[1:4]:
        assert float(r[3]) == 1
    for r in rows[4:]:
        assert abs(float(r[3]) - math.exp(-1)) <= 1e-12
    s = json.loads(summary.read_text())
    assert s["generates_c0"] is True and s["c"] == 1 and s["spectral_bound_ess"] == -1


def test_evolve_nilpotent(tmp_path, capsys):
    path = write(tmp_path, finite_cfg({"kind": "constant", "matrix": [[0, 1], [0, 0]]}, t_grid=[0, 1], initial=[0, 1]))
    code, out, _ = run(["evolve", "--config", path], capsys)
    last = [r.split(",") for r in out.splitlines() if r.startswith("1,0,")]
    assert code == 0
    assert [float(r[3]) for r in last] == [1.0, 1.0]


def test_evolve_generation_failure(tmp_path, capsys):
    cfg = {
        "version": 1,
        "space": {"mode": "sequence", "truncation": 20},
        "symbol": {"kind": "expr", "matrix": [["0", "x"], ["0", "0"]],
                   "tail": {"norm": "x", "monotone": "increasing", "limit": "inf", "spectral_abscissa": 0}},
        "task": {"t_grid": [0, 1], "initial": [0, 1]},
    }
    path = write(tmp_path, cfg)
    code, _, _ = run(["evolve", "--config", path], capsys)
    assert code == 4
    code, out, _ = run(["evolve", "--config", path, "--force"], capsys)
    assert code == 0 and out.startswith("t,atom_index")


def test_laplace_command(tmp_path, capsys):
    path = write(tmp_path, finite_cfg({"kind": "constant", "matrix": [[-1]]}, m=0, **{"lambda": 1}))
    code, out, _ = run(["laplace", "--config", path], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["passed"] and rep["relative_error"] <= 1e-9
    bad = write(tmp_path, finite_cfg({"kind": "constant", "matrix": [[1]]}, **{"lambda": 1.1}), "bad.json")
    code, _, err = run(["laplace", "--config", bad], capsys)
    assert code == 2 and "task.lambda" in err


def test_verify_config_scoped(tmp_path, capsys):
    path = write(tmp_path, finite_cfg({"kind": "expr", "matrix": [["x", "1"], ["0", "-x"]]}))
    code, out, _ = run(["verify", "--config", path], capsys)
    rep = json.loads(out)
    names = [c["name"] for c in rep["checks"]]
    assert code == 0 and rep["passed"]
    assert "norm-theorem" in names and "fredholm-equivalence" not in names


def test_verify_fault_injection(capsys):
    code, out, _ = run(["verify", "--suite", "builtin", "--seed", "3", "--inject-fault", "norm"], capsys)
    rep = json.loads(out)
    failed = [c["name"] for c in rep["checks"] if not c["passed"]]
    assert code == 1 and failed == ["norm-theorem"]


def test_verify_unknown_suite(capsys):
    code, _, err = run(["verify", "--suite", "nightly"], capsys)
    assert code == 2 and "--suite" in err


def test_module_entry_point(tmp_path):
    path = write(tmp_path, finite_cfg({"kind": "constant", "matrix": [[1]]}))
    res = subprocess.run([sys.executable, "-m", "multop", "analyze", "--config", path],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and json.loads(res.stdout)["operator_norm"] == 1
