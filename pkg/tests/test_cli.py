import csv
import json
import subprocess
import sys

import pytest

from majdyn import cli, harness
from majdyn.errors import HorizonExceeded, ValidationError
from majdyn.harness import ExperimentSpec, spec_from_dict


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    info = json.loads(out) if out.strip() else None
    return code, info, err


def write_cfg(path, data):
    path.write_text(json.dumps(data))
    return str(path)


def read_tree(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir())}


def test_simulate_ok_and_deterministic(tmp_path, capsys):
    cfg = write_cfg(tmp_path / "c.json", {"graph": {"generator": "torus", "params": {"rows": 5}}, "trials": 3})
    code, info, _ = run(capsys, "simulate", "--config", cfg, "--out", str(tmp_path / "a"), "--seed", "4")
    assert code == 0 and info["status"] == "ok"
    first = read_tree(tmp_path / "a" / info["outdir"].split("/")[-1])
    assert {"manifest.json", "summary.json", "trajectory_0.json", "flips_2.csv", "energy_1.csv"} <= set(first)
    # the same spec elsewhere gives byte-identical files
    code, info2, _ = run(capsys, "simulate", "--config", cfg, "--out", str(tmp_path / "b"), "--seed", "4")
    assert code == 0
    assert read_tree(tmp_path / "b" / info2["outdir"].split("/")[-1]) == first


def test_simulate_async_rational(tmp_path, capsys):
    code, info, _ = run(
        capsys, "simulate", "--model", "async", "--mode", "rational", "--trials", "2", "--out", str(tmp_path)
    )
    assert code == 0
    summary = json.loads((tmp_path / info["outdir"].split("/")[-1] / "summary.json").read_text())
    assert all(r["max_residual"] == "0" and r["lyapunov_monotone"] for r in summary["runs"])


def test_bad_p_exits_2(tmp_path, capsys):
    code, info, err = run(capsys, "simulate", "--p", "1.5", "--out", str(tmp_path))
    assert code == 2 and info is None
    assert err.startswith("error: p:")
    cfg = write_cfg(tmp_path / "c.json", {"trials": 0})
    code, _, err = run(capsys, "estimate", "--config", cfg, "--out", str(tmp_path))
    assert code == 2 and "trials" in err
    assert not any(p.is_dir() for p in tmp_path.iterdir())


def test_validation_messages():
    with pytest.raises(ValidationError, match="^graph"):
        spec_from_dict({"graph": {"generator": "hexagon"}})
    with pytest.raises(ValidationError, match="^estimator.kind"):
        spec_from_dict({"estimator": {"kind": "oracle"}})
    with pytest.raises(ValidationError, match="graph.params"):
        harness.build_graph_from_spec({"generator": "complete", "params": {}})


def test_theorem_failure_exits_3(tmp_path, capsys, monkeypatch):
    def boom(*a, **k):
        raise HorizonExceeded("no cycle within the horizon")

    monkeypatch.setattr(harness, "run_sync_until_cycle", boom)
    code, info, _ = run(capsys, "simulate", "--trials", "1", "--out", str(tmp_path))
    assert code == 3 and info["status"] == "FAILED"
    summary = json.loads((tmp_path / info["outdir"].split("/")[-1] / "summary.json").read_text())
    assert summary["runs"][0]["error"].startswith("HorizonExceeded")


def test_estimate_triangle(tmp_path, capsys):
    code, info, _ = run(capsys, "estimate", "--trials", "20000", "--seed", "1", "--out", str(tmp_path))
    assert code == 0
    d = tmp_path / info["outdir"].split("/")[-1]
    res = json.loads((d / "result.json").read_text())
    assert abs(res["error_rate"] - 0.028) <= 3 * (0.028 * 0.972 / 20000) ** 0.5
    rows = list(csv.reader((d / "result.csv").open()))
    assert rows[0] == ["graph", "p", "estimator", "trials", "errors", "rate", "ci", "ties"]


def test_estimate_percolation(tmp_path, capsys):
    cfg = write_cfg(
        tmp_path / "c.json",
        {
            "graph": {"generator": "percolation", "params": {"base": {"generator": "torus", "params": {"rows": 12}}, "q": 0.8}},
            "p": 0.9,
            "trials": 50,
        },
    )
    code, info, _ = run(capsys, "estimate", "--config", cfg, "--out", str(tmp_path))
    assert code == 0
    res = json.loads((tmp_path / info["outdir"].split("/")[-1] / "result.json").read_text())
    assert res["trials"] == 50


def test_sweep_grid_and_workers(tmp_path, capsys):
    data = {
        "graph": {"generator": "torus", "params": {"rows": 5}},
        "trials": 200,
        "grid": {"p": [0.7, 0.9], "model": ["sync", "async"]},
    }
    cfg = write_cfg(tmp_path / "c.json", data)
    code, info, _ = run(capsys, "sweep", "--config", cfg, "--out", str(tmp_path / "one"))
    assert code == 0
    one = tmp_path / "one" / info["outdir"].split("/")[-1] / "sweep.csv"
    rows = list(csv.reader(one.open()))
    assert rows[0][:3] == ["cell_p", "cell_model", "status"]
    assert [r[:3] for r in rows[1:]] == [["0.7", "sync", "ok"], ["0.7", "async", "ok"], ["0.9", "sync", "ok"], ["0.9", "async", "ok"]]
    code, info, _ = run(capsys, "sweep", "--config", cfg, "--out", str(tmp_path / "two"), "--workers", "2")
    two = tmp_path / "two" / info["outdir"].split("/")[-1] / "sweep.csv"
    assert one.read_bytes() == two.read_bytes()


def test_sweep_empty_grid(tmp_path, capsys):
    code, info, _ = run(capsys, "sweep", "--out", str(tmp_path))
    assert code == 0
    text = (tmp_path / info["outdir"].split("/")[-1] / "sweep.csv").read_text()
    assert text.count("\n") == 1 and text.startswith("status,graph,p")


def test_verify_suites(tmp_path, capsys):
    for suite in ("period", "bunker", "monopoly", "gadget"):
        code, info, _ = run(capsys, "verify", suite, "--trials", "5", "--out", str(tmp_path))
        assert code == 0, suite
        rep = json.loads((tmp_path / info["outdir"].split("/")[-1] / "report.json").read_text())
        assert rep["passed"] and rep["counterexample"] is None


def test_verify_needs_suite(tmp_path, capsys):
    code, _, err = run(capsys, "verify", "--out", str(tmp_path))
    assert code == 2 and "suite" in err


def test_gadget_demo(tmp_path, capsys):
    code, info, _ = run(capsys, "gadget-demo", "--trials", "10", "--out", str(tmp_path))
    assert code == 0
    s = json.loads((tmp_path / info["outdir"].split("/")[-1] / "summary.json").read_text())
    assert s["max_stabilization"] <= 2 and len(s["gadgets"]) == 1


def test_toml_config_and_manifest_replay(tmp_path, capsys):
    toml = tmp_path / "c.toml"
    toml.write_text('model = "sync"\np = 0.8\ntrials = 100\nseed = 7\n[graph]\ngenerator = "cycle"\n[graph.params]\nn = 9\n')
    code, info, _ = run(capsys, "estimate", "--config", str(toml), "--out", str(tmp_path / "a"))
    assert code == 0
    d = tmp_path / "a" / info["outdir"].split("/")[-1]
    code, info2, _ = run(capsys, "estimate", "--config", str(d / "manifest.json"), "--out", str(tmp_path / "b"))
    assert code == 0
    d2 = tmp_path / "b" / info2["outdir"].split("/")[-1]
    assert d.name == d2.name
    assert read_tree(d) == read_tree(d2)


def test_digest_ignores_out_and_workers():
    a = ExperimentSpec(out="x", workers=1)
    b = ExperimentSpec(out="y", workers=4)
    assert a.digest() == b.digest() != ExperimentSpec(seed=1).digest()


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "majdyn", "--version"], capture_output=True, text=True, check=True)
    assert out.stdout.startswith("majdyn 0.1.0")
