import json
import subprocess
import sys

import numpy as np
import pytest

from wallenius import parse_dataset, read_chain_csv
from wallenius.cli import main


@pytest.fixture
def run(capsys):
    def _run(*argv):
        code = main([str(a) for a in argv])
        out, err = capsys.readouterr()
        return code, out, err
    return _run


@pytest.fixture
def data3(tmp_path, run):
    path = tmp_path / "d3.csv"
    code, _, _ = run("simulate", "--K", 3, "--m", "10,10,10", "--n", 10, "--w", "0.5,0.3,0.2",
                     "--T", 200, "--seed", 7, "--out", path)
    assert code == 0
    return path


@pytest.fixture
def data2(tmp_path, run):
    path = tmp_path / "d2.csv"
    assert run("simulate", "--K", 2, "--m", "10,10", "--n", 8, "--w", "0.6,0.4", "--T", 5,
               "--seed", 3, "--out", path)[0] == 0
    return path


def test_simulate_then_mle(data3, run):
    assert len(parse_dataset(data3)) == 200
    code, out, _ = run("mle", "--data", data3)
    assert code == 0
    w_hat = json.loads(out)["mle"]["w_hat"]
    assert np.max(np.abs(np.array(w_hat) - [0.5, 0.3, 0.2])) <= 0.05


def test_pmf(run):
    code, out, _ = run("pmf", "--m", "2,1", "--x", "2,0", "--w", "2,1", "--oracle")
    assert code == 0
    rec = json.loads(out)
    assert rec["pmf"] == pytest.approx(8 / 15, abs=1e-11)
    assert rec["pmf_oracle"] == pytest.approx(8 / 15, abs=1e-11)


def test_wilks_with_figure(data2, tmp_path, run):
    svg = tmp_path / "w.svg"
    code, out, _ = run("wilks", "--data", data2, "--level", 0.95, "--level", 0.5, "--svg", svg)
    assert code == 0
    intervals = json.loads(out)["intervals"]
    assert intervals[0]["lower"] < intervals[1]["lower"] < intervals[1]["upper"] < intervals[0]["upper"]
    assert svg.read_text().count("#ff0000") == 1


def test_wilks_boundary_exit_1(tmp_path, run):
    path = tmp_path / "b.csv"
    path.write_text("table_id,category,m,x\nt1,a,1,1\nt1,b,1,0\n")
    code, _, err = run("wilks", "--level", 0.95, "--data", path)
    assert code == 1
    assert "one-sided" in err


def test_region(data3, tmp_path, run):
    out = tmp_path / "r.json"
    code, _, _ = run("region", "--data", data3, "--grid", 60, "--svg", tmp_path / "r.svg",
                     "--out", out)
    assert code == 0
    rec = json.loads(out.read_text())
    assert [r["level"] for r in rec["regions"]] == [0.95, 0.5, 0.05]


def test_boot_ideal(tmp_path, run):
    path = tmp_path / "one.csv"
    path.write_text("table_id,category,m,x\nt1,a,20,14\nt1,b,20,6\n")
    code, out, _ = run("boot", "--data", path, "--kind", "ideal", "--svg", tmp_path / "h.svg")
    assert code == 0
    reps = json.loads(out)["bootstrap"]["replicates"]
    assert len(reps) == 21
    assert sum(r["mass"] for r in reps) == pytest.approx(1.0, abs=1e-9)


def test_swm_long_prior_chain(tmp_path, run):
    chain = tmp_path / "c.csv"
    code, _, _ = run("swm", "--iters", 300_000, "--burnin", 30_000, "--w0", "0.6,0.3,0.1",
                     "--chain", chain, "--out", tmp_path / "s.json")
    assert code == 0
    it, samples, _ = read_chain_csv(chain)
    assert samples.shape == (300_000, 3)
    assert it[0] == 30_001 and it[-1] == 330_000
    np.testing.assert_allclose(samples.sum(axis=1), 1.0, atol=1e-12)


def test_report(data3, tmp_path, run):
    outdir = tmp_path / "rep"
    code, _, _ = run("report", "--data", data3, "--outdir", outdir, "--iters", 2_000,
                     "--B", 10, "--grid", 50, "--seed", 1)
    assert code == 0
    files = sorted(p.name for p in outdir.iterdir())
    assert files == ["bootstrap.svg", "posterior.svg", "regions.svg", "report.json",
                     "summary.csv", "trace.svg"]
    rows = (outdir / "summary.csv").read_text().splitlines()
    assert rows[0].startswith("category,w_hat") and len(rows) == 4


def test_report_per_unit(tmp_path, run):
    path = tmp_path / "flies.csv"
    assert run("simulate", "--K", 3, "--m", "8,8,8", "--n", 8, "--w", "0.5,0.3,0.2", "--T", 3,
               "--seed", 2, "--out", path)[0] == 0
    outdir = tmp_path / "rep"
    code, _, _ = run("report", "--data", path, "--binding", "per_unit_weights",
                     "--outdir", outdir, "--iters", 500, "--autotune")
    assert code == 0
    assert (outdir / "errorbars.svg").exists()
    assert len(json.loads((outdir / "report.json").read_text())["units"]) == 3


@pytest.mark.parametrize("argv", [
    ("bogus",),
    ("mle",),
    ("pmf", "--m", "2,1", "--x", "2,0", "--w", "a,b"),
    ("swm", "--iters", "10", "--burnin", "20", "--w0", "0.5,0.5"),
])
def test_usage_errors_exit_2(run, argv):
    code, _, err = run(*argv)
    assert code == 2
    assert err


def test_validation_error_exit_2(tmp_path, run):
    path = tmp_path / "bad.csv"
    path.write_text("table_id,category,m,x\nt1,a,2,3\nt1,b,2,0\n")
    code, _, err = run("mle", "--data", path)
    assert code == 2
    assert "'a'" in err


def test_missing_file_exit_1(tmp_path, run):
    assert run("mle", "--data", tmp_path / "missing.csv")[0] == 1


def test_seed_from_environment(tmp_path, run, monkeypatch):
    monkeypatch.setenv("WALLENIUS_SEED", "11")
    run("simulate", "--K", 2, "--m", "5,5", "--n", 4, "--w", "0.5,0.5", "--T", 20,
        "--out", tmp_path / "env.csv")
    run("simulate", "--K", 2, "--m", "5,5", "--n", 4, "--w", "0.5,0.5", "--T", 20,
        "--seed", 11, "--out", tmp_path / "flag.csv")
    assert (tmp_path / "env.csv").read_bytes() == (tmp_path / "flag.csv").read_bytes()
    monkeypatch.setenv("WALLENIUS_SEED", "x")
    assert run("simulate", "--K", 2, "--m", "5,5", "--n", 4, "--w", "0.5,0.5")[0] == 2


def test_determinism_across_processes(data2, tmp_path):
    outputs = []
    for rep in range(2):
        d = tmp_path / f"run{rep}"
        d.mkdir()
        cmds = [
            ["simulate", "--K", "3", "--m", "6,6,6", "--n", "6", "--w", "0.5,0.3,0.2",
             "--T", "20", "--seed", "5", "--out", str(d / "sim.csv")],
            ["boot", "--data", str(data2), "--B", "20", "--seed", "5", "--out",
             str(d / "boot.json"), "--svg", str(d / "boot.svg")],
            ["swm", "--data", str(data2), "--iters", "2000", "--seed", "5", "--out",
             str(d / "swm.json"), "--chain", str(d / "chain.csv"), "--svg", str(d / "trace.svg")],
            ["report", "--data", str(d / "sim.csv"), "--outdir", str(d / "rep"), "--iters", "1000",
             "--B", "5", "--grid", "50", "--seed", "5"],
        ]
        for cmd in cmds:
            subprocess.run([sys.executable, "-m", "wallenius.cli", *cmd], check=True)
        outputs.append({p.relative_to(d): p.read_bytes() for p in sorted(d.rglob("*"))
                        if p.is_file()})
    assert outputs[0].keys() == outputs[1].keys()
    assert len(outputs[0]) == 12
    for name in outputs[0]:
        assert outputs[0][name] == outputs[1][name], name
