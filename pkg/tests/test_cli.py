import json

import numpy as np
import pytest

from gakflann import cli
from gakflann.data import load_csv


def run(*argv):
    return cli.main([str(a) for a in argv])


@pytest.fixture
def two_col_csv(tmp_path):
    p = tmp_path / "pts.csv"
    p.write_text("0,0,0\n0,1,0\n10,0,1\n10,1,1\n")
    return p


def test_cluster_writes_json(tmp_path, two_col_csv):
    out = tmp_path / "r.json"
    assert run("cluster", "--data", two_col_csv, "--rho", 1, "--tol", "2,2", "--out", out) == 0
    res = json.loads(out.read_text())
    assert res["K"] == 2 and res["error_rate"] == 0.0 and res["converged"]
    assert res["cs"] == pytest.approx(0.1)


def test_cluster_dimension_mismatch(tmp_path, two_col_csv, capsys):
    code = run("cluster", "--data", two_col_csv, "--rho", 1, "--tol", "1,1,1",
               "--out", tmp_path / "r.json")
    assert code == cli.EXIT_USAGE
    assert "dimension mismatch" in capsys.readouterr().err


def test_cluster_single_cluster_flagged(tmp_path, two_col_csv):
    out = tmp_path / "r.json"
    assert run("cluster", "--data", two_col_csv, "--rho", 1, "--tol", "100,100", "--out", out) == 0
    res = json.loads(out.read_text())
    assert res["K"] == 1 and res["degenerate"] and res["cs"] is None and res["fitness"] == 0.0


def test_cluster_epoch_cap_exit_code(tmp_path):
    out = tmp_path / "r.json"
    code = run("cluster", "--data", "builtin:iris", "--rho", 1,
               "--tol", "1.5209,0.3951,2.1188,0.4701", "--max-epochs", 1, "--out", out)
    res = json.loads(out.read_text())
    assert code == (cli.EXIT_OK if res["converged"] else cli.EXIT_NOT_CONVERGED)


@pytest.mark.parametrize("argv", [
    ["cluster", "--data", "builtin:iris", "--rho", "0", "--tol", "1,1,1,1"],
    ["cluster", "--data", "builtin:iris", "--rho", "1", "--tol", "a,b"],
    ["cluster", "--data", "missing.csv", "--rho", "1", "--tol", "1"],
    ["search", "--data", "builtin:iris", "--popsize", "3"],
    ["bogus"],
])
def test_usage_errors(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert cli.main(argv) == cli.EXIT_USAGE


def test_generate_unknown_preset(tmp_path, capsys):
    assert run("generate", "--preset", "syndata9", "--out", tmp_path / "x.csv") == 1
    err = capsys.readouterr().err
    assert "syndata1" in err and "syndata6" in err


@pytest.mark.parametrize("preset, n, d, sizes", [
    ("syndata5", 400, 8, [150, 150, 100]),
    ("syndata1", 1000, 2, [500, 500]),
])
def test_generate_preset(tmp_path, preset, n, d, sizes):
    out = tmp_path / "g.csv"
    assert run("generate", "--preset", preset, "--out", out) == 0
    ds = load_csv(out)
    assert ds.patterns.shape == (n, d)
    assert np.bincount(ds.labels).tolist() == sizes


def test_generate_from_spec_file(tmp_path):
    spec = tmp_path / "s.json"
    spec.write_text(json.dumps({"seed": 3, "clusters": [
        {"center": [0, 0], "std": 1, "count": 5}, {"center": [9, 9], "std": [1, 2], "count": 4}]}))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run("generate", "--spec", spec, "--out", a) == 0
    assert run("generate", "--spec", spec, "--out", b) == 0
    assert a.read_bytes() == b.read_bytes()
    assert load_csv(a).n_patterns == 9


def test_distances_iris(tmp_path):
    out = tmp_path / "d.csv"
    assert run("distances", "--data", "builtin:iris", "--out", out) == 0
    m = np.loadtxt(out, delimiter=",")
    assert m.shape == (150, 150)
    assert np.allclose(m, m.T) and np.all(np.diag(m) == 0)


def test_distances_small(tmp_path):
    src = tmp_path / "p.csv"
    src.write_text("0,0\n3,4\n")
    out = tmp_path / "d.csv"
    assert run("distances", "--data", src, "--no-labels", "--out", out) == 0
    assert np.loadtxt(out, delimiter=",").tolist() == [[0.0, 5.0], [5.0, 0.0]]


def test_distances_empty(tmp_path):
    src = tmp_path / "e.csv"
    src.write_text("")
    assert run("distances", "--data", src, "--out", tmp_path / "d.csv") == cli.EXIT_USAGE


SMALL = ["--popsize", 4, "--gens", 1, "--runs", 1]


def test_search_single_run(tmp_path):
    out = tmp_path / "o"
    assert run("search", "--data", "builtin:syndata5", *SMALL, "--seed", 1, "--out", out) == 0
    rows = (out / "enhanced_runs.csv").read_text().splitlines()
    assert len(rows) == 2
    summary = json.loads((out / "enhanced_summary.json").read_text())
    assert summary["runs"] == 1 and summary["variant"] == "enhanced"


def test_search_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert run("search", "--data", "builtin:syndata5", "--popsize", 6, "--gens", 2,
                   "--runs", 2, "--seed", 11, "--out", out) == 0
    for name in ("enhanced_runs.csv", "enhanced_summary.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_search_both_writes_comparison(tmp_path):
    out = tmp_path / "o"
    assert run("search", "--data", "builtin:syndata5", "--variant", "both", *SMALL, "--out", out) == 0
    for name in ("enhanced_runs.csv", "original_runs.csv", "comparison.csv"):
        assert (out / name).exists()
    lines = (out / "comparison.csv").read_text().splitlines()
    assert [l.split(",")[0] for l in lines[1:]] == ["enhanced", "original"]


def test_search_needs_labels(tmp_path):
    src = tmp_path / "p.csv"
    src.write_text("0,0\n1,1\n5,5\n6,6\n")
    assert run("search", "--data", src, "--no-labels", *SMALL, "--out", tmp_path / "o") == 1
    assert run("search", "--data", src, "--no-labels", "--unsupervised", *SMALL,
               "--out", tmp_path / "o") == 0


def test_config_precedence(tmp_path):
    cfg = tmp_path / "ga.cfg"
    cfg.write_text("# settings\npopsize=10\nruns = 3\nmu=0.2\ncong_mode=off\n")
    args = cli.build_parser().parse_args(
        ["search", "--data", "x", "--config", str(cfg), "--runs", "7"])
    c = cli.build_config(args)
    assert (c.popsize, c.runs, c.mu, c.cong_mode, c.generations) == (10, 7, 0.2, False, 20)


def test_config_file_errors(tmp_path):
    cfg = tmp_path / "ga.cfg"
    cfg.write_text("colour=blue\n")
    with pytest.raises(cli.UsageError, match="1"):
        cli.read_config_file(cfg)
    cfg.write_text("popsize=many\n")
    with pytest.raises(cli.UsageError, match="popsize"):
        cli.read_config_file(cfg)
