import json

import pytest

from curvlab.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def c4(tmp_path):
    path = tmp_path / "c4.txt"
    path.write_text("0 1 1\n1 2 1\n2 3 1\n3 0 1\n")
    return str(path)


def test_gen_writes_edges(capsys, tmp_path):
    code, out, _ = run(capsys, "gen", "--kind", "cycle", "--n", "5")
    assert code == 0
    lines = [ln for ln in out.splitlines() if not ln.startswith("#")]
    assert len(lines) == 5
    path = tmp_path / "g.txt"
    code, out, _ = run(capsys, "gen", "--kind", "grid", "--n", "3", "--out", str(path), "--json")
    assert code == 0 and json.loads(out)["edges"] == 12 and path.exists()


def test_analyze_cycle(capsys, c4):
    code, out, _ = run(capsys, "analyze", "--input", c4, "--json")
    assert code == 0
    rep = json.loads(out)
    assert rep["delta4"] == "1" and rep["delta_slim"]["value"] == "1"
    assert rep["pass"] and "timestamps" not in rep
    code, out, _ = run(capsys, "analyze", "--input", c4, "--json", "--timestamps")
    assert "timestamps" in json.loads(out)


def test_analyze_text_output(capsys, c4):
    code, out, _ = run(capsys, "analyze", "--input", c4)
    assert code == 0 and "delta4: 1" in out


def test_ecc_points(capsys, c4):
    code, out, _ = run(capsys, "ecc", "--input", c4, "--points", "0,1,2", "--json")
    assert code == 0 and "eccentricity" in json.loads(out)
    code, _, err = run(capsys, "ecc", "--input", c4, "--points", "0,9")
    assert code == 1 and "unknown points" in err


def test_ecckappa_prints_value(capsys):
    code, out, _ = run(capsys, "ecckappa", "--kappa", "0", "-s", "3", "-t", "4", "-d", "5")
    assert code == 0 and out.strip() == "1.40831891575846"


def test_bounds(capsys):
    code, out, _ = run(capsys, "bounds", "--which", "meat", "--json")
    assert code == 0 and json.loads(out)["meat"]["exact"] == "3049"
    code, out, _ = run(capsys, "bounds", "--which", "thinbigons", "--T", "3", "--D", "11", "--json")
    assert json.loads(out)["thinbigons"]["exact"] == "142249316842486"
    code, _, err = run(capsys, "bounds", "--which", "thinbigons", "--T", "2", "--D", "11")
    assert code == 1 and "precondition" in err
    code, _, _ = run(capsys, "bounds", "--which", "nonsense")
    assert code == 1


def test_diverge_and_cat(capsys, c4):
    code, out, _ = run(capsys, "diverge", "--input", c4, "--D", "1", "--r-max", "2", "--json")
    assert code == 0 and {"f", "e", "params"} <= set(json.loads(out))
    code, out, _ = run(capsys, "cat", "--input", c4, "--kappa", "-1", "--json")
    assert code == 0 and json.loads(out)["triangles"]["violation_count"] > 0
    code, _, _ = run(capsys, "cat", "--input", c4, "--kappa", "1")
    assert code == 1


def test_usage_errors(capsys, tmp_path):
    assert run(capsys, "nonsense")[0] == 1
    assert run(capsys, "analyze")[0] == 1
    assert run(capsys, "analyze", "--input", str(tmp_path / "missing.txt"))[0] == 1
    bad = tmp_path / "bad.txt"
    bad.write_text("0 1 x\n")
    code, _, err = run(capsys, "analyze", "--input", str(bad))
    assert code == 1 and "line 1" in err


def test_exit_two_on_failed_check(capsys, tmp_path, monkeypatch):
    import curvlab.cli as cli

    monkeypatch.setattr(cli, "run_analyze", lambda *a, **k: {"pass": False})
    path = tmp_path / "p.txt"
    path.write_text("0 1 1\n")
    assert run(capsys, "analyze", "--input", str(path), "--json")[0] == 2
