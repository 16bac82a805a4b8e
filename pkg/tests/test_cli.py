import subprocess
import sys

import numpy as np
import pytest

from spectraprg.cli import hash_max_deviation, kwise_max_deviation, main
from spectraprg.spectrahedron import check_regularity, load_instance


def _csv(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# ")
    header = lines[1].split(",")
    return lines[0], [dict(zip(header, l.split(","))) for l in lines[2:]]


@pytest.fixture
def inst(tmp_path):
    p = tmp_path / "inst.json"
    assert main(["gen-instance", "--n", "16", "--k", "3", "--tau", "0.3", "--M", "2", "--gamma", "1",
                 "--seed", "7", "-o", str(p)]) == 0
    return p


def test_gen_instance_regular(inst):
    assert check_regularity(load_instance(inst)).passed


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    assert "gen-instance" in capsys.readouterr().out


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "spectraprg", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "prg-selftest" in out.stdout


def test_fool_exact_side(inst, tmp_path):
    out = tmp_path / "fool.csv"
    assert main(["fool", "--instance", str(inst), "--wise", "6", "--cap-seeds", "1000000", "--samples", "0",
                 "-o", str(out)]) == 0
    cfg, rows = _csv(out)
    assert "seed=0" in cfg and "samples=0" in cfg
    assert len(rows) == 1
    r = rows[0]
    assert abs(float(r["uniform"]) - float(r["prg"])) == pytest.approx(float(r["estimate"]))


def test_eval_round_trip_bit_exact(inst, tmp_path):
    pts = tmp_path / "pts.csv"
    X = np.random.default_rng(0).choice([-1, 1], size=(20, 16))
    np.savetxt(pts, X, delimiter=",", fmt="%d")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["eval", "--instance", str(inst), "--points", str(pts), "-o", str(a)]) == 0
    assert main(["eval", "--instance", str(inst), "--points", str(pts), "-o", str(b)]) == 0
    assert a.read_text().splitlines()[1:] == b.read_text().splitlines()[1:]
    S = load_instance(inst)
    _, rows = _csv(a)
    assert [float(r["lambda_max"]) for r in rows] == S.lambda_max_batch(X).tolist()


def test_rerun_from_header_reproduces(inst, tmp_path):
    out1, out2 = tmp_path / "1.csv", tmp_path / "2.csv"
    args = ["ns", "--instance", str(inst), "--epsilon", "0.05,0.2", "--samples", "3000", "--seed", "11"]
    assert main(args + ["-o", str(out1)]) == 0
    cfg, rows1 = _csv(out1)
    # rebuild the command line from the config comment
    kv = dict(item.split("=", 1) for item in cfg[2:].split(" "))
    rebuilt = [kv["command"], "--instance", kv["instance"], "--epsilon", kv["epsilon"], "--samples", kv["samples"],
               "--seed", kv["seed"], "--chunk-size", kv["chunk_size"], "-o", str(out2)]
    assert main(rebuilt) == 0
    assert _csv(out2)[1] == rows1


@pytest.mark.parametrize("cmd", [
    ["regularity"],
    ["anticonc", "--Lambda", "0.2,0.5", "--samples", "2000"],
    ["as", "--samples", "2000"],
    ["buckets", "--m", "2", "--trials", "20"],
    ["factcheck", "--samples", "1000"],
])
def test_instance_commands(inst, tmp_path, cmd):
    out = tmp_path / "o.csv"
    assert main([cmd[0], "--instance", str(inst)] + cmd[1:] + ["-o", str(out)]) == 0
    _, rows = _csv(out)
    assert rows


def test_pair_command(tmp_path, inst):
    nsd = tmp_path / "nsd.json"
    assert main(["gen-instance", "--n", "16", "--k", "3", "--tau", "0.3", "--M", "2", "--gamma", "1",
                 "--sign", "NSD", "--seed", "8", "-o", str(nsd)]) == 0
    out = tmp_path / "o.csv"
    assert main(["as", "--instance", str(nsd), "--instance2", str(inst), "--samples", "1000", "-o", str(out)]) == 0


def test_standalone_commands(tmp_path):
    for cmd in (["deriv-check", "--order", "3", "--k", "3", "--trials", "2"],
                ["deriv-check", "--order", "1", "--k", "3", "--trials", "2"],
                ["mollifier-check", "--points", "300"],
                ["prg-selftest"]):
        out = tmp_path / "o.csv"
        assert main(cmd + ["-o", str(out)]) == 0
        _, rows = _csv(out)
        assert rows


def test_mollifier_check_covers_every_clause(tmp_path):
    out = tmp_path / "o.csv"
    assert main(["mollifier-check", "--k", "8", "--theta", "0.1", "--points", "900", "-o", str(out)]) == 0
    _, rows = _csv(out)
    by = {r["clause"]: r for r in rows}
    assert int(by["inner"]["points"]) >= 300 and int(by["outer"]["points"]) >= 300
    assert all(float(r["pass_rate"]) == 1.0 for r in rows if r["pass_rate"])


def test_selftest_rows(tmp_path):
    out = tmp_path / "o.csv"
    assert main(["prg-selftest", "--wise", "2", "--m", "4", "--a", "2", "--t", "2", "-o", str(out)]) == 0
    _, rows = _csv(out)
    assert [r["max_deviation"] for r in rows] == ["0", "0"]


def test_marginal_helpers():
    assert kwise_max_deviation(3, 8, 4) == 0
    assert hash_max_deviation(2, 4, 2, 2) == 0
    assert kwise_max_deviation(1, 4, 2) == 0
    from spectraprg.cli import _max_marginal_deviation
    vals = np.array([[0, 0], [1, 1]])
    assert _max_marginal_deviation(vals, 2, 2) > 0


def test_error_exit_codes(tmp_path, capsys):
    assert main(["fool", "--instance", str(tmp_path / "missing.json")]) == 2
    assert main(["gen-instance", "--n", "10", "--k", "2", "--tau", "0.1", "--M", "2", "--gamma", "1",
                 "-o", str(tmp_path / "x.json")]) == 2
    assert main(["bogus"]) == 2
    assert main(["ns", "--instance", "x", "--epsilon", "a,b"]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["regularity", "--instance", str(bad)]) == 2
    assert main(["gen-instance", "--n", "16", "--k", "3", "--tau", "0.3", "--M", "2", "--gamma", "1"]) == 2
    assert "error" in capsys.readouterr().err


def test_runtime_error_exit_code(tmp_path, monkeypatch):
    import spectraprg.cli as cli

    def boom(args):
        raise RuntimeError("boom")

    monkeypatch.setattr(cli, "cmd_regularity", boom)
    p = tmp_path / "i.json"
    assert main(["gen-instance", "--n", "8", "--k", "2", "--tau", "0.5", "--M", "2", "--gamma", "1",
                 "-o", str(p)]) == 0
    assert cli.main(["regularity", "--instance", str(p)]) == 1
