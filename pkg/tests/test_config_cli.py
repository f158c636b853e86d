import csv
import io
import os
import subprocess
import sys

import numpy as np
import pytest

from walkgossip import cli, experiments
from walkgossip.config import ConfigError, parse_config, serialize

BASE = """\
[topology]
kind = cycle
node_count = 5

[algorithm]
name = mw
n_walks = 2
eta = 0.2
batch_size = 4
model_bits = 256
mean_delay = 1.0

[data]
task = least_squares
n_per_node = 16
model_dim = 4
hetero_shift = 0.0
noise_std = 0.1

[run]
eval_interval = 25
seeds = 1,2
max_iterations = 100
out = runs
"""


def _write(tmp_path, text, name="exp.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def _read_rows(path):
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("".join(lines))))


# ----------------------------------------------------------------------- config

def test_round_trip_fixed_point():
    cfg = parse_config(BASE)
    text = serialize(cfg)
    assert parse_config(text) == cfg
    assert parse_config(serialize(parse_config(text))) == cfg


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config(BASE + "\n[sweep]\naxis = R\nvalues = 1,2\nbogus = 3\n")
    with pytest.raises(ConfigError, match="unknown section"):
        parse_config(BASE + "\n[extra]\nx = 1\n")


def test_missing_field_named():
    broken = BASE.replace("eta = 0.2\n", "")
    with pytest.raises(ConfigError, match="eta"):
        parse_config(broken)


def test_stop_criterion_exactly_one():
    with pytest.raises(ConfigError, match="max_iterations / max_sim_time"):
        parse_config(BASE.replace("max_iterations = 100",
                                  "max_iterations = 100\nmax_sim_time = 5.0"))
    with pytest.raises(ConfigError, match="max_iterations / max_sim_time"):
        parse_config(BASE.replace("max_iterations = 100\n", ""))


def test_cross_field_rules():
    with pytest.raises(ConfigError, match="edge_probability"):
        parse_config(BASE.replace("kind = cycle", "kind = erdos_renyi"))
    with pytest.raises(ConfigError, match="n_walks"):
        parse_config(BASE.replace("name = mw", "name = gossip"))
    with pytest.raises(ConfigError, match="hetero_shift / alpha"):
        parse_config(BASE.replace("hetero_shift = 0.0\n", ""))
    with pytest.raises(ConfigError, match="alpha"):
        parse_config(BASE.replace("hetero_shift = 0.0", "alpha = 1.0"))
    with pytest.raises(ConfigError, match="batch_size"):
        parse_config(BASE.replace("batch_size = 4", "batch_size = 64"))


# -------------------------------------------------------------------------- cli

def test_cmd_run_writes_one_csv_per_seed(tmp_path):
    path = _write(tmp_path, BASE)
    out = str(tmp_path / "out")
    assert cli.main(["run", "--config", path, "--out", out]) == 0
    files = sorted(os.listdir(out))
    assert files == ["run-mw-s1.csv", "run-mw-s2.csv"]
    rows = _read_rows(os.path.join(out, files[0]))
    assert len(rows) == 5  # t = 0, 25, 50, 75, 100
    assert rows[-1]["t"] == "100"
    assert rows[-1]["B"] == str(100 * 256)


def test_cmd_run_deterministic_bytes(tmp_path):
    path = _write(tmp_path, BASE)
    outs = []
    for sub in ("a", "b"):
        out = str(tmp_path / sub)
        assert cli.main(["run", "--config", path, "--out", out, "--seeds", "7"]) == 0
        with open(os.path.join(out, "run-mw-s7.csv"), "rb") as fh:
            outs.append(fh.read())
    assert outs[0] == outs[1]


def test_cmd_run_header_echoes_config(tmp_path):
    path = _write(tmp_path, BASE)
    out = str(tmp_path / "o")
    cli.main(["run", "--config", path, "--out", out, "--seeds", "1"])
    with open(os.path.join(out, "run-mw-s1.csv")) as fh:
        text = fh.read()
    assert text.startswith("# walkgossip-csv v1\n")
    assert "# algorithm.eta = 0.2" in text
    assert "# topology.kind = cycle" in text
    header = [ln for ln in text.splitlines() if not ln.startswith("#")][0]
    assert header == "run_id,algo,t,Z,B,loss,grad_norm,loss_hub,spread,tau_mean,seed"


def test_cli_config_error_exit_code(tmp_path):
    path = _write(tmp_path, BASE.replace("eta = 0.2\n", ""))
    assert cli.main(["run", "--config", path, "--out", str(tmp_path / "x")]) == 2


def test_cmd_sweep_cartesian(tmp_path):
    text = BASE + "\n[sweep]\naxis = R\nvalues = 1,2\n"
    path = _write(tmp_path, text)
    out = str(tmp_path / "sw")
    assert cli.main(["sweep", "--config", path, "--out", out]) == 0
    rows = _read_rows(os.path.join(out, "sweep-R.csv"))
    run_ids = {r["run_id"] for r in rows}
    assert run_ids == {"mw-R-1-s1", "mw-R-1-s2", "mw-R-2-s1", "mw-R-2-s2"}
    assert {r["R"] for r in rows} == {"1", "2"}


def test_cmd_sweep_topology_paired_data(tmp_path):
    text = BASE + "\n[sweep]\naxis = topology\nvalues = cycle,complete\n"
    path = _write(tmp_path, text)
    out = str(tmp_path / "sw")
    assert cli.main(["sweep", "--config", path, "--out", out, "--seeds", "3"]) == 0
    rows = _read_rows(os.path.join(out, "sweep-topology.csv"))
    # paired: identical data seed means identical t=0 loss across topologies
    t0 = {r["topology"]: r["loss"] for r in rows if r["t"] == "0"}
    assert t0["cycle"] == t0["complete"]


def test_cmd_sweep_alpha_three_regimes(tmp_path):
    text = BASE.replace("task = least_squares", "task = logistic")
    text = text.replace("hetero_shift = 0.0", "alpha = 1.0")
    text = text.replace("batch_size = 4", "batch_size = 1")
    text += "\n[sweep]\naxis = alpha\nvalues = 10,1,0.1\n"
    path = _write(tmp_path, text)
    out = str(tmp_path / "sw")
    assert cli.main(["sweep", "--config", path, "--out", out, "--seeds", "1"]) == 0
    rows = _read_rows(os.path.join(out, "sweep-alpha.csv"))
    assert {r["alpha"] for r in rows} == {"10", "1", "0.1"}


def test_cmd_analyze_table(tmp_path, capsys):
    text = """\
[analyze]
kinds = complete,cycle
node_counts = 10,20
mc_samples = 0
"""
    path = _write(tmp_path, text)
    out = str(tmp_path / "an")
    assert cli.main(["analyze", "--config", path, "--out", out]) == 0
    captured = capsys.readouterr().out
    assert "complete" in captured and "cycle" in captured
    rows = _read_rows(os.path.join(out, "analyze.csv"))
    complete20 = next(r for r in rows if r["topology"] == "complete" and r["V"] == "20")
    assert float(complete20["p"]) == pytest.approx(1.0, abs=1e-10)
    assert float(complete20["return_second"]) == pytest.approx(780.0, rel=1e-9)
    cyc = {int(r["V"]): float(r["p"]) for r in rows if r["topology"] == "cycle"}
    assert cyc[20] < cyc[10] / 3  # ~ 1/V^2 falloff


def test_cli_entry_point_subprocess(tmp_path):
    path = _write(tmp_path, BASE)
    out = str(tmp_path / "sp")
    proc = subprocess.run(
        [sys.executable, "-m", "walkgossip.cli", "run", "--config", path,
         "--out", out, "--seeds", "5"],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert os.path.exists(os.path.join(out, "run-mw-s5.csv"))


def test_parallel_jobs_match_serial(tmp_path):
    text = BASE + "\n[sweep]\naxis = R\nvalues = 1,2\n"
    path = _write(tmp_path, text)
    serial, parallel = str(tmp_path / "s"), str(tmp_path / "p")
    assert cli.main(["sweep", "--config", path, "--out", serial]) == 0
    assert cli.main(["sweep", "--config", path, "--out", parallel, "--jobs", "2"]) == 0
    with open(os.path.join(serial, "sweep-R.csv"), "rb") as fh:
        a = fh.read()
    with open(os.path.join(parallel, "sweep-R.csv"), "rb") as fh:
        b = fh.read()
    assert a == b


def test_gossip_run_records_tau(tmp_path):
    text = BASE.replace("name = mw\nn_walks = 2\n", "name = gossip\n")
    path = _write(tmp_path, text)
    out = str(tmp_path / "g")
    assert cli.main(["run", "--config", path, "--out", out, "--seeds", "1"]) == 0
    rows = _read_rows(os.path.join(out, "run-gossip-s1.csv"))
    assert rows[-1]["tau_mean"] != ""
    assert rows[-1]["loss_hub"] == ""
    assert rows[-1]["B"] == str(100 * 256 * 10)  # cycle-5 offdiag nnz = 10
