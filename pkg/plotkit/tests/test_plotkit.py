import math
import os
import subprocess
import sys
import textwrap

import numpy as np
import pytest

from plotkit import FigureSpec, PlotError, aggregate, plot, read_rows

HEADER = "run_id,algo,t,Z,B,loss,grad_norm,loss_hub,spread,tau_mean,seed"


def _csv(tmp_path, name, rows, header=HEADER, comments=("# walkgossip-csv v1",)):
    path = tmp_path / name
    path.write_text("\n".join([*comments, header, *rows]) + "\n")
    return str(path)


def _sweep_rows(n_seeds=10, n_points=5):
    rows = []
    rng = np.random.default_rng(0)
    for seed in range(n_seeds):
        for i in range(n_points):
            loss = math.exp(-i) * (1.0 + 0.1 * rng.standard_normal())
            rows.append(f"mw-R-2-s{seed},mw,{i*10},{i*0.5},{i*100},{loss!r},"
                        f"{loss/2!r},,0.0,,{seed}")
    return rows


def test_single_run_zero_band(tmp_path):
    rows = [f"r0,mw,{i*10},{i*1.0},{i*8},{1.0/(i+1)!r},{0.5/(i+1)!r},,0.0,,1"
            for i in range(4)]
    path = _csv(tmp_path, "one.csv", rows)
    out = str(tmp_path / "fig.png")
    curves = plot([path], FigureSpec(out=out))
    assert len(curves) == 1
    assert curves[0].n_runs == 1
    assert (curves[0].std == 0.0).all()
    assert os.path.exists(out)


def test_band_equals_independent_std(tmp_path):
    path = _csv(tmp_path, "sweep.csv", _sweep_rows())
    spec = FigureSpec(x="t", y="loss", group_by=("algo",), out=str(tmp_path / "f.png"))
    (curve,) = plot([path], spec)
    # independent recomputation from the raw file, no numpy aggregation
    rows = read_rows([path])
    by_point = {}
    for r in rows:
        by_point.setdefault(int(r["t"]), []).append(float(r["loss"]))
    for i, t in enumerate(sorted(by_point)):
        ys = by_point[t]
        mean = sum(ys) / len(ys)
        var = sum((y - mean) ** 2 for y in ys) / len(ys)
        assert abs(curve.std[i] - math.sqrt(var)) <= 1e-12
        assert abs(curve.mean[i] - mean) <= 1e-12


def test_grouping_splits_curves(tmp_path):
    rows = []
    for R in (1, 2):
        for seed in (0, 1):
            for i in range(3):
                rows.append(f"mw-R-{R}-s{seed},mw,{i},{i*0.1},{i},{1.0+R+i},"
                            f"{0.1},,0.0,,{seed},{R}")
    path = _csv(tmp_path, "r.csv", rows, header=HEADER + ",R")
    spec = FigureSpec(group_by=("R",), out=str(tmp_path / "g.png"))
    curves = plot([path], spec)
    assert [c.key for c in curves] == [("1",), ("2",)]
    assert all(c.n_runs == 2 for c in curves)


def test_empty_csv_is_error_and_no_image(tmp_path):
    path = _csv(tmp_path, "empty.csv", [])
    out = str(tmp_path / "never.png")
    with pytest.raises(PlotError, match="no data rows"):
        plot([path], FigureSpec(out=out))
    assert not os.path.exists(out)


def test_missing_column_named(tmp_path):
    path = _csv(tmp_path, "bad.csv", ["r0,mw,0,0.0,0,1.0,0.5"],
                header="run_id,algo,t,Z,B,loss,grad_norm")
    with pytest.raises(PlotError, match="tau_mean"):
        plot([path], FigureSpec(group_by=("tau_mean",), out=str(tmp_path / "x.png")))


def test_mismatched_run_lengths_rejected(tmp_path):
    rows = ["a,mw,0,0.0,0,1.0,0.5,,0.0,,1",
            "a,mw,10,1.0,8,0.5,0.2,,0.0,,1",
            "b,mw,0,0.0,0,1.0,0.5,,0.0,,2"]
    path = _csv(tmp_path, "m.csv", rows)
    with pytest.raises(PlotError, match="differing record counts"):
        aggregate(read_rows([path]), FigureSpec(out="x.png"))


def test_spec_validation():
    with pytest.raises(PlotError, match="x axis"):
        FigureSpec(x="time")
    with pytest.raises(PlotError, match="y axis"):
        FigureSpec(y="accuracy")
    with pytest.raises(PlotError, match="group_by"):
        FigureSpec(group_by=())


def test_cli_glob_and_exit_codes(tmp_path):
    from plotkit.cli import main

    _csv(tmp_path, "a.csv", _sweep_rows(n_seeds=3))
    out = str(tmp_path / "cli.png")
    assert main(["--csv", str(tmp_path / "*.csv"), "--y", "grad_norm",
                 "--out", out]) == 0
    assert os.path.exists(out)
    assert main(["--csv", str(tmp_path / "none*.csv"), "--out",
                 str(tmp_path / "n.png")]) == 1


def test_acceptance_a11(tmp_path):
    """10-seed sweep from the primary CLI; bands match independent stds."""
    config = textwrap.dedent("""\
        [topology]
        kind = cycle
        node_count = 5

        [algorithm]
        name = mw
        n_walks = 2
        eta = 0.3
        batch_size = 4
        model_bits = 64
        mean_delay = 1.0

        [data]
        task = least_squares
        n_per_node = 8
        model_dim = 4
        hetero_shift = 0.0
        noise_std = 0.2

        [run]
        eval_interval = 50
        seeds = 0,1,2,3,4,5,6,7,8,9
        max_iterations = 300

        [sweep]
        axis = R
        values = 1,2
        """)
    cfg_path = tmp_path / "exp.ini"
    cfg_path.write_text(config)
    out_dir = tmp_path / "runs"
    proc = subprocess.run(
        [sys.executable, "-m", "walkgossip.cli", "sweep", "--config", str(cfg_path),
         "--out", str(out_dir)],
        capture_output=True, text=True)
    if proc.returncode != 0 and "No module named" in proc.stderr:
        pytest.skip("primary package not installed; A11 exactness covered by "
                    "test_band_equals_independent_std")
    assert proc.returncode == 0, proc.stderr
    sweep_csv = str(out_dir / "sweep-R.csv")

    specs = [FigureSpec(x="t", y="loss", group_by=("R",),
                        out=str(tmp_path / "loss_vs_t.png")),
             FigureSpec(x="B", y="grad_norm", group_by=("R",),
                        out=str(tmp_path / "grad_vs_bits.png"))]
    worst = 0.0
    for spec in specs:
        curves = plot([sweep_csv], spec)
        assert os.path.exists(spec.out)
        rows = read_rows([sweep_csv])
        for curve in curves:
            members = {}
            for r in rows:
                if tuple(r[c] for c in spec.group_by) != curve.key:
                    continue
                members.setdefault(int(r["t"]), []).append(float(r[spec.y]))
            assert all(len(v) == 10 for v in members.values())
            for i, t in enumerate(sorted(members)):
                ys = members[t]
                mean = sum(ys) / len(ys)
                std = math.sqrt(sum((y - mean) ** 2 for y in ys) / len(ys))
                worst = max(worst, abs(curve.std[i] - std))
    ok = worst <= 1e-12 and all(os.path.exists(s.out) for s in specs)
    print(f"\nA11 {'PASS' if ok else 'FAIL'} - band half-widths vs independent "
          f"per-point std: worst abs err {worst:.2e}; one image per spec")
    assert ok
