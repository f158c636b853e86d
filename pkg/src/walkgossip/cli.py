"""Command line interface: analyze, run, sweep.

Exit codes: 0 success, 2 config error, 3 runtime invariant violation.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from . import chain, experiments, metrics
from .config import ConfigError, load_config
from .engine import InvariantViolation
from .graph import build_topology, metropolis_hastings, offdiag_nnz

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _analyze_row(kind, V, edge_probability, mc_samples, mc_max_steps, seed):
    topology = build_topology(kind, V, edge_probability if kind == "erdos_renyi" else None,
                              seed=seed)
    matrix = metropolis_hastings(topology)
    gaps = chain.spectral_gaps(matrix)
    exact = chain.return_moments_exact(matrix)
    mc_stderr = ""
    if mc_samples > 0:
        mc = chain.return_moments_mc(matrix, n_samples=mc_samples,
                                     max_steps=mc_max_steps, seed=seed)
        mc_stderr = repr(mc.second_stderr)
    return {
        "topology": kind, "V": V, "p": gaps.gap_ptp, "p_prime": gaps.gap_p,
        "return_mean": exact.mean, "return_second": exact.second,
        "offdiag_nnz": offdiag_nnz(matrix), "mc_second_stderr": mc_stderr,
    }


def cmd_analyze(cfg, out_dir: str) -> int:
    a = cfg.analyze
    if a is None:
        raise ConfigError("missing required section [analyze]")
    rows = [
        _analyze_row(kind, V, a.edge_probability, a.mc_samples, a.mc_max_steps, a.seed)
        for kind in a.kinds for V in a.node_counts
    ]
    header = ("topology", "V", "p", "p_prime", "return_mean", "return_second",
              "offdiag_nnz", "mc_second_stderr")
    widths = [12, 5, 12, 12, 12, 14, 12, 16]
    print("  ".join(h.ljust(w) for h, w in zip(header, widths)))
    for r in rows:
        cells = [r["topology"], str(r["V"]), f"{r['p']:.6g}", f"{r['p_prime']:.6g}",
                 f"{r['return_mean']:.6g}", f"{r['return_second']:.6g}",
                 str(r["offdiag_nnz"]), str(r["mc_second_stderr"])[:14]]
        print("  ".join(c.ljust(w) for c, w in zip(cells, widths)))
    csv_rows = [[str(r[h]) if not isinstance(r[h], float) else repr(r[h]) for h in header]
                for r in rows]
    lines = [f"# {metrics.CSV_VERSION}", ",".join(header)]
    lines += [",".join(r) for r in csv_rows]
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "analyze.csv")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {path}")
    return EXIT_OK


def _run_one(args):
    cfg, seed, axis, value = args
    run_cfg = experiments.replace_axis(cfg, axis, value) if axis is not None else cfg
    records = experiments.run_experiment(run_cfg, seed)
    run_id = experiments.run_id_for(run_cfg, seed, axis, value)
    return experiments.records_to_rows(records, run_id, run_cfg.algorithm.name,
                                       seed, axis, value)


def _map_jobs(tasks, jobs: int):
    if jobs <= 1 or len(tasks) <= 1:
        return [_run_one(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_one, tasks))


def cmd_run(cfg, out_dir: str, jobs: int) -> int:
    tasks = [(cfg, seed, None, None) for seed in cfg.run.seeds]
    results = _map_jobs(tasks, jobs)
    for (c, seed, _, _), rows in zip(tasks, results):
        path = os.path.join(out_dir, f"run-{experiments.run_id_for(c, seed)}.csv")
        experiments.write_csv(path, c, rows)
        print(f"wrote {path}")
    return EXIT_OK


def cmd_sweep(cfg, out_dir: str, jobs: int) -> int:
    if cfg.sweep is None:
        raise ConfigError("missing required section [sweep]")
    axis = cfg.sweep.axis
    tasks = [(cfg, seed, axis, value)
             for value in cfg.sweep.values for seed in cfg.run.seeds]
    for c, _, ax, value in tasks:  # fail fast on bad axis values
        experiments.replace_axis(c, ax, value)
    results = _map_jobs(tasks, jobs)
    rows = [row for rows in results for row in rows]
    path = os.path.join(out_dir, f"sweep-{axis}.csv")
    experiments.write_csv(path, cfg, rows, axis=axis)
    print(f"wrote {path} ({len(tasks)} runs)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="walkgossip",
                                     description="Multi-walk / asynchronous gossip simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, doc in (("analyze", "spectral gaps and return-time moments"),
                      ("run", "one experiment per seed"),
                      ("sweep", "cartesian sweep over one axis and the seed list")):
        p = sub.add_parser(name, help=doc)
        p.add_argument("--config", required=True, help="path to INI experiment config")
        p.add_argument("--out", default=None, help="output directory (default: [run] out)")
        p.add_argument("--seeds", default=None, help="comma list overriding [run] seeds")
        p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seeds is not None and cfg.run is not None:
            seeds = tuple(int(s) for s in args.seeds.split(",") if s.strip())
            if not seeds:
                raise ConfigError("--seeds must be a nonempty comma list")
            cfg = dataclasses.replace(cfg, run=dataclasses.replace(cfg.run, seeds=seeds))
        out_dir = args.out or (cfg.run.out if cfg.run is not None else "runs")
        if args.command == "analyze":
            return cmd_analyze(cfg, out_dir)
        if args.command == "run":
            return cmd_run(cfg, out_dir, args.jobs)
        return cmd_sweep(cfg, out_dir, args.jobs)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
