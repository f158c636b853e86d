"""Wiring from a validated config to runs, records, and CSV files."""

from __future__ import annotations

import dataclasses
import os
import tempfile

import numpy as np

from . import data, engine, metrics
from .algorithms import GossipStepper, MultiWalkStepper
from .config import ConfigError, ExperimentConfig, config_items
from .graph import build_topology, metropolis_hastings


def build_objective(cfg: ExperimentConfig, seed: int) -> data.Objective:
    d = cfg.data
    V = cfg.topology.node_count
    if d.alpha is not None:
        obj = data.make_dirichlet_logistic(V, d.n_per_node, d.model_dim, d.alpha,
                                           seed=seed, reg=d.reg)
    else:
        obj = data.make_synthetic(d.task, V, d.n_per_node, d.model_dim,
                                  hetero_shift=d.hetero_shift, noise_std=d.noise_std,
                                  seed=seed, reg=d.reg)
    smallest = min(s.n for s in obj.shards)
    if cfg.algorithm.batch_size > smallest:
        raise ConfigError(f"batch_size {cfg.algorithm.batch_size} exceeds smallest shard ({smallest})")
    return obj


def build_stepper(cfg: ExperimentConfig, topology, matrix, objective, seed: int):
    a = cfg.algorithm
    x0 = np.zeros(cfg.data.model_dim)
    if a.name == "mw":
        return MultiWalkStepper(topology, matrix, objective, n_walks=a.n_walks,
                                eta=a.eta, batch_size=a.batch_size, x0=x0, seed=seed)
    return GossipStepper(topology, matrix, objective, eta=a.eta,
                         batch_size=a.batch_size, x0=x0, seed=seed)


def run_experiment(cfg: ExperimentConfig, seed: int):
    """One deterministic run; returns the list of RunRecords."""
    for section in ("topology", "algorithm", "data", "run"):
        if getattr(cfg, section) is None:
            raise ConfigError(f"missing required section [{section}]")
    top = cfg.topology
    topology = build_topology(top.kind, top.node_count, top.edge_probability, seed=seed)
    matrix = metropolis_hastings(topology)
    objective = build_objective(cfg, seed)
    stepper = build_stepper(cfg, topology, matrix, objective, seed)
    eng = engine.EngineConfig(mean_delay=cfg.algorithm.mean_delay,
                              model_bits=cfg.algorithm.model_bits,
                              split_delay=cfg.algorithm.split_delay)
    return engine.run(eng, stepper, eval_interval=cfg.run.eval_interval, seed=seed,
                      evaluate=metrics.evaluate,
                      max_iterations=cfg.run.max_iterations,
                      max_sim_time=cfg.run.max_sim_time)


def replace_axis(cfg: ExperimentConfig, axis: str, value: str) -> ExperimentConfig:
    """New config with one sweep-axis value applied."""
    if axis == "R":
        alg = dataclasses.replace(cfg.algorithm, n_walks=int(value))
        return dataclasses.replace(cfg, algorithm=alg)
    if axis == "alpha":
        dat = dataclasses.replace(cfg.data, alpha=float(value), hetero_shift=None)
        return dataclasses.replace(cfg, data=dat)
    if axis == "topology":
        ep = cfg.topology.edge_probability if value == "erdos_renyi" else None
        top = dataclasses.replace(cfg.topology, kind=value, edge_probability=ep)
        return dataclasses.replace(cfg, topology=top)
    if axis == "V":
        top = dataclasses.replace(cfg.topology, node_count=int(value))
        return dataclasses.replace(cfg, topology=top)
    raise ConfigError(f"unknown sweep axis {axis!r}")


def run_id_for(cfg: ExperimentConfig, seed: int, axis: str | None = None,
               value: str | None = None) -> str:
    parts = [cfg.algorithm.name]
    if axis is not None:
        parts.append(f"{axis}-{value}")
    parts.append(f"s{seed}")
    return "-".join(parts)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def records_to_rows(records, run_id: str, algo: str, seed: int,
                    axis: str | None = None, value: str | None = None):
    rows = []
    for r in records:
        row = [run_id, algo, str(r.t), _fmt(r.sim_time), str(r.bits), _fmt(r.loss),
               _fmt(r.grad_norm), _fmt(r.loss_hub), _fmt(r.spread), _fmt(r.tau_mean),
               str(seed)]
        if axis is not None:
            row.append(str(value))
        rows.append(row)
    return rows


def write_csv(path, cfg: ExperimentConfig, rows, axis: str | None = None) -> None:
    """Atomic CSV write with the versioned header and full config echo."""
    columns = list(metrics.CSV_COLUMNS) + ([axis] if axis is not None else [])
    lines = [f"# {metrics.CSV_VERSION}"]
    for section, key, value in config_items(cfg):
        lines.append(f"# {section}.{key} = {value}")
    lines.append(",".join(columns))
    lines.extend(",".join(r) for r in rows)
    text = "\n".join(lines) + "\n"
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
