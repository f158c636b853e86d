"""Experiment configuration: INI-style sections, schema-checked.

Unknown sections or keys are rejected; cross-field constraints (one stop
criterion, edge probability only for Erdos-Renyi, walks only for mw,
hetero_shift xor alpha) are enforced at parse time so a bad config never
reaches a run. ``serialize`` round-trips through ``parse_config``.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, fields

from .graph import KINDS


class ConfigError(ValueError):
    """Invalid experiment configuration; maps to CLI exit code 2."""


def _bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("true", "1", "yes"):
        return True
    if v in ("false", "0", "no"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _int_list(s: str):
    return tuple(int(x) for x in s.split(",") if x.strip())


def _float_list(s: str):
    return tuple(float(x) for x in s.split(",") if x.strip())


def _str_list(s: str):
    return tuple(x.strip() for x in s.split(",") if x.strip())


@dataclass(frozen=True)
class TopologyConfig:
    kind: str
    node_count: int
    edge_probability: float | None = None


@dataclass(frozen=True)
class AlgorithmConfig:
    name: str
    eta: float
    batch_size: int
    model_bits: int
    mean_delay: float
    n_walks: int | None = None
    split_delay: bool = False


@dataclass(frozen=True)
class DataConfig:
    task: str
    n_per_node: int
    model_dim: int
    noise_std: float = 0.0
    hetero_shift: float | None = None
    alpha: float | None = None
    reg: float = 0.0


@dataclass(frozen=True)
class RunConfig:
    eval_interval: int
    seeds: tuple
    max_iterations: int | None = None
    max_sim_time: float | None = None
    out: str = "runs"


@dataclass(frozen=True)
class SweepConfig:
    axis: str
    values: tuple


@dataclass(frozen=True)
class AnalyzeConfig:
    kinds: tuple
    node_counts: tuple
    edge_probability: float | None = None
    mc_samples: int = 50_000
    mc_max_steps: int = 100_000
    seed: int = 0


@dataclass(frozen=True)
class ExperimentConfig:
    topology: TopologyConfig | None = None
    algorithm: AlgorithmConfig | None = None
    data: DataConfig | None = None
    run: RunConfig | None = None
    sweep: SweepConfig | None = None
    analyze: AnalyzeConfig | None = None


# section -> field -> (parser, required)
_SCHEMA = {
    "topology": {
        "kind": (str, True),
        "node_count": (int, True),
        "edge_probability": (float, False),
    },
    "algorithm": {
        "name": (str, True),
        "eta": (float, True),
        "batch_size": (int, True),
        "model_bits": (int, True),
        "mean_delay": (float, True),
        "n_walks": (int, False),
        "split_delay": (_bool, False),
    },
    "data": {
        "task": (str, True),
        "n_per_node": (int, True),
        "model_dim": (int, True),
        "noise_std": (float, False),
        "hetero_shift": (float, False),
        "alpha": (float, False),
        "reg": (float, False),
    },
    "run": {
        "eval_interval": (int, True),
        "seeds": (_int_list, True),
        "max_iterations": (int, False),
        "max_sim_time": (float, False),
        "out": (str, False),
    },
    "sweep": {
        "axis": (str, True),
        "values": (_str_list, True),
    },
    "analyze": {
        "kinds": (_str_list, True),
        "node_counts": (_int_list, True),
        "edge_probability": (float, False),
        "mc_samples": (int, False),
        "mc_max_steps": (int, False),
        "seed": (int, False),
    },
}

_SECTION_TYPES = {
    "topology": TopologyConfig,
    "algorithm": AlgorithmConfig,
    "data": DataConfig,
    "run": RunConfig,
    "sweep": SweepConfig,
    "analyze": AnalyzeConfig,
}

SWEEP_AXES = ("R", "alpha", "topology", "V")


def _parse_section(name: str, items) -> object:
    schema = _SCHEMA[name]
    kwargs = {}
    for key, raw in items:
        if key not in schema:
            raise ConfigError(f"unknown key [{name}] {key}")
        parser = schema[key][0]
        try:
            kwargs[key] = parser(raw)
        except ValueError as exc:
            raise ConfigError(f"bad value for [{name}] {key}: {exc}") from exc
    for key, (_, required) in schema.items():
        if required and key not in kwargs:
            raise ConfigError(f"missing required field [{name}] {key}")
    return _SECTION_TYPES[name](**kwargs)


def _cross_validate(cfg: ExperimentConfig) -> None:
    top, alg, dat, run = cfg.topology, cfg.algorithm, cfg.data, cfg.run
    if top is not None:
        if top.kind not in KINDS:
            raise ConfigError(f"[topology] kind must be one of {KINDS}")
        if (top.kind == "erdos_renyi") != (top.edge_probability is not None):
            raise ConfigError("[topology] edge_probability is required iff kind = erdos_renyi")
        if top.node_count < 2:
            raise ConfigError("[topology] node_count must be >= 2")
    if alg is not None:
        if alg.name not in ("mw", "gossip"):
            raise ConfigError("[algorithm] name must be mw or gossip")
        if (alg.name == "mw") != (alg.n_walks is not None):
            raise ConfigError("[algorithm] n_walks is required iff name = mw")
        if alg.name == "mw" and alg.n_walks < 1:
            raise ConfigError("[algorithm] n_walks must be >= 1")
        if alg.eta < 0 or alg.mean_delay <= 0 or alg.batch_size < 1 or alg.model_bits < 1:
            raise ConfigError("[algorithm] eta >= 0, mean_delay > 0, batch_size/model_bits >= 1")
    if dat is not None:
        if dat.task not in ("least_squares", "logistic"):
            raise ConfigError("[data] task must be least_squares or logistic")
        if (dat.hetero_shift is None) == (dat.alpha is None):
            raise ConfigError("[data] exactly one of hetero_shift / alpha is required")
        if dat.alpha is not None and dat.task != "logistic":
            raise ConfigError("[data] alpha applies to the logistic task only")
        if min(dat.n_per_node, dat.model_dim) < 1:
            raise ConfigError("[data] n_per_node and model_dim must be >= 1")
        if alg is not None and alg.batch_size > dat.n_per_node:
            raise ConfigError("[data] batch_size cannot exceed n_per_node")
    if run is not None:
        if (run.max_iterations is None) == (run.max_sim_time is None):
            raise ConfigError("[run] exactly one of max_iterations / max_sim_time is required")
        if run.eval_interval < 1:
            raise ConfigError("[run] eval_interval must be >= 1")
        if not run.seeds:
            raise ConfigError("[run] seeds must be a nonempty list")
    if cfg.sweep is not None:
        if cfg.sweep.axis not in SWEEP_AXES:
            raise ConfigError(f"[sweep] axis must be one of {SWEEP_AXES}")
        if not cfg.sweep.values:
            raise ConfigError("[sweep] values must be a nonempty list")


def parse_config(text: str) -> ExperimentConfig:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    sections = {}
    for name in cp.sections():
        if name not in _SCHEMA:
            raise ConfigError(f"unknown section [{name}]")
        sections[name] = _parse_section(name, cp.items(name))
    cfg = ExperimentConfig(**sections)
    _cross_validate(cfg)
    return cfg


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def _format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        return ",".join(str(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def config_items(cfg: ExperimentConfig):
    """Flat (section, key, value-string) triples, skipping unset fields."""
    out = []
    for name, section in ((f.name, getattr(cfg, f.name)) for f in fields(cfg)):
        if section is None:
            continue
        for f in fields(section):
            v = getattr(section, f.name)
            if v is None:
                continue
            out.append((name, f.name, _format_value(v)))
    return out


def serialize(cfg: ExperimentConfig) -> str:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    for section, key, value in config_items(cfg):
        if not cp.has_section(section):
            cp.add_section(section)
        cp.set(section, key, value)
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()
