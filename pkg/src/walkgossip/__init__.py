"""Event-driven simulation and chain analysis for two decentralized learning
algorithms: multi-stream random-walk SGD with hub mixing, and asynchronous
gossip with delayed gradients."""

from .algorithms import GossipStepper, MultiWalkStepper
from .chain import (ReturnMoments, SpectralGaps, return_moments_cycle_analytic,
                    return_moments_exact, return_moments_mc, spectral_gaps)
from .config import ConfigError, ExperimentConfig, load_config, parse_config, serialize
from .data import (Objective, Shard, dirichlet_partition, global_grad_norm,
                   global_loss, make_dirichlet_logistic, make_synthetic,
                   stochastic_gradient)
from .engine import Accounting, EngineConfig, Event, InvariantViolation, run, schedule_next
from .experiments import run_experiment
from .graph import (MixingMatrix, Topology, build_topology, metropolis_hastings,
                    offdiag_nnz)
from .metrics import CrossingPoint, RunRecord, evaluate, time_to_target

__version__ = "0.1.0"

__all__ = [
    "Accounting", "ConfigError", "CrossingPoint", "EngineConfig", "Event",
    "ExperimentConfig", "GossipStepper", "InvariantViolation", "MixingMatrix",
    "MultiWalkStepper", "Objective", "ReturnMoments", "RunRecord", "Shard",
    "SpectralGaps", "Topology", "build_topology", "dirichlet_partition",
    "evaluate", "global_grad_norm", "global_loss", "load_config",
    "make_dirichlet_logistic", "make_synthetic", "metropolis_hastings",
    "offdiag_nnz", "parse_config", "return_moments_cycle_analytic",
    "return_moments_exact", "return_moments_mc", "run", "run_experiment",
    "schedule_next", "serialize", "spectral_gaps", "stochastic_gradient",
    "time_to_target",
]
