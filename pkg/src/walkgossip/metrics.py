"""Convergence metrics over algorithm state, assembled into run records."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import data

CSV_VERSION = "walkgossip-csv v1"
CSV_COLUMNS = ("run_id", "algo", "t", "Z", "B", "loss", "grad_norm",
               "loss_hub", "spread", "tau_mean", "seed")


@dataclass(frozen=True)
class RunRecord:
    """One evaluation point: iteration, simulated time, bits, and metrics.

    ``loss``/``grad_norm`` are taken at the consensus model (walk average
    for multi-walk, node average for gossip); ``loss_hub`` additionally
    evaluates the hub's latest model (multi-walk only); ``spread`` is the
    maximum pairwise model distance; ``tau_mean`` is the running mean
    staleness (gossip only).
    """

    t: int
    sim_time: float
    bits: int
    loss: float
    grad_norm: float
    spread: float
    loss_hub: float | None = None
    tau_mean: float | None = None

    def __post_init__(self):
        vals = [self.sim_time, self.loss, self.grad_norm, self.spread]
        vals += [v for v in (self.loss_hub, self.tau_mean) if v is not None]
        if not all(np.isfinite(v) for v in vals):
            raise ValueError("run record fields must be finite")


@dataclass(frozen=True)
class CrossingPoint:
    t: int
    sim_time: float
    bits: int


def max_pairwise_distance(models: np.ndarray) -> float:
    diffs = models[None, :, :] - models[:, None, :]
    return float(np.sqrt((diffs**2).sum(axis=2)).max())


def evaluate(stepper, accounting) -> RunRecord:
    """Build a record from the current state; never mutates the stepper."""
    obj = stepper.objective
    consensus = stepper.models.mean(axis=0)
    record = RunRecord(
        t=accounting.iterations,
        sim_time=accounting.sim_time,
        bits=accounting.bits,
        loss=data.global_loss(obj, consensus),
        grad_norm=data.global_grad_norm(obj, consensus),
        spread=max_pairwise_distance(stepper.models),
        loss_hub=data.global_loss(obj, stepper.hub_model) if stepper.algo == "mw" else None,
        tau_mean=stepper.tau_mean if stepper.algo == "gossip" else None,
    )
    return record


def time_to_target(records, target_grad_norm: float) -> CrossingPoint | None:
    """First record at or below the gradient-norm target; None if never reached.

    No interpolation: the discrete crossing record is reported as-is.
    """
    for rec in records:
        if rec.grad_norm <= target_grad_norm:
            return CrossingPoint(t=rec.t, sim_time=rec.sim_time, bits=rec.bits)
    return None
