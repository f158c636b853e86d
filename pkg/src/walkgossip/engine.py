"""Deterministic discrete-event loop with per-actor exponential clocks.

Each actor (walk or node) owns an independent exponential clock of mean
``mean_delay``; every event pop is one global iteration. Ties in fire time
break on the insertion sequence number, so replays are exact. Accounting
tracks iterations, simulated time, transmitted bits (``model_bits`` per
message) and gradient evaluations.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Callable, Mapping, NamedTuple

from .rng import substream


class Event(NamedTuple):
    fire_time: float
    seq: int
    actor: int
    kind: str


@dataclass
class Accounting:
    iterations: int = 0
    sim_time: float = 0.0
    bits: int = 0
    gradient_evals: int = 0


@dataclass(frozen=True)
class EngineConfig:
    """Clock and accounting parameters.

    ``split_delay`` replaces the single lumped exponential with the sum of
    two independent exponentials of half the mean (communication plus
    computation), keeping the total mean; default is the lumped model.
    ``per_actor_delay`` optionally overrides the mean for chosen actors.
    """

    mean_delay: float = 1.0
    model_bits: int = 1
    split_delay: bool = False
    per_actor_delay: Mapping[int, float] | None = None

    def __post_init__(self):
        if self.mean_delay <= 0:
            raise ValueError("mean_delay must be > 0")
        if self.model_bits < 0:
            raise ValueError("model_bits must be >= 0")

    def delay_for(self, actor: int) -> float:
        if self.per_actor_delay is not None and actor in self.per_actor_delay:
            return self.per_actor_delay[actor]
        return self.mean_delay


class InvariantViolation(RuntimeError):
    """Raised when an algorithm invariant fails mid-run; aborts the run."""


def _positive_exponential(rng, mean: float) -> float:
    d = rng.exponential(mean)
    while d <= 0.0:
        d = rng.exponential(mean)
    return d


def draw_delay(rng, mean_delay: float, split_delay: bool = False) -> float:
    if mean_delay <= 0:
        raise ValueError("mean_delay must be > 0")
    if split_delay:
        return (_positive_exponential(rng, mean_delay / 2.0)
                + _positive_exponential(rng, mean_delay / 2.0))
    return _positive_exponential(rng, mean_delay)


def schedule_next(actor: int, now: float, mean_delay: float, rng, *,
                  seq: int = 0, kind: str = "event", split_delay: bool = False) -> Event:
    """Next event for ``actor``: fire time now + Exp(mean_delay) from its stream."""
    return Event(now + draw_delay(rng, mean_delay, split_delay), seq, actor, kind)


def run(config: EngineConfig, stepper, *, eval_interval: int, seed: int,
        evaluate: Callable, max_iterations: int | None = None,
        max_sim_time: float | None = None) -> list:
    """Drive ``stepper`` until the stop criterion; return one record per eval point.

    Exactly one of ``max_iterations``/``max_sim_time`` must be given. A
    t=0 baseline record is always emitted, then one every ``eval_interval``
    iterations, plus the final iteration. ``evaluate(stepper, accounting)``
    produces the record; everything is deterministic given ``seed``.
    """
    if (max_iterations is None) == (max_sim_time is None):
        raise ValueError("exactly one of max_iterations / max_sim_time is required")
    if eval_interval < 1:
        raise ValueError("eval_interval must be >= 1")

    actors = list(stepper.actors)
    delay_rngs = {a: substream(seed, "delay", a) for a in actors}
    acct = Accounting()
    heap = []
    seq = 0
    for a in actors:
        heapq.heappush(heap, schedule_next(
            a, 0.0, config.delay_for(a), delay_rngs[a],
            seq=seq, kind=stepper.event_kind, split_delay=config.split_delay))
        seq += 1

    records = [evaluate(stepper, acct)]
    last_recorded = 0
    while heap:
        if max_iterations is not None and acct.iterations >= max_iterations:
            break
        if max_sim_time is not None and heap[0].fire_time > max_sim_time:
            break
        ev = heapq.heappop(heap)
        try:
            messages = stepper.step(ev.actor)
        except InvariantViolation as exc:
            raise InvariantViolation(f"iteration {acct.iterations}: {exc}") from exc
        acct.iterations += 1
        acct.sim_time = ev.fire_time
        acct.bits += config.model_bits * messages
        acct.gradient_evals += 1
        heapq.heappush(heap, schedule_next(
            ev.actor, ev.fire_time, config.delay_for(ev.actor), delay_rngs[ev.actor],
            seq=seq, kind=stepper.event_kind, split_delay=config.split_delay))
        seq += 1
        if acct.iterations % eval_interval == 0:
            records.append(evaluate(stepper, acct))
            last_recorded = acct.iterations
    if acct.iterations != last_recorded:
        records.append(evaluate(stepper, acct))
    return records
