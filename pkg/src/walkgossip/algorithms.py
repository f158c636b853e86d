"""The two algorithm state machines, written as event steppers.

Multi-walk: R model-carrying random walks stepped by their own clocks;
each event applies one local SGD step at the walk's current node, mixes at
the hub (node 0), then hops to a neighbor drawn from the walk's transition
row. One model transmission per iteration, self-hops included.

Asynchronous gossip: every node computes on a stale snapshot of its own
model; each completion applies the delayed gradient at that node and then
one global mixing step, costing one model transmission per positive
off-diagonal entry of the mixing matrix.
"""

from __future__ import annotations

import numpy as np

from . import data
from .engine import InvariantViolation
from .graph import MixingMatrix, Topology, offdiag_nnz
from .rng import substream

ROW_SUM_TOL = 1e-9


def _check_rows(entries: np.ndarray) -> np.ndarray:
    cum = np.cumsum(entries, axis=1)
    bad = np.abs(cum[:, -1] - 1.0) > ROW_SUM_TOL
    if bad.any():
        raise InvariantViolation(f"transition row {int(np.flatnonzero(bad)[0])} does not sum to 1")
    return cum


class MultiWalkStepper:
    """R walks with hub mixing at node 0; walk r starts at node r.

    The hub keeps a copy of each walk's model from its latest node-0 visit
    plus the index of the last visiting walk. The mixing update
    x <- u_last + (x - u_r)/R is evaluated as
    x + (u_last - u_r) + (1/R - 1)(x - u_r), which is the same expression
    rearranged so that the single-walk case is an exact no-op.
    """

    event_kind = "walk_iteration_done"
    algo = "mw"

    def __init__(self, topology: Topology, matrix: MixingMatrix, objective: data.Objective,
                 *, n_walks: int, eta: float, batch_size: int, x0: np.ndarray,
                 seed: int, hub_mixing: bool = True):
        V = topology.node_count
        if not 1 <= n_walks <= V:
            raise ValueError(f"n_walks must be in [1, V={V}]: walk r starts at node r-1")
        if objective.node_count != V:
            raise ValueError("objective must provide one shard per node")
        x0 = np.asarray(x0, dtype=np.float64)
        self.topology = topology
        self.objective = objective
        self.n_walks = n_walks
        self.eta = float(eta)
        self.batch_size = int(batch_size)
        self.hub_mixing = hub_mixing
        self.positions = list(range(n_walks))
        self.models = np.tile(x0, (n_walks, 1))
        self.hub = np.tile(x0, (n_walks, 1))
        self.hub_last = 0
        self.cum_rows = _check_rows(matrix.entries)
        self.mix_coeff = 1.0 / n_walks - 1.0
        self.move_rngs = [substream(seed, "walk-moves", r) for r in range(n_walks)]
        self.grad_rngs = [substream(seed, "walk-grads", r) for r in range(n_walks)]
        self.actors = tuple(range(n_walks))
        self.iteration = 0

    @property
    def hub_model(self) -> np.ndarray:
        return self.hub[self.hub_last]

    def step(self, actor: int) -> int:
        r = actor
        v = self.positions[r]
        g = data.stochastic_gradient(self.objective, v, self.models[r],
                                     self.batch_size, self.grad_rngs[r])
        x = self.models[r] - self.eta * g
        if v == 0 and self.hub_mixing:
            x = x + (self.hub[self.hub_last] - self.hub[r]) + self.mix_coeff * (x - self.hub[r])
            self.hub[r] = x
            self.hub_last = r
        self.models[r] = x
        u = self.move_rngs[r].random()
        self.positions[r] = min(int(np.searchsorted(self.cum_rows[v], u, side="right")),
                                self.topology.node_count - 1)
        self.iteration += 1
        return 1


class GossipStepper:
    """All-node asynchronous gossip with delayed gradients.

    Mixing is applied in difference form, x_i += sum_j p_ij (x_j - x_i),
    which is exact consensus-preserving in floating point: once all models
    are bitwise equal the update is exactly zero.
    """

    event_kind = "node_gradient_done"
    algo = "gossip"

    def __init__(self, topology: Topology, matrix: MixingMatrix, objective: data.Objective,
                 *, eta: float, batch_size: int, x0: np.ndarray, seed: int):
        V = topology.node_count
        if objective.node_count != V:
            raise ValueError("objective must provide one shard per node")
        x0 = np.asarray(x0, dtype=np.float64)
        self.topology = topology
        self.objective = objective
        self.eta = float(eta)
        self.batch_size = int(batch_size)
        self.entries = matrix.entries
        _check_rows(matrix.entries)
        self.messages_per_step = offdiag_nnz(matrix)
        self.models = np.tile(x0, (V, 1))
        self.anchors = self.models.copy()
        self.anchor_iteration = np.zeros(V, dtype=np.int64)
        self.grad_rngs = [substream(seed, "node-grads", v) for v in range(V)]
        self.actors = tuple(range(V))
        self.iteration = 0
        self.tau_sum = 0
        self.tau_count = 0

    def step(self, actor: int) -> int:
        v = actor
        g = data.stochastic_gradient(self.objective, v, self.anchors[v],
                                     self.batch_size, self.grad_rngs[v])
        self.tau_sum += self.iteration - int(self.anchor_iteration[v])
        self.tau_count += 1
        X = self.models
        X[v] = X[v] - self.eta * g
        diffs = X[None, :, :] - X[:, None, :]
        X += np.einsum("ij,ijd->id", self.entries, diffs)
        self.iteration += 1
        self.anchors[v] = X[v]
        self.anchor_iteration[v] = self.iteration
        return self.messages_per_step

    @property
    def tau_mean(self) -> float:
        return self.tau_sum / self.tau_count if self.tau_count else 0.0
