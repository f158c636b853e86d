"""Graph topologies and their Metropolis-Hastings mixing matrices.

Supported families: cycle, complete, 2d torus, and Erdos-Renyi G(V, p)
conditioned on connectivity. The Metropolis-Hastings construction assigns
edge {i, j} the weight min(1/(deg(i)+1), 1/(deg(j)+1)) and puts the
leftover mass on the diagonal, which yields a symmetric doubly stochastic
matrix on any undirected graph.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from math import isqrt

import numpy as np

from .rng import substream

KINDS = ("cycle", "complete", "torus2d", "erdos_renyi")

ER_MAX_ATTEMPTS = 1000
STOCHASTICITY_TOL = 1e-12


@dataclass(frozen=True)
class Topology:
    """Undirected connected graph: node count plus sorted neighbor lists."""

    kind: str
    node_count: int
    neighbors: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        V = self.node_count
        if V < 2:
            raise ValueError("a topology needs at least 2 nodes")
        if len(self.neighbors) != V:
            raise ValueError("neighbor lists must cover every node")
        for i, nbrs in enumerate(self.neighbors):
            if list(nbrs) != sorted(set(nbrs)):
                raise ValueError(f"neighbors of node {i} must be sorted and duplicate-free")
            if i in nbrs:
                raise ValueError(f"self-edge at node {i}")
            for j in nbrs:
                if not 0 <= j < V:
                    raise ValueError(f"neighbor {j} of node {i} out of range")
                if i not in self.neighbors[j]:
                    raise ValueError(f"asymmetric adjacency between {i} and {j}")
        if not is_connected(self.neighbors):
            raise ValueError("graph is not connected")

    def degree(self, node: int) -> int:
        return len(self.neighbors[node])

    @property
    def edge_count(self) -> int:
        return sum(len(n) for n in self.neighbors) // 2


@dataclass(frozen=True)
class MixingMatrix:
    """Dense doubly stochastic matrix; row i holds node i's transition weights."""

    size: int
    entries: np.ndarray

    def __post_init__(self):
        e = np.array(self.entries, dtype=np.float64)
        if e.shape != (self.size, self.size):
            raise ValueError(f"entries must be {self.size}x{self.size}")
        if np.any(e < 0.0) or np.any(e > 1.0):
            raise ValueError("entries must be probabilities in [0, 1]")
        dev = max(
            np.abs(e.sum(axis=1) - 1.0).max(),
            np.abs(e.sum(axis=0) - 1.0).max(),
        )
        if dev > STOCHASTICITY_TOL:
            raise ValueError(f"matrix is not doubly stochastic (max sum deviation {dev:.3e})")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)


def is_connected(neighbors) -> bool:
    """Breadth-first connectivity check over adjacency lists."""
    n = len(neighbors)
    if n == 0:
        return False
    seen = [False] * n
    seen[0] = True
    queue = deque([0])
    count = 1
    while queue:
        i = queue.popleft()
        for j in neighbors[i]:
            if not seen[j]:
                seen[j] = True
                count += 1
                queue.append(j)
    return count == n


def _cycle_neighbors(V: int):
    return tuple(tuple(sorted(((i - 1) % V, (i + 1) % V))) for i in range(V))


def _complete_neighbors(V: int):
    return tuple(tuple(j for j in range(V) if j != i) for i in range(V))


def _torus_neighbors(V: int):
    k = isqrt(V)
    out = []
    for i in range(V):
        r, c = divmod(i, k)
        nbrs = {
            ((r - 1) % k) * k + c,
            ((r + 1) % k) * k + c,
            r * k + (c - 1) % k,
            r * k + (c + 1) % k,
        }
        nbrs.discard(i)
        out.append(tuple(sorted(nbrs)))
    return tuple(out)


def _erdos_renyi_neighbors(V: int, p: float, seed: int):
    last_err = None
    for attempt in range(ER_MAX_ATTEMPTS):
        rng = substream(seed, "erdos_renyi", attempt)
        draws = rng.random((V, V))
        adj = [set() for _ in range(V)]
        for i in range(V):
            for j in range(i + 1, V):
                if draws[i, j] < p:
                    adj[i].add(j)
                    adj[j].add(i)
        neighbors = tuple(tuple(sorted(s)) for s in adj)
        if is_connected(neighbors):
            return neighbors
        last_err = attempt
    raise RuntimeError(
        f"no connected Erdos-Renyi draw in {ER_MAX_ATTEMPTS} attempts "
        f"(V={V}, edge_probability={p}, seed={seed}, last attempt={last_err})"
    )


def build_topology(kind: str, node_count: int, edge_probability: float | None = None,
                   seed: int = 0) -> Topology:
    """Construct one of the supported topologies.

    ``edge_probability`` is required for (and only for) ``erdos_renyi``;
    disconnected draws are rejected and resampled from scratch so the
    result follows G(V, p) conditioned on connectivity.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown topology kind {kind!r}; expected one of {KINDS}")
    V = node_count
    if kind == "erdos_renyi":
        if edge_probability is None:
            raise ValueError("erdos_renyi requires edge_probability")
        if not 0.0 < edge_probability <= 1.0:
            raise ValueError("edge_probability must be in (0, 1]")
    elif edge_probability is not None:
        raise ValueError(f"edge_probability is only valid for erdos_renyi, not {kind}")

    if kind == "cycle":
        if V < 3:
            raise ValueError("cycle needs V >= 3 to stay a simple graph")
        neighbors = _cycle_neighbors(V)
    elif kind == "complete":
        if V < 2:
            raise ValueError("complete needs V >= 2")
        neighbors = _complete_neighbors(V)
    elif kind == "torus2d":
        k = isqrt(V)
        if k * k != V or k < 2:
            raise ValueError("torus2d needs V = k*k with integer k >= 2")
        neighbors = _torus_neighbors(V)
    else:
        if V < 2:
            raise ValueError("erdos_renyi needs V >= 2")
        neighbors = _erdos_renyi_neighbors(V, edge_probability, seed)
    return Topology(kind=kind, node_count=V, neighbors=neighbors)


def metropolis_hastings(topology: Topology) -> MixingMatrix:
    """Symmetric doubly stochastic matrix over the topology's edges.

    Edge weight min(1/(deg(i)+1), 1/(deg(j)+1)); each diagonal entry takes
    the row's leftover mass, which is always nonnegative.
    """
    V = topology.node_count
    P = np.zeros((V, V))
    for i, nbrs in enumerate(topology.neighbors):
        wi = 1.0 / (len(nbrs) + 1)
        for j in nbrs:
            P[i, j] = min(wi, 1.0 / (len(topology.neighbors[j]) + 1))
        P[i, i] = 1.0 - P[i].sum()
    return MixingMatrix(size=V, entries=P)


def offdiag_nnz(matrix: MixingMatrix) -> int:
    """Count of strictly positive off-diagonal entries (models sent per mixing)."""
    e = matrix.entries
    return int(np.count_nonzero(e) - np.count_nonzero(np.diag(e)))
