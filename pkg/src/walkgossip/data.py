"""Synthetic per-node datasets and gradient oracles.

The global objective is the plain average of local losses,
f(x) = (1/V) sum_v f_v(x). Two tasks: regularized least squares (convex,
closed-form optimum exposed for exact convergence checks) and binary
logistic regression. Heterogeneity is controlled either by ``hetero_shift``
(each node's planted optimum is displaced by a random unit vector scaled by
the shift) or, for label-based skew, by a Dirichlet split of a labeled pool.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .rng import substream

TASKS = ("least_squares", "logistic")

_MAGIC = b"WGSH"
_FORMAT_VERSION = 1


@dataclass(frozen=True)
class Shard:
    """One node's local dataset."""

    node: int
    features: np.ndarray
    targets: np.ndarray
    task: str

    def __post_init__(self):
        f = np.asarray(self.features, dtype=np.float64)
        t = np.asarray(self.targets, dtype=np.float64)
        if f.ndim != 2 or t.ndim != 1 or f.shape[0] != t.shape[0]:
            raise ValueError("features must be (n, dim) with matching (n,) targets")
        if f.shape[0] < 1:
            raise ValueError("shard must hold at least one sample")
        if not (np.isfinite(f).all() and np.isfinite(t).all()):
            raise ValueError("shard data must be finite")
        if self.task == "logistic" and not np.isin(t, (0.0, 1.0)).all():
            raise ValueError("logistic targets must be in {0, 1}")
        f.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "features", f)
        object.__setattr__(self, "targets", t)

    @property
    def n(self) -> int:
        return self.features.shape[0]


@dataclass(frozen=True)
class Objective:
    """All V shards plus task and ridge weight; immutable after construction."""

    shards: tuple[Shard, ...]
    task: str
    reg: float
    planted: np.ndarray | None = None
    optimum: np.ndarray | None = None

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValueError(f"unknown task {self.task!r}")
        if self.reg < 0:
            raise ValueError("regularization weight must be >= 0")

    @property
    def node_count(self) -> int:
        return len(self.shards)

    @property
    def model_dim(self) -> int:
        return self.shards[0].features.shape[1]


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _rows_loss(task, A, b, x, reg):
    z = A @ x
    if task == "least_squares":
        r = z - b
        base = 0.5 * float(r @ r) / len(b)
    else:
        base = float(np.mean(np.logaddexp(0.0, z) - b * z))
    return base + 0.5 * reg * float(x @ x)


def _rows_grad(task, A, b, x, reg):
    z = A @ x
    if task == "least_squares":
        g = A.T @ (z - b) / len(b)
    else:
        g = A.T @ (_sigmoid(z) - b) / len(b)
    return g + reg * x


def local_loss(obj: Objective, node: int, x: np.ndarray) -> float:
    s = obj.shards[node]
    return _rows_loss(obj.task, s.features, s.targets, x, obj.reg)


def local_grad(obj: Objective, node: int, x: np.ndarray) -> np.ndarray:
    s = obj.shards[node]
    return _rows_grad(obj.task, s.features, s.targets, x, obj.reg)


def global_loss(obj: Objective, x: np.ndarray) -> float:
    return float(np.mean([local_loss(obj, v, x) for v in range(obj.node_count)]))


def global_grad(obj: Objective, x: np.ndarray) -> np.ndarray:
    g = np.zeros_like(np.asarray(x, dtype=np.float64))
    for v in range(obj.node_count):
        g += local_grad(obj, v, x)
    return g / obj.node_count


def global_grad_norm(obj: Objective, x: np.ndarray) -> float:
    return float(np.linalg.norm(global_grad(obj, x)))


def diversity(obj: Objective, x: np.ndarray) -> float:
    """max_v || grad f_v(x) - grad f(x) ||^2, the heterogeneity level at x."""
    g = global_grad(obj, x)
    return max(float(np.sum((local_grad(obj, v, x) - g) ** 2)) for v in range(obj.node_count))


def stochastic_gradient(obj: Objective, node: int, x: np.ndarray, batch_size: int,
                        rng: np.random.Generator) -> np.ndarray:
    """Minibatch gradient of node's loss, sampled without replacement per call.

    ``batch_size == n`` short-circuits to the full local gradient (no
    randomness consumed), so full-batch runs are exactly deterministic.
    """
    s = obj.shards[node]
    if batch_size < 1 or batch_size > s.n:
        raise ValueError(f"batch_size must be in [1, {s.n}]")
    if batch_size == s.n:
        return local_grad(obj, node, x)
    idx = rng.choice(s.n, size=batch_size, replace=False)
    return _rows_grad(obj.task, s.features[idx], s.targets[idx], x, obj.reg)


def least_squares_optimum(shards, reg: float) -> np.ndarray:
    """Closed-form minimizer of the averaged regularized least-squares loss."""
    dim = shards[0].features.shape[1]
    H = np.zeros((dim, dim))
    g = np.zeros(dim)
    for s in shards:
        H += s.features.T @ s.features / s.n
        g += s.features.T @ s.targets / s.n
    H /= len(shards)
    g /= len(shards)
    return np.linalg.solve(H + reg * np.eye(dim), g)


def make_synthetic(task: str, node_count: int, n_per_node: int, model_dim: int,
                   hetero_shift: float = 0.0, noise_std: float = 0.0,
                   seed: int = 0, reg: float = 0.0) -> Objective:
    """Planted-optimum synthetic objective with a heterogeneity knob.

    Node v gets Gaussian features and targets generated from
    w_v = w* + hetero_shift * u_v with u_v a pseudo-random unit vector, so
    ``hetero_shift == 0`` makes every local gradient vanish at the shared
    optimum w*. The same features are drawn for every shift value, which
    keeps shift sweeps paired.
    """
    if task not in TASKS:
        raise ValueError(f"unknown task {task!r}")
    if min(node_count, n_per_node, model_dim) < 1:
        raise ValueError("node_count, n_per_node and model_dim must be positive")
    if hetero_shift < 0 or noise_std < 0:
        raise ValueError("hetero_shift and noise_std must be >= 0")
    w_star = substream(seed, "planted").normal(size=model_dim) / np.sqrt(model_dim)
    shards = []
    for v in range(node_count):
        rng = substream(seed, "shard", v)
        direction = rng.normal(size=model_dim)
        direction /= np.linalg.norm(direction)
        w_v = w_star + hetero_shift * direction
        A = rng.normal(size=(n_per_node, model_dim))
        noise = rng.normal(size=n_per_node)
        if task == "least_squares":
            b = A @ w_v + noise_std * noise
        else:
            b = (rng.random(n_per_node) < _sigmoid(A @ w_v)).astype(np.float64)
        shards.append(Shard(node=v, features=A, targets=b, task=task))
    shards = tuple(shards)
    optimum = least_squares_optimum(shards, reg) if task == "least_squares" else None
    return Objective(shards=shards, task=task, reg=reg, planted=w_star, optimum=optimum)


def _largest_remainder_counts(shares: np.ndarray, total: int) -> np.ndarray:
    raw = shares * total
    counts = np.floor(raw).astype(int)
    short = total - counts.sum()
    order = np.argsort(-(raw - counts), kind="stable")
    counts[order[:short]] += 1
    return counts


def dirichlet_partition(class_labels, node_count: int, alpha: float,
                        seed: int = 0, max_attempts: int = 100):
    """Disjoint per-node index lists with Dirichlet(alpha) label skew.

    Per class, node shares are drawn from Dirichlet(alpha * 1_V) and sample
    counts are fixed by largest-remainder rounding, so the lists always
    cover every index exactly once. Draws leaving some node empty are
    rejected and resampled, up to ``max_attempts``.
    """
    labels = np.asarray(class_labels)
    if labels.ndim != 1 or labels.size == 0:
        raise ValueError("class_labels must be a nonempty 1-d array")
    if node_count < 1:
        raise ValueError("node_count must be >= 1")
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    classes = np.unique(labels)
    for attempt in range(max_attempts):
        rng = substream(seed, "dirichlet", attempt)
        per_node = [[] for _ in range(node_count)]
        for c in classes:
            idx = np.flatnonzero(labels == c)
            idx = rng.permutation(idx)
            shares = rng.dirichlet(np.full(node_count, alpha))
            counts = _largest_remainder_counts(shares, idx.size)
            start = 0
            for v, k in enumerate(counts):
                per_node[v].append(idx[start : start + k])
                start += k
        parts = [np.sort(np.concatenate(p)) for p in per_node]
        if all(p.size > 0 for p in parts):
            return parts
    raise RuntimeError(
        f"dirichlet_partition left a node empty in {max_attempts} attempts "
        f"(V={node_count}, alpha={alpha}, seed={seed})"
    )


def make_dirichlet_logistic(node_count: int, n_per_node: int, model_dim: int,
                            alpha: float, seed: int = 0, reg: float = 0.0,
                            class_sep: float = 2.0) -> Objective:
    """Binary logistic objective with Dirichlet label skew across nodes.

    A balanced two-class Gaussian pool of V * n_per_node samples is split
    by ``dirichlet_partition``; small alpha concentrates each node on one
    class. Shard sizes vary with the draw.
    """
    total = node_count * n_per_node
    if total < 2 * node_count:
        raise ValueError("need at least two pool samples per node")
    rng = substream(seed, "pool")
    y = np.tile([0.0, 1.0], total // 2 + 1)[:total]
    direction = rng.normal(size=model_dim)
    direction /= np.linalg.norm(direction)
    X = rng.normal(size=(total, model_dim)) + np.outer(2.0 * y - 1.0, 0.5 * class_sep * direction)
    parts = dirichlet_partition(y, node_count, alpha, seed=seed)
    shards = tuple(
        Shard(node=v, features=X[p], targets=y[p], task="logistic")
        for v, p in enumerate(parts)
    )
    return Objective(shards=shards, task="logistic", reg=reg)


def save_shards(path, obj: Objective) -> None:
    """Flat binary dump: header (V, n, dim, task, reg) then per-node rows.

    Requires uniform shard sizes; Dirichlet objectives are reproducible
    from their seed instead.
    """
    sizes = {s.n for s in obj.shards}
    if len(sizes) != 1:
        raise ValueError("binary dump requires uniform shard sizes")
    n = sizes.pop()
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<IIIIBd", _FORMAT_VERSION, obj.node_count, n,
                             obj.model_dim, TASKS.index(obj.task), obj.reg))
        for s in obj.shards:
            fh.write(np.ascontiguousarray(s.features).tobytes())
            fh.write(np.ascontiguousarray(s.targets).tobytes())


def load_shards(path) -> Objective:
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise ValueError(f"{path} is not a shard dump")
        version, V, n, dim, task_id, reg = struct.unpack("<IIIIBd", fh.read(struct.calcsize("<IIIIBd")))
        if version != _FORMAT_VERSION:
            raise ValueError(f"unsupported shard dump version {version}")
        task = TASKS[task_id]
        shards = []
        for v in range(V):
            A = np.frombuffer(fh.read(8 * n * dim), dtype=np.float64).reshape(n, dim)
            b = np.frombuffer(fh.read(8 * n), dtype=np.float64)
            shards.append(Shard(node=v, features=A, targets=b, task=task))
    shards = tuple(shards)
    optimum = least_squares_optimum(shards, reg) if task == "least_squares" else None
    return Objective(shards=shards, task=task, reg=reg, optimum=optimum)
