"""Spectral gaps and first-return-time moments of the walk's Markov chain.

Three routes to the return-time moments, used to cross-check each other:

* ``return_moments_exact`` -- first-step analysis on an arbitrary
  irreducible chain, reduced to two (V-1)-dimensional linear systems for
  the hitting-time mean and second moment and solved by partial-pivot
  elimination.
* ``return_moments_cycle_analytic`` -- the reduced symmetric recurrences
  that hold for the lazy 1/3-1/3-1/3 walk on an even cycle.
* ``return_moments_mc`` -- Monte-Carlo excursions, with standard errors.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .graph import MixingMatrix
from .rng import seed_sequence

SOLVE_RESIDUAL_TOL = 1e-9
MC_MAX_TRUNCATED_FRACTION = 1e-3


@dataclass(frozen=True)
class SpectralGaps:
    """Spectral gaps governing mixing: of P^T P (``gap_ptp``) and of P (``gap_p``)."""

    gap_ptp: float
    gap_p: float

    def __post_init__(self):
        for name in ("gap_ptp", "gap_p"):
            v = getattr(self, name)
            if not -1e-12 <= v <= 1.0 + 1e-12:
                raise ValueError(f"{name}={v} outside [0, 1]")


@dataclass(frozen=True)
class ReturnMoments:
    """Mean and second moment of the first return time to the target node.

    ``mean_stderr``/``second_stderr`` are set only for Monte-Carlo
    estimates; ``n_truncated`` counts excursions cut off at the step cap.
    """

    mean: float
    second: float
    mean_stderr: float | None = None
    second_stderr: float | None = None
    n_samples: int | None = None
    n_truncated: int | None = None

    def __post_init__(self):
        if self.mean < 1.0 - 1e-9:
            raise ValueError(f"return-time mean {self.mean} < 1")
        if self.second < self.mean**2 * (1.0 - 1e-9):
            raise ValueError("second moment violates Jensen: second < mean^2")


@dataclass(frozen=True)
class CycleMoments:
    """Analytic even-cycle solution plus hitting-time diagnostics.

    ``hitting_means[i]``/``hitting_seconds[i]`` are the first two moments of
    the time to hit the target from the state at ring distance i+1.
    """

    moments: ReturnMoments
    hitting_means: np.ndarray
    hitting_seconds: np.ndarray

    @property
    def neighbor_hitting_mean(self) -> float:
        return float(self.hitting_means[0])


def _require_irreducible(entries: np.ndarray) -> None:
    # strong connectivity of the support, forward and backward BFS from 0
    n = entries.shape[0]
    for mat in (entries, entries.T):
        seen = np.zeros(n, dtype=bool)
        seen[0] = True
        queue = deque([0])
        while queue:
            i = queue.popleft()
            for j in np.nonzero(mat[i])[0]:
                if not seen[j]:
                    seen[j] = True
                    queue.append(int(j))
        if not seen.all():
            raise ValueError("chain is reducible: support graph is not strongly connected")


def spectral_gaps(matrix: MixingMatrix) -> SpectralGaps:
    """1 minus the second-largest eigenvalue (by value) of P^T P and of P.

    Requires a symmetric matrix, which every Metropolis-Hastings
    construction here satisfies; the full symmetric eigensolve is cheap at
    the supported sizes and accurate far below the 1e-10 target.
    """
    e = matrix.entries
    if matrix.size < 2:
        raise ValueError("spectral gaps need V >= 2")
    if not np.allclose(e, e.T, atol=1e-12):
        raise ValueError("spectral gaps are defined here for symmetric mixing matrices")
    try:
        evals = np.linalg.eigvalsh(e)
        gram_evals = np.linalg.eigvalsh(e.T @ e)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"eigensolver did not converge: {exc}") from exc
    gap_p = float(np.clip(1.0 - evals[-2], 0.0, 1.0))
    gap_ptp = float(np.clip(1.0 - gram_evals[-2], 0.0, 1.0))
    return SpectralGaps(gap_ptp=gap_ptp, gap_p=gap_p)


def _hitting_systems(entries: np.ndarray, target: int):
    """Solve (I-Q)m = 1 and (I-Q)M = 1 + 2Qm over the non-target states."""
    V = entries.shape[0]
    idx = np.array([i for i in range(V) if i != target])
    Q = entries[np.ix_(idx, idx)]
    A = np.eye(V - 1) - Q
    ones = np.ones(V - 1)
    try:
        m = np.linalg.solve(A, ones)
        rhs2 = ones + 2.0 * (Q @ m)
        M = np.linalg.solve(A, rhs2)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"singular hitting-time system (reducible chain?): {exc}") from exc
    for sol, rhs in ((m, ones), (M, rhs2)):
        resid = np.max(np.abs(A @ sol - rhs))
        if resid > SOLVE_RESIDUAL_TOL * (1.0 + np.max(np.abs(sol))):
            raise RuntimeError(f"hitting-time solve residual {resid:.3e} too large")
    return idx, m, M


def return_moments_exact(matrix: MixingMatrix, target_node: int = 0) -> ReturnMoments:
    """Exact first-return-time moments via direct linear solves."""
    e = matrix.entries
    if not 0 <= target_node < matrix.size:
        raise ValueError("target_node out of range")
    _require_irreducible(e)
    idx, m, M = _hitting_systems(e, target_node)
    row = e[target_node, idx]
    mean = 1.0 + float(row @ m)
    second = 1.0 + float(row @ (2.0 * m + M))
    return ReturnMoments(mean=mean, second=second)


def return_moments_cycle_analytic(node_count: int) -> CycleMoments:
    """Moments for the lazy walk on an even cycle from the reduced recurrences.

    By the ring symmetry only states at distance 1..V/2 from the target are
    needed: interior states satisfy x_i = c_i + (x_{i-1} + x_{i+1})/2, the
    distance-1 state couples back to the target, and the antipode obeys a
    reflection condition. Back-substitution collapses the system to closed
    form: m_1 = (3V - 3)/2, m_j = m_{j-1} + 3(V/2 - j) + 3/2, and
    M_1 = 6 * sum(m_1..m_{n-1}) + 3 m_n - 3(n - 1) - 3/2 with n = V/2.
    Every intermediate is a half-integer, so the arithmetic is exact in
    floating point. Must agree with ``return_moments_exact`` on the cycle's
    Metropolis-Hastings chain.
    """
    V = node_count
    if V < 4 or V % 2 != 0:
        raise ValueError("analytic cycle moments need even V >= 4")
    n = V // 2
    m = np.empty(n)
    m[0] = (3.0 * V - 3.0) / 2.0
    for j in range(2, n + 1):
        m[j - 1] = m[j - 2] + 3.0 * (n - j) + 1.5
    M = np.empty(n)
    M[0] = 6.0 * m[: n - 1].sum() + 3.0 * m[n - 1] - 3.0 * (n - 1) - 1.5
    if n > 1:
        M[1] = 2.0 * M[0] - 6.0 * m[0] + 3.0
    for j in range(3, n + 1):
        M[j - 1] = 2.0 * M[j - 2] - 6.0 * m[j - 2] + 3.0 - M[j - 3]
    # return moments from the target's own first step; numerators are integers
    mean = (2.0 * m[0] + 3.0) / 3.0
    second = (4.0 * m[0] + 2.0 * M[0] + 3.0) / 3.0
    return CycleMoments(
        moments=ReturnMoments(mean=float(mean), second=float(second)),
        hitting_means=m,
        hitting_seconds=M,
    )


def return_moments_mc(matrix: MixingMatrix, target_node: int = 0,
                      n_samples: int = 1_000_000, max_steps: int = 100_000,
                      seed: int = 0) -> ReturnMoments:
    """Monte-Carlo return-time moments with standard errors.

    Excursions hitting ``max_steps`` are excluded from the moments and
    counted in ``n_truncated``; more than 0.1% truncation aborts since the
    estimate would be visibly biased.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    indptr, cols, cums = _kernels.compress_rows(matrix.entries)
    times = _kernels.sample_first_return_times(
        indptr, cols, cums, target_node, n_samples, max_steps,
        seed_sequence(seed, "return-mc", target_node),
    )
    n_truncated = int(np.count_nonzero(times < 0))
    if n_truncated > MC_MAX_TRUNCATED_FRACTION * n_samples:
        raise RuntimeError(
            f"{n_truncated}/{n_samples} excursions truncated at {max_steps} steps; "
            "raise max_steps"
        )
    done = times[times >= 0].astype(np.float64)
    n = done.size
    sq = done * done
    mean = float(done.mean())
    second = float(sq.mean())
    mean_se = float(done.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    second_se = float(sq.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return ReturnMoments(
        mean=mean, second=second,
        mean_stderr=mean_se, second_stderr=second_se,
        n_samples=n, n_truncated=n_truncated,
    )
