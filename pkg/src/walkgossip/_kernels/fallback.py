"""NumPy fallback for the first-return-time sampler.

Steps all live excursions in lockstep; per step one uniform is drawn per
live excursion and the next state is found by counting cumulative row
probabilities below it. Slower than the compiled kernel but dependency-free.
"""

import numpy as np


def sample_first_return_times(indptr, cols, cumprobs, target, n_samples,
                              max_steps, bit_generator):
    """Return an int64 array of excursion lengths; -1 marks truncation."""
    rng = np.random.Generator(bit_generator)
    n_states = len(indptr) - 1
    width = int(np.max(np.diff(indptr)))
    # padded per-state tables: cum rows padded with 1.0, columns with the row's last target
    cum = np.ones((n_states, width))
    nxt = np.empty((n_states, width), dtype=np.int64)
    for s in range(n_states):
        lo, hi = indptr[s], indptr[s + 1]
        cum[s, : hi - lo] = cumprobs[lo:hi]
        nxt[s, : hi - lo] = cols[lo:hi]
        nxt[s, hi - lo :] = cols[hi - 1]

    times = np.full(n_samples, -1, dtype=np.int64)
    idx = np.arange(n_samples)
    state = np.full(n_samples, target, dtype=np.int64)
    steps = 0
    while idx.size and steps < max_steps:
        u = rng.random(idx.size)
        pick = np.minimum((cum[state] < u[:, None]).sum(axis=1), width - 1)
        state = nxt[state, pick]
        steps += 1
        done = state == target
        times[idx[done]] = steps
        idx = idx[~done]
        state = state[~done]
    return times
