# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled sampler for first-return-time excursions of a finite chain.

Transitions are given in compressed row form: row i's nonzero targets are
``cols[indptr[i]:indptr[i+1]]`` with cumulative probabilities ``cumprobs``
over the same slice. Next states are drawn by inverse CDF with one uniform
per step, consumed directly from a NumPy bit generator.
"""

import numpy as np

cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer
from numpy.random cimport bitgen_t

cnp.import_array()


def sample_first_return_times(cnp.int64_t[::1] indptr,
                              cnp.int64_t[::1] cols,
                              double[::1] cumprobs,
                              Py_ssize_t target,
                              Py_ssize_t n_samples,
                              Py_ssize_t max_steps,
                              object bit_generator):
    """Return an int64 array of excursion lengths; -1 marks truncation."""
    cdef bitgen_t *rng = <bitgen_t *> PyCapsule_GetPointer(
        bit_generator.capsule, "BitGenerator")
    out = np.empty(n_samples, dtype=np.int64)
    cdef cnp.int64_t[::1] times = out
    cdef Py_ssize_t i, state, steps, lo, hi, k
    cdef bint returned
    cdef double u
    with nogil:
        for i in range(n_samples):
            state = target
            steps = 0
            returned = False
            while steps < max_steps:
                u = rng.next_double(rng.state)
                lo = indptr[state]
                hi = indptr[state + 1]
                k = lo
                while k < hi - 1 and cumprobs[k] < u:
                    k += 1
                state = cols[k]
                steps += 1
                if state == target:
                    returned = True
                    break
            times[i] = steps if returned else -1
    return out
