"""Kernel dispatch: compiled extension when importable, NumPy fallback otherwise.

Set ``WALKGOSSIP_KERNELS=compiled`` or ``=fallback`` to force a backend;
anything else (or unset) picks the compiled kernel when available.
"""

import os

import numpy as np

from . import fallback as _fallback

try:
    from . import _mc as _compiled
except ImportError:
    _compiled = None

_forced = os.environ.get("WALKGOSSIP_KERNELS", "auto").lower()
if _forced == "compiled" and _compiled is None:
    raise ImportError("WALKGOSSIP_KERNELS=compiled but the extension is not built")
if _forced == "fallback":
    _active, _active_name = _fallback, "fallback"
elif _compiled is not None:
    _active, _active_name = _compiled, "compiled"
else:
    _active, _active_name = _fallback, "fallback"


def backend_name() -> str:
    return _active_name


def have_compiled() -> bool:
    return _compiled is not None


def compress_rows(entries):
    """Dense transition matrix -> (indptr, cols, cumprobs) over strictly positive entries."""
    e = np.asarray(entries, dtype=np.float64)
    n = e.shape[0]
    indptr = np.zeros(n + 1, dtype=np.int64)
    cols = []
    cums = []
    for i in range(n):
        (jz,) = np.nonzero(e[i])
        if jz.size == 0:
            raise ValueError(f"row {i} has no positive transition probability")
        cols.append(jz)
        cums.append(np.cumsum(e[i, jz]))
        indptr[i + 1] = indptr[i] + jz.size
    return indptr, np.concatenate(cols).astype(np.int64), np.concatenate(cums)


def sample_first_return_times(indptr, cols, cumprobs, target, n_samples,
                              max_steps, seed_seq, module=None):
    """Draw excursion lengths from ``target`` back to ``target``; -1 = truncated."""
    impl = module if module is not None else _active
    return impl.sample_first_return_times(
        np.ascontiguousarray(indptr, dtype=np.int64),
        np.ascontiguousarray(cols, dtype=np.int64),
        np.ascontiguousarray(cumprobs, dtype=np.float64),
        int(target),
        int(n_samples),
        int(max_steps),
        np.random.PCG64(seed_seq),
    )


def backends():
    """(name, module) pairs for every importable backend, compiled first."""
    out = []
    if _compiled is not None:
        out.append(("compiled", _compiled))
    out.append(("fallback", _fallback))
    return out
