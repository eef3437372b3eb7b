"""Kernel backend selection.

The hot numeric loops exist twice: JIT-compiled with numba (`_kernels_nb`)
and in pure numpy (`_kernels_np`). The active backend is chosen once at
import from the BDMPL_KERNELS environment variable:

    BDMPL_KERNELS=numba   force the JIT kernels (default when numba imports)
    BDMPL_KERNELS=numpy   force the pure-numpy fallback

The two backends produce bit-identical results on the scoring and sampling
paths (see `benchmarks/backend_bench.py` for the speed comparison).
"""

import os
import warnings

from . import _kernels_np

_ENV_VAR = "BDMPL_KERNELS"
_CHOICES = ("numba", "numpy")


def get_backend(name):
    """Backend module by name ("numba" or "numpy"); numba may raise ImportError."""
    if name == "numpy":
        return _kernels_np
    if name == "numba":
        from . import _kernels_nb

        return _kernels_nb
    raise ValueError(f"unknown kernel backend {name!r}; choose from {_CHOICES}")


def _select():
    requested = os.environ.get(_ENV_VAR, "").strip().lower()
    if requested and requested not in _CHOICES:
        raise ValueError(
            f"{_ENV_VAR}={requested!r} not understood; choose from {_CHOICES}"
        )
    if requested == "numpy":
        return "numpy", _kernels_np
    try:
        backend = get_backend("numba")
        return "numba", backend
    except ImportError:
        if requested == "numba":
            raise
        warnings.warn("numba unavailable; falling back to pure-numpy kernels")
        return "numpy", _kernels_np


BACKEND, _impl = _select()

exact_sum = _impl.exact_sum
build_groups = _impl.build_groups
score_groups = _impl.score_groups
score_groups_refine = _impl.score_groups_refine
total_rate = _impl.total_rate
pick_edge = _impl.pick_edge
presence_times = _impl.presence_times
gibbs_chain = _impl.gibbs_chain
