"""Kernel dispatch: compiled extension when built, numpy fallback otherwise."""

import numpy as np

try:
    from . import _kernels as _impl

    BACKEND = "native"
except ImportError:  # extension not built; numpy fallback is fully equivalent
    from . import _kernels_py as _impl

    BACKEND = "python"


def gauss_seidel_fill(gains: np.ndarray, missing: np.ndarray, tol: float, max_iters: int):
    """Relax the missing cells of ``gains`` in place.

    ``gains`` must be float64 C-contiguous (n_az, n_el); ``missing`` a bool
    array of the same shape. Returns (iterations, last_max_update, converged).
    """
    if BACKEND == "native":
        return _impl.gauss_seidel_fill(gains, missing.view(np.uint8), tol, int(max_iters))
    return _impl.gauss_seidel_fill(gains, missing, tol, int(max_iters))
