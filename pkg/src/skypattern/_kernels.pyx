# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled grid completion kernel.

Red-black Gauss-Seidel sweeps over an azimuth-periodic, elevation-mirrored
grid. Matches the numpy fallback update ordering (identical iterates for
even azimuth dimensions).
"""

import numpy as np

cimport numpy as cnp


def gauss_seidel_fill(double[:, ::1] gains, cnp.uint8_t[:, ::1] missing,
                      double tol, long max_iters):
    """Fill missing cells of ``gains`` in place; see the numpy fallback docs.

    Returns (iterations, last_max_update, converged).
    """
    cdef Py_ssize_t n_az = gains.shape[0]
    cdef Py_ssize_t n_el = gains.shape[1]
    cdef Py_ssize_t i, j, ip, im, j0
    cdef long iteration
    cdef int phase
    cdef double s, cnt, new, upd
    cdef double max_update = 0.0

    for iteration in range(1, max_iters + 1):
        max_update = 0.0
        for phase in range(2):
            for i in range(n_az):
                im = i - 1 if i > 0 else n_az - 1
                ip = i + 1 if i < n_az - 1 else 0
                j0 = (phase + i) % 2
                for j in range(j0, n_el, 2):
                    if missing[i, j]:
                        s = gains[im, j] + gains[ip, j]
                        cnt = 2.0
                        if j > 0:
                            s = s + gains[i, j - 1]
                            cnt = cnt + 1.0
                        if j < n_el - 1:
                            s = s + gains[i, j + 1]
                            cnt = cnt + 1.0
                        new = s / cnt
                        upd = new - gains[i, j]
                        if upd < 0.0:
                            upd = -upd
                        if upd > max_update:
                            max_update = upd
                        gains[i, j] = new
        if max_update < tol:
            return iteration, max_update, True
    return max_iters, max_update, False
