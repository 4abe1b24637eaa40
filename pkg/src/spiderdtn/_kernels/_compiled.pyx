# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled forward kernel. Mirrors _kernels.reference.forward_core; see that
module for the contract. Uses LAPACK dpotrf/dpotrs and BLAS dgemm directly on
Fortran-ordered buffers to avoid per-call Python overhead in the solver loop.
"""

import numpy as np

from libc.stdint cimport int64_t
from scipy.linalg.cython_blas cimport dgemm
from scipy.linalg.cython_lapack cimport dpotrf, dpotrs


def forward_core(
    int num_boundary,
    int num_vertices,
    const int64_t[::1] tails,
    const int64_t[::1] heads,
    const double[::1] weights,
    bint want_diffs,
):
    cdef int m = num_boundary
    cdef int ni = num_vertices - m
    cdef int num_edges = tails.shape[0]
    cdef int info = 0
    cdef int t, i, j
    cdef Py_ssize_t e, u, v
    cdef double w, left, right, half
    cdef double one = 1.0, zero = 0.0

    interior_arr = np.zeros((ni, ni), order="F")
    coupling_arr = np.zeros((m, ni), order="F")
    boundary_diag_arr = np.zeros(m)
    cdef double[::1, :] interior = interior_arr
    cdef double[::1, :] coupling = coupling_arr
    cdef double[::1] boundary_diag = boundary_diag_arr

    for e in range(num_edges):
        u = tails[e]
        v = heads[e]
        w = weights[e]
        if u < m:
            # canonical orientation puts the boundary endpoint on the tail
            boundary_diag[u] += w
            coupling[u, v - m] -= w
            interior[v - m, v - m] += w
        else:
            interior[u - m, u - m] += w
            interior[v - m, v - m] += w
            interior[u - m, v - m] -= w
            interior[v - m, u - m] -= w

    dpotrf("L", &ni, &interior[0, 0], &ni, &info)
    if info != 0:
        raise np.linalg.LinAlgError("interior block is not positive definite")

    potentials_arr = np.zeros((ni, m), order="F")
    cdef double[::1, :] potentials = potentials_arr
    for t in range(m):
        for i in range(ni):
            potentials[i, t] = -coupling[t, i]
    dpotrs("L", &ni, &m, &interior[0, 0], &ni, &potentials[0, 0], &ni, &info)
    if info != 0:
        raise np.linalg.LinAlgError("interior solve failed")

    response_arr = np.zeros((m, m), order="F")
    cdef double[::1, :] response = response_arr
    dgemm(
        "N", "N", &m, &m, &ni,
        &one, &coupling[0, 0], &m, &potentials[0, 0], &ni,
        &zero, &response[0, 0], &m,
    )
    for j in range(m):
        response[j, j] += boundary_diag[j]
    for j in range(m):
        for t in range(j + 1, m):
            half = 0.5 * (response[j, t] + response[t, j])
            response[j, t] = half
            response[t, j] = half

    response_c = np.ascontiguousarray(response_arr)
    potentials_c = np.ascontiguousarray(potentials_arr)
    if not want_diffs:
        return response_c, potentials_c, None

    diffs_arr = np.empty((num_edges, m))
    cdef double[:, ::1] diffs = diffs_arr
    for e in range(num_edges):
        u = tails[e]
        v = heads[e]
        for t in range(m):
            if u < m:
                left = 1.0 if u == t else 0.0
            else:
                left = potentials[u - m, t]
            if v < m:
                right = 1.0 if v == t else 0.0
            else:
                right = potentials[v - m, t]
            diffs[e, t] = left - right
    return response_c, potentials_c, diffs_arr
