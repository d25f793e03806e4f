# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled accumulation of horizontal random walks (step <= 3)."""

import numpy as np
from libc.stdlib cimport malloc, free
from libc.string cimport memset


cdef inline void _bracket(const double* u, const double* v, double* out, int dim,
                          const int* bi, const int* bj, const int* bm, const double* bc,
                          int nb) noexcept nogil:
    cdef int e
    memset(out, 0, dim * sizeof(double))
    for e in range(nb):
        out[bm[e]] += bc[e] * u[bi[e]] * v[bj[e]]


def accumulate(double[:, :, ::1] increments, int[::1] first, int[::1] bi, int[::1] bj,
               int[::1] bm, double[::1] bc, int dim, int step):
    """Fold ``z <- log(exp(z) exp(b))`` over the walk steps of every sample.

    ``increments`` has shape (samples, steps, first-layer dim).
    """
    if step > 3:
        raise ValueError("walk accumulation supports step <= 3")
    cdef Py_ssize_t n = increments.shape[0], steps = increments.shape[1]
    cdef int n1 = increments.shape[2], nb = bi.shape[0]
    out_arr = np.zeros((n, dim), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double* work = <double*> malloc(4 * dim * sizeof(double))
    if work == NULL:
        raise MemoryError()
    cdef double* b = work
    cdef double* zb = work + dim
    cdef double* zzb = work + 2 * dim
    cdef double* bzb = work + 3 * dim
    cdef Py_ssize_t s, m
    cdef int i
    cdef double* z
    try:
        with nogil:
            for s in range(n):
                z = &out[s, 0]
                for m in range(steps):
                    memset(b, 0, dim * sizeof(double))
                    for i in range(n1):
                        b[first[i]] = increments[s, m, i]
                    if nb == 0:
                        for i in range(dim):
                            z[i] += b[i]
                        continue
                    _bracket(z, b, zb, dim, &bi[0], &bj[0], &bm[0], &bc[0], nb)
                    if step >= 3:
                        _bracket(z, zb, zzb, dim, &bi[0], &bj[0], &bm[0], &bc[0], nb)
                        _bracket(b, zb, bzb, dim, &bi[0], &bj[0], &bm[0], &bc[0], nb)
                        for i in range(dim):
                            z[i] += b[i] + 0.5 * zb[i] + (zzb[i] - bzb[i]) / 12.0
                    else:
                        for i in range(dim):
                            z[i] += b[i] + 0.5 * zb[i]
    finally:
        free(work)
    return out_arr
