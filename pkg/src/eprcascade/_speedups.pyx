# cython: boundscheck=False, wraparound=False, initializedcheck=False
# cython: cdivision=True, language_level=3
"""Compiled sparse-times-dense kernels for the density-matrix integrator.

Both routines accumulate into ``out`` so one right-hand-side evaluation can
sum many operator terms without temporaries.  The CSR arrays must use int64
indices and complex128 data; ``x`` and ``out`` must be C-contiguous square
matrices of matching shape.
"""

import numpy as np

cimport numpy as cnp


def spmm_left_acc(const cnp.int64_t[::1] indptr,
                  const cnp.int64_t[::1] indices,
                  const double complex[::1] data,
                  const double complex[:, ::1] x,
                  double complex[:, ::1] out,
                  double complex alpha):
    """out += alpha * (A @ x) for A in CSR form."""
    cdef Py_ssize_t nrow = out.shape[0]
    cdef Py_ssize_t ncol = out.shape[1]
    cdef Py_ssize_t i, j, p, k
    cdef double complex aik
    for i in range(nrow):
        for p in range(indptr[i], indptr[i + 1]):
            k = indices[p]
            aik = alpha * data[p]
            for j in range(ncol):
                out[i, j] = out[i, j] + aik * x[k, j]


def spmm_right_acc(const cnp.int64_t[::1] indptr,
                   const cnp.int64_t[::1] indices,
                   const double complex[::1] data,
                   const double complex[:, ::1] x,
                   double complex[:, ::1] out,
                   double complex alpha):
    """out += alpha * (x @ B) for B in CSR form (indexed by rows of B)."""
    cdef Py_ssize_t nrow = x.shape[0]
    cdef Py_ssize_t nmid = indptr.shape[0] - 1
    cdef Py_ssize_t i, k, p
    cdef double complex xik
    for i in range(nrow):
        for k in range(nmid):
            xik = x[i, k]
            if xik == 0:
                # ladder-operator states are sparse early in a run
                continue
            xik = alpha * xik
            for p in range(indptr[k], indptr[k + 1]):
                out[i, indices[p]] = out[i, indices[p]] + xik * data[p]
