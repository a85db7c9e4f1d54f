# cython: boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Fused CSR kernel for the swept Hamiltonian.

Computes out = (c0*A0 + c1*A1 + c2*A2) @ x in one pass over a shared
sparsity pattern. This is the hot loop of the time propagation, where the
three parts (static, drive, detuning) are combined with fresh scalars at
every right-hand-side evaluation.
"""

import numpy as np

cimport numpy as cnp

ctypedef cnp.int32_t ITYPE
ctypedef double complex CTYPE


def fused3_matvec(
    cnp.ndarray[ITYPE, ndim=1] indptr,
    cnp.ndarray[ITYPE, ndim=1] indices,
    cnp.ndarray[CTYPE, ndim=1] d0,
    cnp.ndarray[CTYPE, ndim=1] d1,
    cnp.ndarray[CTYPE, ndim=1] d2,
    CTYPE c0,
    CTYPE c1,
    CTYPE c2,
    cnp.ndarray[CTYPE, ndim=1] x,
    cnp.ndarray[CTYPE, ndim=1] out,
):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t i, p, start, stop
    cdef CTYPE acc
    with nogil:
        for i in range(n):
            acc = 0
            start = indptr[i]
            stop = indptr[i + 1]
            for p in range(start, stop):
                acc = acc + (c0 * d0[p] + c1 * d1[p] + c2 * d2[p]) * x[indices[p]]
            out[i] = acc
    return out
