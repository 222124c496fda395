# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: Fock-tensor ladder sums and batched moment congruence."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


def fock_mode_sums(psi3):
    """Single-mode ladder sums of a state tensor reshaped to ``(L, d, R)``.

    Returns ``(<a>, <a^2>, <a^dag a>, <psi|psi>)`` with the mode occupying the
    middle axis.
    """
    cdef const double complex[:, :, ::1] v = np.ascontiguousarray(psi3, dtype=np.complex128)
    cdef Py_ssize_t L = v.shape[0], d = v.shape[1], R = v.shape[2]
    cdef Py_ssize_t i, j, k
    cdef double complex ea = 0, ea2 = 0, x
    cdef double en = 0, norm2 = 0, p, w1, w2
    for j in range(d):
        w1 = sqrt(<double>j)
        w2 = sqrt(<double>(j * (j - 1))) if j >= 2 else 0.0
        for i in range(L):
            for k in range(R):
                x = v[i, j, k]
                p = x.real * x.real + x.imag * x.imag
                norm2 += p
                en += j * p
                if j >= 1:
                    ea += v[i, j - 1, k].conjugate() * x * w1
                if j >= 2:
                    ea2 += v[i, j - 2, k].conjugate() * x * w2
    return complex(ea), complex(ea2), en, norm2


def congruence_batch(S, means, cov):
    """Batched ``S m`` and ``S C S^T`` for stacks of real matrices."""
    cdef const double[:, :, ::1] s = np.ascontiguousarray(S, dtype=np.float64)
    cdef const double[:, ::1] m = np.ascontiguousarray(means, dtype=np.float64)
    cdef const double[:, :, ::1] c = np.ascontiguousarray(cov, dtype=np.float64)
    cdef Py_ssize_t n = s.shape[0], k = s.shape[1]
    out_m_arr = np.empty((n, k), dtype=np.float64)
    out_c_arr = np.empty((n, k, k), dtype=np.float64)
    tmp_arr = np.empty((k, k), dtype=np.float64)
    cdef double[:, ::1] om = out_m_arr
    cdef double[:, :, ::1] oc = out_c_arr
    cdef double[:, ::1] tmp = tmp_arr
    with nogil:
        _congruence(s, m, c, om, oc, tmp, n, k)
    return out_m_arr, out_c_arr


cdef void _congruence(const double[:, :, ::1] s, const double[:, ::1] m, const double[:, :, ::1] c,
                      double[:, ::1] om, double[:, :, ::1] oc, double[:, ::1] tmp,
                      Py_ssize_t n, Py_ssize_t k) noexcept nogil:
    cdef Py_ssize_t b, i, j, l
    cdef double acc
    for b in range(n):
        for i in range(k):
            acc = 0.0
            for j in range(k):
                acc += s[b, i, j] * m[b, j]
            om[b, i] = acc
        # tmp = S C
        for i in range(k):
            for j in range(k):
                acc = 0.0
                for l in range(k):
                    acc += s[b, i, l] * c[b, l, j]
                tmp[i, j] = acc
        # out = tmp S^T, filled symmetrically
        for i in range(k):
            for j in range(i, k):
                acc = 0.0
                for l in range(k):
                    acc += tmp[i, l] * s[b, j, l]
                oc[b, i, j] = acc
                oc[b, j, i] = acc
