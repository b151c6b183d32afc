# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled density-matrix kernels; same contract as ``_pykernels``."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"

ctypedef double complex cplx


cdef inline cplx _conj(cplx z) nogil:
    return z.conjugate()


def apply_unitary_1q(cplx[:, ::1] rho, int n, int q, u):
    cdef const cplx[:, ::1] m = np.ascontiguousarray(u, dtype=np.complex128)
    cdef Py_ssize_t dim = rho.shape[0]
    cdef Py_ssize_t s = (<Py_ssize_t>1) << (n - 1 - q)
    cdef Py_ssize_t i, j
    cdef cplx u00 = m[0, 0], u01 = m[0, 1], u10 = m[1, 0], u11 = m[1, 1]
    cdef cplx c00 = _conj(u00), c01 = _conj(u01), c10 = _conj(u10), c11 = _conj(u11)
    cdef cplx a, b
    with nogil:
        for i in range(dim):
            if i & s:
                continue
            for j in range(dim):
                a = rho[i, j]
                b = rho[i + s, j]
                rho[i, j] = u00 * a + u01 * b
                rho[i + s, j] = u10 * a + u11 * b
        for i in range(dim):
            for j in range(dim):
                if j & s:
                    continue
                a = rho[i, j]
                b = rho[i, j + s]
                rho[i, j] = a * c00 + b * c01
                rho[i, j + s] = a * c10 + b * c11


def apply_unitary_2q(cplx[:, ::1] rho, int n, int q0, int q1, u):
    cdef const cplx[:, ::1] m = np.ascontiguousarray(u, dtype=np.complex128)
    cdef cplx mm[4][4]
    cdef cplx mc[4][4]
    cdef Py_ssize_t dim = rho.shape[0]
    cdef Py_ssize_t s0 = (<Py_ssize_t>1) << (n - 1 - q0)
    cdef Py_ssize_t s1 = (<Py_ssize_t>1) << (n - 1 - q1)
    cdef Py_ssize_t off[4]
    cdef cplx v[4]
    cdef Py_ssize_t i, j, a, b
    cdef cplx acc
    off[0] = 0
    off[1] = s1
    off[2] = s0
    off[3] = s0 + s1
    for a in range(4):
        for b in range(4):
            mm[a][b] = m[a, b]
            mc[a][b] = _conj(m[a, b])
    with nogil:
        for i in range(dim):
            if (i & s0) or (i & s1):
                continue
            for j in range(dim):
                for a in range(4):
                    v[a] = rho[i + off[a], j]
                for a in range(4):
                    acc = 0
                    for b in range(4):
                        acc = acc + mm[a][b] * v[b]
                    rho[i + off[a], j] = acc
        for i in range(dim):
            for j in range(dim):
                if (j & s0) or (j & s1):
                    continue
                for a in range(4):
                    v[a] = rho[i, j + off[a]]
                for a in range(4):
                    acc = 0
                    for b in range(4):
                        acc = acc + v[b] * mc[a][b]
                    rho[i, j + off[a]] = acc


def apply_diagonal(cplx[:, ::1] rho, diag):
    cdef const cplx[::1] d = np.ascontiguousarray(diag, dtype=np.complex128)
    cdef Py_ssize_t dim = rho.shape[0]
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(dim):
            for j in range(dim):
                rho[i, j] = d[i] * rho[i, j] * _conj(d[j])


def depolarize_1q(cplx[:, ::1] rho, int n, int q, double p):
    cdef Py_ssize_t dim = rho.shape[0]
    cdef Py_ssize_t s = (<Py_ssize_t>1) << (n - 1 - q)
    cdef double alpha = p * 4.0 / 3.0
    cdef double keep = 1.0 - alpha
    cdef double mix = alpha / 2.0
    cdef Py_ssize_t i, j
    cdef cplx t
    with nogil:
        for i in range(dim):
            if i & s:
                continue
            for j in range(dim):
                if j & s:
                    continue
                t = mix * (rho[i, j] + rho[i + s, j + s])
                rho[i, j] = keep * rho[i, j] + t
                rho[i + s, j + s] = keep * rho[i + s, j + s] + t
                rho[i + s, j] = keep * rho[i + s, j]
                rho[i, j + s] = keep * rho[i, j + s]


def depolarize_2q(cplx[:, ::1] rho, int n, int q0, int q1, double p):
    cdef Py_ssize_t dim = rho.shape[0]
    cdef Py_ssize_t s0 = (<Py_ssize_t>1) << (n - 1 - q0)
    cdef Py_ssize_t s1 = (<Py_ssize_t>1) << (n - 1 - q1)
    cdef double alpha = p * 16.0 / 15.0
    cdef double keep = 1.0 - alpha
    cdef double mix = alpha / 4.0
    cdef Py_ssize_t off[4]
    cdef Py_ssize_t i, j, a, b
    cdef cplx t
    off[0] = 0
    off[1] = s1
    off[2] = s0
    off[3] = s0 + s1
    with nogil:
        for i in range(dim):
            if (i & s0) or (i & s1):
                continue
            for j in range(dim):
                if (j & s0) or (j & s1):
                    continue
                t = 0
                for a in range(4):
                    t = t + rho[i + off[a], j + off[a]]
                t = mix * t
                for a in range(4):
                    for b in range(4):
                        rho[i + off[a], j + off[b]] = keep * rho[i + off[a], j + off[b]]
                    rho[i + off[a], j + off[a]] = rho[i + off[a], j + off[a]] + t
