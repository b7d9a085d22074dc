# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled ket-level kernels; same signatures as ``_kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin

cnp.import_array()


def apply_error_ket(psi, long k, double theta):
    cdef const double complex[::1] src = np.ascontiguousarray(psi, dtype=np.complex128)
    cdef Py_ssize_t d = src.shape[0]
    out_arr = np.zeros(d, dtype=np.complex128)
    cdef double complex[::1] out = out_arr
    cdef Py_ssize_t s = k if k >= 0 else -k
    cdef Py_ssize_t n
    cdef double complex step, ph
    if s >= d:
        return out_arr
    step = cos(theta) + 1j * sin(theta)
    ph = 1.0
    for n in range(d - s):
        # re-seed the running phase periodically to bound rounding drift
        if n % 32 == 0:
            ph = cos(theta * n) + 1j * sin(theta * n)
        if k < 0:
            out[n] = ph * src[n + s]
        else:
            out[n + s] = ph * src[n]
        ph = ph * step
    return out_arr


def modular_sector_weights(probs, long modulus):
    cdef const double[::1] p = np.ascontiguousarray(probs, dtype=np.float64)
    out_arr = np.zeros(modulus, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t n, j = 0
    for n in range(p.shape[0]):
        out[j] += p[n]
        j += 1
        if j == modulus:
            j = 0
    return out_arr


def phase_expectation_sum(p, a, x):
    cdef const double[::1] pv = np.ascontiguousarray(p, dtype=np.float64)
    cdef const double[::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    out_arr = np.zeros(xv.shape[0], dtype=np.complex128)
    cdef double complex[::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double re, im, t
    for j in range(xv.shape[0]):
        re = 0.0
        im = 0.0
        for i in range(pv.shape[0]):
            t = xv[j] * av[i]
            re += pv[i] * cos(t)
            im += pv[i] * sin(t)
        out[j] = re + 1j * im
    return out_arr
