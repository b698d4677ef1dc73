# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled versions of the hot kernels in ``_kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp
from libc.stdint cimport uint64_t

cnp.import_array()

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef double INV53 = 1.0 / 9007199254740992.0


cdef inline uint64_t _mix(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


def splitmix_uniforms(key, counters):
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] c = np.ascontiguousarray(
        counters, dtype=np.uint64).ravel()
    cdef Py_ssize_t n = c.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef uint64_t k = <uint64_t>int(key)
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            out[i] = <double>(_mix((c[i] + 1) * GOLDEN + k) >> 11) * INV53
    return out.reshape(np.shape(counters))


def vmf_mixture(dirs, means, kappas, coefs):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] d = np.ascontiguousarray(dirs, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] mu = np.ascontiguousarray(means, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ka = np.ascontiguousarray(kappas, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] co = np.ascontiguousarray(coefs, dtype=np.float64)
    cdef Py_ssize_t n = d.shape[0], m = mu.shape[0], i, j
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(n, dtype=np.float64)
    cdef double acc, dot
    with nogil:
        for i in range(n):
            acc = 0.0
            for j in range(m):
                dot = d[i, 0] * mu[j, 0] + d[i, 1] * mu[j, 1] + d[i, 2] * mu[j, 2]
                acc = acc + co[j] * exp(ka[j] * (dot - 1.0))
            out[i] = acc
    return out
