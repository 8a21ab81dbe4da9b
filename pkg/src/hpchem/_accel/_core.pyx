# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Fused per-mode application of the block propagator.

Single pass over the spectral arrays: no temporaries, one complex
longitudinal projection per mode.  Semantics match
``_numpy.apply_propagator_numpy`` bit-for-bit up to floating-point
reassociation.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def apply_propagator_flat(
    cnp.complex128_t[:, ::1] w_hat,
    cnp.float64_t[:, ::1] khat,
    cnp.float64_t[::1] e11,
    cnp.float64_t[::1] e22,
    cnp.float64_t[::1] e12_im,
    double etr,
):
    cdef Py_ssize_t ncomp = w_hat.shape[0]
    cdef Py_ssize_t nmodes = w_hat.shape[1]
    cdef Py_ssize_t ndirs = khat.shape[0]
    cdef Py_ssize_t m, j
    cdef double pr, pi, ur, ui, kj
    cdef double a, c, d
    cdef double common_r, common_i

    for m in range(nmodes):
        ur = w_hat[0, m].real
        ui = w_hat[0, m].imag
        pr = 0.0
        pi = 0.0
        for j in range(ndirs):
            kj = khat[j, m]
            pr += kj * w_hat[1 + j, m].real
            pi += kj * w_hat[1 + j, m].imag
        a = e11[m]
        c = e12_im[m]
        d = e22[m] - etr
        # new u = e11*u + (i*c)*p
        w_hat[0, m].real = a * ur - c * pi
        w_hat[0, m].imag = a * ui + c * pr
        # shared longitudinal update: (i*c)*u + (e22 - etr)*p
        common_r = -c * ui + d * pr
        common_i = c * ur + d * pi
        for j in range(ndirs):
            kj = khat[j, m]
            w_hat[1 + j, m].real = etr * w_hat[1 + j, m].real + kj * common_r
            w_hat[1 + j, m].imag = etr * w_hat[1 + j, m].imag + kj * common_i
    return None
