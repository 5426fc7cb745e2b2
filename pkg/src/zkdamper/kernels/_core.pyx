# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel core: fused single-pass stencils, no temporaries.

Semantics match zkdamper.kernels._fallback exactly; the parity tests compare
both backends on random data.
"""

import numpy as np

cimport numpy as cnp


def d3x(double[:, ::1] v, double dx, double[:, ::1] out):
    cdef Py_ssize_t nx2 = v.shape[0], ny2 = v.shape[1]
    cdef Py_ssize_t i, j
    cdef double c = 1.0 / (2.0 * dx * dx * dx)
    for j in range(ny2):
        out[0, j] = 0.0
        out[nx2 - 1, j] = 0.0
    for i in range(1, nx2 - 1):
        out[i, 0] = 0.0
        out[i, ny2 - 1] = 0.0
    for j in range(1, ny2 - 1):
        out[1, j] = c * (v[1, j] - 2.0 * v[2, j] + v[3, j])
        out[nx2 - 2, j] = c * (
            -v[nx2 - 4, j] + 2.0 * v[nx2 - 3, j] + v[nx2 - 2, j] - 2.0 * v[nx2 - 1, j]
        )
    for i in range(2, nx2 - 2):
        for j in range(1, ny2 - 1):
            out[i, j] = c * (
                -v[i - 2, j] + 2.0 * v[i - 1, j] - 2.0 * v[i + 1, j] + v[i + 2, j]
            )
    return np.asarray(out)


def dxyy(double[:, ::1] v, double dx, double dy, double[:, ::1] out):
    cdef Py_ssize_t nx2 = v.shape[0], ny2 = v.shape[1]
    cdef Py_ssize_t i, j
    cdef double c = 1.0 / (2.0 * dx * dy * dy)
    for j in range(ny2):
        out[0, j] = 0.0
        out[nx2 - 1, j] = 0.0
    for i in range(1, nx2 - 1):
        out[i, 0] = 0.0
        out[i, ny2 - 1] = 0.0
    for i in range(1, nx2 - 1):
        for j in range(1, ny2 - 1):
            out[i, j] = c * (
                (v[i + 1, j + 1] - 2.0 * v[i + 1, j] + v[i + 1, j - 1])
                - (v[i - 1, j + 1] - 2.0 * v[i - 1, j] + v[i - 1, j - 1])
            )
    return np.asarray(out)


def d1x(double[:, ::1] v, double dx, double[:, ::1] out):
    cdef Py_ssize_t nx2 = v.shape[0], ny2 = v.shape[1]
    cdef Py_ssize_t i, j
    cdef double c = 1.0 / (2.0 * dx)
    for j in range(ny2):
        out[0, j] = 0.0
        out[nx2 - 1, j] = 0.0
    for i in range(1, nx2 - 1):
        out[i, 0] = 0.0
        out[i, ny2 - 1] = 0.0
    for i in range(1, nx2 - 1):
        for j in range(1, ny2 - 1):
            out[i, j] = c * (v[i + 1, j] - v[i - 1, j])
    return np.asarray(out)


def quad_flux_dx(double[:, ::1] v, double dx, double[:, ::1] out):
    cdef Py_ssize_t nx2 = v.shape[0], ny2 = v.shape[1]
    cdef Py_ssize_t i, j
    cdef double c = 1.0 / (4.0 * dx)
    for j in range(ny2):
        out[0, j] = 0.0
        out[nx2 - 1, j] = 0.0
    for i in range(1, nx2 - 1):
        out[i, 0] = 0.0
        out[i, ny2 - 1] = 0.0
    for i in range(1, nx2 - 1):
        for j in range(1, ny2 - 1):
            out[i, j] = c * (
                v[i + 1, j] * v[i + 1, j] - v[i - 1, j] * v[i - 1, j]
            )
    return np.asarray(out)


def dispersive(double[:, ::1] v, double dx, double dy, double alpha, double gamma,
               double[:, ::1] out):
    """alpha * d3x + gamma * dxyy fused into one pass over the grid."""
    cdef Py_ssize_t nx2 = v.shape[0], ny2 = v.shape[1]
    cdef Py_ssize_t i, j
    cdef double c3 = alpha / (2.0 * dx * dx * dx)
    cdef double cm = gamma / (2.0 * dx * dy * dy)
    cdef double d3
    for j in range(ny2):
        out[0, j] = 0.0
        out[nx2 - 1, j] = 0.0
    for i in range(1, nx2 - 1):
        out[i, 0] = 0.0
        out[i, ny2 - 1] = 0.0
    for i in range(1, nx2 - 1):
        for j in range(1, ny2 - 1):
            if i == 1:
                d3 = v[1, j] - 2.0 * v[2, j] + v[3, j]
            elif i == nx2 - 2:
                d3 = -v[i - 2, j] + 2.0 * v[i - 1, j] + v[i, j] - 2.0 * v[i + 1, j]
            else:
                d3 = -v[i - 2, j] + 2.0 * v[i - 1, j] - 2.0 * v[i + 1, j] + v[i + 2, j]
            out[i, j] = c3 * d3 + cm * (
                (v[i + 1, j + 1] - 2.0 * v[i + 1, j] + v[i + 1, j - 1])
                - (v[i - 1, j + 1] - 2.0 * v[i - 1, j] + v[i - 1, j - 1])
            )
    return np.asarray(out)


def upwind_shift(double[:, :, ::1] ring, double nu):
    cdef Py_ssize_t n = ring.shape[0], nx2 = ring.shape[1], ny2 = ring.shape[2]
    cdef Py_ssize_t k, i, j
    if nu == 1.0:
        for k in range(n - 1, 0, -1):
            for i in range(nx2):
                for j in range(ny2):
                    ring[k, i, j] = ring[k - 1, i, j]
    else:
        for k in range(n - 1, 0, -1):
            for i in range(nx2):
                for j in range(ny2):
                    ring[k, i, j] += nu * (ring[k - 1, i, j] - ring[k, i, j])
    return np.asarray(ring)


def weighted_sumsq(double[:, ::1] w, double[:, ::1] v):
    cdef Py_ssize_t nx2 = v.shape[0], ny2 = v.shape[1]
    cdef Py_ssize_t i, j
    cdef double acc = 0.0
    for i in range(nx2):
        for j in range(ny2):
            acc += w[i, j] * v[i, j] * v[i, j]
    return acc
