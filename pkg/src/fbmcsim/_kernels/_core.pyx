# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: overlap-add synthesis, windowed analysis fold,
and the per-carrier LMS trainer.  Semantics match fbmcsim._kernels._numpy."""

import numpy as np

cimport cython
from libc.math cimport exp, isfinite

BACKEND = "cython"


def synth_accumulate(double complex[:, ::1] columns, const double[::1] taps, Py_ssize_t stride):
    cdef Py_ssize_t n_cols = columns.shape[0]
    cdef Py_ssize_t m = columns.shape[1]
    cdef Py_ssize_t lp = taps.shape[0]
    out_arr = np.zeros((n_cols - 1) * stride + lp, dtype=np.complex128)
    cdef double complex[::1] out = out_arr
    cdef Py_ssize_t c, i, q, base
    with nogil:
        for c in range(n_cols):
            base = c * stride
            q = 0
            for i in range(lp):
                out[base + i] = out[base + i] + columns[c, q] * taps[i]
                q += 1
                if q == m:
                    q = 0
    return out_arr


def fold_windows(const double complex[::1] stream, const double[::1] taps, Py_ssize_t m,
                 Py_ssize_t stride, Py_ssize_t n_cols):
    cdef Py_ssize_t lp = taps.shape[0]
    out_arr = np.zeros((n_cols, m), dtype=np.complex128)
    cdef double complex[:, ::1] out = out_arr
    cdef Py_ssize_t c, i, q, base
    with nogil:
        for c in range(n_cols):
            base = c * stride
            q = 0
            for i in range(lp):
                out[c, q] = out[c, q] + stream[base + i] * taps[i]
                q += 1
                if q == m:
                    q = 0
    return out_arr


@cython.boundscheck(False)
def lms_train(double[:, :, ::1] x, double[:, :, ::1] d, double delta,
              int max_epochs, double tol, int rule, int act,
              double[:, :, ::1] weights, double[:, ::1] bias):
    cdef Py_ssize_t n_car = x.shape[0]
    cdef Py_ssize_t n_sym = x.shape[1]
    w_arr = np.array(weights, dtype=np.float64, copy=True)
    epochs_arr = np.zeros(n_car, dtype=np.int64)
    conv_arr = np.zeros(n_car, dtype=np.uint8)
    err_arr = np.full(n_car, np.inf)
    cdef double[:, :, ::1] w = w_arr
    cdef long long[::1] epochs_used = epochs_arr
    cdef unsigned char[::1] converged = conv_arr
    cdef double[::1] final_err = err_arr
    cdef Py_ssize_t c, t, r, epoch
    cdef double y, e, err, x0, x1
    with nogil:
        for c in range(n_car):
            for epoch in range(max_epochs):
                for t in range(n_sym):
                    x0 = x[c, t, 0]
                    x1 = x[c, t, 1]
                    for r in range(2):
                        y = w[c, r, 0] * x0 + w[c, r, 1] * x1 + bias[c, r]
                        if act == 1:
                            y = 1.0 / (1.0 + exp(-y))
                        e = d[c, t, r] - y
                        if rule == 0:
                            w[c, r, 0] += delta * e * x0
                            w[c, r, 1] += delta * e * x1
                        else:
                            w[c, r, 0] -= delta * (0.5 * e * e) * x0
                            w[c, r, 1] -= delta * (0.5 * e * e) * x1
                epochs_used[c] = epoch + 1
                err = 0.0
                for t in range(n_sym):
                    x0 = x[c, t, 0]
                    x1 = x[c, t, 1]
                    for r in range(2):
                        y = w[c, r, 0] * x0 + w[c, r, 1] * x1 + bias[c, r]
                        if act == 1:
                            y = 1.0 / (1.0 + exp(-y))
                        e = d[c, t, r] - y
                        err += 0.5 * e * e
                err /= 2.0 * n_sym
                final_err[c] = err
                if not isfinite(err):
                    break
                if err <= tol:
                    converged[c] = 1
                    break
    return w_arr, epochs_arr, conv_arr.astype(bool), err_arr
