# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: pairwise squared distances and Sinkhorn sweeps.

Signature-compatible with ``fsot.kernels_py``; see that module for the
contract. These loops dominate the per-episode runtime, hence the C core.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs, log, INFINITY

cnp.import_array()

STATUS_OK = 0
STATUS_NUMERICAL = 1


def pairwise_sqdist(const double[:, ::1] x, const double[:, ::1] c):
    cdef Py_ssize_t m = x.shape[0], w = c.shape[0], r = x.shape[1]
    cdef cnp.ndarray[double, ndim=2] out = np.empty((m, w))
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j, k
    cdef double acc, diff
    with nogil:
        for i in range(m):
            for j in range(w):
                acc = 0.0
                for k in range(r):
                    diff = x[i, k] - c[j, k]
                    acc += diff * diff
                o[i, j] = acc
    return out


def sinkhorn_plain(const double[:, ::1] K, const double[::1] a, const double[::1] b,
                   double tol, int max_iter):
    cdef Py_ssize_t n = K.shape[0], w = K.shape[1]
    cdef cnp.ndarray[double, ndim=1] u_arr = np.ones(n)
    cdef cnp.ndarray[double, ndim=1] v_arr = np.ones(w)
    cdef cnp.ndarray[double, ndim=1] trace_arr = np.empty(max_iter)
    cdef double[::1] u = u_arr, v = v_arr, trace = trace_arr
    cdef cnp.ndarray[double, ndim=1] kv_arr = np.empty(n)
    cdef cnp.ndarray[double, ndim=1] ktu_arr = np.empty(w)
    cdef double[::1] kv = kv_arr, ktu = ktu_arr
    cdef Py_ssize_t i, j, it = 0
    cdef double acc, viol, dev
    cdef int status = 0

    with nogil:
        for i in range(n):
            acc = 0.0
            for j in range(w):
                acc += K[i, j] * v[j]
            kv[i] = acc
        for it in range(1, max_iter + 1):
            for i in range(n):
                if not kv[i] > 0.0:
                    status = 1
                    break
            if status:
                it -= 1
                break
            for i in range(n):
                u[i] = a[i] / kv[i]
            for j in range(w):
                acc = 0.0
                for i in range(n):
                    acc += K[i, j] * u[i]
                ktu[j] = acc
            for j in range(w):
                if not ktu[j] > 0.0:
                    status = 1
                    break
            if status:
                it -= 1
                break
            for j in range(w):
                v[j] = b[j] / ktu[j]
            viol = 0.0
            for i in range(n):
                acc = 0.0
                for j in range(w):
                    acc += K[i, j] * v[j]
                kv[i] = acc
                dev = fabs(u[i] * acc - a[i])
                if dev > viol:
                    viol = dev
            if viol != viol or viol == INFINITY:
                status = 1
                it -= 1
                break
            trace[it - 1] = viol
            if viol <= tol:
                break
    return u_arr, v_arr, it, trace_arr[:it], status


def sinkhorn_log(const double[:, ::1] logK, const double[::1] loga, const double[::1] logb,
                 double tol, int max_iter):
    cdef Py_ssize_t n = logK.shape[0], w = logK.shape[1]
    cdef cnp.ndarray[double, ndim=1] f_arr = np.zeros(n)
    cdef cnp.ndarray[double, ndim=1] g_arr = np.zeros(w)
    cdef cnp.ndarray[double, ndim=1] trace_arr = np.empty(max_iter)
    cdef double[::1] f = f_arr, g = g_arr, trace = trace_arr
    cdef cnp.ndarray[double, ndim=1] lkv_arr = np.empty(n)
    cdef cnp.ndarray[double, ndim=1] lktu_arr = np.empty(w)
    cdef double[::1] lkv = lkv_arr, lktu = lktu_arr
    cdef Py_ssize_t i, j, it = 0
    cdef double hi, acc, viol, dev
    cdef int status = 0

    with nogil:
        for i in range(n):
            lkv[i] = _lse_row(logK, g, i, w)
        for it in range(1, max_iter + 1):
            for i in range(n):
                if lkv[i] == -INFINITY:
                    status = 1
                    break
            if status:
                it -= 1
                break
            for i in range(n):
                f[i] = loga[i] - lkv[i]
            for j in range(w):
                lktu[j] = _lse_col(logK, f, j, n)
            for j in range(w):
                if lktu[j] == -INFINITY:
                    status = 1
                    break
            if status:
                it -= 1
                break
            for j in range(w):
                g[j] = logb[j] - lktu[j]
            viol = 0.0
            for i in range(n):
                lkv[i] = _lse_row(logK, g, i, w)
                dev = fabs(exp(f[i] + lkv[i]) - exp(loga[i]))
                if dev > viol:
                    viol = dev
            trace[it - 1] = viol
            if viol <= tol:
                break
    return f_arr, g_arr, it, trace_arr[:it], status


cdef inline double _lse_row(const double[:, ::1] m, const double[::1] add,
                            Py_ssize_t i, Py_ssize_t w) nogil:
    cdef double hi = -INFINITY, acc = 0.0, x
    cdef Py_ssize_t j
    for j in range(w):
        x = m[i, j] + add[j]
        if x > hi:
            hi = x
    if hi == -INFINITY:
        return hi
    for j in range(w):
        acc += exp(m[i, j] + add[j] - hi)
    return hi + log(acc)


cdef inline double _lse_col(const double[:, ::1] m, const double[::1] add,
                            Py_ssize_t j, Py_ssize_t n) nogil:
    cdef double hi = -INFINITY, acc = 0.0, x
    cdef Py_ssize_t i
    for i in range(n):
        x = m[i, j] + add[i]
        if x > hi:
            hi = x
    if hi == -INFINITY:
        return hi
    for i in range(n):
        acc += exp(m[i, j] + add[i] - hi)
    return hi + log(acc)
