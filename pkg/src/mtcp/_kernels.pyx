# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled contraction kernels.

Entries are the flat, last-index-fastest layout used by ``DenseTensor``.
``contract_power`` is a chain of BLAS matrix-vector products, one per
contracted index; ``complement_apply`` walks every index tuple once, skipping
the majorization positions. No symmetry is exploited.
"""
from libc.limits cimport INT_MAX

import numpy as np
from scipy.linalg.cython_blas cimport ddot, dgemv

DEF MAX_ORDER = 64


DEF BLAS_MIN = 32


cdef inline double _dot(const double* a, const double* x, Py_ssize_t lo, Py_ssize_t hi) noexcept nogil:
    cdef int count = <int>(hi - lo), one = 1
    if count >= BLAS_MIN:
        # long fibers: the BLAS dot uses the machine's widest SIMD
        return ddot(&count, <double*>(a + lo), &one, <double*>(x + lo), &one)
    # four independent partial sums break the add-latency chain of a single
    # accumulator; the combination order is fixed, so results are reproducible
    cdef double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0
    cdef Py_ssize_t j = lo
    # short fibers: four independent partial sums avoid the call overhead
    while j + 4 <= hi:
        s0 += a[j] * x[j]
        s1 += a[j + 1] * x[j + 1]
        s2 += a[j + 2] * x[j + 2]
        s3 += a[j + 3] * x[j + 3]
        j += 4
    while j < hi:
        s0 += a[j] * x[j]
        j += 1
    return (s0 + s1) + (s2 + s3)


cdef void _contract(const double* a, Py_ssize_t m, Py_ssize_t n,
                    const double* x, double* out, bint skip_major) noexcept nogil:
    cdef Py_ssize_t depth = m - 2
    cdef Py_ssize_t digits[MAX_ORDER]
    cdef double prod[MAX_ORDER + 1]
    cdef Py_ssize_t i, k, kk, f, fibers = 1, off = 0, major
    cdef double s, acc

    for k in range(depth):
        fibers *= n

    for i in range(n):
        for k in range(depth):
            digits[k] = 0
        prod[0] = 1.0
        for k in range(depth):
            prod[k + 1] = prod[k] * x[0]
        acc = 0.0
        for f in range(fibers):
            # major: the j such that (i, j, ..., j) lies in this fiber, else -1
            major = -1
            if skip_major:
                if depth == 0:
                    major = -2  # m == 2: every entry is a majorization entry
                else:
                    major = digits[0]
                    for k in range(1, depth):
                        if digits[k] != major:
                            major = -1
                            break
            if major == -1:
                s = _dot(a + off, x, 0, n)
            elif major >= 0:
                s = _dot(a + off, x, 0, major) + _dot(a + off, x, major + 1, n)
            else:
                s = 0.0
            acc += prod[depth] * s
            off += n

            k = depth - 1
            while k >= 0:
                digits[k] += 1
                if digits[k] < n:
                    break
                digits[k] = 0
                k -= 1
            if k < 0:
                k = 0
            for kk in range(k, depth):
                prod[kk + 1] = prod[kk] * x[digits[kk]]
        out[i] = acc


def _check(Py_ssize_t m, Py_ssize_t n, Py_ssize_t size, Py_ssize_t xsize):
    if m < 2 or m > MAX_ORDER:
        raise ValueError(f"order must be in [2, {MAX_ORDER}], got {m}")
    if xsize != n:
        raise ValueError(f"vector length {xsize} does not match dimension {n}")
    if size != n ** m:
        raise ValueError(f"entries length {size} != {n}**{m}")


cdef void _gemv_chain(const double* a, Py_ssize_t m, Py_ssize_t n, const double* x,
                      double* buf0, double* buf1, double* out) noexcept nogil:
    # stage k views the current data as a row-major (rows, n) matrix and
    # multiplies by x; in BLAS column-major terms that is the transpose of an
    # (n, rows) matrix with leading dimension n
    cdef char trans = b"T"
    cdef int cols = <int>n, rows, one = 1
    cdef double alpha = 1.0, beta = 0.0
    cdef const double* src = a
    cdef double* dst
    cdef Py_ssize_t k, r = 1
    for k in range(m - 1):
        r *= n
    for k in range(m - 1):
        r //= n
        rows = <int>(r * n)
        dst = out if k == m - 2 else (buf0 if k % 2 == 0 else buf1)
        dgemv(&trans, &cols, &rows, &alpha, <double*>src, &cols, <double*>x, &one, &beta, dst, &one)
        src = dst


def contract_power(const double[::1] a, Py_ssize_t m, Py_ssize_t n, const double[::1] x):
    _check(m, n, a.shape[0], x.shape[0])
    out = np.zeros(n, dtype=np.float64)
    cdef double[::1] v = out
    cdef double[::1] b0, b1
    if a.shape[0] // n > INT_MAX:
        with nogil:
            _contract(&a[0], m, n, &x[0], &v[0], False)
        return out
    # ping-pong buffers for the intermediate stages
    b0 = np.empty(max(a.shape[0] // n, 1))
    b1 = np.empty(max(a.shape[0] // (n * n), 1))
    with nogil:
        _gemv_chain(&a[0], m, n, &x[0], &b0[0], &b1[0], &v[0])
    return out


def complement_apply(const double[::1] a, Py_ssize_t m, Py_ssize_t n, const double[::1] x):
    _check(m, n, a.shape[0], x.shape[0])
    out = np.zeros(n, dtype=np.float64)
    cdef double[::1] v = out
    with nogil:
        _contract(&a[0], m, n, &x[0], &v[0], True)
    return out
