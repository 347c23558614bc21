# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the hot kernels (see ``_pykernels`` for the reference)."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, isfinite

cnp.import_array()

KL = 8
KU = 8
NBAND = KL + KU + 1
cdef int CKU = 8
cdef int CKL = 8


cdef inline void _add(double[:, ::1] ab, Py_ssize_t r, Py_ssize_t c, double v) noexcept nogil:
    ab[CKU + r - c, c] += v


cdef void _d1(const double[::1] f, double h, double[::1] out) noexcept nogil:
    cdef Py_ssize_t n = f.shape[0], i
    for i in range(1, n - 1):
        out[i] = (f[i + 1] - f[i - 1]) / (2 * h)
    out[0] = (-3 * f[0] + 4 * f[1] - f[2]) / (2 * h)
    out[n - 1] = (3 * f[n - 1] - 4 * f[n - 2] + f[n - 3]) / (2 * h)


cdef void _d2(const double[::1] f, double h, double[::1] out) noexcept nogil:
    cdef Py_ssize_t n = f.shape[0], i
    cdef double h2 = h * h
    for i in range(1, n - 1):
        out[i] = (f[i - 1] - 2 * f[i] + f[i + 1]) / h2
    if n >= 4:
        out[0] = (2 * f[0] - 5 * f[1] + 4 * f[2] - f[3]) / h2
        out[n - 1] = (2 * f[n - 1] - 5 * f[n - 2] + 4 * f[n - 3] - f[n - 4]) / h2
    else:
        out[0] = out[n - 1] = out[1]


cdef int _stencil(Py_ssize_t j, Py_ssize_t n, double h, Py_ssize_t* cols, double* w) noexcept nogil:
    """Second-derivative stencil of node j; returns its length."""
    cdef double h2 = h * h
    if j == 0 or j == n - 1:
        if n >= 4:
            if j == 0:
                cols[0] = 0; cols[1] = 1; cols[2] = 2; cols[3] = 3
            else:
                cols[0] = n - 1; cols[1] = n - 2; cols[2] = n - 3; cols[3] = n - 4
            w[0] = 2.0 / h2; w[1] = -5.0 / h2; w[2] = 4.0 / h2; w[3] = -1.0 / h2
            return 4
        if j == 0:
            cols[0] = 0; cols[1] = 1; cols[2] = 2
        else:
            cols[0] = n - 1; cols[1] = n - 2; cols[2] = n - 3
        w[0] = 1.0 / h2; w[1] = -2.0 / h2; w[2] = 1.0 / h2
        return 3
    cols[0] = j - 1; cols[1] = j; cols[2] = j + 1
    w[0] = 1.0 / h2; w[1] = -2.0 / h2; w[2] = 1.0 / h2
    return 3


def residual(q11, q12, u, double h, double eps, double px, double l2, double gc2, bint coupled):
    cdef const double[::1] a11 = np.ascontiguousarray(q11, dtype=np.float64)
    cdef const double[::1] a12 = np.ascontiguousarray(q12, dtype=np.float64)
    cdef const double[::1] uu = np.ascontiguousarray(u, dtype=np.float64)
    cdef Py_ssize_t n = a11.shape[0], i
    r11_a = np.zeros(n)
    r12_a = np.zeros(n)
    ru_a = np.zeros(n)
    cdef double[::1] r11 = r11_a, r12 = r12_a, ru = ru_a
    cdef double[::1] a = np.empty(n), b = np.empty(n), uy = np.empty(n), p = np.empty(n)
    cdef double r, bulk, h2 = h * h
    with nogil:
        _d2(a11, h, a)
        _d2(a12, h, b)
        for i in range(1, n - 1):
            r = a11[i] * a11[i] + a12[i] * a12[i]
            bulk = eps * (1.0 - 4.0 * r)
            r11[i] = a[i] + a11[i] * bulk
            r12[i] = b[i] + a12[i] * bulk
        if coupled:
            _d1(uu, h, uy)
            for i in range(n):
                p[i] = a11[i] * b[i] - a12[i] * a[i]
            for i in range(1, n - 1):
                r11[i] += uy[i] * a12[i]
                r12[i] -= uy[i] * a11[i]
                ru[i] = (-px + (uu[i - 1] - 2 * uu[i] + uu[i + 1]) / h2
                         + l2 * (p[i + 1] - p[i - 1]) / h
                         + gc2 * (a12[i + 1] - a12[i - 1]) / (2 * h))
    return r11_a, r12_a, ru_a


cdef void _stress(double[:, ::1] ab, const double[::1] q11, const double[::1] q12,
                  const double[::1] a, const double[::1] b, double h, double scale,
                  bint with_product) noexcept nogil:
    """Add scale*(P[i+1] - P[i-1])/h to the u rows, P = q11 q12'' - q12 q11''."""
    cdef Py_ssize_t n = q11.shape[0], i, j, k, m, row
    cdef Py_ssize_t cols[4]
    cdef double w[4]
    cdef double c, sgn
    cdef int len_, side
    for i in range(1, n - 1):
        row = 3 * i + 2
        for side in range(2):
            if side == 0:
                j = i + 1
                sgn = 1.0
            else:
                j = i - 1
                sgn = -1.0
            c = sgn * scale / h
            if with_product:
                _add(ab, row, 3 * j, c * b[j])
                _add(ab, row, 3 * j + 1, -c * a[j])
            len_ = _stencil(j, n, h, cols, w)
            for k in range(len_):
                m = cols[k]
                _add(ab, row, 3 * m, -c * q12[j] * w[k])
                _add(ab, row, 3 * m + 1, c * q11[j] * w[k])


cdef void _walls(double[:, ::1] ab, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t side, node, comp, row, col, lo, hi, nn = 3 * n
    for side in range(2):
        node = 0 if side == 0 else n - 1
        for comp in range(3):
            row = 3 * node + comp
            lo = row - CKL if row - CKL > 0 else 0
            hi = row + CKU + 1 if row + CKU + 1 < nn else nn
            for col in range(lo, hi):
                ab[CKU + row - col, col] = 0.0
            ab[CKU, row] = 1.0


def jacobian_band(q11, q12, u, double h, double eps, double px, double l2, double gc2, bint coupled):
    cdef const double[::1] a11 = np.ascontiguousarray(q11, dtype=np.float64)
    cdef const double[::1] a12 = np.ascontiguousarray(q12, dtype=np.float64)
    cdef const double[::1] uu = np.ascontiguousarray(u, dtype=np.float64)
    cdef Py_ssize_t n = a11.shape[0], i, off
    ab_a = np.zeros((NBAND, 3 * n))
    cdef double[:, ::1] ab = ab_a
    cdef double[::1] a = np.empty(n), b = np.empty(n), uy = np.empty(n)
    cdef double h2 = h * h, r, base, w
    with nogil:
        _d2(a11, h, a)
        _d2(a12, h, b)
        _d1(uu, h, uy)
        for i in range(1, n - 1):
            for off in range(-1, 2):
                w = (-2.0 if off == 0 else 1.0) / h2
                _add(ab, 3 * i, 3 * (i + off), w)
                _add(ab, 3 * i + 1, 3 * (i + off) + 1, w)
            r = a11[i] * a11[i] + a12[i] * a12[i]
            base = eps * (1.0 - 4.0 * r)
            _add(ab, 3 * i, 3 * i, base - 8.0 * eps * a11[i] * a11[i])
            _add(ab, 3 * i, 3 * i + 1, -8.0 * eps * a11[i] * a12[i])
            _add(ab, 3 * i + 1, 3 * i, -8.0 * eps * a11[i] * a12[i])
            _add(ab, 3 * i + 1, 3 * i + 1, base - 8.0 * eps * a12[i] * a12[i])
            if coupled:
                _add(ab, 3 * i, 3 * i + 1, uy[i])
                _add(ab, 3 * i + 1, 3 * i, -uy[i])
                _add(ab, 3 * i, 3 * (i + 1) + 2, a12[i] / (2 * h))
                _add(ab, 3 * i, 3 * (i - 1) + 2, -a12[i] / (2 * h))
                _add(ab, 3 * i + 1, 3 * (i + 1) + 2, -a11[i] / (2 * h))
                _add(ab, 3 * i + 1, 3 * (i - 1) + 2, a11[i] / (2 * h))
                for off in range(-1, 2):
                    w = (-2.0 if off == 0 else 1.0) / h2
                    _add(ab, 3 * i + 2, 3 * (i + off) + 2, w)
                _add(ab, 3 * i + 2, 3 * (i + 1) + 1, gc2 / (2 * h))
                _add(ab, 3 * i + 2, 3 * (i - 1) + 1, -gc2 / (2 * h))
            else:
                _add(ab, 3 * i + 2, 3 * i + 2, 1.0)
        if coupled and l2 != 0.0:
            _stress(ab, a11, a12, a, b, h, l2, True)
        _walls(ab, n)
    return ab_a


def frozen_band(q11, q12, u, double h, double eps, double l2, double gc2, double dt, double dtu, bint coupled):
    cdef const double[::1] a11 = np.ascontiguousarray(q11, dtype=np.float64)
    cdef const double[::1] a12 = np.ascontiguousarray(q12, dtype=np.float64)
    cdef Py_ssize_t n = a11.shape[0], i, off
    ab_a = np.zeros((NBAND, 3 * n))
    cdef double[:, ::1] ab = ab_a
    cdef double[::1] a = np.empty(n), b = np.empty(n)
    cdef double h2 = h * h, r, w
    with nogil:
        for i in range(1, n - 1):
            r = a11[i] * a11[i] + a12[i] * a12[i]
            _add(ab, 3 * i, 3 * i, 1.0 + dt * 4.0 * eps * r)
            _add(ab, 3 * i + 1, 3 * i + 1, 1.0 + dt * 4.0 * eps * r)
            _add(ab, 3 * i + 2, 3 * i + 2, 1.0)
            for off in range(-1, 2):
                w = (-2.0 if off == 0 else 1.0) / h2
                _add(ab, 3 * i, 3 * (i + off), -dt * w)
                _add(ab, 3 * i + 1, 3 * (i + off) + 1, -dt * w)
                if coupled:
                    _add(ab, 3 * i + 2, 3 * (i + off) + 2, -dtu * w)
            if coupled:
                _add(ab, 3 * i, 3 * (i + 1) + 2, -dt * a12[i] / (2 * h))
                _add(ab, 3 * i, 3 * (i - 1) + 2, dt * a12[i] / (2 * h))
                _add(ab, 3 * i + 1, 3 * (i + 1) + 2, dt * a11[i] / (2 * h))
                _add(ab, 3 * i + 1, 3 * (i - 1) + 2, -dt * a11[i] / (2 * h))
                _add(ab, 3 * i + 2, 3 * (i + 1) + 1, -dtu * gc2 / (2 * h))
                _add(ab, 3 * i + 2, 3 * (i - 1) + 1, dtu * gc2 / (2 * h))
        if coupled and l2 != 0.0:
            _d2(a11, h, a)
            _d2(a12, h, b)
            _stress(ab, a11, a12, a, b, h, -dtu * l2, False)
        _walls(ab, n)
    return ab_a


cdef double _energy_cf(const double[::1] q11, const double[::1] q12, double h, double eps) noexcept nogil:
    cdef Py_ssize_t n = q11.shape[0], i
    cdef double grad = 0.0, bulk = 0.0, d11, d12, r, f
    for i in range(n - 1):
        d11 = q11[i + 1] - q11[i]
        d12 = q12[i + 1] - q12[i]
        grad += d11 * d11 + d12 * d12
    for i in range(n):
        r = q11[i] * q11[i] + q12[i] * q12[i]
        f = eps * r * (2.0 * r - 1.0)
        bulk += 0.5 * f if (i == 0 or i == n - 1) else f
    return grad / h + h * bulk


cdef double _res_cf(const double[::1] q11, const double[::1] q12, double h, double eps) noexcept nogil:
    cdef Py_ssize_t n = q11.shape[0], i
    cdef double h2 = h * h, r, bulk, r11, r12, out = 0.0
    for i in range(1, n - 1):
        r = q11[i] * q11[i] + q12[i] * q12[i]
        bulk = eps * (1.0 - 4.0 * r)
        r11 = (q11[i - 1] - 2 * q11[i] + q11[i + 1]) / h2 + q11[i] * bulk
        r12 = (q12[i - 1] - 2 * q12[i] + q12[i + 1]) / h2 + q12[i] * bulk
        if not isfinite(r11) or not isfinite(r12):
            return r11 + r12
        if fabs(r11) > out:
            out = fabs(r11)
        if fabs(r12) > out:
            out = fabs(r12)
    return out


def relax_cf(q11, q12, double h, double eps, double dt, double tol, long max_steps):
    """Semi-implicit gradient flow with a fused Thomas solve per step."""
    q11_a = np.array(q11, dtype=np.float64)
    q12_a = np.array(q12, dtype=np.float64)
    cdef double[::1] x = q11_a, z = q12_a
    cdef Py_ssize_t n = x.shape[0], i, m = n - 2
    cdef double[::1] cp = np.empty(m), d1 = np.empty(m), d2 = np.empty(m)
    res = []
    energy = []
    cdef double off = -dt / (h * h), diag, denom, rn, r, grow = 1.0 + dt * eps
    cdef long step = 0
    cdef bint converged = False
    while True:
        rn = _res_cf(x, z, h, eps)
        if not isfinite(rn):
            break
        res.append(rn)
        energy.append(_energy_cf(x, z, h, eps))
        if rn < tol:
            converged = True
            break
        if step >= max_steps:
            break
        with nogil:
            for i in range(m):
                r = x[i + 1] * x[i + 1] + z[i + 1] * z[i + 1]
                diag = 1.0 - 2.0 * off + 4.0 * dt * eps * r
                d1[i] = x[i + 1] * grow
                d2[i] = z[i + 1] * grow
                if i == 0:
                    d1[i] -= off * x[0]
                    d2[i] -= off * z[0]
                if i == m - 1:
                    d1[i] -= off * x[n - 1]
                    d2[i] -= off * z[n - 1]
                # forward sweep (diag is rebuilt from r, so store it in cp)
                if i == 0:
                    denom = diag
                else:
                    denom = diag - off * cp[i - 1]
                    d1[i] -= off * d1[i - 1]
                    d2[i] -= off * d2[i - 1]
                cp[i] = off / denom
                d1[i] /= denom
                d2[i] /= denom
            for i in range(m - 2, -1, -1):
                d1[i] -= cp[i] * d1[i + 1]
                d2[i] -= cp[i] * d2[i + 1]
            for i in range(m):
                x[i + 1] = d1[i]
                z[i + 1] = d2[i]
        step += 1
    return q11_a, q12_a, step, np.array(res), np.array(energy), converged
