# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops for the spectral time stepper and the 1D crossing finder.

Every function here has a numpy twin in ``_kernels_py`` with the same
signature; results agree to round-off.
"""

from libc.math cimport cos, sin, fabs, M_PI

import numpy as np


def ifrk4_stage_a(double complex[::1] u, double[::1] e2, double complex[::1] n1,
                  double h, double complex[::1] out):
    cdef Py_ssize_t i, m = u.shape[0]
    cdef double hh = 0.5 * h
    for i in range(m):
        out[i] = e2[i] * (u[i] + hh * n1[i])


def ifrk4_stage_b(double complex[::1] u, double[::1] e2, double complex[::1] n2,
                  double h, double complex[::1] out):
    cdef Py_ssize_t i, m = u.shape[0]
    cdef double hh = 0.5 * h
    for i in range(m):
        out[i] = e2[i] * u[i] + hh * n2[i]


def ifrk4_stage_c(double complex[::1] u, double[::1] e, double[::1] e2,
                  double complex[::1] n3, double h, double complex[::1] out):
    cdef Py_ssize_t i, m = u.shape[0]
    for i in range(m):
        out[i] = e[i] * u[i] + h * (e2[i] * n3[i])


def ifrk4_final(double complex[::1] u, double[::1] e, double[::1] e2,
                double complex[::1] n1, double complex[::1] n2,
                double complex[::1] n3, double complex[::1] n4,
                double h, double complex[::1] out):
    cdef Py_ssize_t i, m = u.shape[0]
    cdef double h6 = h / 6.0
    for i in range(m):
        out[i] = e[i] * u[i] + h6 * (e[i] * n1[i] + 2.0 * (e2[i] * (n2[i] + n3[i])) + n4[i])


def sparse_advect(double complex[:, :, ::1] f, long[::1] mx, long[::1] my,
                  double complex[::1] uxh, double complex[::1] uyh,
                  double[::1] kx, double[::1] ky, double complex[:, :, ::1] out):
    """Divergence-form advection on the retained band by a flow with few modes.

    ``f`` holds half-spectra restricted to ``|kx| <= Mx``, ``0 <= ky <= My``
    with rows in FFT order; sources outside the band count as zero.
    """
    cdef Py_ssize_t s, ix, iy, m, row, rowc
    cdef Py_ssize_t ns = f.shape[0], nr = f.shape[1], nc = f.shape[2]
    cdef Py_ssize_t nmodes = mx.shape[0]
    cdef long bx = (nr - 1) // 2, by = nc - 1
    cdef long sx, sy, kxi
    cdef double gr, gi, cr, ci, ar, ai
    cdef double twopi = 2.0 * M_PI
    with nogil:
        for s in range(ns):
            for ix in range(nr):
                for iy in range(nc):
                    out[s, ix, iy] = 0.0
            for m in range(nmodes):
                for ix in range(nr):
                    kxi = ix if ix <= bx else ix - nr
                    sx = kxi - mx[m]
                    if sx > bx or sx < -bx:
                        continue
                    row = sx if sx >= 0 else sx + nr
                    rowc = -sx if sx <= 0 else nr - sx
                    for iy in range(nc):
                        sy = iy - my[m]
                        if sy > by or sy < -by:
                            continue
                        if sy < 0:
                            gr = f[s, rowc, -sy].real
                            gi = -f[s, rowc, -sy].imag
                        else:
                            gr = f[s, row, sy].real
                            gi = f[s, row, sy].imag
                        cr = kx[ix] * uxh[m].real + ky[iy] * uyh[m].real
                        ci = kx[ix] * uxh[m].imag + ky[iy] * uyh[m].imag
                        # out += -2 pi i * coef * g
                        ar = cr * gr - ci * gi
                        ai = cr * gi + ci * gr
                        out[s, ix, iy] = out[s, ix, iy] + (twopi * ai - twopi * ar * 1j)


cdef inline double _trig_value(double complex[::1] c, Py_ssize_t n, double eta) nogil:
    cdef Py_ssize_t k, half = n // 2
    cdef double acc = c[0].real
    cdef double th
    for k in range(1, half):
        th = 2.0 * M_PI * k * eta
        acc += 2.0 * (c[k].real * cos(th) - c[k].imag * sin(th))
    acc += c[half].real * cos(M_PI * n * eta)
    return acc / n


cdef inline double _trig_deriv(double complex[::1] c, Py_ssize_t n, double eta) nogil:
    cdef Py_ssize_t k, half = n // 2
    cdef double acc = 0.0
    cdef double th, w
    for k in range(1, half):
        th = 2.0 * M_PI * k * eta
        w = 2.0 * M_PI * k
        acc += 2.0 * w * (-c[k].real * sin(th) - c[k].imag * cos(th))
    acc -= c[half].real * M_PI * n * sin(M_PI * n * eta)
    return acc / n


def trig_eval(double complex[::1] c, Py_ssize_t n, double[::1] eta, int deriv):
    cdef Py_ssize_t i, m = eta.shape[0]
    out = np.empty(m)
    cdef double[::1] o = out
    for i in range(m):
        o[i] = _trig_deriv(c, n, eta[i]) if deriv else _trig_value(c, n, eta[i])
    return out


def trig_integral(double complex[::1] c, Py_ssize_t n, double[::1] a, double[::1] b):
    cdef Py_ssize_t i, k, half = n // 2, m = a.shape[0]
    cdef double acc, w, ta, tb
    out = np.empty(m)
    cdef double[::1] o = out
    for i in range(m):
        acc = c[0].real * (b[i] - a[i])
        for k in range(1, half):
            w = 2.0 * M_PI * k
            ta = w * a[i]
            tb = w * b[i]
            # integral of 2 Re(c e^{i w y}) = 2 (Re c sin(w y) + Im c cos(w y)) / w
            acc += 2.0 * (c[k].real * (sin(tb) - sin(ta)) + c[k].imag * (cos(tb) - cos(ta))) / w
        acc += c[half].real * (sin(M_PI * n * b[i]) - sin(M_PI * n * a[i])) / (M_PI * n)
        o[i] = acc / n
    return out


def bisect_roots(double complex[::1] c, Py_ssize_t n, double[::1] lo, double[::1] hi,
                 double tol, int max_iter):
    cdef Py_ssize_t i, it, m = lo.shape[0]
    cdef double a, b, fa, fb, mid, fm
    out = np.empty(m)
    cdef double[::1] o = out
    for i in range(m):
        a = lo[i]
        b = hi[i]
        fa = _trig_value(c, n, a)
        fb = _trig_value(c, n, b)
        if fa == 0.0 or fb == 0.0 or (fa > 0.0) == (fb > 0.0):
            # no bracket under the interpolant: take the endpoint nearer zero
            o[i] = a if fabs(fa) <= fabs(fb) else b
            continue
        for it in range(max_iter):
            if b - a <= tol:
                break
            mid = 0.5 * (a + b)
            fm = _trig_value(c, n, mid)
            if fm == 0.0:
                a = mid
                b = mid
                break
            if (fm > 0.0) == (fa > 0.0):
                a = mid
                fa = fm
            else:
                b = mid
        o[i] = 0.5 * (a + b)
    return out
