"""Pure numpy versions of the compiled kernels.

Signatures mirror ``_kernels.pyx`` so either module can be dropped in by the
backend selector.
"""

from functools import lru_cache

import numpy as np


def ifrk4_stage_a(u, e2, n1, h, out):
    np.multiply(e2, u + (0.5 * h) * n1, out=out)


def ifrk4_stage_b(u, e2, n2, h, out):
    np.multiply(e2, u, out=out)
    out += (0.5 * h) * n2


def ifrk4_stage_c(u, e, e2, n3, h, out):
    np.multiply(e, u, out=out)
    out += h * (e2 * n3)


def ifrk4_final(u, e, e2, n1, n2, n3, n4, h, out):
    acc = e * n1
    acc += 2.0 * (e2 * (n2 + n3))
    acc += n4
    np.multiply(e, u, out=out)
    out += (h / 6.0) * acc


@lru_cache(maxsize=256)
def _gather_index(nr, nc, mx, my):
    """Flat source index into ``concat(F, conj(F), [0])`` for the shift by (mx, my)."""
    bx, by = (nr - 1) // 2, nc - 1
    ix = np.arange(nr)[:, None]
    iy = np.arange(nc)[None, :]
    sx = np.where(ix <= bx, ix, ix - nr) - mx
    sy = iy - my
    outside = (np.abs(sx) > bx) | (np.abs(sy) > by)
    flip = sy < 0
    sx = np.where(flip, -sx, sx) % nr
    sy = np.where(flip, -sy, sy)
    idx = sx * nc + sy + flip * (nr * nc)
    idx = np.where(outside, 2 * nr * nc, idx)
    idx = np.broadcast_to(idx, (nr, nc)).copy()
    idx.setflags(write=False)
    return idx


def sparse_advect(f, mx, my, uxh, uyh, kx, ky, out):
    ns, nr, nc = f.shape
    for s in range(ns):
        both = np.concatenate([f[s].ravel(), f[s].conj().ravel(), [0j]])
        acc = np.zeros((nr, nc), dtype=complex)
        for m in range(len(mx)):
            g = both[_gather_index(nr, nc, int(mx[m]), int(my[m]))]
            coef = kx[:, None] * uxh[m] + ky[None, :] * uyh[m]
            acc += (-2.0j * np.pi) * (coef * g)
        out[s] = acc


def _trig_terms(n):
    half = n // 2
    return np.arange(1, half), half


def trig_eval(c, n, eta, deriv):
    k, half = _trig_terms(n)
    eta = np.asarray(eta, dtype=float)
    th = 2.0 * np.pi * np.outer(eta, k)
    cr, ci = c[1:half].real, c[1:half].imag
    if deriv:
        w = 2.0 * np.pi * k
        acc = (2.0 * w * (-cr * np.sin(th) - ci * np.cos(th))).sum(axis=1)
        acc -= c[half].real * np.pi * n * np.sin(np.pi * n * eta)
    else:
        acc = c[0].real + (2.0 * (cr * np.cos(th) - ci * np.sin(th))).sum(axis=1)
        acc += c[half].real * np.cos(np.pi * n * eta)
    return acc / n


def trig_integral(c, n, a, b):
    k, half = _trig_terms(n)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    w = 2.0 * np.pi * k
    ta, tb = np.outer(a, w), np.outer(b, w)
    cr, ci = c[1:half].real, c[1:half].imag
    acc = c[0].real * (b - a)
    acc = acc + (2.0 * (cr * (np.sin(tb) - np.sin(ta)) + ci * (np.cos(tb) - np.cos(ta))) / w).sum(axis=1)
    acc += c[half].real * (np.sin(np.pi * n * b) - np.sin(np.pi * n * a)) / (np.pi * n)
    return acc / n


def bisect_roots(c, n, lo, hi, tol, max_iter):
    a = np.array(lo, dtype=float)
    b = np.array(hi, dtype=float)
    fa = trig_eval(c, n, a, 0)
    fb = trig_eval(c, n, b, 0)
    # round-off can make the grid values and the interpolant disagree on a
    # sign near a root; with no bracket the endpoint nearer zero is the root
    unbracketed = (fa == 0.0) | (fb == 0.0) | ((fa > 0.0) == (fb > 0.0))
    edge = np.where(np.abs(fa) <= np.abs(fb), a, b)
    for _ in range(max_iter):
        live = ((b - a) > tol) & ~unbracketed
        if not live.any():
            break
        mid = 0.5 * (a + b)
        fm = trig_eval(c, n, mid, 0)
        exact = live & (fm == 0.0)
        same = live & ~exact & ((fm > 0.0) == (fa > 0.0))
        other = live & ~exact & ~same
        a = np.where(same | exact, mid, a)
        fa = np.where(same, fm, fa)
        b = np.where(other | exact, mid, b)
    return np.where(unbracketed, edge, 0.5 * (a + b))
