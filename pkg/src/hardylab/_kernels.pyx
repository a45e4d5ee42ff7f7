# cython: language_level=3
# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: the two-point ratio objective, its coordinate
golden-section ascent in the (u, v) chart, and the certificate-gap grid
scan.  Mirrors ``_kernels_py`` operation for operation so both backends
produce the same trajectories."""

from libc.math cimport INFINITY, copysign, exp, fabs, pow, sqrt

import numpy as np

BACKEND_NAME = "compiled"

cdef double _GOLDEN = (sqrt(5.0) - 1.0) / 2.0


cdef inline double _ratio_uv(double p, double gamma, double lam,
                             double u, double v) noexcept nogil:
    # exp(u), exp(v) are the exact feasibility margins; using them directly
    # avoids cancellation in gamma - alpha and beta - gamma.
    cdef double eu = exp(u)
    cdef double ev = exp(v)
    cdef double alpha = gamma - eu
    cdef double beta = gamma + ev
    cdef double num = ev * pow(fabs(alpha - lam), p) + eu * pow(fabs(beta - lam), p)
    cdef double den = ev * pow(fabs(alpha), p) + eu * pow(fabs(beta), p)
    return num / den


cdef inline double _g_axis(double p, double gamma, double lam, int axis,
                           double t, double fixed) noexcept nogil:
    if axis == 0:
        return _ratio_uv(p, gamma, lam, t, fixed)
    return _ratio_uv(p, gamma, lam, fixed, t)


cdef double _line_max_c(double p, double gamma, double lam, int axis, double fixed,
                        double x0, double f0, double x_tol, double lo, double hi,
                        double* f_out, long* ev_out) noexcept nogil:
    # Uphill step-doubling bracket followed by golden-section contraction;
    # never returns a value below f0.  Same control flow and arithmetic
    # as the pure-Python line search.
    cdef double step = 1.0
    cdef double xl = x0 - step
    if xl < lo:
        xl = lo
    cdef double xr = x0 + step
    if xr > hi:
        xr = hi
    cdef double fl = _g_axis(p, gamma, lam, axis, xl, fixed)
    cdef double fr = _g_axis(p, gamma, lam, axis, xr, fixed)
    cdef long ev = 2
    cdef double best_x = x0
    cdef double best_f = f0
    if fl > best_f:
        best_x = xl
        best_f = fl
    if fr > best_f:
        best_x = xr
        best_f = fr

    cdef double direction, xa, xb, fb, xc, fc, xn, fn
    cdef double span_lo, span_hi
    if fl > f0 or fr > f0:
        if fr >= fl:
            direction = 1.0
            xb = xr
            fb = fr
            xa = x0
        else:
            direction = -1.0
            xb = xl
            fb = fl
            xa = x0
        xc = xb
        fc = fb
        while True:
            step *= 2.0
            xn = xb + direction * step
            if xn < lo:
                xn = lo
            if xn > hi:
                xn = hi
            if xn == xb:
                xc = xb
                fc = fb
                break
            fn = _g_axis(p, gamma, lam, axis, xn, fixed)
            ev += 1
            if fn > best_f:
                best_x = xn
                best_f = fn
            if fn <= fb:
                xc = xn
                fc = fn
                break
            xa = xb
            xb = xn
            fb = fn
        span_lo = xa
        if xb < span_lo:
            span_lo = xb
        if xc < span_lo:
            span_lo = xc
        span_hi = xa
        if xb > span_hi:
            span_hi = xb
        if xc > span_hi:
            span_hi = xc
    else:
        span_lo = xl
        span_hi = xr

    cdef double c = span_hi - _GOLDEN * (span_hi - span_lo)
    cdef double d = span_lo + _GOLDEN * (span_hi - span_lo)
    cdef double fc_ = _g_axis(p, gamma, lam, axis, c, fixed)
    cdef double fd_ = _g_axis(p, gamma, lam, axis, d, fixed)
    ev += 2
    cdef int guard = 0
    while span_hi - span_lo > x_tol and guard < 500:
        guard += 1
        if fc_ >= fd_:
            span_hi = d
            d = c
            fd_ = fc_
            c = span_hi - _GOLDEN * (span_hi - span_lo)
            fc_ = _g_axis(p, gamma, lam, axis, c, fixed)
        else:
            span_lo = c
            c = d
            fc_ = fd_
            d = span_lo + _GOLDEN * (span_hi - span_lo)
            fd_ = _g_axis(p, gamma, lam, axis, d, fixed)
        ev += 1
    if fc_ > best_f:
        best_x = c
        best_f = fc_
    if fd_ > best_f:
        best_x = d
        best_f = fd_
    ev_out[0] += ev
    if best_f < f0:
        f_out[0] = f0
        return x0
    f_out[0] = best_f
    return best_x


def _ratio_cap(p):
    # exp(cap)**p must stay finite in double precision.
    return min(30.0, 690.0 / p)


def c_ratio_pow_p(double p, double gamma, double lam, double alpha, double beta):
    """Raw two-point ratio in p-th power scale; no feasibility policing."""
    cdef double w_hi = beta - gamma
    cdef double w_lo = gamma - alpha
    cdef double num = w_hi * pow(fabs(alpha - lam), p) + w_lo * pow(fabs(beta - lam), p)
    cdef double den = w_hi * pow(fabs(alpha), p) + w_lo * pow(fabs(beta), p)
    return num / den


def ratio_descent(double p, double gamma, double lam, double u0, double v0,
                  double x_tol, double f_tol, int max_sweeps):
    """Coordinate golden-section ascent of the ratio objective in the
    (u, v) chart.  Returns (u, v, value, evaluations, converged)."""
    cdef double cap = 690.0 / p
    if cap > 30.0:
        cap = 30.0
    cdef double u = u0
    if u > cap:
        u = cap
    if u < -cap:
        u = -cap
    cdef double v = v0
    if v > cap:
        v = cap
    if v < -cap:
        v = -cap
    cdef double fval = _ratio_uv(p, gamma, lam, u, v)
    cdef long ev = 1
    cdef bint converged = False
    cdef double u1, v1, f1, f2, move, gain
    cdef int sweep
    for sweep in range(max_sweeps):
        f1 = 0.0
        f2 = 0.0
        u1 = _line_max_c(p, gamma, lam, 0, v, u, fval, x_tol, -cap, cap, &f1, &ev)
        v1 = _line_max_c(p, gamma, lam, 1, u1, v, f1, x_tol, -cap, cap, &f2, &ev)
        move = fabs(u1 - u) + fabs(v1 - v)
        gain = f2 - fval
        u = u1
        v = v1
        fval = f2
        if move <= 10.0 * x_tol and gain <= f_tol:
            converged = True
            break
    return u, v, fval, int(ev), converged


def majorization_max(xs, double p, double lam, double gamma, double c_pow_p,
                     double slope, double y):
    """Scan of the normalized certificate gap on a grid of x at fixed y.

    Computes (V - U) / (1 + |V| + |U|) with
    V(x, y) = |x - lam*y|^p - C^p |x|^p and
    U(x, y) = slope * sign(y)|y|^(p-1) * (x - gamma*y),
    returning the maximum and the index of its first occurrence.
    """
    cdef double[::1] x_view = np.ascontiguousarray(xs, dtype=np.float64)
    cdef Py_ssize_t n = x_view.shape[0]
    cdef Py_ssize_t i, best_i = 0
    cdef double su = slope * copysign(pow(fabs(y), p - 1.0), y)
    cdef double best = -INFINITY
    cdef double x, v, u, diff
    for i in range(n):
        x = x_view[i]
        v = pow(fabs(x - lam * y), p) - c_pow_p * pow(fabs(x), p)
        u = su * (x - gamma * y)
        diff = (v - u) / (1.0 + fabs(v) + fabs(u))
        if diff > best:
            best = diff
            best_i = i
    return best, int(best_i)
