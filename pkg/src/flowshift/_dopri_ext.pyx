# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Dormand-Prince 5(4) stepper.

Same algorithm, arguments and return layout as ``flowshift._dopri_py``; the
right-hand side stays a Python callable, but stage combination, error norms
and step control run in C.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt, pow, isfinite

from ._tableau import A as _A, E as _E, P as _P

cnp.import_array()

cdef double SAFETY = 0.9
cdef double MIN_FACTOR = 0.2
cdef double MAX_FACTOR = 10.0
cdef double EXPONENT = -0.2

cdef double[:, ::1] A = np.ascontiguousarray(_A, dtype=np.float64)
cdef double[::1] E = np.ascontiguousarray(_E, dtype=np.float64)
cdef double[:, ::1] P = np.ascontiguousarray(_P, dtype=np.float64)

cdef enum:
    REACHED = 0
    BLOWUP = 1
    COLLAPSE = 2
    MAX_STEPS = 3


cdef inline void _call(object f, double[::1] src, double[::1] dst, Py_ssize_t n):
    cdef Py_ssize_t i
    cdef cnp.ndarray arg = np.empty(n, dtype=np.float64)
    cdef double[::1] argv = arg
    for i in range(n):
        argv[i] = src[i]
    cdef double[::1] out = np.asarray(f(arg), dtype=np.float64).reshape(n)
    for i in range(n):
        dst[i] = out[i]


cdef double _initial_step(object f, double[::1] y, double[::1] f0, double direction,
                          double rtol, double atol, Py_ssize_t n):
    cdef Py_ssize_t i
    cdef double d0 = 0.0, d1 = 0.0, d2 = 0.0, sc, h0, h1, dm
    cdef double[::1] y1 = np.empty(n)
    cdef double[::1] f1 = np.empty(n)
    for i in range(n):
        sc = atol + rtol * fabs(y[i])
        d0 += (y[i] / sc) ** 2
        d1 += (f0[i] / sc) ** 2
    d0 = sqrt(d0 / n)
    d1 = sqrt(d1 / n)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    for i in range(n):
        y1[i] = y[i] + h0 * direction * f0[i]
    _call(f, y1, f1, n)
    for i in range(n):
        sc = atol + rtol * fabs(y[i])
        d2 += ((f1[i] - f0[i]) / sc) ** 2
    d2 = sqrt(d2 / n) / h0
    if not isfinite(d2):
        return h0
    dm = d1 if d1 > d2 else d2
    if dm <= 1e-15:
        h1 = h0 * 1e-3
        if h1 < 1e-6:
            h1 = 1e-6
    else:
        h1 = pow(0.01 / dm, 0.2)
    return h1 if h1 < 100 * h0 else 100 * h0


def dopri_solve(f, y0, double t_end, double rtol, double atol, double max_step,
                double min_step, long max_steps, double blowup_norm, Py_ssize_t n_check,
                bint dense):
    """Integrate y' = f(y) from t=0 to ``t_end``; see ``_dopri_py.dopri_solve``."""
    cdef cnp.ndarray y_arr = np.array(y0, dtype=np.float64).reshape(-1)
    cdef Py_ssize_t n = y_arr.shape[0]
    cdef double[::1] y = y_arr
    cdef double t = 0.0
    cdef double direction = 1.0 if t_end >= 0 else -1.0
    cdef double target = fabs(t_end)
    cdef list ts = [0.0]
    cdef list ys = [np.array(y_arr)]
    qs = [] if dense else None
    cdef long n_steps = 0
    cdef long n_fev = 0
    if target == 0.0:
        return np.array(y_arr), 0.0, REACHED, 0, 0, ts, ys, qs

    cdef double[:, ::1] K = np.empty((7, n))
    cdef double[::1] ytmp = np.empty(n)
    cdef double[::1] y_new = np.empty(n)
    cdef cnp.ndarray q_arr
    cdef double[:, ::1] q
    cdef Py_ssize_t i, s, j, c
    cdef double h_abs, h, remaining, err, sc, acc, factor, yn, ynorm, t_new
    cdef bint last, step_rejected
    cdef int status = REACHED

    _call(f, y, K[0], n)
    n_fev += 1
    h_abs = _initial_step(f, y, K[0], direction, rtol, atol, n)
    n_fev += 1
    # see the pure-Python kernel: the guess is floored well above min_step
    if h_abs < 100 * min_step:
        h_abs = 100 * min_step
    if h_abs > max_step:
        h_abs = max_step
    if h_abs > target:
        h_abs = target

    while True:
        remaining = target - fabs(t)
        if remaining <= 0.0:
            break
        if n_steps >= max_steps:
            status = MAX_STEPS
            break
        if h_abs > max_step:
            h_abs = max_step
        if h_abs < min_step and remaining > min_step:
            status = COLLAPSE
            break
        last = h_abs >= remaining
        if last:
            h_abs = remaining
        step_rejected = False
        while True:
            h = direction * h_abs
            for s in range(1, 7):
                for i in range(n):
                    acc = 0.0
                    for j in range(s):
                        acc += A[s, j] * K[j, i]
                    ytmp[i] = y[i] + h * acc
                _call(f, ytmp, K[s], n)
            n_fev += 6
            err = 0.0
            for i in range(n):
                # stage 7 is evaluated at the new point (FSAL)
                acc = 0.0
                for j in range(6):
                    acc += A[6, j] * K[j, i]
                yn = y[i] + h * acc
                y_new[i] = yn
                sc = atol + rtol * (fabs(y[i]) if fabs(y[i]) > fabs(yn) else fabs(yn))
                acc = 0.0
                for j in range(7):
                    acc += E[j] * K[j, i]
                err += (h * acc / sc) ** 2
            err = sqrt(err / n)
            if isfinite(err) and err <= 1.0:
                break
            if isfinite(err):
                factor = SAFETY * pow(err, EXPONENT)
                if factor < MIN_FACTOR:
                    factor = MIN_FACTOR
            else:
                factor = MIN_FACTOR
            h_abs *= factor
            step_rejected = True
            last = False
            if h_abs < min_step:
                status = COLLAPSE
                break
        if status == COLLAPSE:
            break

        t_new = target * direction if last else t + h
        if dense:
            q_arr = np.empty((n, 4))
            q = q_arr
            for i in range(n):
                for c in range(4):
                    acc = 0.0
                    for j in range(7):
                        acc += K[j, i] * P[j, c]
                    q[i, c] = h * acc
            qs.append(q_arr)
        if err == 0.0:
            factor = MAX_FACTOR
        else:
            factor = SAFETY * pow(err, EXPONENT)
            if factor > MAX_FACTOR:
                factor = MAX_FACTOR
        if step_rejected and factor > 1.0:
            factor = 1.0
        h_abs *= factor
        for i in range(n):
            y[i] = y_new[i]
            K[0, i] = K[6, i]
        t = t_new
        n_steps += 1
        ts.append(t)
        ys.append(np.array(y_arr))
        ynorm = 0.0
        for i in range(n_check):
            ynorm += y[i] * y[i]
        if sqrt(ynorm) > blowup_norm:
            status = BLOWUP
            break
        if last:
            break
    return np.array(y_arr), t, status, n_steps, n_fev, ts, ys, qs
