"""Pure-Python Dormand-Prince 5(4) stepper.

Reference implementation of the integration kernel. The compiled
``_dopri_ext`` module implements exactly the same algorithm and signature;
``flowshift._kernel`` picks one of them at import time.
"""

import math

import numpy as np

from ._tableau import (A, BLOWUP, COLLAPSE, E, MAX_FACTOR, MAX_STEPS, MIN_FACTOR,
                       ORDER, P, REACHED, SAFETY)

_EXPONENT = -1.0 / ORDER


def _rms(v):
    return math.sqrt(float(np.dot(v, v)) / v.size)


def _initial_step(f, y, f0, direction, rtol, atol):
    scale = atol + rtol * np.abs(y)
    d0 = _rms(y / scale)
    d1 = _rms(f0 / scale)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    y1 = y + h0 * direction * f0
    f1 = np.asarray(f(y1), dtype=float)
    d2 = _rms((f1 - f0) / scale) / h0
    if not math.isfinite(d2):
        return h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / ORDER)
    return min(100 * h0, h1)


def dopri_solve(f, y0, t_end, rtol, atol, max_step, min_step, max_steps,
                blowup_norm, n_check, dense):
    """Integrate the autonomous system y' = f(y) from t=0 to ``t_end``.

    Returns ``(y, t_reached, status, n_steps, n_fev, ts, ys, qs)``. ``ts`` and
    ``ys`` hold accepted step endpoints; ``qs[i]`` is the (n, 4) coefficient
    block of the quartic interpolant on step i (``None`` unless ``dense``).
    """
    y = np.array(y0, dtype=float)
    n = y.size
    t = 0.0
    direction = 1.0 if t_end >= 0 else -1.0
    target = abs(t_end)
    ts = [0.0]
    ys = [y.copy()]
    qs = [] if dense else None
    n_steps = 0
    n_fev = 0
    if target == 0.0:
        return y, 0.0, REACHED, 0, 0, ts, ys, qs

    K = np.empty((7, n))
    K[0] = f(y)
    n_fev += 1
    # the guess may undershoot badly when |y| << atol/rtol; it is only a start value,
    # so floor it well above min_step and let step control take over
    h_abs = min(max(_initial_step(f, y, K[0], direction, rtol, atol), 100 * min_step), max_step, target)
    n_fev += 1
    status = REACHED

    with np.errstate(all="ignore"):
        while True:
            remaining = target - abs(t)
            if remaining <= 0.0:
                break
            if n_steps >= max_steps:
                status = MAX_STEPS
                break
            h_abs = min(h_abs, max_step)
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
                    K[s] = f(y + h * (A[s, :s] @ K[:s]))
                n_fev += 6
                y_new = y + h * (A[6, :6] @ K[:6])
                scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
                err = _rms(h * (E @ K) / scale)
                if math.isfinite(err) and err <= 1.0:
                    break
                if math.isfinite(err):
                    factor = max(MIN_FACTOR, SAFETY * err ** _EXPONENT)
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
                qs.append(h * (K.T @ P))
            if err == 0.0:
                factor = MAX_FACTOR
            else:
                factor = min(MAX_FACTOR, SAFETY * err ** _EXPONENT)
            if step_rejected:
                factor = min(1.0, factor)
            h_abs *= factor
            y = y_new
            t = t_new
            K[0] = K[6]
            n_steps += 1
            ts.append(t)
            ys.append(y.copy())
            if math.sqrt(float(np.dot(y[:n_check], y[:n_check]))) > blowup_norm:
                status = BLOWUP
                break
            if last:
                break
    return y, t, status, n_steps, n_fev, ts, ys, qs
