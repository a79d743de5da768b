"""Jit-compiled inner loop for the explicit flow integration.

The kernel advances the state in place for up to a block of steps so the
Python-level driver only pays per-snapshot overhead.  Math follows
flow.rhs exactly; the only admissible difference is summation order in
the curvature average (sequential here, pairwise in numpy), which is
below 1e-15 relative.
"""

import math

import numpy as np
from numba import njit

# status codes returned by advance()
DONE_BLOCK = 0
DONE_TSTOP = 1
BLOWUP = 2


@njit(cache=True, error_model="numpy")
def advance(x, s, sin, cos, sin_sq, cot, dpsi, dt_safety, fixed_dt, t, t_stop,
            max_steps, dxb, dsb, x_prev, s_prev):
    """Advance up to max_steps forward-Euler steps in place.

    Returns (t, steps_done, status).  On BLOWUP the arrays hold the last
    state for which the right-hand side and the updated fields were fully
    finite.  fixed_dt <= 0 selects the adaptive diffusive step.
    """
    n = x.shape[0]
    steps = 0
    inv2dpsi = 1.0 / (2.0 * dpsi)
    invdpsi2 = 1.0 / (dpsi * dpsi)
    while steps < max_steps:
        if t >= t_stop:
            return t, steps, DONE_TSTOP
        x[0] = x[1]
        x[n - 1] = x[n - 2]
        s[0] = s[1]
        s[n - 1] = s[n - 2]
        num_sum = 0.0
        vol_sum = 0.0
        dmax = 0.0
        ok = True
        for i in range(1, n - 1):
            xp = (x[i + 1] - x[i - 1]) * inv2dpsi
            xpp = (x[i + 1] + x[i - 1] - 2.0 * x[i]) * invdpsi2
            sp = (s[i + 1] - s[i - 1]) * inv2dpsi
            spp = (s[i + 1] + s[i - 1] - 2.0 * s[i]) * invdpsi2
            si = s[i]
            w = si * sin_sq[i]
            wp = sin_sq[i] * sp + 2.0 * sin[i] * cos[i] * si
            em1 = math.expm1(-4.0 * w)
            d = math.exp(2.0 * (w - x[i]))
            if d > dmax:
                dmax = d
            if w != 0.0:
                mu = -em1 / w
            else:
                mu = 4.0
            if w > 1e-3 or w < -1e-3:
                phi = -(em1 + 4.0 * w) / (w * w)
            else:
                phi = (-8.0 + (32.0 / 3.0) * w - (32.0 / 3.0) * w * w
                       + (128.0 / 15.0) * w * w * w)
            mu_s = mu * si
            e_n = math.exp(3.0 * x[i] + w)
            num_sum += d * e_n * (em1 - 4.0 * sin[i] * cos[i] * wp
                                  + sin_sq[i] * (3.0 + (xp + wp) ** 2))
            vol_sum += e_n * sin_sq[i]
            dxb[i] = d * (xpp + 2.0 * cot[i] * xp - 2.0
                          + 0.5 * (xp * xp + wp * wp) + 3.0 * xp * wp
                          + 0.5 * mu_s + (-em1) * (1.0 + 2.0 * cot[i] * wp))
            a = xp / sin[i]
            b = sin[i] * sp + 2.0 * cos[i] * si
            dsb[i] = d * (spp + 6.0 * cot[i] * sp - 8.0 * si - 1.5 * phi * si * si
                          + mu_s * (1.0 - 2.0 * (cot[i] * xp
                                                 + 2.0 * sin[i] * cos[i] * sp
                                                 + 4.0 * cos[i] * cos[i] * si))
                          - 0.5 * (a * a + b * b + 6.0 * a * b))
            if not (math.isfinite(dxb[i]) and math.isfinite(dsb[i])):
                ok = False
        r_hat = 2.0 * num_sum / vol_sum
        if not (ok and math.isfinite(r_hat)):
            return t, steps, BLOWUP
        if fixed_dt > 0.0:
            dt = fixed_dt
        else:
            dt = dt_safety * dpsi * dpsi / (2.0 * dmax)
        if t + dt > t_stop:
            dt = t_stop - t
        r3 = r_hat / 3.0
        for i in range(n):
            x_prev[i] = x[i]
            s_prev[i] = s[i]
        ok = True
        for i in range(1, n - 1):
            x[i] += dt * (dxb[i] + r3)
            s[i] += dt * dsb[i]
            if not (math.isfinite(x[i]) and math.isfinite(s[i])):
                ok = False
        if not ok:
            for i in range(n):
                x[i] = x_prev[i]
                s[i] = s_prev[i]
            return t, steps, BLOWUP
        x[0] = x[1]
        x[n - 1] = x[n - 2]
        s[0] = s[1]
        s[n - 1] = s[n - 2]
        t += dt
        steps += 1
    return t, steps, DONE_BLOCK
