"""Compiled inner loops for the 1D finite-volume integrator.

The explicit scheme takes millions of steps at acceptance resolutions
(diffusive CFL), so the flux/update sweep runs in numba.  The dominant
configuration (p=2 power profile, linear speed, arithmetic average) gets a
fully specialized sweep with a constant time step; every other built-in
combination goes through a generic dispatching sweep, and custom
evaluators fall back to the numpy path in :mod:`saturex.solver`.

Codes: psi 0=linear, 1=power family (param p), 2=coth, 3=tanh (param gamma);
phi 0=linear (a=s), 1=power (a=scale, b=m).
"""

from __future__ import annotations

import math

import numpy as np

try:
    from numba import njit

    KERNEL_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    KERNEL_AVAILABLE = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap

PSI_LINEAR, PSI_POWER, PSI_COTH, PSI_TANH = 0, 1, 2, 3
PHI_LINEAR, PHI_POWER = 0, 1

# Ratios beyond this are fully saturated; clamping keeps r*r finite.
_R_CLAMP = 1e100


@njit(cache=True, nogil=True, inline="always")
def _psi_val(code: int, param: float, r: float) -> float:
    if code == PSI_LINEAR:
        return r
    if code == PSI_POWER:
        a = abs(r)
        sign = 1.0 if r >= 0.0 else -1.0
        if param == 2.0:
            if a <= 1.0:
                return r / math.sqrt(1.0 + r * r)
            return sign / math.sqrt(1.0 + 1.0 / (a * a))
        if param == 1.0:
            if a <= 1.0:
                return r / (1.0 + a)
            return sign / (1.0 + 1.0 / a)
        if a <= 1.0:
            return r / (1.0 + a**param) ** (1.0 / param)
        return sign / (1.0 + a ** (-param)) ** (1.0 / param)
    if code == PSI_COTH:
        a = abs(r)
        if a < 1e-2:
            return r / 3.0 - r**3 / 45.0 + 2.0 * r**5 / 945.0
        return 1.0 / math.tanh(r) - 1.0 / r
    return math.tanh(r / param)


@njit(cache=True, nogil=True, inline="always")
def _phi_val(code: int, a: float, b: float, z: float) -> float:
    if code == PHI_LINEAR:
        return a * z
    return a * z**b


@njit(cache=True, nogil=True, inline="always")
def _vmax(phi_code: int, phi_a: float, phi_b: float, umax: float,
          dpsi_max: float, dx: float) -> float:
    if phi_code == PHI_LINEAR:
        theta = phi_a
        speed = phi_a
    else:
        speed = phi_a * umax ** (phi_b - 1.0)
        theta = phi_b * speed
    vdiff = 2.0 * dpsi_max * speed / dx
    v = theta
    if speed > v:
        v = speed
    if vdiff > v:
        v = vdiff
    return v


@njit(cache=True, nogil=True)
def _advance_fast_p2lin(u, F, dx, t, t_stop, dt, floor, s, kdx, max_steps):
    """Specialized march: p=2 profile, linear speed, arithmetic average.

    dt is state-independent here, and the flux fuses to
    s * du * kdx / sqrt(1 + r^2).
    """
    n = u.shape[0]
    F[0] = 0.0
    F[n] = 0.0
    steps = 0
    clipped_total = 0.0
    max_clip = 0.0
    c = dt / dx
    while t < t_stop:
        if steps >= max_steps:
            return t, steps, clipped_total, max_clip, 2
        for i in range(1, n):
            a = u[i - 1]
            b = u[i]
            ub = 0.5 * (a + b)
            if ub < floor:
                F[i] = 0.0
            else:
                r = kdx * (b - a) / ub
                r = min(max(r, -_R_CLAMP), _R_CLAMP)
                F[i] = s * ub * r / math.sqrt(1.0 + r * r)
        clip = 0.0
        for i in range(n):
            v = u[i] + c * (F[i + 1] - F[i])
            vc = max(v, 0.0)
            clip += vc - v
            u[i] = vc
        clip *= dx
        clipped_total += clip
        if clip > max_clip:
            max_clip = clip
        t += dt
        steps += 1
    return t, steps, clipped_total, max_clip, 0


@njit(cache=True, nogil=True)
def _advance_generic(u, F, dx, t, t_stop, cfl, floor, avg_min, psi_code,
                     psi_param, phi_code, phi_a, phi_b, dpsi_max, L, max_steps):
    n = u.shape[0]
    F[0] = 0.0
    F[n] = 0.0
    steps = 0
    clipped_total = 0.0
    max_clip = 0.0
    dt_min = 1.0e300
    dt_max = 0.0
    dt_sum = 0.0
    kdx = L / dx
    umax = 0.0
    for i in range(n):
        if u[i] > umax:
            umax = u[i]
    while t < t_stop:
        if steps >= max_steps:
            return t, steps, clipped_total, max_clip, dt_min, dt_max, dt_sum, 2
        if umax <= floor:
            dt = cfl * dx
        else:
            vmax = _vmax(phi_code, phi_a, phi_b, umax, dpsi_max, dx)
            dt = cfl * dx / vmax if vmax > 0.0 else cfl * dx
        for i in range(1, n):
            a = u[i - 1]
            b = u[i]
            if avg_min:
                ub = a if a < b else b
            else:
                ub = 0.5 * (a + b)
            if ub < floor:
                F[i] = 0.0
            else:
                r = kdx * (b - a) / ub
                r = min(max(r, -_R_CLAMP), _R_CLAMP)
                F[i] = _phi_val(phi_code, phi_a, phi_b, ub) * _psi_val(psi_code, psi_param, r)
        c = dt / dx
        newmax = 0.0
        clip = 0.0
        for i in range(n):
            v = u[i] + c * (F[i + 1] - F[i])
            vc = max(v, 0.0)
            clip += vc - v
            u[i] = vc
            if vc > newmax:
                newmax = vc
        umax = newmax
        clip *= dx
        clipped_total += clip
        if clip > max_clip:
            max_clip = clip
        t += dt
        steps += 1
        dt_sum += dt
        if dt < dt_min:
            dt_min = dt
        if dt > dt_max:
            dt_max = dt
    return t, steps, clipped_total, max_clip, dt_min, dt_max, dt_sum, 0


def advance(u, F, dx, t, t_stop, cfl, floor, avg_min, psi_code, psi_param,
            phi_code, phi_a, phi_b, dpsi_max, L, max_steps):
    """March the state in place until t >= t_stop.

    Zero-flux boundaries, negatives clipped and accounted.  Returns
    (t, steps, clipped_total, max_clip_step, dt_min, dt_max, dt_sum,
    status) with status 0 ok, 2 step budget exhausted.  Finiteness of the
    state is checked by the caller between intervals.
    """
    fast = (psi_code == PSI_POWER and psi_param == 2.0
            and phi_code == PHI_LINEAR and not avg_min)
    umax0 = float(np.max(u)) if u.shape[0] else 0.0
    if fast and umax0 > floor:
        vmax = _vmax(phi_code, phi_a, phi_b, umax0, dpsi_max, dx)
        dt = cfl * dx / vmax if vmax > 0.0 else cfl * dx
        t, steps, clipped, max_clip, status = _advance_fast_p2lin(
            u, F, dx, t, t_stop, dt, floor, phi_a, L / dx, max_steps)
        return (t, steps, clipped, max_clip,
                dt if steps else 1.0e300, dt if steps else 0.0, dt * steps, status)
    return _advance_generic(u, F, dx, t, t_stop, cfl, floor, avg_min, psi_code,
                            psi_param, phi_code, phi_a, phi_b, dpsi_max, L,
                            max_steps)
