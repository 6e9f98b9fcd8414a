"""Pure-Python closed-loop simulation, same interface as the compiled kernel.

Built from the public controller, reference, estimation and integration
functions, so it doubles as an independent check of the compiled loop.
"""

from __future__ import annotations

import math

import numpy as np

from . import _layout as L
from .controllers import (
    ControllerState,
    CtaGains,
    DiaGains,
    ElqrGains,
    cta_output,
    cta_rate,
    dia_output,
    dia_rate,
    elqr_pressure,
)
from .estimation import differentiator_init, differentiator_step
from .integrate import BlowUpError, integrate_step
from .reference import ConstantReference, ReferenceSpec, reference_eval

BACKEND = "python"


def _reference(ref_kind, ref):
    if ref_kind == L.REF_QUINTIC:
        return ReferenceSpec(ref[0], ref[1])
    if ref_kind == L.REF_CONSTANT:
        return ConstantReference(ref[2])
    return None


def _controller(ctrl_kind, ctrl):
    """Return ``(output, rate)``: pressure and integrator derivatives from errors."""
    g1, g2, g3, g4, lam, nominal_gain, p_const, p_limit, _ = ctrl

    def clip(p):
        if p_limit > 0:
            return min(max(p, -p_limit), p_limit)
        return p

    if ctrl_kind == L.CTRL_CTA:
        gains = CtaGains(g1, g2, g3, g4, lam)
        return (lambda e1, e2, m1, m2, xs: clip(cta_output(gains, e1, e2, xs.xi1) / nominal_gain),
                lambda e1, e2, xs: (cta_rate(gains, e1, e2), 0.0))
    if ctrl_kind == L.CTRL_DIA:
        gains = DiaGains(g1, g2, g3, g4, lam)
        return (lambda e1, e2, m1, m2, xs: clip(dia_output(gains, e1, e2, xs.xi1) / nominal_gain),
                lambda e1, e2, xs: (dia_rate(gains, e1, e2), 0.0))
    if ctrl_kind == L.CTRL_ELQR:
        gains = ElqrGains(g1, g2, g3, g4)
        return (lambda e1, e2, m1, m2, xs: clip(elqr_pressure(gains, m1, m2, xs)),
                lambda e1, e2, xs: (e1, xs.xi1))
    p_hold = clip(p_const) if ctrl_kind == L.CTRL_CONSTANT else 0.0
    return (lambda e1, e2, m1, m2, xs: p_hold, lambda e1, e2, xs: (0.0, 0.0))


def run(plant, pert, ref_kind, ref, ctrl_kind, ctrl, zoh, estimate, x0, Ts, n_steps, blowup):
    """Simulate ``n_steps`` samples; returns ``(rows, n_rows, status)``."""
    if estimate and not zoh:
        raise ValueError("state estimation requires the zero-order-hold loop")
    n_hat, k_hat, eta_hat, sigma, mu_res, delta_mu, d_c = (float(v) for v in plant)
    a_sin, omega, b_x1, b_x2, c_const = (float(v) for v in pert)
    mu_max = mu_res - delta_mu
    spec = _reference(ref_kind, ref)
    output, rate = _controller(ctrl_kind, [float(v) for v in ctrl])
    lambda_d = float(ctrl[8])

    def mu_of(x1):
        try:
            decay = math.exp(-x1 / d_c)
        except OverflowError:  # libm returns inf here; mirror it
            decay = math.inf
        mu = mu_res - delta_mu * decay
        return mu_max if mu > mu_max else mu

    def accel(t, x1, x2, p):
        mu = mu_of(x1)
        phi = a_sin * math.sin(omega * t) + b_x1 * x1 + b_x2 * x2 + c_const
        return -(mu - mu_max) * n_hat * sigma + mu * n_hat * p - k_hat * x1 - eta_hat * x2 + phi

    def plant_rhs(t, y, p):
        return y[1], accel(t, y[0], y[1], p)

    def closed_rhs(t, y, _):
        r, dr, _, _ = reference_eval(spec, t)
        xs = ControllerState(y[2], y[3])
        e1, e2 = y[0] - r, y[1] - dr
        p = output(e1, e2, y[0], y[1], xs)
        d1, d2 = rate(e1, e2, xs)
        return y[1], accel(t, y[0], y[1], p), d1, d2

    out = np.zeros((n_steps + 1, len(L.COLUMNS)))
    y = (float(x0[0]), float(x0[1]), 0.0, 0.0)
    diff = differentiator_init(y[0], lambda_d) if estimate else None
    status = L.STATUS_OK
    i = 0
    while True:
        t = i * Ts
        x1, x2, xi1, xi2 = y
        r, dr, _, _ = reference_eval(spec, t)
        m1, m2 = (diff.xhat1, diff.xhat2) if estimate else (x1, x2)
        xs = ControllerState(xi1, xi2)
        me1, me2 = m1 - r, m2 - dr
        p = output(me1, me2, m1, m2, xs)
        out[i] = (t, x1, x2, r, dr, x1 - r, x2 - dr, p, mu_of(x1), m1, m2)
        if i == n_steps:
            break
        try:
            if zoh:
                d1, d2 = rate(me1, me2, xs)
                x1n, x2n = integrate_step(plant_rhs, (x1, x2), p, t, Ts)
                y = (x1n, x2n, xi1 + Ts * d1, xi2 + Ts * d2)
                if estimate:
                    diff = differentiator_step(diff, x1, Ts)
            else:
                y = integrate_step(closed_rhs, y, 0.0, t, Ts)
        except (BlowUpError, OverflowError):
            status = L.STATUS_BLOWUP
            break
        if not (abs(y[0]) <= blowup and abs(y[1]) <= blowup
                and math.isfinite(y[2]) and math.isfinite(y[3])):
            status = L.STATUS_BLOWUP
            break
        i += 1
    return out, i + 1, status


def differentiate(signal, dt, lambda_d):
    """Differentiator estimates after each sample, shape ``(n, 3)``."""
    out = np.empty((len(signal), 3))
    state = differentiator_init(float(signal[0]), lambda_d)
    for i, x in enumerate(signal):
        state = differentiator_step(state, float(x), dt)
        out[i] = state.xhat1, state.xhat2, state.xhat3
    return out
