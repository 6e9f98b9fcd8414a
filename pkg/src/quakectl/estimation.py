"""Robust exact filtering differentiator.

Estimates slip, slip-rate and acceleration from noisy slip samples. Two
filtering states ``w1, w2`` smooth the input before differentiation. The
gain ``lambda_d`` must exceed a bound on the third derivative of the input.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .controllers import signed_power

# (coefficient, power of lambda_d, exponent on w1) per equation
_COEFFS = (
    (5.0, 0.2, 0.8),
    (10.03, 0.4, 0.6),
    (9.3, 0.6, 0.4),
    (4.57, 0.8, 0.2),
    (1.1, 1.0, 0.0),
)

DEFAULT_LAMBDA_D = 1e-5


@dataclass(frozen=True)
class DifferentiatorState:
    w1: float
    w2: float
    xhat1: float
    xhat2: float
    xhat3: float
    lambda_d: float = DEFAULT_LAMBDA_D

    def __post_init__(self):
        if not self.lambda_d > 0:
            raise ValueError("lambda_d must be positive")


def differentiator_init(x1_first: float, lambda_d: float = DEFAULT_LAMBDA_D) -> DifferentiatorState:
    """Start with ``xhat1`` at the first measurement and everything else at zero."""
    return DifferentiatorState(0.0, 0.0, x1_first, 0.0, 0.0, lambda_d)


def differentiator_step(state: DifferentiatorState, x1_meas: float, dt: float) -> DifferentiatorState:
    """One explicit Euler step."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    lam = state.lambda_d
    w1 = state.w1
    g = [c * lam**lp * signed_power(w1, ex) for c, lp, ex in _COEFFS]
    dw1 = -g[0] + state.w2
    dw2 = -g[1] + state.xhat1 - x1_meas
    dx1 = -g[2] + state.xhat2
    dx2 = -g[3] + state.xhat3
    dx3 = -g[4]
    return DifferentiatorState(
        w1 + dt * dw1,
        state.w2 + dt * dw2,
        state.xhat1 + dt * dx1,
        state.xhat2 + dt * dx2,
        state.xhat3 + dt * dx3,
        lam,
    )


def differentiate(signal, dt: float, lambda_d: float = DEFAULT_LAMBDA_D,
                  backend: str | None = None) -> np.ndarray:
    """Run the differentiator over a sampled signal.

    Returns an ``(n, 3)`` array; row ``i`` holds the estimates after
    consuming sample ``i`` (i.e. the state at ``t_{i+1}``). Uses the
    compiled loop when available.
    """
    from . import _backend

    if not dt > 0:
        raise ValueError("dt must be positive")
    if not lambda_d > 0:
        raise ValueError("lambda_d must be positive")
    signal = np.ascontiguousarray(signal, dtype=float).ravel()
    if signal.size == 0:
        return np.empty((0, 3))
    return _backend.get(backend).differentiate(signal, float(dt), float(lambda_d))
