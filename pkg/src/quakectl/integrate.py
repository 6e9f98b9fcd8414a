"""Fixed-step Dormand-Prince integration.

Only the fifth-order solution of the 5(4) pair is propagated; there is no
error control or step adaptation.
"""

from __future__ import annotations

import math

__all__ = ["DP_C", "DP_A", "DP_B", "BlowUpError", "integrate_step"]

DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0)
DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
)
DP_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84)


class BlowUpError(FloatingPointError):
    """A stage or the new state became non-finite."""

    def __init__(self, t: float, message: str = ""):
        super().__init__(message or f"non-finite state during step starting at t = {t:g} s")
        self.t = t


def integrate_step(rhs, state, p_held: float, t: float, T_s: float) -> tuple[float, ...]:
    """Advance ``state`` by one step of length ``T_s``.

    Parameters
    ----------
    rhs : callable
        ``rhs(t, state, p) -> derivative`` with ``state`` a tuple of floats.
    state : sequence of float
    p_held : float
        Input held constant over the step.
    t, T_s : float
        Step start time and length [s].

    Returns
    -------
    tuple of float
        The new state.

    Raises
    ------
    BlowUpError
        If any stage value or the result is not finite.
    """
    if not T_s > 0:
        raise ValueError("T_s must be positive")
    h = T_s
    y = tuple(float(v) for v in state)
    n = len(y)
    ks = []
    for c, row in zip(DP_C, DP_A):
        if row:
            ys = tuple(y[i] + h * sum(a * k[i] for a, k in zip(row, ks)) for i in range(n))
        else:
            ys = y
        k = tuple(float(v) for v in rhs(t + c * h, ys, p_held))
        if not all(math.isfinite(v) for v in k):
            raise BlowUpError(t)
        ks.append(k)
    out = tuple(y[i] + h * sum(b * k[i] for b, k in zip(DP_B, ks)) for i in range(n))
    if not all(math.isfinite(v) for v in out):
        raise BlowUpError(t)
    return out
