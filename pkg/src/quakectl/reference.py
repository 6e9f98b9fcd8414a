"""Slow-slip reference trajectories."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ReferenceSpec:
    """Quintic 10-15-6 ramp from 0 to ``d_max`` over ``t_op``, held afterwards."""

    d_max: float
    t_op: float

    def __post_init__(self):
        if not (self.d_max > 0 and self.t_op > 0):
            raise ValueError("d_max and t_op must be positive")

    @property
    def jerk_bound(self) -> float:
        """Max of |r'''| on [0, t_op], reached at both ends."""
        return 60.0 * self.d_max / self.t_op**3


@dataclass(frozen=True)
class ConstantReference:
    """Constant set-point ``r0`` (used for e-LQR checks)."""

    r0: float = 0.0


def reference_eval(spec, t: float) -> tuple[float, float, float, float]:
    """Return ``(r, dr, ddr, dddr)`` at time ``t``."""
    if t < 0:
        raise ValueError("reference time must be non-negative")
    if spec is None:
        return 0.0, 0.0, 0.0, 0.0
    if isinstance(spec, ConstantReference):
        return spec.r0, 0.0, 0.0, 0.0
    if t > spec.t_op:
        return spec.d_max, 0.0, 0.0, 0.0
    d, top = spec.d_max, spec.t_op
    s = t / top
    s2 = s * s
    s3 = s2 * s
    r = d * s3 * (10.0 - 15.0 * s + 6.0 * s2)
    dr = d * 30.0 * s2 * (1.0 - 2.0 * s + s2) / top
    ddr = d * 60.0 * s * (1.0 - 3.0 * s + 2.0 * s2) / top**2
    dddr = d * 60.0 * (1.0 - 6.0 * s + 6.0 * s2) / top**3
    return r, dr, ddr, dddr
