"""Similarity scaling between the laboratory fault and a real fault.

Each factor is a real-to-lab ratio. Signals and gains are mapped by the
powers of these ratios that keep the closed-loop equations dimensionally
consistent; the factors themselves are stored, not re-derived.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

from .controllers import CtaGains, DiaGains, ElqrGains

__all__ = [
    "ScalingFactors",
    "LAB_TO_REAL",
    "IDENTITY",
    "scale_signals",
    "scale_cta_gains",
    "scale_dia_gains",
    "scale_elqr_gains",
    "scale_gains",
]


@dataclass(frozen=True)
class ScalingFactors:
    """Real/lab ratios of density, shear modulus, damping, length, pressure,
    friction, slip, time, seismic moment and magnitude."""

    rho: float
    G: float
    eta: float
    L_ac: float
    p: float
    mu: float
    delta: float
    t: float
    M0: float = 1.0
    Mw: float | None = None

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name == "Mw" or value is None:
                continue
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"scaling factor {f.name} must be positive, got {value!r}")

    @property
    def v(self) -> float:
        """Slip-rate ratio."""
        return self.delta / self.t

    def reciprocal(self) -> ScalingFactors:
        """Factors for the inverse (real to lab) direction.

        The magnitude entry is a log-scale offset, not a ratio, so it is dropped.
        """
        return ScalingFactors(
            1 / self.rho, 1 / self.G, 1 / self.eta, 1 / self.L_ac, 1 / self.p,
            1 / self.mu, 1 / self.delta, 1 / self.t, 1 / self.M0, None,
        )

    @staticmethod
    def magnitude_shift(M0_ratio: float) -> float:
        """``(2/3) log10(M0_ratio) - 6.07``; the tabulated Mw ratio follows this rule."""
        return 2.0 / 3.0 * math.log10(M0_ratio) - 6.07


# Tabulated real/lab ratios for the fault pair in ``model.FAULT_PRESETS``.
LAB_TO_REAL = ScalingFactors(
    rho=1.81, G=1.33e5, eta=1.23e12, L_ac=5e4, p=500.0, mu=0.5882,
    delta=110.54, t=184.17, M0=3.68e16, Mw=4.97,
)

IDENTITY = ScalingFactors(1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, None)


def scale_signals(f: ScalingFactors, p=0.0, x1=0.0, x2=0.0, xi1=0.0, xi2=0.0,
                  e1=0.0, e2=0.0) -> dict:
    """Map lab pressure, states, integrators and errors to the real fault.

    Works elementwise on scalars or numpy arrays.
    """
    return {
        "p": p * f.p,
        "x1": x1 * f.delta,
        "x2": x2 * f.v,
        "xi1": xi1 * f.delta * f.t,
        "xi2": xi2 * f.delta * f.t**2,
        "e1": e1 * f.delta,
        "e2": e2 * f.v,
    }


def scale_cta_gains(f: ScalingFactors, g: CtaGains) -> CtaGains:
    return CtaGains(
        g.k1 * f.p / f.delta ** (1 / 3),
        g.k2 * f.p / f.v**0.5,
        g.k3 * f.p / f.t,
        g.k4 * f.p / f.t,
        g.lam,
    )


def scale_dia_gains(f: ScalingFactors, g: DiaGains) -> DiaGains:
    return DiaGains(
        g.ki1 * f.v / f.delta ** (2 / 3),
        g.ki2 * f.p / f.v**0.5,
        g.ki3 * f.p / f.t,
        g.ki4 * f.delta / f.v**1.5,
        g.lam,
    )


def scale_elqr_gains(f: ScalingFactors, g: ElqrGains) -> ElqrGains:
    return ElqrGains(
        g.k1 * f.p / f.delta,
        g.k2 * f.p / f.v,
        g.k3 * f.p / (f.delta * f.t),
        g.k4 * f.p / (f.delta * f.t**2),
    )


def scale_gains(f: ScalingFactors, gains):
    """Dispatch on the gain type."""
    if isinstance(gains, CtaGains):
        return scale_cta_gains(f, gains)
    if isinstance(gains, DiaGains):
        return scale_dia_gains(f, gains)
    if isinstance(gains, ElqrGains):
        return scale_elqr_gains(f, gains)
    raise TypeError(f"cannot scale gains of type {type(gains).__name__}")
