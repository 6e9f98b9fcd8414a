"""Pressure control laws.

Two continuous sliding-mode algorithms (2-CTA and 2-DIA) produce a virtual
acceleration ``nu`` that is mapped to pressure through the nominal plant
gain; the e-LQR is a linear state feedback on slip, slip-rate and a double
integral of the slip error.

Integral states advance with explicit Euler in the ``*_step`` functions.
``sign(0)`` is taken as 0 everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

__all__ = [
    "NominalPlant",
    "CtaGains",
    "DiaGains",
    "ElqrGains",
    "ControllerState",
    "ErrorState",
    "ControllerSpec",
    "CONTROLLER_KINDS",
    "GAIN_PRESETS",
    "LAB_NOMINAL",
    "signed_power",
    "cta_output",
    "cta_rate",
    "cta_step",
    "dia_output",
    "dia_rate",
    "dia_step",
    "smc_pressure",
    "elqr_pressure",
    "elqr_integrator_step",
    "preset_spec",
]


def signed_power(x: float, gamma: float) -> float:
    """``|x|**gamma * sign(x)`` with ``sign(0) = 0``."""
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    if x == 0.0:
        return 0.0
    return math.copysign(abs(x) ** gamma, x)


def _sign(x: float) -> float:
    if x > 0.0:
        return 1.0
    if x < 0.0:
        return -1.0
    return 0.0


@dataclass(frozen=True)
class NominalPlant:
    """Nominal friction ``mu0`` and area-to-mass ratio ``N_hat0`` [m^2/kg]."""

    mu0: float
    N_hat0: float

    def __post_init__(self):
        if not (self.mu0 > 0 and self.N_hat0 > 0):
            raise ValueError("nominal mu0 and N_hat0 must be positive")

    @property
    def gain(self) -> float:
        return self.mu0 * self.N_hat0


# mu0 = mu_res and N_hat0 = A/m of the laboratory fault.
LAB_NOMINAL = NominalPlant(mu0=0.4, N_hat0=0.01 / (1385.0 * 0.1**3))


@dataclass(frozen=True)
class ErrorState:
    e1: float
    e2: float


@dataclass(frozen=True)
class ControllerState:
    xi1: float = 0.0
    xi2: float = 0.0


@dataclass(frozen=True)
class CtaGains:
    k1: float
    k2: float
    k3: float
    k4: float
    lam: float = 1.0

    def __post_init__(self):
        if min(self.k1, self.k2, self.k3, self.k4, self.lam) <= 0:
            raise ValueError("2-CTA gains and lambda must be positive")

    def absorb_lambda(self) -> CtaGains:
        """Equivalent gains with ``lam = 1``."""
        lam = self.lam
        return CtaGains(self.k1 * lam ** (2 / 3), self.k2 * lam**0.5,
                        self.k3 * lam, self.k4 * lam, 1.0)


@dataclass(frozen=True)
class DiaGains:
    ki1: float
    ki2: float
    ki3: float
    ki4: float = 0.0
    lam: float = 1.0

    def __post_init__(self):
        if min(self.ki1, self.ki2, self.ki3, self.lam) <= 0 or self.ki4 < 0:
            raise ValueError("2-DIA needs ki1, ki2, ki3, lambda > 0 and ki4 >= 0")

    def absorb_lambda(self) -> DiaGains:
        """Equivalent gains with ``lam = 1``."""
        lam = self.lam
        return DiaGains(self.ki1 * lam ** (1 / 3), self.ki2 * lam**0.5,
                        self.ki3 * lam, self.ki4 * lam**-0.5, 1.0)


@dataclass(frozen=True)
class ElqrGains:
    """State-feedback row on ``(x1, x2, xi1, xi2)`` [Pa per state unit]."""

    k1: float
    k2: float
    k3: float
    k4: float

    def __post_init__(self):
        if not all(math.isfinite(k) for k in self.as_tuple()):
            raise ValueError("e-LQR gains must be finite")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.k1, self.k2, self.k3, self.k4)


def cta_output(g: CtaGains, e1: float, e2: float, xi1: float) -> float:
    return (-g.lam ** (2 / 3) * g.k1 * signed_power(e1, 1 / 3)
            - g.lam**0.5 * g.k2 * signed_power(e2, 0.5) + xi1)


def cta_rate(g: CtaGains, e1: float, e2: float) -> float:
    return -g.lam * g.k3 * _sign(e1) - g.lam * g.k4 * _sign(e2)


def cta_step(gains: CtaGains, err: ErrorState, ctrl: ControllerState,
             dt: float) -> tuple[float, ControllerState]:
    """Second-order continuous twisting algorithm: output then Euler update."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    nu = cta_output(gains, err.e1, err.e2, ctrl.xi1)
    xi1 = ctrl.xi1 + dt * cta_rate(gains, err.e1, err.e2)
    return nu, replace(ctrl, xi1=xi1)


def dia_output(g: DiaGains, e1: float, e2: float, xi1: float) -> float:
    inner = signed_power(e2, 1.5) + g.lam**0.5 * g.ki1**1.5 * e1
    return -g.lam**0.5 * g.ki2 * signed_power(inner, 1 / 3) + xi1


def dia_rate(g: DiaGains, e1: float, e2: float) -> float:
    return -g.lam * g.ki3 * _sign(e1 + g.lam**-0.5 * g.ki4 * signed_power(e2, 1.5))


def dia_step(gains: DiaGains, err: ErrorState, ctrl: ControllerState,
             dt: float) -> tuple[float, ControllerState]:
    """Second-order discontinuous integral algorithm: output then Euler update."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    nu = dia_output(gains, err.e1, err.e2, ctrl.xi1)
    xi1 = ctrl.xi1 + dt * dia_rate(gains, err.e1, err.e2)
    return nu, replace(ctrl, xi1=xi1)


def smc_pressure(nominal: NominalPlant, nu: float) -> float:
    """Map virtual control to pressure: ``p = nu / (mu0 * N_hat0)``."""
    return nu / nominal.gain


def elqr_pressure(gains: ElqrGains, x1: float, x2: float, ctrl: ControllerState) -> float:
    return -(gains.k1 * x1 + gains.k2 * x2 + gains.k3 * ctrl.xi1 + gains.k4 * ctrl.xi2)


def elqr_integrator_step(ctrl: ControllerState, x1: float, r: float, dt: float) -> ControllerState:
    """Euler step of ``xi1' = x1 - r``, ``xi2' = xi1``."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    return ControllerState(xi1=ctrl.xi1 + dt * (x1 - r), xi2=ctrl.xi2 + dt * ctrl.xi1)


CONTROLLER_KINDS = ("none", "constant", "cta", "dia", "elqr")


@dataclass(frozen=True)
class ControllerSpec:
    """Which pressure law to run, with its gains.

    ``kind`` is one of ``none`` (p = 0), ``constant`` (p = ``pressure``),
    ``cta``, ``dia`` or ``elqr``. ``pressure_limit`` optionally clips |p|.
    """

    kind: str
    gains: CtaGains | DiaGains | ElqrGains | None = None
    nominal: NominalPlant | None = None
    pressure: float = 0.0
    pressure_limit: float | None = None

    def __post_init__(self):
        if self.kind not in CONTROLLER_KINDS:
            raise ValueError(f"unknown controller kind {self.kind!r}")
        expected = {"cta": CtaGains, "dia": DiaGains, "elqr": ElqrGains}.get(self.kind)
        if expected is not None and not isinstance(self.gains, expected):
            raise ValueError(f"{self.kind} controller needs {expected.__name__}")
        if self.kind in ("cta", "dia") and self.nominal is None:
            raise ValueError("sliding-mode controllers need a nominal plant")
        if self.pressure_limit is not None and not self.pressure_limit > 0:
            raise ValueError("pressure_limit must be positive")


GAIN_PRESETS = {
    "sim-2cta": CtaGains(781.37, 3.22e3, 4.51e-4, 2.15e-4, 500.0),
    "sim-2dia": DiaGains(5.21e-2, 3.23e3, 3.91e-4, 0.0, 500.0),
    "sim-elqr": ElqrGains(1.88e9, 5.79e8, 1.02e6, 18.52),
    "lab-2cta": CtaGains(7.5, 5.0, 1.66e-4, 7.92e-5, 500.0),
    "lab-2dia": DiaGains(2.0, 5.0, 1.44e-4, 0.0, 500.0),
    "lab-elqr": ElqrGains(4.17e8, 6.94e5, 4.17e7, 1.39e5),
}


def preset_spec(name: str, pressure_limit: float | None = None) -> ControllerSpec:
    """ControllerSpec for a named gain preset (sliding modes use the lab nominal plant)."""
    try:
        gains = GAIN_PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown gain preset {name!r}; choose from {sorted(GAIN_PRESETS)}") from None
    kind = {CtaGains: "cta", DiaGains: "dia", ElqrGains: "elqr"}[type(gains)]
    nominal = LAB_NOMINAL if kind != "elqr" else None
    return ControllerSpec(kind, gains, nominal, pressure_limit=pressure_limit)
