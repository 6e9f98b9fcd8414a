"""Spring-slider reduced fault model.

A single block of mobilized rock mass slides on a frictional interface
(the fault) and is loaded through a Kelvin-Voigt element. Fluid pressure
``p`` lowers the effective normal stress and is the control input.

All quantities are SI. The shifted coordinates place the origin on the
verge of slip, where friction takes its peak value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

__all__ = [
    "FaultParams",
    "FrictionLaw",
    "Perturbation",
    "StabilityReport",
    "REAL_FAULT",
    "LAB_FAULT",
    "FAULT_PRESETS",
    "friction",
    "friction_slope",
    "shifted_rhs",
    "instability_check",
    "seismic_magnitude",
]


@dataclass(frozen=True)
class FrictionLaw:
    """Slip-weakening friction ``mu(x1) = mu_res - delta_mu * exp(-x1 / d_c)``.

    ``delta_mu`` is negative, so friction decays from ``mu_max`` at zero
    slip to ``mu_res`` over the characteristic distance ``d_c``.
    """

    mu_res: float
    delta_mu: float
    d_c: float
    kind: str = "slip-weakening"

    def __post_init__(self):
        if self.kind != "slip-weakening":
            raise ValueError(f"unsupported friction law {self.kind!r}")
        if not self.mu_res > 0:
            raise ValueError("mu_res must be positive")
        if self.delta_mu > 0:
            raise ValueError("delta_mu must be <= 0 (friction drop)")
        if not self.d_c > 0:
            raise ValueError("d_c must be positive")

    @property
    def mu_max(self) -> float:
        return self.mu_res - self.delta_mu


@dataclass(frozen=True)
class Perturbation:
    """Acceleration disturbance ``a_sin*sin(omega*t) + b_x1*x1 + b_x2*x2 + c_const``."""

    a_sin: float = 0.0
    omega: float = 0.0
    b_x1: float = 0.0
    b_x2: float = 0.0
    c_const: float = 0.0

    def __post_init__(self):
        for name in ("a_sin", "omega", "b_x1", "b_x2", "c_const"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"perturbation field {name} must be finite")

    def __call__(self, x1: float, x2: float, t: float) -> float:
        return (self.a_sin * math.sin(self.omega * t) + self.b_x1 * x1
                + self.b_x2 * x2 + self.c_const)


@dataclass(frozen=True)
class FaultParams:
    """Mechanical and frictional description of one fault.

    Mass, stiffness and area follow from the activated length
    (``m = rho*L^3``, ``k = G*L``, ``A = L^2``) unless the direct
    overrides ``m_direct``, ``k_direct``, ``A_direct`` are given.

    Parameters
    ----------
    rho, G, eta, L_ac, sigma_n : float
        Density [kg/m^3], shear modulus [Pa], damping [kg/s], activated
        fault length [m] and effective normal stress [Pa].
    mu_res, delta_mu, d_c : float
        Slip-weakening friction parameters.
    d_max, t_op, T_s : float
        Target displacement [m], operation time [s] and sampling time [s].
    v_inf : float
        Far-field loading velocity [m/s]. Unused in the shifted system.
    """

    rho: float
    G: float
    eta: float
    L_ac: float
    sigma_n: float
    mu_res: float
    delta_mu: float
    d_c: float
    d_max: float
    t_op: float
    T_s: float
    v_inf: float = 0.0
    m_direct: float | None = None
    k_direct: float | None = None
    A_direct: float | None = None

    def __post_init__(self):
        positive = ("rho", "G", "L_ac", "sigma_n", "d_c", "d_max", "t_op", "T_s", "mu_res")
        for name in positive:
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
        if not (math.isfinite(self.eta) and self.eta >= 0):
            raise ValueError("eta must be non-negative")
        if not self.delta_mu < 0:
            raise ValueError("delta_mu must be negative (friction drop)")
        if self.v_inf < 0:
            raise ValueError("v_inf must be non-negative")
        for name in ("m_direct", "k_direct", "A_direct"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ValueError(f"{name} must be positive when given")

    @classmethod
    def from_damping_ratio(cls, zeta: float, **kwargs) -> FaultParams:
        """Build parameters with ``eta = 2*zeta*m*omega_n``."""
        probe = cls(eta=0.0, **kwargs)
        return replace(probe, eta=2.0 * zeta * probe.m * probe.omega_n)

    @property
    def m(self) -> float:
        return self.m_direct if self.m_direct is not None else self.rho * self.L_ac**3

    @property
    def k(self) -> float:
        return self.k_direct if self.k_direct is not None else self.G * self.L_ac

    @property
    def A(self) -> float:
        return self.A_direct if self.A_direct is not None else self.L_ac**2

    @property
    def N_hat(self) -> float:
        return self.A / self.m

    @property
    def k_hat(self) -> float:
        return self.k / self.m

    @property
    def eta_hat(self) -> float:
        return self.eta / self.m

    @property
    def omega_n(self) -> float:
        return math.sqrt(self.k / self.m)

    @property
    def friction_law(self) -> FrictionLaw:
        return FrictionLaw(self.mu_res, self.delta_mu, self.d_c)

    @property
    def mu_max(self) -> float:
        return self.mu_res - self.delta_mu


REAL_FAULT = FaultParams(
    rho=2500.0, G=30e9, eta=5e14, L_ac=5e3, sigma_n=50e6,
    mu_res=0.2353, delta_mu=-0.1, d_c=0.27635,
    d_max=0.785, t_op=184.17 * 3600.0, T_s=0.184,
)

# Double-interface apparatus: k = 45.1 N/mm, A = 100 cm^2 (one interface).
LAB_FAULT = FaultParams(
    rho=1385.0, G=225.5e3, eta=408.0, L_ac=0.1, sigma_n=0.1e6,
    mu_res=0.4, delta_mu=-0.17, d_c=2.5e-3,
    d_max=7.1e-3, t_op=3600.0, T_s=1e-3,
    k_direct=45.1e3, A_direct=0.01,
)

FAULT_PRESETS = {"real": REAL_FAULT, "lab": LAB_FAULT}


def friction(law: FrictionLaw, x1):
    """Friction coefficient at slip ``x1``.

    Negative slip (overshoot) uses the same exponential, capped at ``mu_max``.
    Accepts scalars or arrays.
    """
    value = law.mu_res - law.delta_mu * np.exp(-np.asarray(x1, dtype=float) / law.d_c)
    value = np.minimum(value, law.mu_max)
    return float(value) if np.ndim(value) == 0 else value


def friction_slope(law: FrictionLaw, x1: float) -> float:
    """d(mu)/d(x1); zero where the cap is active."""
    if x1 < 0:
        return 0.0
    return law.delta_mu / law.d_c * math.exp(-x1 / law.d_c)


def shifted_rhs(params: FaultParams, law: FrictionLaw, pert: Perturbation,
                state, p: float, t: float) -> tuple[float, float]:
    """Right-hand side of the shifted spring-slider system.

    ``dx2 = -(mu - mu*) N sigma_n + mu N p - k x1 - eta x2 + phi``, all
    per unit mass, with ``mu* = mu(0)``.
    """
    x1, x2 = float(state[0]), float(state[1])
    if not (math.isfinite(x1) and math.isfinite(x2)):
        raise ValueError(f"non-finite state ({x1}, {x2})")
    if not math.isfinite(p):
        raise ValueError(f"non-finite pressure {p}")
    mu = friction(law, x1)
    mu_star = law.mu_max
    n_hat = params.N_hat
    dx2 = (-(mu - mu_star) * n_hat * params.sigma_n + mu * n_hat * p
           - params.k_hat * x1 - params.eta_hat * x2 + pert(x1, x2, t))
    return x2, dx2


@dataclass(frozen=True)
class StabilityReport:
    """Open-loop stability of the shifted origin.

    ``stiffness_threshold`` is ``-A*sigma_n*dmu/dx1`` at the origin; the
    origin is a saddle when ``k`` is below it. ``damping_threshold`` is
    ``-m*dmu/dx2`` (zero for slip-only laws).
    """

    k: float
    stiffness_threshold: float
    eta: float
    damping_threshold: float
    stiffness_unstable: bool
    damping_unstable: bool
    jacobian: np.ndarray = field(repr=False, compare=False)

    @property
    def unstable(self) -> bool:
        return self.stiffness_unstable or self.damping_unstable

    @property
    def verdict(self) -> str:
        return "unstable" if self.unstable else "stable"


def instability_check(params: FaultParams, law: FrictionLaw | None = None) -> StabilityReport:
    law = law or params.friction_law
    dmu_dx1 = law.delta_mu / law.d_c
    dmu_dx2 = 0.0
    # "+ 0.0" turns a -0.0 threshold (flat law) into 0.0 for reporting
    k_thr = -params.A * params.sigma_n * dmu_dx1 + 0.0
    eta_thr = -params.m * dmu_dx2 + 0.0
    jac = np.array([
        [0.0, 1.0],
        [-params.k_hat - params.N_hat * params.sigma_n * dmu_dx1, -params.eta_hat - dmu_dx2],
    ])
    return StabilityReport(
        k=params.k, stiffness_threshold=k_thr, eta=params.eta, damping_threshold=eta_thr,
        stiffness_unstable=params.k < k_thr, damping_unstable=params.eta < eta_thr,
        jacobian=jac,
    )


def seismic_magnitude(L_ac: float, delta_mu: float, sigma_n: float) -> tuple[float, float]:
    """Seismic moment ``M0 = L^3 |delta_mu| sigma_n`` [N m] and moment magnitude."""
    m0 = L_ac**3 * abs(delta_mu) * sigma_n
    if not m0 > 0:
        raise ValueError("seismic moment must be positive")
    return m0, 2.0 / 3.0 * math.log10(m0) - 6.07
