"""Fixed-step closed-loop scenario engine.

The plant is advanced with a fixed-step Dormand-Prince method. Two loop
modes are available:

``continuous``
    The control law is evaluated at every Runge-Kutta stage and its
    integral states are integrated together with the plant (how a
    fixed-step block-diagram simulation treats a continuous controller).
``zoh``
    The controller runs once per sample, pressure is held over the step
    and integral states advance with explicit Euler. Required when the
    loop is closed through the filtering differentiator.

The hot loop runs in a compiled extension when it is available. Setting
``QUAKECTL_PURE_PYTHON=1`` forces the pure-Python implementation.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _backend
from . import _layout as L
from .controllers import ControllerSpec, CtaGains, DiaGains, ElqrGains
from .estimation import DEFAULT_LAMBDA_D
from .integrate import BlowUpError, integrate_step
from .model import FaultParams, FrictionLaw, Perturbation
from .reference import ConstantReference, ReferenceSpec

__all__ = [
    "BACKEND",
    "BlowUpError",
    "LOOP_MODES",
    "Scenario",
    "SimTrace",
    "available_backends",
    "integrate_step",
    "run_scenario",
    "TRACKING_PERTURBATION",
    "earthquake_scenario",
    "tracking_scenario",
]


BACKEND = _backend.DEFAULT

LOOP_MODES = ("continuous", "zoh")
BLOWUP_LIMIT = 1e12


def available_backends() -> tuple[str, ...]:
    return tuple(_backend.BACKENDS)


@dataclass(frozen=True)
class Scenario:
    """One closed- or open-loop run.

    ``horizon`` and ``T_s`` default to the fault's ``t_op`` and ``T_s``;
    ``law`` defaults to the fault's own friction law.
    """

    params: FaultParams
    controller: ControllerSpec = field(default_factory=lambda: ControllerSpec("none"))
    law: FrictionLaw | None = None
    pert: Perturbation = field(default_factory=Perturbation)
    reference: ReferenceSpec | ConstantReference | None = None
    x0: tuple[float, float] = (0.0, 0.0)
    horizon: float | None = None
    T_s: float | None = None
    estimate_states: bool = False
    lambda_d: float = DEFAULT_LAMBDA_D
    loop: str = "continuous"
    name: str = "scenario"
    blowup: float = BLOWUP_LIMIT

    def __post_init__(self):
        if self.law is None:
            object.__setattr__(self, "law", self.params.friction_law)
        if self.horizon is None:
            object.__setattr__(self, "horizon", self.params.t_op)
        if self.T_s is None:
            object.__setattr__(self, "T_s", self.params.T_s)
        if not self.T_s > 0:
            raise ValueError("T_s must be positive")
        if not self.horizon >= self.T_s:
            raise ValueError("horizon must be at least one sample long")
        if self.loop not in LOOP_MODES:
            raise ValueError(f"loop must be one of {LOOP_MODES}, got {self.loop!r}")
        if self.estimate_states and self.loop != "zoh":
            raise ValueError("state estimation requires loop='zoh'")
        if not self.lambda_d > 0:
            raise ValueError("lambda_d must be positive")
        if not all(math.isfinite(v) for v in self.x0) or len(self.x0) != 2:
            raise ValueError("x0 must be two finite values")

    @property
    def n_steps(self) -> int:
        # tolerate horizons that are an integer number of samples up to rounding
        return int(math.floor(self.horizon / self.T_s + 1e-9))


@dataclass(frozen=True)
class SimTrace:
    """Per-sample record; columns are listed in ``COLUMNS``."""

    COLUMNS = L.COLUMNS

    data: np.ndarray
    T_s: float
    name: str = "scenario"
    blew_up: bool = False
    backend: str = BACKEND

    def __post_init__(self):
        if self.data.ndim != 2 or self.data.shape[1] != len(L.COLUMNS):
            raise ValueError("trace data must have one column per field")

    def __len__(self) -> int:
        return self.data.shape[0]

    def column(self, name: str) -> np.ndarray:
        return self.data[:, L.COLUMNS.index(name)]

    t = property(lambda self: self.data[:, L.COL_T])
    x1 = property(lambda self: self.data[:, L.COL_X1])
    x2 = property(lambda self: self.data[:, L.COL_X2])
    r = property(lambda self: self.data[:, L.COL_R])
    dr = property(lambda self: self.data[:, L.COL_DR])
    e1 = property(lambda self: self.data[:, L.COL_E1])
    e2 = property(lambda self: self.data[:, L.COL_E2])
    p = property(lambda self: self.data[:, L.COL_P])
    mu = property(lambda self: self.data[:, L.COL_MU])
    xhat1 = property(lambda self: self.data[:, L.COL_XHAT1])
    xhat2 = property(lambda self: self.data[:, L.COL_XHAT2])

    @property
    def blowup_time(self) -> float | None:
        """Start of the step that diverged, or None."""
        return float(self.t[-1]) if self.blew_up else None

    def to_csv(self, path=None, stride: int = 1) -> str:
        """Write every ``stride``-th row (the last row is always kept)."""
        if stride < 1:
            raise ValueError("stride must be >= 1")
        idx = np.arange(0, len(self), stride)
        if idx[-1] != len(self) - 1:
            idx = np.append(idx, len(self) - 1)
        buf = io.StringIO()
        np.savetxt(buf, self.data[idx], fmt="%.12g", delimiter=",",
                   header=",".join(L.COLUMNS), comments="")
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, path, T_s: float | None = None, name: str = "scenario") -> SimTrace:
        with open(path) as fh:
            header = fh.readline().strip().split(",")
        if tuple(header) != L.COLUMNS:
            raise ValueError(f"unexpected trace header {header}")
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        if T_s is None:
            T_s = float(data[1, 0] - data[0, 0]) if len(data) > 1 else 0.0
        return cls(data, T_s, name)


def _pack(s: Scenario):
    p, law = s.params, s.law
    plant = (p.N_hat, p.k_hat, p.eta_hat, p.sigma_n, law.mu_res, law.delta_mu, law.d_c)
    pert = (s.pert.a_sin, s.pert.omega, s.pert.b_x1, s.pert.b_x2, s.pert.c_const)
    ref = s.reference
    if isinstance(ref, ReferenceSpec):
        ref_kind, ref_vals = L.REF_QUINTIC, (ref.d_max, ref.t_op, 0.0)
    elif isinstance(ref, ConstantReference):
        ref_kind, ref_vals = L.REF_CONSTANT, (0.0, 0.0, ref.r0)
    else:
        ref_kind, ref_vals = L.REF_NONE, (0.0, 0.0, 0.0)
    c = s.controller
    g = c.gains
    if isinstance(g, CtaGains):
        gains = (g.k1, g.k2, g.k3, g.k4, g.lam)
    elif isinstance(g, DiaGains):
        gains = (g.ki1, g.ki2, g.ki3, g.ki4, g.lam)
    elif isinstance(g, ElqrGains):
        gains = g.as_tuple() + (1.0,)
    else:
        gains = (0.0, 0.0, 0.0, 0.0, 1.0)
    nominal = c.nominal.gain if c.nominal is not None else 1.0
    ctrl = gains + (nominal, c.pressure, c.pressure_limit or 0.0, s.lambda_d)
    return (np.array(plant, dtype=float), np.array(pert, dtype=float), ref_kind,
            np.array(ref_vals, dtype=float), L.CTRL_CODES[c.kind], np.array(ctrl, dtype=float))


def run_scenario(s: Scenario, backend: str | None = None) -> SimTrace:
    """Simulate a scenario and return its trace.

    On blow-up the trace is truncated after the last finite sample and
    ``blew_up`` is set.
    """
    name = backend or BACKEND
    impl = _backend.get(name)
    plant, pert, ref_kind, ref, ctrl_kind, ctrl = _pack(s)
    out, n_rows, status = impl.run(
        plant, pert, ref_kind, ref, ctrl_kind, ctrl,
        s.loop == "zoh", s.estimate_states, np.array(s.x0, dtype=float),
        float(s.T_s), s.n_steps, float(s.blowup),
    )
    data = out[:n_rows] if n_rows < out.shape[0] else out
    return SimTrace(data, float(s.T_s), s.name, status == L.STATUS_BLOWUP, name)


# Sinusoidal plus slip-proportional disturbance of the real-fault tracking runs.
TRACKING_PERTURBATION = Perturbation(a_sin=3.2e-4, omega=0.69, b_x1=3.2e-6)

# Tiny kick that moves the open-loop fault off its unstable equilibrium.
EARTHQUAKE_KICK = Perturbation(c_const=3.2e-15)


def earthquake_scenario(params: FaultParams, pressure: float = 0.0,
                        horizon: float = 200.0, name: str | None = None) -> Scenario:
    """Open-loop run from rest: natural (``pressure = 0``) or induced event."""
    kind = "constant" if pressure else "none"
    return Scenario(
        params, ControllerSpec(kind, pressure=pressure), pert=EARTHQUAKE_KICK,
        horizon=horizon, name=name or ("natural" if kind == "none" else "induced"),
    )


def tracking_scenario(params: FaultParams, controller: ControllerSpec,
                      pert: Perturbation = TRACKING_PERTURBATION, **kwargs) -> Scenario:
    """Track the quintic slow-slip reference from rest over ``t_op``."""
    kwargs.setdefault("reference", ReferenceSpec(params.d_max, params.t_op))
    return Scenario(params, controller, pert=pert, **kwargs)
