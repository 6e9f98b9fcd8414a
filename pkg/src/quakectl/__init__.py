"""Fault-slip control toolkit.

Simulates a spring-slider fault model driven by fluid pressure, tracks a
slow aseismic slip reference with sliding-mode or e-LQR controllers,
synthesizes e-LQR gains from a robust Riccati equation and scales
quantities between laboratory and real faults.
"""

__version__ = "0.1.0"

from .controllers import ControllerSpec, CtaGains, DiaGains, ElqrGains, NominalPlant, preset_spec
from .model import FAULT_PRESETS, LAB_FAULT, REAL_FAULT, FaultParams, FrictionLaw, Perturbation
from .reference import ConstantReference, ReferenceSpec
from .sim import BACKEND, Scenario, SimTrace, run_scenario

__all__ = [
    "__version__",
    "BACKEND",
    "ConstantReference",
    "ControllerSpec",
    "CtaGains",
    "DiaGains",
    "ElqrGains",
    "FAULT_PRESETS",
    "FaultParams",
    "FrictionLaw",
    "LAB_FAULT",
    "NominalPlant",
    "Perturbation",
    "REAL_FAULT",
    "ReferenceSpec",
    "Scenario",
    "SimTrace",
    "preset_spec",
    "run_scenario",
]
