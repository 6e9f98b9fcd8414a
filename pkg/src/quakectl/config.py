"""INI-style run configuration.

Every physical key carries its unit in the name (``sigma_n_pa``,
``t_op_s``); unknown sections or keys are rejected. Example::

    [fault]
    preset = real

    [run]
    t_ss_fraction = 0.15
    baseline = elqr

    [scenario elqr]
    controller = elqr
    gain_preset = sim-elqr
    reference = quintic
    pert_a_sin_m_s2 = 3.2e-4
    pert_omega_rad_s = 0.69
    pert_b_x1_1_s2 = 3.2e-6
"""

from __future__ import annotations

import configparser
import dataclasses
import io
from dataclasses import dataclass, field, replace
from pathlib import Path

from .controllers import (
    GAIN_PRESETS,
    LAB_NOMINAL,
    ControllerSpec,
    CtaGains,
    DiaGains,
    ElqrGains,
    NominalPlant,
)
from .estimation import DEFAULT_LAMBDA_D
from .metrics import DEFAULT_TSS_FRACTION
from .model import FAULT_PRESETS, FaultParams, Perturbation
from .reference import ConstantReference, ReferenceSpec
from .riccati import RobustWeights, Uncertainty
from .sim import LOOP_MODES, Scenario

__all__ = [
    "ConfigError",
    "FaultSection",
    "ScenarioSection",
    "SynthesisSection",
    "RunConfig",
    "load_config",
    "parse_config",
]


class ConfigError(ValueError):
    """Malformed or inconsistent configuration."""


# config key -> FaultParams field
FAULT_KEYS = {
    "rho_kg_m3": "rho",
    "g_pa": "G",
    "eta_kg_s": "eta",
    "l_ac_m": "L_ac",
    "sigma_n_pa": "sigma_n",
    "mu_res": "mu_res",
    "delta_mu": "delta_mu",
    "d_c_m": "d_c",
    "d_max_m": "d_max",
    "t_op_s": "t_op",
    "t_s_s": "T_s",
    "v_inf_m_s": "v_inf",
    "m_direct_kg": "m_direct",
    "k_direct_n_m": "k_direct",
    "a_direct_m2": "A_direct",
}
PERT_KEYS = {
    "pert_a_sin_m_s2": "a_sin",
    "pert_omega_rad_s": "omega",
    "pert_b_x1_1_s2": "b_x1",
    "pert_b_x2_1_s": "b_x2",
    "pert_c_const_m_s2": "c_const",
}
UNCERTAINTY_KEYS = {
    "dk_hat_max_1_s2": "dk_hat_max",
    "deta_hat_max_1_s": "deta_hat_max",
    "dn_hat_max_m2_kg": "dN_hat_max",
    "phi1e_1_s2": "phi1e",
    "phi2e_1_s": "phi2e",
}
REFERENCE_KINDS = ("quintic", "constant", "none")


def _float(section: str, key: str, text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: expected a number, got {text!r}") from None


def _floats(section: str, key: str, text: str) -> tuple[float, ...]:
    return tuple(_float(section, key, part) for part in text.split(","))


def _bool(section: str, key: str, text: str) -> bool:
    value = text.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"[{section}] {key}: expected a boolean, got {text!r}")


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(_fmt(v) for v in value)
    return str(value)


def _check_keys(section: str, items: dict, allowed) -> None:
    unknown = sorted(set(items) - set(allowed))
    if unknown:
        raise ConfigError(f"[{section}] unknown keys: {', '.join(unknown)}")


@dataclass(frozen=True)
class FaultSection:
    """Fault preset name plus explicit per-field overrides (SI units)."""

    preset: str | None = None
    overrides: tuple = ()

    def params(self) -> FaultParams:
        values = dict(self.overrides)
        try:
            if self.preset is not None:
                return replace(FAULT_PRESETS[self.preset], **values)
            return FaultParams(**values)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"[fault] {exc}") from None

    @classmethod
    def parse(cls, items: dict) -> FaultSection:
        _check_keys("fault", items, {"preset", *FAULT_KEYS})
        preset = items.get("preset")
        if preset is not None and preset not in FAULT_PRESETS:
            raise ConfigError(f"[fault] unknown preset {preset!r}; choose from {sorted(FAULT_PRESETS)}")
        overrides = tuple((FAULT_KEYS[k], _float("fault", k, v))
                          for k, v in items.items() if k in FAULT_KEYS)
        section = cls(preset, overrides)
        section.params()
        return section

    def items(self) -> dict:
        out = {} if self.preset is None else {"preset": self.preset}
        by_field = {v: k for k, v in FAULT_KEYS.items()}
        out.update({by_field[f]: _fmt(v) for f, v in self.overrides})
        return out


@dataclass(frozen=True)
class ScenarioSection:
    """Settings of one scenario; ``None`` means "use the default"."""

    name: str
    controller: str = "none"
    gain_preset: str | None = None
    gains: tuple | None = None
    lam: float | None = None
    pressure_pa: float = 0.0
    pressure_limit_pa: float | None = None
    nominal_mu0: float | None = None
    nominal_n_hat0_m2_kg: float | None = None
    reference: str = "none"
    r0_m: float = 0.0
    horizon_s: float | None = None
    t_s_s: float | None = None
    x0_m: float = 0.0
    v0_m_s: float = 0.0
    pert: tuple = ()
    estimate_states: bool = False
    lambda_d: float = DEFAULT_LAMBDA_D
    loop: str = "continuous"

    FLOAT_KEYS = ("lam", "pressure_pa", "pressure_limit_pa", "nominal_mu0",
                  "nominal_n_hat0_m2_kg", "r0_m", "horizon_s", "t_s_s", "x0_m",
                  "v0_m_s", "lambda_d")
    STR_KEYS = ("controller", "gain_preset", "reference", "loop")

    @classmethod
    def parse(cls, name: str, items: dict) -> ScenarioSection:
        sec = f"scenario {name}"
        allowed = {*cls.FLOAT_KEYS, *cls.STR_KEYS, "gains", "estimate_states", *PERT_KEYS}
        _check_keys(sec, items, allowed)
        kwargs = {"name": name}
        for key in cls.FLOAT_KEYS:
            if key in items:
                kwargs[key] = _float(sec, key, items[key])
        for key in cls.STR_KEYS:
            if key in items:
                kwargs[key] = items[key].strip()
        if "gains" in items:
            kwargs["gains"] = _floats(sec, "gains", items["gains"])
        if "estimate_states" in items:
            kwargs["estimate_states"] = _bool(sec, "estimate_states", items["estimate_states"])
        kwargs["pert"] = tuple((PERT_KEYS[k], _float(sec, k, v))
                               for k, v in items.items() if k in PERT_KEYS)
        section = cls(**kwargs)
        section.validate()
        return section

    def validate(self) -> None:
        sec = f"scenario {self.name}"
        if self.reference not in REFERENCE_KINDS:
            raise ConfigError(f"[{sec}] reference must be one of {REFERENCE_KINDS}")
        if self.loop not in LOOP_MODES:
            raise ConfigError(f"[{sec}] loop must be one of {LOOP_MODES}")
        if self.gain_preset is not None and self.gain_preset not in GAIN_PRESETS:
            raise ConfigError(f"[{sec}] unknown gain_preset {self.gain_preset!r}")
        if self.gains is not None and len(self.gains) != 4:
            raise ConfigError(f"[{sec}] gains needs four comma-separated values")
        try:
            self.controller_spec()
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"[{sec}] {exc}") from None

    def controller_spec(self) -> ControllerSpec:
        kind = self.controller
        limit = self.pressure_limit_pa
        if kind in ("none", "constant"):
            return ControllerSpec(kind, pressure=self.pressure_pa, pressure_limit=limit)
        gain_type = {"cta": CtaGains, "dia": DiaGains, "elqr": ElqrGains}.get(kind)
        if gain_type is None:
            raise ValueError(f"unknown controller {kind!r}")
        if self.gain_preset is not None:
            gains = GAIN_PRESETS[self.gain_preset]
            if not isinstance(gains, gain_type):
                raise ValueError(f"gain_preset {self.gain_preset!r} is not a {kind} preset")
            if self.gains is not None:
                gains = replace(gains, **dict(zip([f.name for f in dataclasses.fields(gains)], self.gains)))
        elif self.gains is not None:
            gains = gain_type(*self.gains)
        else:
            raise ValueError(f"{kind} controller needs gain_preset or gains")
        if self.lam is not None:
            if kind == "elqr":
                raise ValueError("lam does not apply to the e-LQR")
            gains = replace(gains, lam=self.lam)
        nominal = None
        if kind != "elqr":
            nominal = NominalPlant(
                self.nominal_mu0 if self.nominal_mu0 is not None else LAB_NOMINAL.mu0,
                self.nominal_n_hat0_m2_kg if self.nominal_n_hat0_m2_kg is not None
                else LAB_NOMINAL.N_hat0,
            )
        return ControllerSpec(kind, gains, nominal, pressure_limit=limit)

    def scenario(self, params: FaultParams, t_s: float | None = None) -> Scenario:
        if self.reference == "quintic":
            ref = ReferenceSpec(params.d_max, params.t_op)
        elif self.reference == "constant":
            ref = ConstantReference(self.r0_m)
        else:
            ref = None
        try:
            return Scenario(
                params, self.controller_spec(), pert=Perturbation(**dict(self.pert)),
                reference=ref, x0=(self.x0_m, self.v0_m_s), horizon=self.horizon_s,
                T_s=t_s if t_s is not None else self.t_s_s,
                estimate_states=self.estimate_states, lambda_d=self.lambda_d,
                loop=self.loop, name=self.name,
            )
        except ValueError as exc:
            raise ConfigError(f"[scenario {self.name}] {exc}") from None

    def items(self) -> dict:
        defaults = ScenarioSection(self.name)
        out = {}
        for f in dataclasses.fields(self):
            if f.name in ("name", "pert"):
                continue
            value = getattr(self, f.name)
            if value != getattr(defaults, f.name) and value is not None:
                out[f.name] = _fmt(value)
        by_field = {v: k for k, v in PERT_KEYS.items()}
        out.update({by_field[k]: _fmt(v) for k, v in self.pert})
        return out


@dataclass(frozen=True)
class SynthesisSection:
    q0_diag: tuple = (1.0, 1.0, 1.0, 1.0)
    r: float = 1.0
    uncertainty: tuple = ()

    @classmethod
    def parse(cls, items: dict) -> SynthesisSection:
        _check_keys("synthesis", items, {"q0_diag", "r", *UNCERTAINTY_KEYS})
        kwargs = {}
        if "q0_diag" in items:
            kwargs["q0_diag"] = _floats("synthesis", "q0_diag", items["q0_diag"])
        if "r" in items:
            kwargs["r"] = _float("synthesis", "r", items["r"])
        kwargs["uncertainty"] = tuple((UNCERTAINTY_KEYS[k], _float("synthesis", k, v))
                                      for k, v in items.items() if k in UNCERTAINTY_KEYS)
        section = cls(**kwargs)
        try:
            section.weights_for(None)
        except ValueError as exc:
            raise ConfigError(f"[synthesis] {exc}") from None
        return section

    def uncertainty_spec(self) -> Uncertainty:
        return Uncertainty(**dict(self.uncertainty))

    def weights_for(self, G) -> RobustWeights:
        import numpy as np

        if len(self.q0_diag) != 4:
            raise ValueError("q0_diag needs four values")
        G = np.zeros((1, 4)) if G is None else G
        self.uncertainty_spec()
        return RobustWeights(np.diag(self.q0_diag), np.array([[self.r]]), G)

    def items(self) -> dict:
        out = {"q0_diag": _fmt(self.q0_diag), "r": _fmt(self.r)}
        by_field = {v: k for k, v in UNCERTAINTY_KEYS.items()}
        out.update({by_field[k]: _fmt(v) for k, v in self.uncertainty})
        return out


@dataclass(frozen=True)
class RunConfig:
    fault: FaultSection = field(default_factory=FaultSection)
    scenarios: tuple = ()
    t_ss_fraction: float = DEFAULT_TSS_FRACTION
    baseline: str | None = None
    trace_stride: int = 1
    synthesis: SynthesisSection | None = None

    @property
    def params(self) -> FaultParams:
        return self.fault.params()

    def build_scenarios(self, t_s: float | None = None) -> list[Scenario]:
        params = self.params
        if t_s is not None:
            params = replace(params, T_s=t_s)
        return [s.scenario(params, t_s) for s in self.scenarios]

    def to_text(self) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        cp["fault"] = self.fault.items()
        run = {"t_ss_fraction": _fmt(self.t_ss_fraction), "trace_stride": str(self.trace_stride)}
        if self.baseline is not None:
            run["baseline"] = self.baseline
        cp["run"] = run
        for s in self.scenarios:
            cp[f"scenario {s.name}"] = s.items()
        if self.synthesis is not None:
            cp["synthesis"] = self.synthesis.items()
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()


def parse_config(text: str, *, require_scenarios: bool = False) -> RunConfig:
    """Parse and validate configuration text."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from None
    if cp.defaults():
        raise ConfigError("a [DEFAULT] section is not supported")
    fault = FaultSection()
    scenarios = []
    run = {}
    synthesis = None
    for sec in cp.sections():
        items = dict(cp[sec])
        if sec == "fault":
            fault = FaultSection.parse(items)
        elif sec == "run":
            _check_keys("run", items, {"t_ss_fraction", "baseline", "trace_stride"})
            run = items
        elif sec == "synthesis":
            synthesis = SynthesisSection.parse(items)
        elif sec.startswith("scenario "):
            name = sec[len("scenario "):].strip()
            if not name or any(c in name for c in "/\\ "):
                raise ConfigError(f"[{sec}] scenario names must be non-empty without spaces or slashes")
            scenarios.append(ScenarioSection.parse(name, items))
        else:
            raise ConfigError(f"unknown section [{sec}]")
    if fault.preset is None and not fault.overrides:
        raise ConfigError("[fault] section with a preset or explicit parameters is required")
    tss = _float("run", "t_ss_fraction", run.get("t_ss_fraction", repr(DEFAULT_TSS_FRACTION)))
    if not 0.0 <= tss < 1.0:
        raise ConfigError("[run] t_ss_fraction must lie in [0, 1)")
    try:
        stride = int(run.get("trace_stride", "1"))
    except ValueError:
        raise ConfigError("[run] trace_stride must be an integer") from None
    if stride < 1:
        raise ConfigError("[run] trace_stride must be >= 1")
    baseline = run.get("baseline")
    names = [s.name for s in scenarios]
    if baseline is not None and baseline not in names:
        raise ConfigError(f"[run] baseline {baseline!r} is not a scenario")
    if require_scenarios and not scenarios:
        raise ConfigError("config defines no [scenario ...] sections")
    cfg = RunConfig(fault, tuple(scenarios), tss, baseline, stride, synthesis)
    params = cfg.params
    for s in scenarios:
        s.scenario(params)
    return cfg


def load_config(path, **kwargs) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, **kwargs)
