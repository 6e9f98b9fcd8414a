"""Command-line front end.

Exit codes: 0 success, 1 solver failure, 2 bad configuration or usage,
3 a simulation blew up (partial traces are still written).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, load_config
from .controllers import GAIN_PRESETS, CtaGains, DiaGains, ElqrGains
from .metrics import DEFAULT_TSS_FRACTION, compute_metrics, normalize
from .model import FAULT_PRESETS, instability_check
from .riccati import AugmentedPlant, CareError, build_G, synthesize
from .scaling import IDENTITY, LAB_TO_REAL, scale_gains
from .sim import SimTrace, run_scenario

EXIT_OK, EXIT_SOLVER, EXIT_CONFIG, EXIT_BLOWUP = 0, 1, 2, 3


def _fail(message: str, code: int = EXIT_CONFIG) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _num(x: float) -> str:
    return f"{x:.6g}"


def cmd_simulate(args) -> int:
    try:
        cfg = load_config(args.config, require_scenarios=True)
        if args.ts is not None and not args.ts > 0:
            raise ConfigError("--ts must be positive")
        scenarios = cfg.build_scenarios(args.ts)
    except ConfigError as exc:
        return _fail(str(exc))
    tss = cfg.t_ss_fraction if args.tss is None else args.tss
    if not 0.0 <= tss < 1.0:
        return _fail("--tss must lie in [0, 1)")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    summary, raw, blew_up = {}, {}, []
    for s in scenarios:
        trace = run_scenario(s)
        trace.to_csv(out / f"{s.name}.csv", stride=cfg.trace_stride)
        entry = {
            "samples": len(trace),
            "T_s": s.T_s,
            "blew_up": trace.blew_up,
            "blowup_time": trace.blowup_time,
            "peak_slip_rate": float(np.max(np.abs(trace.x2))),
            "final_slip": float(trace.x1[-1]),
            "metrics": None,
        }
        try:
            m = compute_metrics(trace, tss * float(trace.t[-1]))
        except ValueError:
            m = None
        if m is not None and not trace.blew_up:
            raw[s.name] = m
            entry["metrics"] = m.values() | {"t_ss": m.t_ss, "t_end": m.t_end}
        if trace.blew_up:
            blew_up.append(s.name)
        summary[s.name] = entry
        status = f"BLOW-UP at t = {trace.blowup_time:g} s" if trace.blew_up else "ok"
        line = f"{s.name:>12}: {len(trace)} samples, peak |x2| = {_num(entry['peak_slip_rate'])} m/s, {status}"
        if m is not None:
            line += f", max|e1| = {_num(m.max_e1)} m, max|e2| = {_num(m.max_e2)} m/s, rms p = {_num(m.rms_p)} Pa"
        print(line)

    doc = {"t_ss_fraction": tss, "scenarios": summary}
    if cfg.baseline is not None and cfg.baseline in raw:
        report = normalize(raw, cfg.baseline)
        doc["normalized"] = {"baseline": report.baseline,
                             "zero_baseline": list(report.zero_baseline),
                             "values": report.normalized}
        (out / "metrics.csv").write_text(report.to_csv())
        for name in sorted(report.normalized):
            vals = report.normalized[name]
            print(f"{name:>12} / {cfg.baseline}: " + ", ".join(
                f"{k} {'n/a' if v is None else _num(v)}" for k, v in vals.items()))
    (out / "metrics.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    if blew_up:
        return _fail(f"simulation blew up in: {', '.join(blew_up)}", EXIT_BLOWUP)
    return EXIT_OK


def cmd_check_stability(args) -> int:
    if args.config is not None:
        try:
            faults = {"config": load_config(args.config).params}
        except ConfigError as exc:
            return _fail(str(exc))
    else:
        names = args.fault or sorted(FAULT_PRESETS)
        faults = {n: FAULT_PRESETS[n] for n in names}
    for name, params in faults.items():
        rep = instability_check(params)
        print(f"[{name}]")
        print(f"  stiffness k = {_num(rep.k)} N/m, threshold = {_num(rep.stiffness_threshold)} N/m"
              f" -> {'unstable' if rep.stiffness_unstable else 'stable'}")
        print(f"  damping eta = {_num(rep.eta)} kg/s, threshold = {_num(rep.damping_threshold)} kg/s"
              f" -> {'unstable' if rep.damping_unstable else 'stable'}")
        print(f"  verdict: {rep.verdict}")
    return EXIT_OK


_GAIN_TYPES = {"cta": CtaGains, "dia": DiaGains, "elqr": ElqrGains}


def cmd_scale_gains(args) -> int:
    gain_type = _GAIN_TYPES[args.controller]
    if args.preset is not None:
        gains = GAIN_PRESETS[args.preset]
        if not isinstance(gains, gain_type):
            return _fail(f"preset {args.preset!r} is not a {args.controller} preset")
    elif args.gains is not None:
        try:
            values = [float(v) for v in args.gains.split(",")]
            if len(values) != 4:
                raise ValueError("need four comma-separated gains")
            if args.controller == "elqr":
                gains = ElqrGains(*values)
            else:
                gains = gain_type(*values, lam=args.lam)
        except ValueError as exc:
            return _fail(str(exc))
    else:
        return _fail("give --preset or --gains")
    factors = IDENTITY if args.identity else LAB_TO_REAL
    if args.direction == "real-to-lab":
        factors = factors.reciprocal()
    scaled = scale_gains(factors, gains)
    print(f"input : {gains}")
    print(f"scaled: {scaled}")
    return EXIT_OK


def cmd_synthesize(args) -> int:
    try:
        cfg = load_config(args.config)
        if cfg.synthesis is None:
            raise ConfigError("config has no [synthesis] section")
        params = cfg.params
        syn = cfg.synthesis
        G = build_G(params, None, syn.uncertainty_spec())
        weights = syn.weights_for(G)
    except (ConfigError, ValueError) as exc:
        return _fail(str(exc))
    plant = AugmentedPlant.from_fault(params)
    try:
        result = synthesize(plant, weights)
    except CareError as exc:
        return _fail(f"CARE solver failed: {exc}", EXIT_SOLVER)
    q_norm = float(np.linalg.norm(result.Q, 2))
    doc = {
        "gains": dict(zip(("k1", "k2", "k3", "k4"), result.gains.as_tuple())),
        "G": G.ravel().tolist(),
        "residual": result.residual,
        "relative_residual": result.residual / q_norm,
        "closed_loop_poles": [[p.real, p.imag] for p in result.closed_loop_poles],
    }
    g = result.gains
    print(f"k1 = {_num(g.k1)}, k2 = {_num(g.k2)}, k3 = {_num(g.k3)}, k4 = {_num(g.k4)}")
    print(f"CARE residual = {result.residual:.3e} ({doc['relative_residual']:.3e} of ||Q||)")
    print("closed-loop poles: " + ", ".join(f"{p:.4g}" for p in result.closed_loop_poles))
    if args.out is not None:
        Path(args.out).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_metrics(args) -> int:
    reports = {}
    for spec in args.trace:
        name, sep, path = spec.partition("=")
        if not sep:
            name, path = Path(spec).stem, spec
        try:
            trace = SimTrace.from_csv(path, name=name)
            t_end = float(trace.t[-1])
            reports[name] = compute_metrics(trace, args.tss * t_end)
        except (OSError, ValueError) as exc:
            return _fail(f"{path}: {exc}")
    baseline = args.baseline or next(iter(reports))
    if baseline not in reports:
        return _fail(f"baseline {baseline!r} not among traces {sorted(reports)}")
    report = normalize(reports, baseline)
    text = report.to_json()
    if args.out is not None:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quakectl",
        description="Spring-slider fault simulation, pressure control and gain tools.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run the scenarios of a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="quakectl-out", help="output directory")
    p.add_argument("--tss", type=float, default=None,
                   help="steady-window start as a fraction of the horizon")
    p.add_argument("--ts", type=float, default=None, help="override the sampling time [s]")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("check-stability", help="open-loop instability test")
    p.add_argument("--config", default=None)
    p.add_argument("--fault", action="append", choices=sorted(FAULT_PRESETS))
    p.set_defaults(func=cmd_check_stability)

    p = sub.add_parser("scale-gains", help="map controller gains between lab and real fault")
    p.add_argument("--controller", required=True, choices=sorted(_GAIN_TYPES))
    p.add_argument("--preset", choices=sorted(GAIN_PRESETS))
    p.add_argument("--gains", help="four comma-separated gains")
    p.add_argument("--lam", type=float, default=1.0, help="sliding-mode scaling gain")
    p.add_argument("--direction", choices=("lab-to-real", "real-to-lab"), default="lab-to-real")
    p.add_argument("--identity", action="store_true", help="use unit scaling factors")
    p.set_defaults(func=cmd_scale_gains)

    p = sub.add_parser("synthesize", help="robust e-LQR gains from the [synthesis] section")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None, help="write a JSON result here")
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("metrics", help="steady-state metrics of trace CSV files")
    p.add_argument("--trace", action="append", required=True, help="NAME=PATH or PATH")
    p.add_argument("--tss", type=float, default=DEFAULT_TSS_FRACTION)
    p.add_argument("--baseline", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_metrics)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
