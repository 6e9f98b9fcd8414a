"""Steady-state tracking-error and control-effort statistics.

Integrals use the left rectangle rule over ``[t_ss, T)``, where ``T`` is
the last sample time, so on a uniform grid they reduce to sample means.
"MISE" here is the mean integrated *squared* error. Maxima include the
final sample.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

__all__ = [
    "METRIC_NAMES",
    "DEFAULT_TSS_FRACTION",
    "Metrics",
    "MetricsReport",
    "compute_metrics",
    "normalize",
]

METRIC_NAMES = ("mise_e1", "mise_e2", "max_e1", "max_e2", "rms_p")
DEFAULT_TSS_FRACTION = 0.15


@dataclass(frozen=True)
class Metrics:
    mise_e1: float
    mise_e2: float
    max_e1: float
    max_e2: float
    rms_p: float
    t_ss: float
    t_end: float

    def values(self) -> dict:
        return {k: getattr(self, k) for k in METRIC_NAMES}


def compute_metrics(trace, t_ss: float) -> Metrics:
    """Statistics of ``trace`` over the steady window starting at ``t_ss``.

    ``trace`` needs ``t``, ``e1``, ``e2`` and ``p`` arrays (a ``SimTrace``
    or anything with those attributes).

    Raises
    ------
    ValueError
        If the window holds fewer than two samples or sampling is not uniform.
    """
    t = np.asarray(trace.t, dtype=float)
    mask = t >= t_ss
    idx = np.flatnonzero(mask)
    if idx.size < 2:
        raise ValueError(f"steady window starting at t_ss = {t_ss:g} s is empty")
    tw = t[idx]
    steps = np.diff(tw)
    if not np.allclose(steps, steps[0], rtol=1e-6, atol=0.0) or steps[0] <= 0:
        raise ValueError("trace is not uniformly sampled")
    duration = tw[-1] - tw[0]
    dt = steps[0]

    def mean_sq(x):
        x = np.asarray(x, dtype=float)[idx[:-1]]
        return float(np.sum(x * x) * dt / duration)

    e1 = np.asarray(trace.e1, dtype=float)[idx]
    e2 = np.asarray(trace.e2, dtype=float)[idx]
    return Metrics(
        mise_e1=mean_sq(trace.e1),
        mise_e2=mean_sq(trace.e2),
        max_e1=float(np.max(np.abs(e1))),
        max_e2=float(np.max(np.abs(e2))),
        rms_p=math.sqrt(mean_sq(trace.p)),
        t_ss=float(tw[0]),
        t_end=float(tw[-1]),
    )


@dataclass(frozen=True)
class MetricsReport:
    """Raw and baseline-normalized metrics per controller.

    ``normalized[name][metric]`` is None where the baseline value is zero;
    those metric names are listed in ``zero_baseline``.
    """

    baseline: str
    raw: dict
    normalized: dict
    zero_baseline: tuple

    def to_dict(self) -> dict:
        return {
            "baseline": self.baseline,
            "zero_baseline": list(self.zero_baseline),
            "controllers": {
                name: {"raw": asdict(m), "normalized": self.normalized[name]}
                for name, m in self.raw.items()
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["controller", "metric", "raw", "normalized"])
        for name in sorted(self.raw):
            for metric in METRIC_NAMES:
                norm = self.normalized[name][metric]
                writer.writerow([name, metric, repr(getattr(self.raw[name], metric)),
                                 "" if norm is None else repr(norm)])
        return buf.getvalue()


def normalize(reports: dict, baseline: str) -> MetricsReport:
    """Divide every controller's metrics by those of ``baseline``."""
    if baseline not in reports:
        raise KeyError(f"baseline {baseline!r} not among {sorted(reports)}")
    base = reports[baseline].values()
    zero = tuple(k for k in METRIC_NAMES if base[k] == 0.0)
    normalized = {
        name: {k: (None if k in zero else v / base[k]) for k, v in m.values().items()}
        for name, m in reports.items()
    }
    return MetricsReport(baseline, dict(reports), normalized, zero)
