import math

import numpy as np
import pytest
import scipy.linalg

from quakectl import _backend
from quakectl.controllers import (
    GAIN_PRESETS,
    LAB_NOMINAL,
    ControllerSpec,
    ControllerState,
    ErrorState,
    cta_step,
    preset_spec,
    smc_pressure,
)
from quakectl.model import LAB_FAULT, REAL_FAULT, Perturbation, shifted_rhs
from quakectl.reference import ConstantReference, reference_eval
from quakectl.sim import (
    TRACKING_PERTURBATION,
    BlowUpError,
    Scenario,
    SimTrace,
    earthquake_scenario,
    integrate_step,
    run_scenario,
    tracking_scenario,
)

HAVE_KERNEL = "cython" in _backend.BACKENDS


def test_zero_rhs_leaves_state_unchanged():
    assert integrate_step(lambda t, y, p: (0.0, 0.0), (1.5, -2.0), 0.0, 0.0, 0.1) == (1.5, -2.0)


def test_fifth_order_convergence():
    def err(h):
        (y,) = integrate_step(lambda t, y, p: (-y[0],), (1.0,), 0.0, 0.0, h)
        return abs(y - math.exp(-h))

    # local error of a fifth-order method shrinks like h^6
    assert err(0.2) / err(0.1) == pytest.approx(64, rel=0.1)


def test_linear_plant_matches_matrix_exponential():
    # nominal linear real-fault dynamics with a held pressure
    h, p = REAL_FAULT.T_s / 10, 1e6
    A = np.array([[0.0, 1.0], [-REAL_FAULT.k_hat, -REAL_FAULT.eta_hat]])
    b = np.array([0.0, REAL_FAULT.mu_res * REAL_FAULT.N_hat])
    M = np.zeros((3, 3))
    M[:2, :2], M[:2, 2] = A, b * p
    x0 = np.array([1e-3, 2e-4])
    exact = (scipy.linalg.expm(M * h) @ np.r_[x0, 1.0])[:2]
    got = integrate_step(lambda t, y, u: A @ np.array(y) + b * u, x0, p, 0.0, h)
    np.testing.assert_allclose(got, exact, rtol=1e-10)


def test_non_finite_stage_raises():
    with pytest.raises(BlowUpError) as info:
        integrate_step(lambda t, y, p: (math.inf,), (0.0,), 0.0, 2.0, 0.1)
    assert info.value.t == 2.0


def _short(controller, **kw):
    kw.setdefault("horizon", 400 * REAL_FAULT.T_s)
    return tracking_scenario(REAL_FAULT, controller, **kw)


CASES = {
    "cta-continuous": dict(controller=preset_spec("sim-2cta")),
    "dia-zoh": dict(controller=preset_spec("sim-2dia"), loop="zoh"),
    "elqr-continuous": dict(controller=preset_spec("sim-elqr")),
    "cta-limited": dict(controller=preset_spec("sim-2cta", pressure_limit=1e6)),
    "dia-estimated": dict(controller=preset_spec("sim-2dia"), loop="zoh", estimate_states=True),
    "constant": dict(controller=ControllerSpec("constant", pressure=5e6)),
}


@pytest.mark.skipif(not HAVE_KERNEL, reason="compiled kernel not built")
@pytest.mark.parametrize("case", sorted(CASES))
def test_kernel_matches_python_fallback(case):
    s = _short(**CASES[case])
    a = run_scenario(s, backend="python")
    b = run_scenario(s, backend="cython")
    assert a.backend == "python" and b.backend == "cython"
    np.testing.assert_array_equal(a.data, b.data)


def _manual_zoh(s, pressure_of):
    """Reference loop built from the public model, controller and integrator ops."""
    params, law = s.params, s.law
    y, ctrl = (0.0, 0.0), ControllerState()
    rows = []
    for i in range(s.n_steps + 1):
        t = i * s.T_s
        r, dr, _, _ = reference_eval(s.reference, t)
        p, ctrl_next = pressure_of(ErrorState(y[0] - r, y[1] - dr), ctrl, s.T_s)
        rows.append((t, y[0], y[1], p))
        y = integrate_step(lambda tt, yy, pp: shifted_rhs(params, law, s.pert, yy, pp, tt),
                           y, p, t, s.T_s)
        ctrl = ctrl_next
    return np.array(rows)


def _max_rel_diff(trace, manual):
    got = trace.data[:, [0, 1, 2, 7]]
    scale = np.maximum(np.abs(manual).max(axis=0), 1e-300)
    return (np.abs(got - manual).max(axis=0) / scale).max()


def test_zoh_sliding_loop_matches_manual_loop():
    # chatter amplifies last-bit differences (~10x per 5 samples), so only
    # the first samples can be compared pointwise
    s = _short(preset_spec("sim-2cta"), loop="zoh", horizon=30 * REAL_FAULT.T_s)
    gains = GAIN_PRESETS["sim-2cta"]

    def cta_pressure(err, ctrl, dt):
        nu, ctrl = cta_step(gains, err, ctrl, dt)
        return smc_pressure(LAB_NOMINAL, nu), ctrl

    assert _max_rel_diff(run_scenario(s), _manual_zoh(s, cta_pressure)) < 1e-10


def test_zoh_open_loop_matches_manual_loop():
    s = Scenario(REAL_FAULT, ControllerSpec("constant", pressure=5e6), pert=TRACKING_PERTURBATION,
                 horizon=200.0, loop="zoh")
    manual = _manual_zoh(s, lambda err, ctrl, dt: (5e6, ctrl))
    assert _max_rel_diff(run_scenario(s), manual) < 1e-10


def test_runs_are_deterministic():
    s = _short(preset_spec("sim-2dia"))
    np.testing.assert_array_equal(run_scenario(s).data, run_scenario(s).data)


def test_trace_invariants():
    s = _short(preset_spec("sim-2cta"))
    trace = run_scenario(s)
    assert len(trace) == s.n_steps + 1 == 401
    assert np.all(np.isfinite(trace.data))
    np.testing.assert_allclose(np.diff(trace.t), s.T_s, rtol=1e-9)
    np.testing.assert_array_equal(trace.e1, trace.x1 - trace.r)
    np.testing.assert_array_equal(trace.xhat1, trace.x1)
    assert not trace.blew_up and trace.blowup_time is None


def test_pressure_limit_is_respected():
    trace = run_scenario(_short(preset_spec("sim-2cta", pressure_limit=1e5)))
    assert np.abs(trace.p).max() <= 1e5


def test_divergent_loop_is_reported_not_raised():
    # the e-LQR with held pressure is unstable at the real-fault sampling time
    s = _short(preset_spec("sim-elqr"), loop="zoh", horizon=1000 * REAL_FAULT.T_s)
    trace = run_scenario(s)
    assert trace.blew_up
    assert len(trace) < s.n_steps + 1
    assert np.all(np.isfinite(trace.data))
    assert trace.blowup_time == trace.t[-1]


def test_earthquake_contrast(earthquake):
    natural, induced = earthquake(0.0), earthquake(5e6)
    peak_n, peak_i = np.abs(natural.x2).max(), np.abs(induced.x2).max()
    assert peak_n >= 0.07
    assert peak_i > peak_n
    assert natural.x1[-1] > 0.1
    assert np.all(natural.p == 0.0) and np.all(induced.p == 5e6)


@pytest.mark.slow
def test_controlled_slip_rate_is_far_below_natural_event(earthquake, tracking):
    natural_peak = np.abs(earthquake(0.0).x2).max()
    assert tracking("sim-elqr").peak_x2 <= 1e-2 * natural_peak
    for name in ("sim-2cta", "sim-2dia"):
        assert tracking(name).peak_x2 <= natural_peak / 10


@pytest.mark.slow
def test_real_fault_cta_tracks_within_centimetre(tracking):
    run = tracking("sim-2cta")
    assert not run.blew_up
    assert run.metrics.max_e1 < 1e-2


def test_lab_loop_through_differentiator_stays_finite():
    s = tracking_scenario(LAB_FAULT, preset_spec("lab-2cta"), pert=Perturbation(),
                          horizon=20.0, loop="zoh", estimate_states=True)
    trace = run_scenario(s)
    assert not trace.blew_up
    assert np.all(np.isfinite(trace.data))
    assert trace.xhat1[0] == 0.0


def test_constant_reference():
    s = Scenario(LAB_FAULT, preset_spec("lab-elqr"), reference=ConstantReference(1e-4),
                 horizon=2.0)
    trace = run_scenario(s)
    assert np.all(trace.r == 1e-4)
    assert abs(trace.e1[-1]) < abs(trace.e1[0])


@pytest.mark.parametrize("kwargs", [
    dict(T_s=0.0), dict(horizon=1e-4), dict(loop="fast"), dict(estimate_states=True),
    dict(lambda_d=0.0), dict(x0=(math.nan, 0.0)),
])
def test_scenario_validation(kwargs):
    with pytest.raises(ValueError):
        Scenario(LAB_FAULT, **kwargs)


def test_scenario_defaults():
    s = Scenario(REAL_FAULT)
    assert s.horizon == REAL_FAULT.t_op and s.T_s == REAL_FAULT.T_s
    assert s.law == REAL_FAULT.friction_law
    assert earthquake_scenario(REAL_FAULT).name == "natural"
    assert earthquake_scenario(REAL_FAULT, pressure=1.0).name == "induced"


def test_csv_round_trip(tmp_path):
    trace = run_scenario(_short(preset_spec("sim-2dia")))
    path = tmp_path / "t.csv"
    text = trace.to_csv(path)
    assert text.splitlines()[0] == ",".join(SimTrace.COLUMNS)
    back = SimTrace.from_csv(path)
    np.testing.assert_allclose(back.data, trace.data, rtol=1e-11, atol=1e-300)
    assert back.T_s == pytest.approx(trace.T_s)


def test_csv_stride_keeps_last_row(tmp_path):
    trace = run_scenario(_short(preset_spec("sim-2dia")))
    lines = trace.to_csv(stride=150).splitlines()
    assert len(lines) == 1 + 4  # rows 0, 150, 300, 400
    assert float(lines[-1].split(",")[0]) == pytest.approx(trace.t[-1])
    with pytest.raises(ValueError):
        trace.to_csv(stride=0)


def test_csv_rejects_foreign_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        SimTrace.from_csv(path)
