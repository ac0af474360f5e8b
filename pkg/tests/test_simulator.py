import csv
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hexactrl.model import AirframeParams
from hexactrl.simulator import (
    CONVERGED,
    CSV_HEADER,
    DIVERGED,
    SATURATION_LIMITED,
    ConfigError,
    FaultEvent,
    Gains,
    Scenario,
    Setpoints,
    Trace,
    classify_trace,
    closed_loop_matrix,
    pd_control,
    run_scenario,
    state_derivative,
    step,
    write_csv,
)


def at_setpoint(sp=Setpoints()):
    return np.array([sp.h, sp.phi, sp.theta, sp.psi, 0, 0, 0, 0], dtype=float)


def hover_lifts(params):
    return np.full(6, params.weight_n / 6)


def test_pd_control_at_setpoint(params, weight):
    np.testing.assert_allclose(pd_control(at_setpoint(), Setpoints(), Gains(), params), [weight, 0, 0, 0])


def test_pd_control_gains(params, weight):
    x = at_setpoint()
    x[0] += 0.1
    x[4] = 0.5
    x[1] = 0.01
    x[6] = 0.2
    F = pd_control(x, Setpoints(), Gains(), params)
    assert F[0] == pytest.approx(weight + 10 * 0.1 + 6 * 0.5)
    assert F[1] == pytest.approx(-20 * 0.01)
    assert F[2] == pytest.approx(-3 * 0.2)


@given(st.floats(-10, 10), st.floats(-10, 10))
def test_dcs_law_ignores_yaw(psi, r):
    params = AirframeParams()
    x = at_setpoint()
    base = pd_control(x, Setpoints(), Gains(), params, dcs_active=True)
    x[3], x[7] = psi, r
    out = pd_control(x, Setpoints(), Gains(), params, dcs_active=True)
    assert out.shape == (3,)
    np.testing.assert_array_equal(out, base)


def test_equilibrium_step(params):
    x = at_setpoint()
    np.testing.assert_allclose(step(x, hover_lifts(params), np.ones(6), params, 1e-3), x, atol=1e-12)


def test_yaw_damping(params):
    x = np.zeros(8)
    x[7] = 10.0
    dx = state_derivative(x, hover_lifts(params), np.ones(6), params)
    assert dx[7] == pytest.approx(-0.2 * 100 / 0.0599, rel=1e-12)
    assert dx[7] == pytest.approx(-333.9, abs=0.05)
    x[7] = -10.0
    assert state_derivative(x, hover_lifts(params), np.ones(6), params)[7] == pytest.approx(333.9, abs=0.05)


def test_free_fall(params):
    dx = state_derivative(np.zeros(8), np.zeros(6), np.ones(6), params)
    np.testing.assert_allclose(dx, [0, 0, 0, 0, params.gravity_mps2, 0, 0, 0], atol=1e-12)


def test_step_rejects_bad_dt(params):
    with pytest.raises(ValueError):
        step(np.zeros(8), np.zeros(6), np.ones(6), params, 0.0)


def test_equilibrium_is_held(params):
    tr = run_scenario(Scenario(initial_state=tuple(at_setpoint()), duration=10.0))
    assert np.max(np.abs(tr.x - at_setpoint())) <= 1e-9
    assert tr.classification == CONVERGED
    assert not tr.saturated.any()


def test_runs_are_deterministic():
    sc = Scenario(fault_events=(FaultEvent(0.5, 3),), duration=2.0)
    a, b = run_scenario(sc), run_scenario(sc)
    for f in ("t", "x", "F", "lifts", "saturated", "eta", "final_state"):
        np.testing.assert_array_equal(getattr(a, f), getattr(b, f))


def test_fault_switches_to_degraded_law():
    tr = run_scenario(Scenario(fault_events=(FaultEvent(1.0, 2),), duration=2.0))
    assert tr.yaw_controlled[tr.t < 1.0 - 1e-9].all()
    assert not tr.yaw_controlled[tr.t >= 1.0 - 1e-9].any()
    assert np.isnan(tr.F[~tr.yaw_controlled, 3]).all()
    assert (tr.lifts[tr.t >= 1.0 - 1e-9, 1] == 0).all()
    assert (tr.lifts >= 0).all() and (tr.lifts <= AirframeParams().max_lift_n).all()


def test_detection_delay_keeps_full_law_briefly():
    tr = run_scenario(Scenario(fault_events=(FaultEvent(0.5, 2),), duration=1.0, detection_delay=0.1))
    window = (tr.t > 0.5 + 1e-9) & (tr.t < 0.6 - 1e-9)
    assert tr.yaw_controlled[window].all()
    assert (tr.eta[window, 1] == 0).all()


def test_closed_loop_is_stable(params):
    eig = np.linalg.eigvals(closed_loop_matrix(params, Gains()))
    assert np.max(eig.real) < 0
    assert np.max(eig.real) == pytest.approx(-1.954, abs=1e-3)


def _trace(x, saturated=None, yaw=None, sp=Setpoints()):
    n = len(x)
    return Trace(
        t=np.arange(n) * 0.01, x=np.asarray(x, dtype=float), F=np.zeros((n, 4)), lifts=np.zeros((n, 6)),
        saturated=np.zeros((n, 6), bool) if saturated is None else saturated, eta=np.ones((n, 6)),
        yaw_controlled=np.ones(n, bool) if yaw is None else yaw, final_state=np.asarray(x[-1], dtype=float),
        setpoints=sp,
    )


def test_classify_constant_and_nan():
    x = np.tile(at_setpoint(), (100, 1))
    assert classify_trace(_trace(x))[0] == CONVERGED
    bad = x.copy()
    bad[50, 0] = math.nan
    assert classify_trace(_trace(bad))[0] == DIVERGED
    far = x.copy()
    far[30:, 0] = -20.0
    assert classify_trace(_trace(far))[0] == DIVERGED


def test_classify_saturation_and_stuck():
    x = np.tile(at_setpoint(), (100, 1))
    x[:, 0] = 1.3
    sat = np.zeros((100, 6), bool)
    assert classify_trace(_trace(x, sat))[0] == DIVERGED
    sat[95:, 0] = True
    assert classify_trace(_trace(x, sat))[0] == SATURATION_LIMITED


def test_classify_ignores_yaw_when_dropped():
    x = np.tile(at_setpoint(), (100, 1))
    x[:, 3] = 3.0
    assert classify_trace(_trace(x))[0] == DIVERGED
    assert classify_trace(_trace(x, yaw=np.zeros(100, bool)))[0] == CONVERGED


def test_csv(tmp_path):
    tr = run_scenario(Scenario(duration=0.05))
    path = tmp_path / "run.csv"
    assert write_csv(tr, path, decimation=10) == 5
    rows = list(csv.reader(open(path)))
    assert rows[0] == CSV_HEADER and len(rows) == 6
    assert float(rows[2][0]) == pytest.approx(0.01)
    with pytest.raises(ValueError):
        write_csv(tr, path, decimation=0)


def test_single_step_duration():
    tr = run_scenario(Scenario(duration=0.001))
    assert len(tr) == 1


@pytest.mark.parametrize("kwargs", [
    dict(fault_events=(FaultEvent(2.0, 1), FaultEvent(1.0, 2))),
    dict(fault_events=(FaultEvent(1.0, 7),)),
    dict(fault_events=(FaultEvent(1.0, 1, eta=1.5),)),
    dict(dt=0.0),
    dict(duration=0.0001),
    dict(initial_state=(0.0,) * 7),
])
def test_bad_scenarios(kwargs):
    with pytest.raises(ConfigError):
        Scenario(**kwargs)


def test_bad_gains_and_setpoints():
    with pytest.raises(ConfigError):
        Gains(kp_att=-1)
    with pytest.raises(ConfigError):
        Setpoints(h=math.inf)
