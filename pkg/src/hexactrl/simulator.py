"""Closed-loop hover simulation with scripted rotor failures.

The plant is the linear hover model plus a quadratic yaw damping moment.  The
controller is a PD law on altitude and attitude; once a rotor is known to be
dead and the degraded strategy is enabled, the yaw channel is dropped and
``[T, L, M]`` is reallocated through the reduced pseudo-inverse.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .allocation import pim, saturate
from .model import (
    AirframeParams,
    ROTOR_COUNT,
    build_full_effectiveness,
    build_full_system,
    efficiency,
)

CONVERGED = "Converged"
DIVERGED = "Diverged"
SATURATION_LIMITED = "SaturationLimited"


class ConfigError(ValueError):
    """Malformed scenario."""


@dataclass(frozen=True)
class Setpoints:
    h: float = 1.0
    phi: float = 0.0
    theta: float = 0.0
    psi: float = 5.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.h, self.phi, self.theta, self.psi)):
            raise ConfigError("setpoints must be finite")


@dataclass(frozen=True)
class Gains:
    kp_att: float = 20.0
    kd_att: float = 3.0
    kp_h: float = 10.0
    kd_h: float = 6.0

    def __post_init__(self):
        if not all(v > 0 for v in (self.kp_att, self.kd_att, self.kp_h, self.kd_h)):
            raise ConfigError("gains must be positive")


@dataclass(frozen=True)
class FaultEvent:
    time: float
    rotor: int  # 1-based
    eta: float = 0.0


@dataclass(frozen=True)
class Thresholds:
    position: float = 0.05
    angle: float = 0.02
    window_fraction: float = 0.1
    divergence_factor: float = 10.0


@dataclass(frozen=True)
class Scenario:
    params: AirframeParams = field(default_factory=AirframeParams)
    setpoints: Setpoints = field(default_factory=Setpoints)
    gains: Gains = field(default_factory=Gains)
    fault_events: tuple = ()
    dcs_enabled: bool = True
    duration: float = 20.0
    dt: float = 0.001
    seed: int = 0
    initial_state: tuple = (0.0,) * 8
    detection_delay: float = 0.0
    name: str = ""

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError(f"dt must be > 0, got {self.dt}")
        if not self.duration >= self.dt * (1 - 1e-9):
            raise ConfigError(f"duration must be >= dt, got {self.duration}")
        if self.detection_delay < 0:
            raise ConfigError("detection_delay must be >= 0")
        if len(self.initial_state) != 8 or not all(math.isfinite(v) for v in self.initial_state):
            raise ConfigError("initial_state must be 8 finite numbers")
        events = tuple(self.fault_events)
        for ev in events:
            if not isinstance(ev, FaultEvent):
                raise ConfigError(f"fault event must be a FaultEvent, got {ev!r}")
            if not 1 <= ev.rotor <= ROTOR_COUNT:
                raise ConfigError(f"fault rotor must be in 1..{ROTOR_COUNT}, got {ev.rotor}")
            if not 0.0 <= ev.eta <= 1.0:
                raise ConfigError(f"fault eta must be in [0, 1], got {ev.eta}")
            if not ev.time >= 0:
                raise ConfigError(f"fault time must be >= 0, got {ev.time}")
        if any(a.time > b.time for a, b in zip(events, events[1:])):
            raise ConfigError("fault events must be sorted by time")
        object.__setattr__(self, "fault_events", events)

    @property
    def steps(self) -> int:
        return max(1, int(round(self.duration / self.dt)))

    def eta_at(self, t: float) -> np.ndarray:
        eta = np.ones(ROTOR_COUNT)
        for ev in self.fault_events:
            if ev.time <= t + 0.5 * self.dt:
                eta[ev.rotor - 1] = ev.eta
        return eta


@dataclass
class Trace:
    t: np.ndarray
    x: np.ndarray  # (n, 8)
    F: np.ndarray  # (n, 4); N is nan while the yaw channel is dropped
    lifts: np.ndarray  # (n, 6), after saturation
    saturated: np.ndarray  # (n, 6) bool
    eta: np.ndarray  # (n, 6)
    yaw_controlled: np.ndarray  # (n,) bool
    final_state: np.ndarray
    setpoints: Setpoints
    classification: str = ""
    metrics: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.t)


def pd_control(state, setpoints: Setpoints, gains: Gains, params: AirframeParams,
               dcs_active: bool = False) -> np.ndarray:
    """Virtual control ``[T, L, M, N]`` (or ``[T, L, M]`` when ``dcs_active``).

    The altitude law keeps the literal form ``T = kp (h - h_c) + kd v_h + m g``,
    which is stabilizing because the model's thrust channel carries ``-1/m``.
    The attitude laws feed back ``-(kp e + kd rate)`` so the loop is stable for
    positive inertias.
    """
    h, phi, theta, psi, vh, p, q, r = state
    T = gains.kp_h * (h - setpoints.h) + gains.kd_h * vh + params.weight_n
    L = -(gains.kp_att * (phi - setpoints.phi) + gains.kd_att * p)
    M = -(gains.kp_att * (theta - setpoints.theta) + gains.kd_att * q)
    if dcs_active:
        return np.array([T, L, M])
    N = -(gains.kp_att * (psi - setpoints.psi) + gains.kd_att * r)
    return np.array([T, L, M, N])


def _derivative(x, accel, damping_accel_coeff):
    r = x[7]
    dx = np.empty(8)
    dx[:4] = x[4:]
    dx[4:] = accel
    dx[7] -= damping_accel_coeff * r * abs(r)
    return dx


def step(state, applied_lifts, eta, params: AirframeParams, dt: float) -> np.ndarray:
    """One RK4 step of the hover model with lifts held constant."""
    if not dt > 0:
        raise ValueError("dt must be > 0")
    system = build_full_system(params)
    u = build_full_effectiveness(params, eta) @ np.asarray(applied_lifts, dtype=float) - system.G
    return _rk4(np.asarray(state, dtype=float), u / system.J, params.yaw_damping / params.inertia_yaw, dt)


def _rk4(x, accel, damp, dt):
    k1 = _derivative(x, accel, damp)
    k2 = _derivative(x + 0.5 * dt * k1, accel, damp)
    k3 = _derivative(x + 0.5 * dt * k2, accel, damp)
    k4 = _derivative(x + dt * k3, accel, damp)
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def state_derivative(state, applied_lifts, eta, params: AirframeParams) -> np.ndarray:
    """``x'`` at ``state`` for the given lifts (useful for checking the model)."""
    system = build_full_system(params)
    u = build_full_effectiveness(params, eta) @ np.asarray(applied_lifts, dtype=float) - system.G
    return _derivative(np.asarray(state, dtype=float), u / system.J, params.yaw_damping / params.inertia_yaw)


def run_scenario(scenario: Scenario, thresholds: Thresholds | None = None) -> Trace:
    params = scenario.params
    system = build_full_system(params)
    J, G = system.J, system.G
    K = params.max_lift_n
    damp = params.yaw_damping / params.inertia_yaw
    dt = scenario.dt
    n = scenario.steps

    t = np.arange(n) * dt
    xs = np.full((n, 8), np.nan)
    Fs = np.full((n, 4), np.nan)
    lifts = np.zeros((n, ROTOR_COUNT))
    sat = np.zeros((n, ROTOR_COUNT), dtype=bool)
    etas = np.zeros((n, ROTOR_COUNT))
    yaw_ctl = np.zeros(n, dtype=bool)

    cache = {}

    def regime(true_eta, known_eta):
        key = (tuple(true_eta), tuple(known_eta))
        if key not in cache:
            H = build_full_effectiveness(params, true_eta)
            dcs = scenario.dcs_enabled and bool(np.any(known_eta == 0.0))
            H_known = build_full_effectiveness(params, known_eta)
            P = pim(H_known[:3] if dcs else H_known).P
            cache[key] = (H, P, dcs)
        return cache[key]

    x = np.asarray(scenario.initial_state, dtype=float)
    rows = n
    for k in range(n):
        tk = t[k]
        true_eta = scenario.eta_at(tk)
        known_eta = scenario.eta_at(tk - scenario.detection_delay)
        H, P, dcs = regime(true_eta, known_eta)
        F = pd_control(x, scenario.setpoints, scenario.gains, params, dcs_active=dcs)
        f, flags = saturate(P @ F, K)

        xs[k] = x
        Fs[k, :len(F)] = F
        lifts[k] = f
        sat[k] = flags
        etas[k] = true_eta
        yaw_ctl[k] = not dcs

        x = _rk4(x, (H @ f - G) / J, damp, dt)
        if not np.all(np.isfinite(x)):
            rows = k + 1
            break

    trace = Trace(
        t=t[:rows], x=xs[:rows], F=Fs[:rows], lifts=lifts[:rows], saturated=sat[:rows],
        eta=etas[:rows], yaw_controlled=yaw_ctl[:rows], final_state=x, setpoints=scenario.setpoints,
    )
    trace.classification, trace.metrics = classify_trace(trace, thresholds)
    return trace


def _errors(trace: Trace) -> np.ndarray:
    sp = trace.setpoints
    target = np.array([sp.h, sp.phi, sp.theta, sp.psi])
    return trace.x[:, :4] - target


def classify_trace(trace: Trace, thresholds: Thresholds | None = None):
    """Return ``(classification, metrics)``.

    Controlled channels are h, phi, theta, and psi while the yaw loop is
    active.  Diverged: non-finite state or any controlled error beyond
    ``divergence_factor * max(|setpoint|, 1)``.  Converged: every controlled
    error inside tolerance over the final window.  SaturationLimited: neither,
    with a rotor pinned at a limit in the final window.  Anything else did not
    reach its target and is reported as Diverged.
    """
    th = thresholds or Thresholds()
    if len(trace) == 0:
        raise ValueError("empty trace")
    sp = trace.setpoints
    err = _errors(trace)
    ctl = np.ones_like(err, dtype=bool)
    ctl[:, 3] = trace.yaw_controlled

    final = trace.final_state[:4] - np.array([sp.h, sp.phi, sp.theta, sp.psi])
    r = trace.x[:, 7]
    metrics = {
        "final_error_h": float(final[0]),
        "final_error_phi": float(final[1]),
        "final_error_theta": float(final[2]),
        "final_error_psi": float(final[3]),
        "max_abs_r": float(np.nanmax(np.abs(r))) if np.any(np.isfinite(r)) else float("nan"),
        "settling_time": float("nan"),
    }

    finite = np.all(np.isfinite(trace.x)) and np.all(np.isfinite(trace.final_state))
    bounds = th.divergence_factor * np.maximum(np.abs([sp.h, sp.phi, sp.theta, sp.psi]), 1.0)
    if not finite or np.any(ctl & (np.abs(err) > bounds)):
        return DIVERGED, metrics

    tol = np.array([th.position, th.angle, th.angle, th.angle])
    outside = ctl & (np.abs(err) >= tol)
    bad_rows = np.flatnonzero(np.any(outside, axis=1))
    start = int(len(trace) * (1.0 - th.window_fraction))
    if len(bad_rows) == 0 or bad_rows[-1] < start:
        metrics["settling_time"] = float(trace.t[bad_rows[-1] + 1]) if len(bad_rows) and bad_rows[-1] + 1 < len(trace) else 0.0
        return CONVERGED, metrics
    if np.any(trace.saturated[start:]):
        return SATURATION_LIMITED, metrics
    return DIVERGED, metrics


CSV_HEADER = (
    ["t", "h", "phi", "theta", "psi", "vh", "p", "q", "r", "T", "L", "M", "N"]
    + [f"f{i}" for i in range(1, 7)]
    + [f"sat{i}" for i in range(1, 7)]
)


def write_csv(trace: Trace, path, decimation: int = 1) -> int:
    """Write one row per ``decimation`` steps; returns the number of rows written."""
    if decimation < 1:
        raise ValueError("decimation must be >= 1")
    idx = range(0, len(trace), decimation)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        for k in idx:
            w.writerow(
                [repr(float(trace.t[k]))]
                + [repr(float(v)) for v in trace.x[k]]
                + [repr(float(v)) for v in trace.F[k]]
                + [repr(float(v)) for v in trace.lifts[k]]
                + [int(b) for b in trace.saturated[k]]
            )
    return len(idx)


def closed_loop_matrix(params: AirframeParams, gains: Gains, setpoints: Setpoints | None = None) -> np.ndarray:
    """Jacobian of the unsaturated, undamped closed loop with full allocation."""
    setpoints = setpoints or Setpoints()
    system = build_full_system(params)
    H = build_full_effectiveness(params)
    P = pim(H).P

    def f(x):
        F = pd_control(x, setpoints, gains, params)
        return system.A @ x + system.B @ (H @ (P @ F) - system.G)

    x0 = np.array([setpoints.h, setpoints.phi, setpoints.theta, setpoints.psi, 0, 0, 0, 0], dtype=float)
    f0 = f(x0)
    # The loop is affine, so unit differences are exact.
    return np.column_stack([f(x0 + e) - f0 for e in np.eye(8)])
