"""Reproduction checks shared by ``verify-paper`` and the acceptance tests."""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np

from . import controllability as ctl
from . import sets
from .allocation import reduced_allocation
from .config import load_config, scenario_from_config
from .model import AirframeParams, build_degraded_system, build_full_system, build_reduced_effectiveness, single_failure
from .simulator import CONVERGED, DIVERGED, run_scenario


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def _random_unit(n: int, dim: int, seed: int) -> np.ndarray:
    v = np.random.default_rng(seed).standard_normal((n, dim))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def check_single_failures(params: AirframeParams) -> CheckResult:
    start = time.perf_counter()
    worst = 0.0
    all_uncontrollable = True
    for i in range(1, 7):
        rep = ctl.check_full(params, single_failure(i))
        all_uncontrollable &= not rep.controllable
        worst = max(worst, abs(rep.margin) / rep.tolerance)
    elapsed = time.perf_counter() - start
    ok = all_uncontrollable and worst <= 1.0 and elapsed < 1.0
    return CheckResult(
        "1 single-failure full model uncontrollable", ok,
        f"all six uncontrollable={all_uncontrollable}, max |margin|/(1e-9 scale)={worst:.3g}, {elapsed:.3f} s",
    )


def check_witnesses(params: AirframeParams) -> CheckResult:
    J = build_full_system(params).J
    d, k = params.arm_m, params.torque_ratio
    w = np.array([0.0, -np.sqrt(3) * params.inertia_roll / (3 * d),
                  params.inertia_pitch / (3 * d), params.inertia_yaw / (3 * k)])
    w /= np.linalg.norm(w)
    value2 = ctl.costate_support(ctl.full_attainable_set(params, single_failure(2)), w, J)
    ok = abs(value2) <= 1e-9
    details = [f"rotor 2: {value2:.2e}"]
    for i in (1, 3, 4, 5, 6):
        try:
            wi = ctl.witness_direction(i, params)
        except ctl.WitnessInvalid as exc:
            ok = False
            details.append(f"rotor {i}: {exc}")
            continue
        vi = ctl.costate_support(ctl.full_attainable_set(params, single_failure(i)), wi, J)
        ok &= abs(vi) <= 1e-9
        details.append(f"rotor {i}: {vi:.2e}")
    return CheckResult("2 witness directions have zero support", bool(ok), ", ".join(details))


def check_thresholds(params: AirframeParams) -> CheckResult:
    start = time.perf_counter()
    k_ref = 5.0 / 18.0 * params.weight_n
    t_ref = 18.0 / 5.0 * params.max_lift_n
    worst_k = worst_t = 0.0
    for i in range(1, 7):
        worst_k = max(worst_k, abs(ctl.degraded_lift_threshold(params, i) / k_ref - 1))
        worst_t = max(worst_t, abs(ctl.degraded_thrust_threshold(params, i) / t_ref - 1))
    elapsed = time.perf_counter() - start
    ok = worst_k <= 1e-6 and worst_t <= 1e-6 and elapsed < 1.0
    return CheckResult(
        "3 degraded lift and thrust thresholds", ok,
        f"K* ref {k_ref:.6f} N rel err {worst_k:.2e}; T* ref {t_ref:.4f} N rel err {worst_t:.2e}; {elapsed:.3f} s",
    )


def check_inclusion(params: AirframeParams, samples: int = 10_000, seed: int = 7) -> CheckResult:
    full = ctl.inclusion_test(params, None, samples, seed)
    degraded = ctl.inclusion_test(params, single_failure(2), samples, seed, degraded=True)
    return CheckResult(
        "4 allocated set inside attainable set", full == 0 and degraded == 0,
        f"{samples} samples: full violations {full}, degraded (rotor 2 failed) violations {degraded}",
    )


def check_oracle_equivalence(params: AirframeParams, directions: int = 100_000, seed: int = 11) -> CheckResult:
    cases = {
        "nominal": (ctl.full_attainable_set(params), build_full_system(params).J, ctl.check_full(params)),
        "rotor2 full": (ctl.full_attainable_set(params, single_failure(2)), build_full_system(params).J,
                        ctl.check_full(params, single_failure(2))),
        "rotor2 degraded": (ctl.degraded_attainable_set(params, single_failure(2)), build_degraded_system(params).J,
                            ctl.check_degraded(params, single_failure(2), ctl.EXACT_U0)),
    }
    ok = True
    details = []
    for name, (z, J, rep) in cases.items():
        sampled = float(np.min(z.support_values(_random_unit(directions, z.dim, seed))))
        n = rep.witness_direction / J
        at_witness = sets.support(z, n).value
        below = rep.margin <= sampled + 1e-9
        equal = abs(at_witness - rep.margin) <= 1e-9
        ok &= below and equal
        details.append(f"{name}: facet {rep.margin:.6g} <= sampled {sampled:.6g} ({below}), "
                       f"|h(witness)-margin| {abs(at_witness - rep.margin):.1e}")
    return CheckResult("5 facet margin matches sampled support minimum", bool(ok), "; ".join(details))


def check_allocation(params: AirframeParams) -> CheckResult:
    P = reduced_allocation(params, single_failure(2)).P
    H = build_reduced_effectiveness(params, single_failure(2))
    expected = np.array([5 / 18, 0, 5 / 18, 1 / 6, 1 / 9, 1 / 6])
    col_err = float(np.max(np.abs(P[:, 0] - expected)))
    inv_err = float(np.max(np.abs(H @ P - np.eye(3))))
    return CheckResult(
        "6 reduced allocation thrust column", col_err <= 1e-10 and inv_err <= 1e-10,
        f"thrust column err {col_err:.1e}, |HP - I|max {inv_err:.1e}",
    )


class _Runs:
    """Memoized figure runs so each scenario is simulated once per verification."""

    def __init__(self):
        self._cache = {}

    def get(self, name, **overrides):
        key = (name, tuple(sorted(overrides.items())))
        if key not in self._cache:
            scenario = scenario_from_config(load_config(name))
            if overrides:
                scenario = replace(scenario, **overrides)
            start = time.perf_counter()
            trace = run_scenario(scenario)
            self._cache[key] = (trace, time.perf_counter() - start)
        return self._cache[key]


def check_figures(runs: _Runs | None = None) -> list[CheckResult]:
    runs = runs or _Runs()
    out = []

    tr, sec = runs.get("fig2")
    h_err = abs(tr.final_state[0] - 1.0)
    psi_err = abs(tr.final_state[3] - 5.0)
    out.append(CheckResult(
        "7 fig2 nominal hover", tr.classification == CONVERGED and h_err < 0.05 and psi_err < 0.02 and sec < 5,
        f"{tr.classification}, |h-1| {h_err:.2e} m, |psi-5| {psi_err:.2e} rad, {sec:.2f} s",
    ))

    tr, sec = runs.get("fig3")
    out.append(CheckResult(
        "7 fig3 failure without degraded control", tr.classification == DIVERGED and sec < 5,
        f"{tr.classification} (final h {tr.final_state[0]:.3g}, phi {tr.final_state[1]:.3g}, "
        f"theta {tr.final_state[2]:.3g}), {sec:.2f} s",
    ))

    tr, sec = runs.get("fig4")
    last = tr.t >= tr.t[-1] - 2.0
    r = tr.x[last, 7]
    rdot = float(np.max(np.abs(np.diff(r)) / (tr.t[1] - tr.t[0]))) if len(r) > 1 else 0.0
    bounded = bool(np.all(np.isfinite(tr.x[:, 7])))
    out.append(CheckResult(
        "7 fig4 failure with degraded control",
        tr.classification == CONVERGED and bounded and rdot < 0.01 and sec < 5,
        f"{tr.classification}, max|r| {np.max(np.abs(tr.x[:, 7])):.3f} rad/s, final r {tr.final_state[7]:.4f}, "
        f"max|dr/dt| last 2 s {rdot:.1e}, {sec:.2f} s",
    ))

    tr, sec = runs.get("fig5")
    out.append(CheckResult(
        "7 fig5 lift below threshold", tr.classification == DIVERGED and sec < 5,
        f"{tr.classification} (final h {tr.final_state[0]:.4g}, phi {tr.final_state[1]:.3g}, "
        f"theta {tr.final_state[2]:.3g}, rotors at limit {np.flatnonzero(tr.saturated[-1]) + 1}), {sec:.2f} s",
    ))
    return out


def check_numerics(runs: _Runs | None = None) -> CheckResult:
    runs = runs or _Runs()
    a, _ = runs.get("fig4")
    b, _ = runs.get("fig4", dt=0.0005)
    fa, fb = a.final_state[:3], b.final_state[:3]
    rel = float(np.max(np.abs(fa - fb) / np.maximum(np.maximum(np.abs(fa), np.abs(fb)), 1.0)))
    scenario = scenario_from_config(load_config("fig4"))
    c = run_scenario(scenario)
    same = all(np.array_equal(getattr(a, f), getattr(c, f), equal_nan=True)
               for f in ("t", "x", "F", "lifts", "saturated"))
    return CheckResult(
        "8 step-size sensitivity and reproducibility", rel < 1e-6 and same,
        f"halving dt changes final (h, phi, theta) by {rel:.1e} relative; repeat run identical={same}",
    )


def run_all(params: AirframeParams | None = None) -> list[CheckResult]:
    params = params or AirframeParams()
    runs = _Runs()
    results = [
        check_single_failures(params),
        check_witnesses(params),
        check_thresholds(params),
        check_inclusion(params),
        check_oracle_equivalence(params),
        check_allocation(params),
    ]
    results += check_figures(runs)
    results.append(check_numerics(runs))
    return results
