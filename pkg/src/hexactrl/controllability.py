"""Positive-controllability verdicts for the full and degraded hover models.

For ``x' = A x + B u`` with ``A = [[0, I], [0, 0]]`` the real eigenvectors of
``A^T`` are exactly ``[0; w]``, so the min-max criterion reduces to

    min_{|w| = 1}  max_{u in U}  w^T J^-1 u  > 0,

i.e. the origin must be strictly interior to ``U`` (``J`` is diagonal and
invertible, so the sign of the margin does not depend on it).
"""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from . import sets
from .allocation import full_allocation, reduced_allocation
from .model import (
    AirframeParams,
    ROTOR_COUNT,
    build_degraded_system,
    build_full_effectiveness,
    build_full_system,
    build_reduced_effectiveness,
    controllability_matrix_rank,
    efficiency,
    single_failure,
)

MARGIN_REL_TOL = 1e-9
BISECTION_REL_TOL = 1e-8
BISECTION_MAX_ITER = 60

EXACT_U0 = "exact-U0"
ALLOCATED_UA = "allocated-Ua"
SET_KINDS = (EXACT_U0, ALLOCATED_UA)


class WitnessInvalid(RuntimeError):
    """A symmetry-built witness direction failed the support check."""


class NoFlip(RuntimeError):
    """The verdict did not change across the bisection bracket."""


@dataclass(frozen=True)
class ControllabilityReport:
    controllable: bool
    margin: float
    scaled_margin: float
    tolerance: float
    witness_direction: np.ndarray
    rank_ok: bool
    hover_attainable: bool
    full_dimensional: bool
    method: str

    def to_dict(self) -> dict:
        d = asdict(self)
        d["witness_direction"] = [float(x) for x in self.witness_direction]
        return d


def _unit_scaling(params: AirframeParams, dim: int) -> np.ndarray:
    """Diagonal that puts forces and torques on comparable footing (1, 1/d, 1/d, 1/k_mu)."""
    d, k = params.arm_m, params.torque_ratio
    return np.array([1.0, 1.0 / d, 1.0 / d, 1.0 / k])[:dim]


def _to_costate(direction_u: np.ndarray, J: np.ndarray) -> np.ndarray:
    """Map a u-space normal n to the w of ``w^T J^-1 u``; w is proportional to J n."""
    w = J * direction_u
    return w / np.linalg.norm(w)


def _zonotope_report(z: sets.Zonotope, J, rank_ok: bool, params) -> ControllabilityReport:
    tol = MARGIN_REL_TOL * z.max_generator_norm()
    scaling = _unit_scaling(params, z.dim)
    try:
        margin, normal = sets.facet_margin(z)
    except sets.DegenerateSet:
        # Flat set: the best we can certify is the offset along the complement normal.
        normal = sets.orthogonal_complement_normal(z)
        offset = float(normal @ z.center)
        if offset > 0:
            normal = -normal
        margin = -abs(offset)
        hover = bool(abs(offset) <= tol and _flat_contains_origin(z))
        return ControllabilityReport(
            controllable=False, margin=margin, scaled_margin=margin,
            tolerance=tol, witness_direction=_to_costate(normal, J), rank_ok=rank_ok,
            hover_attainable=hover, full_dimensional=False, method="zonotope-facets",
        )
    scaled = sets.Zonotope(
        center=z.center * scaling, generators=z.generators * scaling,
        columns=z.columns, input_count=z.input_count, input_max=z.input_max,
    )
    scaled_margin, _ = sets.facet_margin(scaled)
    hover = sets.zonotope_contains(z, np.zeros(z.dim), tol=tol)
    controllable = bool(margin > tol and rank_ok and hover)
    return ControllabilityReport(
        controllable=controllable, margin=margin, scaled_margin=scaled_margin,
        tolerance=tol, witness_direction=_to_costate(normal, J), rank_ok=rank_ok,
        hover_attainable=bool(hover), full_dimensional=True, method="zonotope-facets",
    )


def _flat_contains_origin(z: sets.Zonotope) -> bool:
    # Least-squares weights, then check they lie in [0, 1].
    if len(z.generators) == 0:
        return bool(np.allclose(z.center, 0.0))
    t, *_ = np.linalg.lstsq(z.generators.T, -z.center, rcond=None)
    return bool(np.allclose(z.generators.T @ t, -z.center) and np.all((t >= -1e-9) & (t <= 1 + 1e-9)))


def full_attainable_set(params: AirframeParams, eta=None) -> sets.Zonotope:
    system = build_full_system(params)
    return sets.attainable_set(build_full_effectiveness(params, eta), params.max_lift_n, system.G)


def degraded_attainable_set(params: AirframeParams, eta=None, hover_thrust=None) -> sets.Zonotope:
    G = build_degraded_system(params).G.copy()
    if hover_thrust is not None:
        G[0] = hover_thrust
    return sets.attainable_set(build_reduced_effectiveness(params, eta), params.max_lift_n, G)


def full_allocation_set(params: AirframeParams, eta=None) -> sets.HPolytope:
    return sets.allocation_polytope(full_allocation(params, eta), build_full_system(params).G, params.max_lift_n)


def degraded_allocation_set(params: AirframeParams, eta=None, hover_thrust=None) -> sets.HPolytope:
    G = build_degraded_system(params).G.copy()
    if hover_thrust is not None:
        G[0] = hover_thrust
    return sets.allocation_polytope(reduced_allocation(params, eta), G, params.max_lift_n)


def check_full(params: AirframeParams, eta=None) -> ControllabilityReport:
    """Min-max test on the full model constrained by ``U0``."""
    eta = efficiency(eta)
    system = build_full_system(params)
    rank_ok = controllability_matrix_rank(system) == system.state_dim
    return _zonotope_report(full_attainable_set(params, eta), system.J, rank_ok, params)


def check_full_allocated(params: AirframeParams, eta=None) -> ControllabilityReport:
    """Min-max test on the full model constrained by the allocation set ``Ua``."""
    eta = efficiency(eta)
    system = build_full_system(params)
    rank_ok = controllability_matrix_rank(system) == system.state_dim
    return _hpoly_report(full_allocation_set(params, eta), system.J, rank_ok, params)


def check_degraded(params: AirframeParams, eta=None, set_kind: str = ALLOCATED_UA,
                   hover_thrust: float | None = None) -> ControllabilityReport:
    """Min-max test on the yaw-free model, constrained by ``U0`` or ``Ua``.

    ``hover_thrust`` replaces ``m g`` in the gravity offset when given.
    """
    eta = efficiency(eta)
    system = build_degraded_system(params)
    rank_ok = controllability_matrix_rank(system) == system.state_dim
    if set_kind == EXACT_U0:
        z = degraded_attainable_set(params, eta, hover_thrust)
        return _zonotope_report(z, system.J, rank_ok, params)
    if set_kind != ALLOCATED_UA:
        raise ValueError(f"set_kind must be one of {SET_KINDS}, got {set_kind!r}")

    poly = degraded_allocation_set(params, eta, hover_thrust)
    return _hpoly_report(poly, system.J, rank_ok, params)


def _hpoly_report(poly: sets.HPolytope, J, rank_ok: bool, params) -> ControllabilityReport:
    K = params.max_lift_n
    norms = np.linalg.norm(poly.normals, axis=1)
    tol = MARGIN_REL_TOL * K / float(np.min(norms))
    margin = sets.hpoly_interior_margin(poly)
    # Witness: outward normal of the tightest row at the origin.
    vals = np.zeros(len(poly))
    lower_slack = (vals - poly.lower) / norms
    upper_slack = (poly.upper - vals) / norms
    i = int(np.argmin(np.minimum(lower_slack, upper_slack)))
    normal = poly.normals[i] / norms[i]
    if lower_slack[i] < upper_slack[i]:
        normal = -normal

    scaling = _unit_scaling(params, poly.dim)
    scaled = sets.HPolytope(normals=poly.normals / scaling, lower=poly.lower, upper=poly.upper)
    scaled_margin = sets.hpoly_interior_margin(scaled)

    hover = bool(poly.contains(np.zeros(poly.dim), tol=tol))
    if margin > tol:
        full_dim = True
    else:
        full_dim = poly.chebyshev_radius() > tol
    controllable = bool(margin > tol and rank_ok)
    return ControllabilityReport(
        controllable=controllable, margin=margin, scaled_margin=scaled_margin,
        tolerance=tol, witness_direction=_to_costate(normal, J), rank_ok=rank_ok,
        hover_attainable=hover, full_dimensional=bool(full_dim), method="hpoly-slack",
    )


def ua_margin_verdict(params: AirframeParams, eta, hover_thrust: float | None = None) -> bool:
    """Cheap verdict for bisection: same answer as ``check_degraded(..., ALLOCATED_UA)``."""
    poly = degraded_allocation_set(params, eta, hover_thrust)
    tol = MARGIN_REL_TOL * params.max_lift_n / float(np.min(np.linalg.norm(poly.normals, axis=1)))
    return sets.hpoly_interior_margin(poly) > tol


# --- witness directions -------------------------------------------------------

def _eta2_normal(params: AirframeParams) -> np.ndarray:
    """u-space normal whose support over U0 with rotor 2 dead is zero."""
    d, k = params.arm_m, params.torque_ratio
    return np.array([0.0, -np.sqrt(3) / (3 * d), 1 / (3 * d), 1 / (3 * k)])


def witness_direction_eta2(params: AirframeParams | None = None) -> np.ndarray:
    """Unit costate ``w`` proportional to ``[0, -sqrt(3) Jx/(3d), Jy/(3d), Jz/(3 k_mu)]``."""
    params = params or AirframeParams()
    return _to_costate(_eta2_normal(params), build_full_system(params).J)


def _rotated_normal(params: AirframeParams, rotor: int) -> np.ndarray:
    """Carry the rotor-2 normal to ``rotor`` by the hexagon's 60-degree symmetry.

    Shifting rotor indices by ``k`` rotates every azimuth by ``k * 60`` degrees
    and flips every spin sign ``k`` times.  Writing the roll/pitch part of a
    normal as ``z = n_M + i n_L`` (so ``n . h_j`` depends on ``Re(z e^{i a_j})``),
    the matching normal is ``z e^{-i k pi/3}`` with the yaw part times ``(-1)^k``.
    """
    base = _eta2_normal(params)
    k = rotor - 2
    z = complex(base[2], base[1]) * np.exp(-1j * k * np.pi / 3)
    return np.array([0.0, z.imag, z.real, base[3] * (-1) ** k])


def witness_direction(rotor: int, params: AirframeParams | None = None, tol: float = 1e-9) -> np.ndarray:
    """Unit costate certifying that the full model loses controllability when ``rotor`` fails.

    The direction is built by symmetry and then checked: the support of
    ``J^-1 U0`` along it must not exceed ``tol``.
    """
    params = params or AirframeParams()
    if not 1 <= rotor <= ROTOR_COUNT:
        raise ValueError(f"rotor index must be in 1..{ROTOR_COUNT}, got {rotor}")
    J = build_full_system(params).J
    w = _to_costate(_rotated_normal(params, rotor), J)
    value = costate_support(full_attainable_set(params, single_failure(rotor)), w, J)
    if value > tol:
        raise WitnessInvalid(f"witness for rotor {rotor} has support {value:.3e} > {tol:g}")
    return w


def costate_support(z: sets.Zonotope, w, J) -> float:
    """``max_{u in z} w^T J^-1 u`` for a unit ``w``."""
    n = np.asarray(w, dtype=float) / np.asarray(J, dtype=float)
    return float(z.support_values(n)[0])


# --- thresholds ---------------------------------------------------------------

def _bisect(verdict, lo: float, hi: float) -> float:
    v_lo, v_hi = verdict(lo), verdict(hi)
    if v_lo == v_hi:
        raise NoFlip(f"verdict is {v_lo} at both ends of [{lo:g}, {hi:g}]")
    for _ in range(BISECTION_MAX_ITER):
        if hi - lo <= BISECTION_REL_TOL * max(abs(lo), abs(hi)) * 0.5:
            break
        mid = 0.5 * (lo + hi)
        if verdict(mid) == v_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def degraded_lift_threshold(params: AirframeParams, rotor: int) -> float:
    """Smallest per-rotor maximum lift that keeps the degraded model controllable under ``Ua``."""
    eta = single_failure(rotor)
    weight = params.weight_n
    return _bisect(
        lambda K: ua_margin_verdict(params.replace(max_lift_n=K), eta),
        1e-9 * weight, 2.0 * weight,
    )


def degraded_thrust_threshold(params: AirframeParams, rotor: int) -> float:
    """Largest hover thrust the degraded model tolerates under ``Ua`` at the given ``K``."""
    eta = single_failure(rotor)
    K = params.max_lift_n
    return _bisect(
        lambda T: ua_margin_verdict(params, eta, hover_thrust=T),
        1e-3 * K, 2.0 * 6 * K,
    )


# --- inclusion ----------------------------------------------------------------

def count_inclusion_violations(poly: sets.HPolytope, zono: sets.Zonotope, samples: int, seed: int,
                               tol: float = 1e-9) -> int:
    pts = sets.hpoly_sample(poly, zono, samples, seed)
    return int(np.count_nonzero(~sets.zonotope_contains(zono, pts, tol=tol)))


def inclusion_test(params: AirframeParams, eta=None, samples: int = 10_000, seed: int = 0,
                   degraded: bool = False) -> int:
    """Number of points sampled from ``Ua`` that fall outside ``U0``."""
    eta = efficiency(eta)
    if degraded:
        poly, zono = degraded_allocation_set(params, eta), degraded_attainable_set(params, eta)
    else:
        poly, zono = full_allocation_set(params, eta), full_attainable_set(params, eta)
    return count_inclusion_violations(poly, zono, samples, seed)
