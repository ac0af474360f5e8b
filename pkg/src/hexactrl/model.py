"""Airframe parameters, effectiveness matrices and the linear hover models.

State ordering for the full model is ``[h, phi, theta, psi, v_h, p, q, r]``
and the virtual control is ``F = [T, L, M, N]``.  The degraded model drops
``psi``, ``r`` and ``N``.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

ROTOR_COUNT = 6

# Rotor i sits at azimuth (i - 1) * 60 deg, measured from the +pitch arm.
ROTOR_AZIMUTH = np.arange(ROTOR_COUNT) * np.pi / 3.0
# P/N alternation: reactive torque sign of rotors 1..6.
ROTOR_SPIN = np.array([-1.0, 1.0, -1.0, 1.0, -1.0, 1.0])

STATE_NAMES = ("h", "phi", "theta", "psi", "vh", "p", "q", "r")
CONTROL_NAMES = ("T", "L", "M", "N")


@dataclass(frozen=True)
class AirframeParams:
    """Physical constants of a PNPNPN hexacopter (defaults: the prototype)."""

    mass_kg: float = 1.535
    gravity_mps2: float = 9.80
    arm_m: float = 0.275
    torque_ratio: float = 0.1
    inertia_roll: float = 0.0411
    inertia_pitch: float = 0.0478
    inertia_yaw: float = 0.0599
    max_lift_n: float = 6.125
    yaw_damping: float = 0.2

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not np.isfinite(value) or value <= 0:
                raise ValueError(f"{f.name} must be finite and > 0, got {value!r}")

    @property
    def weight_n(self) -> float:
        return self.mass_kg * self.gravity_mps2

    def replace(self, **changes) -> "AirframeParams":
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        return AirframeParams(**values)


def efficiency(eta=None) -> np.ndarray:
    """Validate a per-rotor efficiency vector; ``None`` means all healthy."""
    if eta is None:
        return np.ones(ROTOR_COUNT)
    eta = np.asarray(eta, dtype=float)
    if eta.shape != (ROTOR_COUNT,):
        raise ValueError(f"eta must have {ROTOR_COUNT} entries, got shape {eta.shape}")
    if np.any(~np.isfinite(eta)) or np.any(eta < 0) or np.any(eta > 1):
        raise ValueError(f"eta entries must lie in [0, 1], got {eta}")
    return eta


def single_failure(rotor: int) -> np.ndarray:
    """Efficiency vector with rotor ``rotor`` (1-based) dead and the rest healthy."""
    if not 1 <= rotor <= ROTOR_COUNT:
        raise ValueError(f"rotor index must be in 1..{ROTOR_COUNT}, got {rotor}")
    eta = np.ones(ROTOR_COUNT)
    eta[rotor - 1] = 0.0
    return eta


def build_full_effectiveness(params: AirframeParams, eta=None) -> np.ndarray:
    """4x6 map from rotor lifts to ``[T, L, M, N]``.

    Column ``i`` is ``eta_i * [1, -d sin(a_i), d cos(a_i), s_i k_mu]`` with
    ``a_i`` the rotor azimuth and ``s_i`` its spin sign.
    """
    eta = efficiency(eta)
    d, k = params.arm_m, params.torque_ratio
    # Exact table values for the 60-degree grid; avoids 1e-17 noise from sin(pi).
    sin_a = np.array([0.0, np.sqrt(3) / 2, np.sqrt(3) / 2, 0.0, -np.sqrt(3) / 2, -np.sqrt(3) / 2])
    cos_a = np.array([1.0, 0.5, -0.5, -1.0, -0.5, 0.5])
    H = np.vstack([
        np.ones(ROTOR_COUNT),
        -d * sin_a,
        d * cos_a,
        k * ROTOR_SPIN,
    ])
    return H * eta


def build_reduced_effectiveness(params: AirframeParams, eta=None) -> np.ndarray:
    """Thrust, roll and pitch rows of :func:`build_full_effectiveness`."""
    return build_full_effectiveness(params, eta)[:3].copy()


@dataclass(frozen=True)
class LinearSystem:
    """``x' = A x + B (F - G)`` around hover."""

    A: np.ndarray
    B: np.ndarray
    J: np.ndarray  # diagonal of J_f
    G: np.ndarray

    @property
    def state_dim(self) -> int:
        return self.A.shape[0]

    @property
    def input_dim(self) -> int:
        return self.B.shape[1]


def _double_integrator_system(diag_j, gravity_offset) -> LinearSystem:
    m = len(diag_j)
    A = np.zeros((2 * m, 2 * m))
    A[:m, m:] = np.eye(m)
    B = np.zeros((2 * m, m))
    B[m:, :] = np.diag(1.0 / np.asarray(diag_j))
    G = np.zeros(m)
    G[0] = gravity_offset
    return LinearSystem(A=A, B=B, J=np.asarray(diag_j, dtype=float), G=G)


def build_full_system(params: AirframeParams) -> LinearSystem:
    """8-state model with ``J_f = diag(-m, Jx, Jy, Jz)``."""
    return _double_integrator_system(
        [-params.mass_kg, params.inertia_roll, params.inertia_pitch, params.inertia_yaw],
        params.weight_n,
    )


def build_degraded_system(params: AirframeParams) -> LinearSystem:
    """6-state model with the yaw states removed."""
    return _double_integrator_system(
        [-params.mass_kg, params.inertia_roll, params.inertia_pitch],
        params.weight_n,
    )


def controllability_matrix(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    n = A.shape[0]
    blocks = [B]
    for _ in range(n - 1):
        blocks.append(A @ blocks[-1])
    return np.hstack(blocks)


def row_reduced_rank(M: np.ndarray, rel_tol: float = 1e-10) -> int:
    """Rank by Gaussian elimination with partial pivoting.

    Pivots smaller than ``rel_tol * max|M|`` count as zero.
    """
    M = np.array(M, dtype=float)
    scale = np.max(np.abs(M)) if M.size else 0.0
    if scale == 0.0:
        return 0
    tol = rel_tol * scale
    rows, cols = M.shape
    rank = 0
    for c in range(cols):
        if rank == rows:
            break
        pivot = rank + int(np.argmax(np.abs(M[rank:, c])))
        if abs(M[pivot, c]) <= tol:
            continue
        M[[rank, pivot]] = M[[pivot, rank]]
        M[rank + 1:] -= np.outer(M[rank + 1:, c] / M[rank, c], M[rank])
        rank += 1
    return rank


def controllability_matrix_rank(system: LinearSystem) -> int:
    return row_reduced_rank(controllability_matrix(system.A, system.B))
