"""Pseudo-inverse control allocation and lift saturation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import AirframeParams, build_full_effectiveness, build_reduced_effectiveness, efficiency

# Hadamard ratio det(W) / prod(diag W) below this means the Gram matrix is singular.
GRAM_REL_DET_TOL = 1e-12


class PimSingular(ValueError):
    """The effectiveness matrix has lost full row rank."""


@dataclass(frozen=True)
class AllocationMatrix:
    P: np.ndarray
    kind: str  # "full" or "reduced"
    eta: np.ndarray

    def __matmul__(self, F):
        return self.P @ F


def pim(H: np.ndarray, kind: str | None = None, eta=None) -> AllocationMatrix:
    """Right inverse ``H^T (H H^T)^-1``."""
    H = np.asarray(H, dtype=float)
    W = H @ H.T
    diag = np.diag(W)
    if np.any(diag <= 0.0):
        raise PimSingular("effectiveness matrix has a zero row")
    ratio = np.linalg.det(W) / np.prod(diag)
    if not ratio >= GRAM_REL_DET_TOL:
        raise PimSingular(f"Gram matrix is singular (relative determinant {ratio:.3e})")
    # W is SPD and at most 4x4; LAPACK LU with partial pivoting is plenty.
    P = np.linalg.solve(W, H).T
    if kind is None:
        kind = "full" if H.shape[0] == 4 else "reduced"
    if eta is None:
        eta = np.where(np.any(H != 0.0, axis=0), 1.0, 0.0)
    # Rows of failed rotors are zero up to rounding; make them exact.
    P[np.all(H == 0.0, axis=0)] = 0.0
    return AllocationMatrix(P=P, kind=kind, eta=np.asarray(eta, dtype=float))


def full_allocation(params: AirframeParams, eta=None) -> AllocationMatrix:
    eta = efficiency(eta)
    return pim(build_full_effectiveness(params, eta), "full", eta)


def reduced_allocation(params: AirframeParams, eta=None) -> AllocationMatrix:
    eta = efficiency(eta)
    return pim(build_reduced_effectiveness(params, eta), "reduced", eta)


def allocate(P, F) -> np.ndarray:
    """Lifts ``f = P F``.  No clamping here."""
    P = P.P if isinstance(P, AllocationMatrix) else np.asarray(P, dtype=float)
    F = np.asarray(F, dtype=float)
    if P.shape[1] != F.shape[0]:
        raise ValueError(f"allocation matrix expects {P.shape[1]} inputs, got {F.shape[0]}")
    return P @ F


def hover_distribution(P, G) -> np.ndarray:
    """Lifts that exactly cancel the gravity offset ``G``.

    The degraded system under pseudo-inverse allocation is controllable iff
    every nonzero entry of this vector lies strictly inside ``(0, K)``.
    """
    return allocate(P, G)


def saturate(f, K: float):
    """Clamp lifts to ``[0, K]``; returns ``(clamped, flags)``."""
    f = np.asarray(f, dtype=float)
    clamped = np.clip(f, 0.0, K)
    return clamped, clamped != f
