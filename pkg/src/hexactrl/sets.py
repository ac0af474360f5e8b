"""Attainable control sets.

``U0`` is the image of the lift box under the effectiveness matrix, shifted by
``-G``: a zonotope with one generator per working rotor.  ``Ua`` is the set of
virtual controls whose pseudo-inverse allocation stays inside the lift box; it
is kept in H-representation straight from the allocation matrix rows.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.optimize import linprog

GRAM_REL_TOL = 1e-10
PARALLEL_COS_TOL = 1e-9


class DegenerateSet(ValueError):
    """The set has empty interior in its ambient space."""


class SamplingExhausted(RuntimeError):
    """Rejection sampling ran out of attempts."""


@dataclass(frozen=True)
class SupportResult:
    value: float
    maximizer: np.ndarray  # lift vector, entries in {0, K} where the generator is not orthogonal


def _independent(vectors: np.ndarray) -> bool:
    """Gram determinant test, relative to the product of squared norms."""
    gram = vectors @ vectors.T
    norms = np.prod(np.diag(gram))
    if norms == 0.0:
        return False
    return np.linalg.det(gram) / norms > GRAM_REL_TOL


def _hyperplane_normal(vectors: np.ndarray) -> np.ndarray:
    """Unit normal to the span of ``dim - 1`` independent vectors (generalized cross product)."""
    k, dim = vectors.shape
    n = np.array([(-1) ** j * np.linalg.det(np.delete(vectors, j, axis=1)) for j in range(dim)])
    return n / np.linalg.norm(n)


@dataclass(frozen=True)
class Zonotope:
    """``{center + sum_i t_i g_i : t_i in [0, 1]}``.

    ``columns`` records which input (rotor) each generator came from and
    ``input_max`` the upper bound of that input, so that support maximizers can
    be reported as lift vectors.
    """

    center: np.ndarray
    generators: np.ndarray  # shape (count, dim)
    columns: tuple = ()
    input_count: int = 0
    input_max: float = 1.0

    def __post_init__(self):
        gens = np.atleast_2d(np.asarray(self.generators, dtype=float))
        center = np.asarray(self.center, dtype=float)
        if gens.size == 0:
            gens = np.zeros((0, center.shape[0]))
        if gens.shape[1] != center.shape[0]:
            raise ValueError("generator dimension does not match center")
        if np.any(np.linalg.norm(gens, axis=1) == 0.0):
            raise ValueError("zero generators are not allowed")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "generators", gens)
        if not self.columns:
            object.__setattr__(self, "columns", tuple(range(len(gens))))
        if not self.input_count:
            object.__setattr__(self, "input_count", len(gens))

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def bounding_box(self):
        lo = self.center + np.minimum(self.generators, 0.0).sum(axis=0)
        hi = self.center + np.maximum(self.generators, 0.0).sum(axis=0)
        return lo, hi

    def max_generator_norm(self) -> float:
        if len(self.generators) == 0:
            return 0.0
        return float(np.max(np.linalg.norm(self.generators, axis=1)))

    def support_values(self, directions: np.ndarray) -> np.ndarray:
        """Vectorized support function over rows of ``directions`` (not normalized)."""
        directions = np.atleast_2d(directions)
        return directions @ self.center + np.maximum(directions @ self.generators.T, 0.0).sum(axis=1)

    @cached_property
    def _equilibrated(self) -> np.ndarray:
        # Independence does not change under per-axis scaling, so test it with
        # every coordinate rescaled to unit peak; this keeps the determinant
        # test meaningful when the axes carry very different units.
        peak = np.max(np.abs(self.generators), axis=0) if len(self.generators) else np.ones(self.dim)
        return self.generators / np.where(peak > 0.0, peak, 1.0)

    def spans(self) -> bool:
        if len(self.generators) < self.dim:
            return False
        return any(
            _independent(self._equilibrated[list(c)])
            for c in itertools.combinations(range(len(self.generators)), self.dim)
        )

    @cached_property
    def _facets(self):
        if not self.spans():
            raise DegenerateSet(
                f"{len(self.generators)} generators do not span R^{self.dim}; the set has empty interior"
            )
        normals = []
        for combo in itertools.combinations(range(len(self.generators)), self.dim - 1):
            sub = self.generators[list(combo)]
            if self.dim > 1 and not _independent(self._equilibrated[list(combo)]):
                continue
            n = _hyperplane_normal(sub) if self.dim > 1 else np.ones(1)
            for cand in (n, -n):
                if not any(np.dot(cand, m) > 1.0 - PARALLEL_COS_TOL for m in normals):
                    normals.append(cand)
        normals = np.array(normals)
        return normals, self.support_values(normals)


def attainable_set(H, K: float, G) -> Zonotope:
    """``{H f - G : f in [0, K]^m}`` with zero columns of ``H`` dropped."""
    if not K > 0:
        raise ValueError(f"maximum lift must be > 0, got {K}")
    H = np.asarray(H, dtype=float)
    keep = [i for i in range(H.shape[1]) if np.any(H[:, i] != 0.0)]
    return Zonotope(
        center=-np.asarray(G, dtype=float),
        generators=(K * H[:, keep]).T,
        columns=tuple(keep),
        input_count=H.shape[1],
        input_max=float(K),
    )


def support(z: Zonotope, direction) -> SupportResult:
    direction = np.asarray(direction, dtype=float)
    norm = np.linalg.norm(direction)
    if norm == 0.0:
        raise ValueError("direction must be nonzero")
    direction = direction / norm
    proj = z.generators @ direction
    active = proj > 0.0
    lifts = np.zeros(z.input_count)
    lifts[np.asarray(z.columns, dtype=int)[active]] = z.input_max
    value = float(direction @ z.center + proj[active].sum())
    return SupportResult(value=value, maximizer=lifts)


def facet_normals(z: Zonotope) -> np.ndarray:
    """Unit normals of every facet of ``z`` (both orientations), shape ``(k, dim)``."""
    return z._facets[0].copy()


def facet_margin(z: Zonotope, point=None):
    """Smallest facet slack ``h(n) - n.point`` and the facet normal attaining it.

    Positive iff ``point`` lies strictly inside ``z``.
    """
    normals, offsets = z._facets
    point = np.zeros(z.dim) if point is None else np.asarray(point, dtype=float)
    slack = offsets - normals @ point
    i = int(np.argmin(slack))
    return float(slack[i]), normals[i].copy()


def zonotope_contains(z: Zonotope, point, tol: float = 1e-9):
    """Membership test; ``point`` may be a single vector or an ``(n, dim)`` array."""
    normals, offsets = z._facets
    pts = np.asarray(point, dtype=float)
    inside = np.all(np.atleast_2d(pts) @ normals.T <= offsets + tol, axis=1)
    return bool(inside[0]) if pts.ndim == 1 else inside


def orthogonal_complement_normal(z: Zonotope) -> np.ndarray:
    """A unit vector orthogonal to every generator of a degenerate zonotope."""
    if len(z.generators) == 0:
        n = np.zeros(z.dim)
        n[0] = 1.0
        return n
    _, s, vt = np.linalg.svd(z.generators, full_matrices=True)
    return vt[-1] / np.linalg.norm(vt[-1])


@dataclass(frozen=True)
class HPolytope:
    """``{x : lower_i <= a_i . x <= upper_i}``."""

    normals: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    rows: tuple = field(default=())  # source row indices

    def __post_init__(self):
        normals = np.atleast_2d(np.asarray(self.normals, dtype=float))
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        if np.any(np.linalg.norm(normals, axis=1) == 0.0):
            raise ValueError("zero normals are not allowed")
        if np.any(lower > upper):
            raise ValueError("lower bound exceeds upper bound")
        object.__setattr__(self, "normals", normals)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        if not self.rows:
            object.__setattr__(self, "rows", tuple(range(len(normals))))

    @property
    def dim(self) -> int:
        return self.normals.shape[1]

    def __len__(self):
        return len(self.normals)

    def contains(self, points, tol: float = 0.0):
        pts = np.asarray(points, dtype=float)
        vals = np.atleast_2d(pts) @ self.normals.T
        ok = np.all((vals >= self.lower - tol) & (vals <= self.upper + tol), axis=1)
        return bool(ok[0]) if pts.ndim == 1 else ok

    def chebyshev_radius(self) -> float:
        """Radius of the largest inscribed ball (0 or negative when the interior is empty)."""
        norms = np.linalg.norm(self.normals, axis=1)
        A = np.vstack([
            np.hstack([self.normals, norms[:, None]]),
            np.hstack([-self.normals, norms[:, None]]),
        ])
        b = np.concatenate([self.upper, -self.lower])
        c = np.zeros(self.dim + 1)
        c[-1] = -1.0
        bounds = [(None, None)] * self.dim + [(None, None)]
        res = linprog(c, A_ub=A, b_ub=b, bounds=bounds, method="highs")
        if res.status == 3:  # unbounded: a flat row pair cannot hold any ball
            return float("inf")
        if not res.success:
            return float("-inf")
        return float(res.x[-1])


def allocation_polytope(P, G, K: float) -> HPolytope:
    """``{u : P (u + G) in [0, K]^m}``, one row per nonzero row of ``P``."""
    P = P.P if hasattr(P, "P") else np.asarray(P, dtype=float)
    G = np.asarray(G, dtype=float)
    keep = [i for i in range(P.shape[0]) if np.any(P[i] != 0.0)]
    normals = P[keep]
    shift = normals @ G
    return HPolytope(normals=normals, lower=-shift, upper=K - shift, rows=tuple(keep))


def hpoly_interior_margin(p: HPolytope, point=None) -> float:
    """Smallest normalized slack of ``point``; positive iff strictly interior."""
    if len(p) == 0:
        raise ValueError("polytope has no rows")
    point = np.zeros(p.dim) if point is None else np.asarray(point, dtype=float)
    vals = p.normals @ point
    norms = np.linalg.norm(p.normals, axis=1)
    slack = np.minimum(vals - p.lower, p.upper - vals) / norms
    return float(np.min(slack))


def hpoly_sample(p: HPolytope, bounding: Zonotope, count: int, seed: int,
                 max_attempts: int | None = None, batch: int = 100_000) -> np.ndarray:
    """Seeded rejection sampling from ``bounding``'s axis-aligned box.

    Returns exactly ``count`` points, or raises :class:`SamplingExhausted`
    after ``max_attempts`` draws (default ``10**6 * count``).
    """
    if len(p) == 0:
        raise ValueError("polytope has no rows")
    if max_attempts is None:
        max_attempts = 10**6 * count
    rng = np.random.default_rng(seed)
    lo, hi = bounding.bounding_box()
    accepted = []
    have = 0
    drawn = 0
    while have < count:
        if drawn >= max_attempts:
            raise SamplingExhausted(
                f"accepted {have} of {count} points after {drawn} draws; the polytope is (nearly) flat"
            )
        n = min(batch, max_attempts - drawn)
        pts = rng.uniform(lo, hi, size=(n, p.dim))
        drawn += n
        ok = pts[p.contains(pts)]
        accepted.append(ok)
        have += len(ok)
    return np.vstack(accepted)[:count]
