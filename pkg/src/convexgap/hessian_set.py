"""Finite vertex descriptions of generalized Hessian sets.

For a function with Lipschitz gradient the set of limiting Hessians at a
point is recovered numerically by sampling classical Hessians at nearby
twice-differentiable points over a schedule of shrinking radii.  A
candidate matrix is trusted only if it reappears (within a match
tolerance) at the two smallest radii, which approximates the limit
operation; survivors are deduplicated and vertices that are convex
combinations of the others are pruned away.
"""

from __future__ import annotations

import dataclasses
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import SamplingError
from .hull_index import project_onto_hull
from .spectral import SymMatrix

# Frobenius tolerance for membership of a matrix in a sampled hull.
MEMBERSHIP_TOL = 1e-6

_DEFAULT_RADII = tuple(1e-2 * 0.5 ** k for k in range(7))


@dataclass(frozen=True, eq=False)
class HessianVertexList:
    """Vertices of (an approximation to) a generalized Hessian set.

    exact=True marks closed-form sets; sampled sets carry the sampling
    schedule in radius_trace as (radius, candidate count) pairs.
    """

    dim: int
    vertices: tuple[SymMatrix, ...]
    radius_trace: tuple[tuple[float, int], ...] = ()
    exact: bool = False

    def __post_init__(self):
        if not self.vertices:
            raise ValueError("a vertex list needs at least one vertex")
        for v in self.vertices:
            if v.dim != self.dim:
                raise ValueError(
                    f"vertex dimension {v.dim} does not match hull dim {self.dim}")

    @classmethod
    def from_matrices(cls, mats: Sequence, exact: bool = False,
                      radius_trace=()) -> "HessianVertexList":
        verts = tuple(m if isinstance(m, SymMatrix) else SymMatrix.from_array(m)
                      for m in mats)
        if not verts:
            raise ValueError("a vertex list needs at least one vertex")
        return cls(dim=verts[0].dim, vertices=verts,
                   radius_trace=tuple(radius_trace), exact=exact)

    @classmethod
    def from_scalars(cls, values: Sequence[float], exact: bool = False) -> "HessianVertexList":
        return cls.from_matrices([np.array([[float(v)]]) for v in values],
                                 exact=exact)

    def stack(self) -> np.ndarray:
        """Vertices as one (m, d, d) array."""
        return np.stack([v.entries for v in self.vertices])

    def __len__(self) -> int:
        return len(self.vertices)


@dataclass(frozen=True)
class SamplingConfig:
    """Knobs for the shrinking-radius Hessian sampler.

    radii must be strictly decreasing and positive.  dedup_tol is a base
    factor: the effective tolerance scales with the empirical vertex norm
    as dedup_tol * (1 + max Frobenius norm); the cross-tier match
    tolerance is ten times that.  seed fixes every random draw, so equal
    configs reproduce identical vertex lists bit for bit.
    """

    radii: tuple[float, ...] = _DEFAULT_RADII
    samples_per_radius: int = 64
    fd_step_ratio: float = 1e-2
    seed: int = 0
    dedup_tol: float = 1e-4
    prefer_exact: bool = True

    def __post_init__(self):
        radii = tuple(float(r) for r in self.radii)
        object.__setattr__(self, "radii", radii)
        if not radii or any(r <= 0 for r in radii):
            raise ValueError("radii must be positive")
        if any(b >= a for a, b in zip(radii, radii[1:])):
            raise ValueError("radii must be strictly decreasing")
        if self.samples_per_radius < 1:
            raise ValueError("samples_per_radius must be at least 1")
        if not 0.0 < self.fd_step_ratio < 1.0:
            raise ValueError("fd_step_ratio must lie in (0, 1)")
        if self.dedup_tol <= 0.0:
            raise ValueError("dedup_tol must be positive")
        if int(self.seed) < 0:
            raise ValueError("seed must be a nonnegative integer")
        object.__setattr__(self, "seed", int(self.seed))

    def to_dict(self) -> dict:
        return {
            "radii": list(self.radii),
            "samples_per_radius": self.samples_per_radius,
            "fd_step_ratio": self.fd_step_ratio,
            "seed": self.seed,
            "dedup_tol": self.dedup_tol,
            "prefer_exact": self.prefer_exact,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SamplingConfig":
        kwargs = dict(data)
        unknown = set(kwargs) - {f.name for f in dataclasses.fields(cls)}
        if unknown:
            raise ValueError(f"unknown sampling options: {sorted(unknown)}")
        if "radii" in kwargs:
            kwargs["radii"] = tuple(float(r) for r in kwargs["radii"])
        return cls(**kwargs)


def _uniform_ball(rng: np.random.Generator, center: np.ndarray,
                  radius: float, count: int) -> np.ndarray:
    d = center.shape[0]
    g = rng.standard_normal((count, d))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    r = rng.random((count, 1)) ** (1.0 / d)
    return center + radius * r * g / norms


def _fd_hessian_of_gradient(f, y: np.ndarray, step: float) -> SymMatrix:
    """Central-difference Jacobian of the gradient, symmetrized."""
    d = y.shape[0]
    cols = np.empty((d, d))
    for j in range(d):
        e = np.zeros(d)
        e[j] = step
        cols[:, j] = (f.gradient(y + e) - f.gradient(y - e)) / (2.0 * step)
    return SymMatrix.from_array(cols)


def _dedup(mats: list[np.ndarray], tol: float) -> list[np.ndarray]:
    kept: list[np.ndarray] = []
    for m in mats:
        if all(float(np.linalg.norm(m - k)) > tol for k in kept):
            kept.append(m)
    return kept


def _prune_interior(mats: list[np.ndarray], tol: float) -> list[np.ndarray]:
    kept = list(mats)
    i = 0
    while i < len(kept) and len(kept) > 2:
        others = kept[:i] + kept[i + 1:]
        dist, _ = project_onto_hull(others, kept[i])
        if dist <= tol:
            kept.pop(i)
        else:
            i += 1
    return kept


def _check_margin(f, x: np.ndarray, cfg: SamplingConfig) -> None:
    if f.domain is None:
        return
    lo, hi = f.domain
    margin = max(cfg.radii) * (1.0 + cfg.fd_step_ratio)
    if np.any(x - margin < np.asarray(lo, dtype=float)) or \
            np.any(x + margin > np.asarray(hi, dtype=float)):
        raise ValueError(
            "point too close to the domain boundary for the sampling radii")


def sample_hessian_set(f, x, cfg: SamplingConfig | None = None) -> HessianVertexList:
    """Estimate the Hessian vertex list of f at x.

    If the oracle carries a closed-form set and cfg.prefer_exact is on,
    that set is returned with exact=True.  Otherwise Hessians are sampled
    at uniform points in shrinking balls around x (classical Hessians
    where the oracle provides them, central differences of the gradient
    otherwise), filtered for cross-tier convergence, deduplicated, and
    pruned of interior points.  Raises SamplingError when the smallest
    radius yields no twice-differentiable sample.
    """
    if cfg is None:
        cfg = SamplingConfig()
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != f.dim:
        raise ValueError(f"point has dimension {x.shape[0]}, oracle wants {f.dim}")
    if cfg.prefer_exact and f.exact_hessian_set is not None:
        hull = f.exact_hessian_set(x)
        if not hull.exact:
            hull = dataclasses.replace(hull, exact=True)
        return hull
    _check_margin(f, x, cfg)

    tiers: list[list[np.ndarray]] = []
    for k, eps in enumerate(cfg.radii):
        rng = np.random.default_rng([cfg.seed, k])
        points = _uniform_ball(rng, x, eps, cfg.samples_per_radius)
        step = cfg.fd_step_ratio * eps
        collected: list[np.ndarray] = []
        for y in points:
            if not f.is_differentiable2(y):
                continue
            if f.hessian_at is not None:
                h = f.hessian_at(y)
            else:
                h = _fd_hessian_of_gradient(f, y, step)
            collected.append(h.entries)
        tiers.append(collected)

    trace = tuple((float(eps), len(c)) for eps, c in zip(cfg.radii, tiers))
    smallest = tiers[-1]
    if not smallest:
        raise SamplingError(
            "no twice-differentiable sample at the smallest radius",
            per_tier_counts=tuple(len(c) for c in tiers))
    lhat = max(float(np.linalg.norm(m)) for m in smallest)
    dedup_tol = cfg.dedup_tol * (1.0 + lhat)
    match_tol = 10.0 * dedup_tol
    if len(tiers) >= 2 and tiers[-2]:
        prev = tiers[-2]
        converged = [m for m in smallest
                     if min(float(np.linalg.norm(m - p)) for p in prev) <= match_tol]
    else:
        converged = list(smallest)
    if not converged:
        warnings.warn("no candidate reappeared across the two smallest radii; "
                      "keeping all smallest-radius samples", stacklevel=2)
        converged = list(smallest)
    vertices = _dedup(converged, dedup_tol)
    vertices = _prune_interior(vertices, dedup_tol)
    return HessianVertexList(
        dim=f.dim,
        vertices=tuple(SymMatrix.from_array(v) for v in vertices),
        radius_trace=trace,
        exact=False)


def hull_membership_distance(hull: HessianVertexList, q) -> float:
    """Frobenius distance from a matrix to the convex hull of the vertices."""
    qm = q if isinstance(q, SymMatrix) else SymMatrix.from_array(q)
    if qm.dim != hull.dim:
        raise ValueError(f"matrix dimension {qm.dim} does not match hull dim {hull.dim}")
    dist, _ = project_onto_hull(hull.vertices, qm)
    return dist


def minkowski_sum(h1: HessianVertexList, h2: HessianVertexList) -> HessianVertexList:
    """Pairwise vertex sums, deduplicated and pruned of interior points.

    The convex hull of the result is the Minkowski sum of the two hulls.
    """
    if h1.dim != h2.dim:
        raise ValueError("hull dimensions differ")
    sums = [a.entries + b.entries for a in h1.vertices for b in h2.vertices]
    scale = max(float(np.linalg.norm(s)) for s in sums)
    tol = 1e-12 * (1.0 + scale)
    verts = _prune_interior(_dedup(sums, tol), tol)
    return HessianVertexList(
        dim=h1.dim,
        vertices=tuple(SymMatrix.from_array(v) for v in verts),
        radius_trace=(),
        exact=h1.exact and h2.exact)
