"""Mollified Hessians and the smoothing consistency check.

Convolving a function with a scaled even bump gives a smooth surrogate
whose Hessian at x is the bump-weighted average of nearby classical
Hessians.  As the bump radius shrinks along an approach sequence, those
averages must land inside the (sampled or exact) Hessian hull at the base
point, and their ell values inside the index interval.  The convergence is
one-sided: mollified limits are members of the hull, but need not reach
every member.

Quadrature is tensor-product Gauss-Legendre on the bump support, with
panels split at declared curvature breakpoints of one-dimensional oracles
so piecewise integrands are handled exactly.  Supported for dim <= 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import IntegrationError
from .hessian_set import (MEMBERSHIP_TOL, SamplingConfig,
                          hull_membership_distance, sample_hessian_set)
from .hull_index import INTERVAL_SLACK, loc_lower, loc_upper
from .spectral import SymMatrix, ell

_NORMALIZATION_POINTS = 512


def _bump_raw(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - t[inside] ** 2))
    return out


def _quartic_raw(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    out[inside] = (1.0 - t[inside] ** 2) ** 2
    return out


_PROFILES = {"bump": _bump_raw, "quartic": _quartic_raw}


@lru_cache(maxsize=None)
def _profile_mass(profile: str) -> float:
    nodes, weights = np.polynomial.legendre.leggauss(_NORMALIZATION_POINTS)
    return float(np.sum(weights * _PROFILES[profile](nodes)))


def profile_density(profile: str, t) -> np.ndarray:
    """Normalized even mollifier profile on [-1, 1]."""
    if profile not in _PROFILES:
        raise ValueError(f"unknown mollifier profile {profile!r}")
    return _PROFILES[profile](np.asarray(t, dtype=float)) / _profile_mass(profile)


@dataclass(frozen=True)
class MollifierConfig:
    """Shrinking-radius schedule and quadrature resolution."""

    epsilons: tuple[float, ...] = (1e-1, 1e-2, 1e-3)
    quadrature_points: int = 65
    profile: str = "bump"

    def __post_init__(self):
        eps = tuple(float(e) for e in self.epsilons)
        object.__setattr__(self, "epsilons", eps)
        if not eps or any(e <= 0 for e in eps):
            raise ValueError("epsilons must be positive")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ValueError("epsilons must be strictly decreasing")
        if self.quadrature_points < 2:
            raise ValueError("quadrature_points must be at least 2")
        if self.profile not in _PROFILES:
            raise ValueError(f"unknown mollifier profile {self.profile!r}")

    def to_dict(self) -> dict:
        return {"epsilons": list(self.epsilons),
                "quadrature_points": self.quadrature_points,
                "profile": self.profile}

    @classmethod
    def from_dict(cls, data: dict) -> "MollifierConfig":
        kwargs = dict(data)
        unknown = set(kwargs) - {"epsilons", "quadrature_points", "profile"}
        if unknown:
            raise ValueError(f"unknown mollifier options: {sorted(unknown)}")
        if "epsilons" in kwargs:
            kwargs["epsilons"] = tuple(float(e) for e in kwargs["epsilons"])
        return cls(**kwargs)


def mollifier_mass(cfg: MollifierConfig, dim: int = 1) -> float:
    """Quadrature mass of the normalized profile at the configured resolution."""
    nodes, weights = np.polynomial.legendre.leggauss(cfg.quadrature_points)
    mass1 = float(np.sum(weights * profile_density(cfg.profile, nodes)))
    return mass1 ** dim


def _panel_breaks(f, x: float, eps: float) -> list[float]:
    breaks = [-1.0, 1.0]
    for kink in f.kinks:
        t = (x - kink) / eps
        if -1.0 < t < 1.0:
            breaks.append(t)
    return sorted(breaks)


def _hessian_entries(f, z: np.ndarray) -> np.ndarray:
    if not f.is_differentiable2(z):
        raise IntegrationError(
            f"integrand hit a point without a classical Hessian at {z.tolist()}")
    return f.hessian_at(z).entries


def mollified_hessian(f, x, eps: float, cfg: MollifierConfig | None = None) -> SymMatrix:
    """Hessian of the mollified function at x for bump radius eps.

    Computes the bump-weighted average of f's classical Hessians over the
    ball of radius eps around x.  Requires an oracle with hessian_at and
    dim <= 2.  Raises IntegrationError if a quadrature node lands where
    the Hessian is undefined (panel splitting avoids this for declared
    one-dimensional breakpoints).
    """
    if cfg is None:
        cfg = MollifierConfig()
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    if f.hessian_at is None:
        raise ValueError("mollification needs an oracle with hessian_at")
    if f.dim > 2:
        raise ValueError("mollified Hessians are supported for dim <= 2")
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != f.dim:
        raise ValueError(f"point has dimension {x.shape[0]}, oracle wants {f.dim}")
    if f.domain is not None:
        lo, hi = (np.asarray(r, dtype=float) for r in f.domain)
        if np.any(x - eps < lo) or np.any(x + eps > hi):
            raise ValueError("mollifier support leaves the oracle domain")

    nodes, weights = np.polynomial.legendre.leggauss(cfg.quadrature_points)
    acc = np.zeros((f.dim, f.dim))
    if f.dim == 1:
        breaks = _panel_breaks(f, float(x[0]), eps)
        for lo_t, hi_t in zip(breaks, breaks[1:]):
            half = 0.5 * (hi_t - lo_t)
            mid = 0.5 * (hi_t + lo_t)
            ts = mid + half * nodes
            ws = half * weights * profile_density(cfg.profile, ts)
            for t, wt in zip(ts, ws):
                acc += wt * _hessian_entries(f, x - eps * t)
    else:
        dens = profile_density(cfg.profile, nodes)
        for i, t1 in enumerate(nodes):
            for j, t2 in enumerate(nodes):
                wt = weights[i] * weights[j] * dens[i] * dens[j]
                z = x - eps * np.array([t1, t2])
                acc += wt * _hessian_entries(f, z)
    return SymMatrix.from_array(acc)


@dataclass(frozen=True)
class MollificationSample:
    eps: float
    distance: float
    ell_value: float
    passed: bool

    def to_dict(self) -> dict:
        return {"eps": self.eps, "distance": self.distance,
                "ell": self.ell_value, "pass": self.passed}


@dataclass(frozen=True)
class MollificationReport:
    """Shrinking-radius membership record for one base point.

    passed is the limit criterion: every ell value inside the index
    interval (with sampling slack) and the final, smallest-radius distance
    within MEMBERSHIP_TOL of the hull.  Each entry additionally records
    whether both conditions hold at its own radius.
    """

    samples: tuple[MollificationSample, ...]
    interval: tuple[float, float]
    passed: bool

    def to_json_entries(self) -> list[dict]:
        return [s.to_dict() for s in self.samples]


def mollification_membership_check(
        f, x, cfg: MollifierConfig | None = None,
        sampling: SamplingConfig | None = None) -> MollificationReport:
    """Check that mollified Hessians fall into the Hessian hull at x.

    For each radius eps, the base point is perturbed to x + eps^2 u along
    a seeded random unit direction, the mollified Hessian there is
    projected onto the hull at x, and its ell value is compared against
    [loc_low, loc_high] with slack.  Membership is one-sided: a passing
    report says mollified curvature limits into the hull, nothing more.
    """
    if cfg is None:
        cfg = MollifierConfig()
    if sampling is None:
        sampling = SamplingConfig()
    x = np.asarray(x, dtype=float).reshape(-1)
    hull = sample_hessian_set(f, x, sampling)
    low, _ = loc_lower(hull)
    high, _ = loc_upper(hull)
    rng = np.random.default_rng([sampling.seed, 97])
    u = rng.standard_normal(f.dim)
    u /= float(np.linalg.norm(u))
    samples = []
    for eps in cfg.epsilons:
        x_eps = x + eps * eps * u
        q = mollified_hessian(f, x_eps, eps, cfg)
        dist = hull_membership_distance(hull, q)
        val = ell(q)
        in_interval = low - INTERVAL_SLACK <= val <= high + INTERVAL_SLACK
        samples.append(MollificationSample(
            eps=float(eps), distance=dist, ell_value=val,
            passed=bool(in_interval and dist <= MEMBERSHIP_TOL)))
    overall = all(low - INTERVAL_SLACK <= s.ell_value <= high + INTERVAL_SLACK
                  for s in samples) and samples[-1].distance <= MEMBERSHIP_TOL
    return MollificationReport(samples=tuple(samples), interval=(low, high),
                               passed=bool(overall))
