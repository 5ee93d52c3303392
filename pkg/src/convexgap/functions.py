"""Function oracles: the contract the samplers consume, plus built-ins.

An oracle bundles value/gradient callables with optional curvature
information: a classical Hessian where one exists, an exact predicate for
twice-differentiability, a closed-form Hessian vertex list where known,
and a Lipschitz bound for the gradient over a box.  Built-in families keep
closed-form sets everywhere, which is what makes the sampled estimates
testable against ground truth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Mapping

import numpy as np

from .hessian_set import HessianVertexList
from .spectral import ORTH_TOL, SymMatrix, eigenvalues

# Slack allowed in the gradient-monotonicity convexity probe.
CONVEXITY_TOL = 1e-8
# Hausdorff slack between declared limiting sets and values of hessian_at
# approaching the distinguished point.
HULL_AGREEMENT_TOL = 1e-6

Region = tuple[np.ndarray, np.ndarray]


def _always(x) -> bool:
    return True


@dataclass(frozen=True)
class FunctionOracle:
    """Callable bundle describing one function to the samplers.

    Only dim, value, and gradient are mandatory.  hessian_at may assume it
    is called only where is_differentiable2 holds.  kinks lists curvature
    breakpoints of one-dimensional oracles (used to split quadrature
    panels); leave it empty elsewhere.
    """

    dim: int
    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    hessian_at: Callable[[np.ndarray], SymMatrix] | None = None
    is_differentiable2: Callable[[np.ndarray], bool] = _always
    exact_hessian_set: Callable[[np.ndarray], HessianVertexList] | None = None
    lipschitz_grad_bound: Callable[[Region], float] | None = None
    domain: Region | None = None
    kinks: tuple[float, ...] = ()
    name: str = ""

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("oracle dimension must be at least 1")


@dataclass(frozen=True)
class PiecewiseQuadratic1D:
    """One-dimensional quadratic with different curvatures on each side.

    value(t) = a/2 t^2 for t >= 0 and b/2 t^2 for t < 0.  The gradient is
    Lipschitz; the second derivative jumps at the origin when a != b, where
    the limiting curvature set is the segment [min(a, b), max(a, b)].
    """

    a: float
    b: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValueError("curvatures must be finite")

    def value(self, t: float) -> float:
        c = self.a if t >= 0.0 else self.b
        return 0.5 * c * t * t

    def slope(self, t: float) -> float:
        if t > 0.0:
            return self.a * t
        if t < 0.0:
            return self.b * t
        return 0.0

    def curvature(self, t: float) -> float:
        if t == 0.0 and self.a != self.b:
            raise ValueError("curvature undefined at the breakpoint")
        return self.a if t >= 0.0 else self.b

    def curvature_set(self, t: float) -> tuple[float, ...]:
        if t > 0.0:
            return (self.a,)
        if t < 0.0:
            return (self.b,)
        if self.a == self.b:
            return (self.a,)
        return (min(self.a, self.b), max(self.a, self.b))

    def oracle(self, name: str = "pw_quad") -> FunctionOracle:
        pq = self

        def hessian_at(x):
            return SymMatrix.from_array([[pq.curvature(float(x[0]))]])

        return FunctionOracle(
            dim=1,
            value=lambda x: pq.value(float(x[0])),
            gradient=lambda x: np.array([pq.slope(float(x[0]))]),
            hessian_at=hessian_at,
            is_differentiable2=lambda x: pq.a == pq.b or float(x[0]) != 0.0,
            exact_hessian_set=lambda x: HessianVertexList.from_scalars(
                pq.curvature_set(float(x[0])), exact=True),
            lipschitz_grad_bound=lambda region: max(abs(pq.a), abs(pq.b)),
            kinks=(0.0,) if pq.a != pq.b else (),
            name=name)


def _make_neg_cos_sum() -> FunctionOracle:
    def hessian_at(x):
        return SymMatrix.diagonal(np.cos(x))

    return FunctionOracle(
        dim=2,
        value=lambda x: float(-np.cos(x[0]) - np.cos(x[1])),
        gradient=lambda x: np.sin(x),
        hessian_at=hessian_at,
        exact_hessian_set=lambda x: HessianVertexList.from_matrices(
            [np.diag(np.cos(x))], exact=True),
        lipschitz_grad_bound=lambda region: 1.0,
        name="neg_cos_sum")


def _make_quadratic(q: SymMatrix) -> FunctionOracle:
    spec_norm = float(np.max(np.abs(eigenvalues(q))))
    entries = q.entries

    return FunctionOracle(
        dim=q.dim,
        value=lambda x: 0.5 * float(x @ entries @ x),
        gradient=lambda x: entries @ x,
        hessian_at=lambda x: q,
        exact_hessian_set=lambda x: HessianVertexList(
            dim=q.dim, vertices=(q,), exact=True),
        lipschitz_grad_bound=lambda region: spec_norm,
        name="quadratic")


def _make_convex_smooth(dim: int) -> FunctionOracle:
    def lip(region: Region) -> float:
        lo, hi = (np.asarray(r, dtype=float) for r in region)
        return float(np.cosh(np.max(np.maximum(np.abs(lo), np.abs(hi)))))

    return FunctionOracle(
        dim=dim,
        value=lambda x: float(np.sum(np.cosh(x))),
        gradient=lambda x: np.sinh(x),
        hessian_at=lambda x: SymMatrix.diagonal(np.cosh(x)),
        exact_hessian_set=lambda x: HessianVertexList.from_matrices(
            [np.diag(np.cosh(x))], exact=True),
        lipschitz_grad_bound=lip,
        name="convex_smooth")


def _require_params(name: str, params: Mapping, required: set[str],
                    optional: set[str] = frozenset()) -> None:
    keys = set(params)
    missing = required - keys
    if missing:
        raise ValueError(f"{name} needs parameters {sorted(missing)}")
    unknown = keys - required - optional
    if unknown:
        raise ValueError(f"{name} got unknown parameters {sorted(unknown)}")


def make_builtin(family: str, params: Mapping | None = None) -> FunctionOracle:
    """Construct a built-in oracle by family name.

    Families: neg_cos_sum (no params), pw_quad (a, b), kink, mixed
    (no params), quadratic (scalar q, or matrix as nested lists),
    convex_smooth (optional dim, default 2).
    """
    params = dict(params or {})
    if family == "neg_cos_sum":
        _require_params(family, params, set())
        return _make_neg_cos_sum()
    if family == "pw_quad":
        _require_params(family, params, {"a", "b"})
        return PiecewiseQuadratic1D(float(params["a"]), float(params["b"])).oracle()
    if family == "kink":
        _require_params(family, params, set())
        return PiecewiseQuadratic1D(-1.0, -3.0).oracle(name="kink")
    if family == "mixed":
        _require_params(family, params, set())
        return PiecewiseQuadratic1D(1.0, -1.0).oracle(name="mixed")
    if family == "quadratic":
        _require_params(family, params, set(), optional={"q", "matrix"})
        if ("q" in params) == ("matrix" in params):
            raise ValueError("quadratic needs exactly one of 'q' or 'matrix'")
        if "q" in params:
            mat = SymMatrix.from_array([[float(params["q"])]])
        else:
            mat = SymMatrix.from_array(params["matrix"], symmetrize=False)
        return _make_quadratic(mat)
    if family == "convex_smooth":
        _require_params(family, params, set(), optional={"dim"})
        return _make_convex_smooth(int(params.get("dim", 2)))
    raise ValueError(f"unknown function family {family!r}")


def oracle_from_config(config: Mapping) -> FunctionOracle:
    """Build an oracle from {'family': ..., 'params': {...}}."""
    if "family" not in config:
        raise ValueError("function config needs a 'family' key")
    unknown = set(config) - {"family", "params"}
    if unknown:
        raise ValueError(f"unknown function config keys {sorted(unknown)}")
    return make_builtin(config["family"], config.get("params"))


def compose_sum(f: FunctionOracle, g: FunctionOracle) -> FunctionOracle:
    """Pointwise sum of two oracles.

    The limiting Hessian set of a sum is only contained in the Minkowski
    sum of the parts, so exact_hessian_set is deliberately left empty and
    the sum must be sampled.
    """
    if f.dim != g.dim:
        raise ValueError("cannot sum oracles of different dimensions")
    hessian_at = None
    if f.hessian_at is not None and g.hessian_at is not None:
        fh, gh = f.hessian_at, g.hessian_at

        def hessian_at(x):
            return fh(x) + gh(x)

    lip = None
    if f.lipschitz_grad_bound is not None and g.lipschitz_grad_bound is not None:
        fl, gl = f.lipschitz_grad_bound, g.lipschitz_grad_bound

        def lip(region):
            return fl(region) + gl(region)

    domain = None
    if f.domain is not None or g.domain is not None:
        boxes = [b for b in (f.domain, g.domain) if b is not None]
        lo = np.max(np.stack([np.asarray(b[0], dtype=float) for b in boxes]), axis=0)
        hi = np.min(np.stack([np.asarray(b[1], dtype=float) for b in boxes]), axis=0)
        domain = (lo, hi)

    return FunctionOracle(
        dim=f.dim,
        value=lambda x: f.value(x) + g.value(x),
        gradient=lambda x: f.gradient(x) + g.gradient(x),
        hessian_at=hessian_at,
        is_differentiable2=lambda x: f.is_differentiable2(x) and g.is_differentiable2(x),
        exact_hessian_set=None,
        lipschitz_grad_bound=lip,
        domain=domain,
        kinks=tuple(sorted(set(f.kinks) | set(g.kinks))),
        name=f"{f.name}+{g.name}")


def rotate(f: FunctionOracle, u) -> FunctionOracle:
    """Precompose with an orthogonal matrix: g(z) = f(U z).

    Gradients map as U^T grad f(U z) and Hessians by congruence
    U^T H U.  Rejects matrices that fail the orthogonality tolerance.
    Any box domain is dropped (a rotated box is no longer a box), so
    rotation is meant for oracles with unrestricted domain.
    """
    u = np.asarray(u, dtype=float)
    if u.shape != (f.dim, f.dim):
        raise ValueError(f"rotation must be {f.dim}x{f.dim}, got {u.shape}")
    if float(np.max(np.abs(u @ u.T - np.eye(f.dim)))) > ORTH_TOL:
        raise ValueError("matrix is not orthogonal within tolerance")

    def congruence(h: SymMatrix) -> SymMatrix:
        return SymMatrix.from_array(u.T @ h.entries @ u)

    hessian_at = None
    if f.hessian_at is not None:
        fh = f.hessian_at

        def hessian_at(z):
            return congruence(fh(u @ z))

    exact = None
    if f.exact_hessian_set is not None:
        fe = f.exact_hessian_set

        def exact(z):
            hull = fe(u @ z)
            return HessianVertexList.from_matrices(
                [congruence(v) for v in hull.vertices], exact=hull.exact)

    lip = None
    if f.lipschitz_grad_bound is not None:
        fl = f.lipschitz_grad_bound

        def lip(region):
            lo, hi = (np.asarray(r, dtype=float) for r in region)
            corners = np.stack([u @ c for c in _box_corners(lo, hi)])
            return fl((corners.min(axis=0), corners.max(axis=0)))

    return FunctionOracle(
        dim=f.dim,
        value=lambda z: f.value(u @ z),
        gradient=lambda z: u.T @ f.gradient(u @ z),
        hessian_at=hessian_at,
        is_differentiable2=lambda z: f.is_differentiable2(u @ z),
        exact_hessian_set=exact,
        lipschitz_grad_bound=lip,
        name=f"rot({f.name})")


def _box_corners(lo: np.ndarray, hi: np.ndarray):
    d = lo.shape[0]
    for mask in range(2 ** d):
        yield np.array([hi[i] if (mask >> i) & 1 else lo[i] for i in range(d)])


def embed_along(f: FunctionOracle, direction) -> FunctionOracle:
    """Lift a one-dimensional oracle to R^d along a unit direction u.

    g(x) = f(u . x); the Hessian where it exists is f''(u . x) u u^T.
    """
    if f.dim != 1:
        raise ValueError("embed_along expects a one-dimensional oracle")
    u = np.asarray(direction, dtype=float).reshape(-1)
    if abs(float(np.linalg.norm(u)) - 1.0) > ORTH_TOL:
        raise ValueError("direction must be a unit vector")
    outer = np.outer(u, u)
    dim = u.shape[0]

    def t_of(x) -> np.ndarray:
        return np.array([float(u @ x)])

    hessian_at = None
    if f.hessian_at is not None:
        fh = f.hessian_at

        def hessian_at(x):
            c = float(fh(t_of(x)).entries[0, 0])
            return SymMatrix.from_array(c * outer)

    exact = None
    if f.exact_hessian_set is not None:
        fe = f.exact_hessian_set

        def exact(x):
            hull = fe(t_of(x))
            return HessianVertexList.from_matrices(
                [float(v.entries[0, 0]) * outer for v in hull.vertices],
                exact=hull.exact)

    lip = None
    if f.lipschitz_grad_bound is not None:
        fl = f.lipschitz_grad_bound

        def lip(region):
            lo, hi = (np.asarray(r, dtype=float) for r in region)
            ts = [float(u @ c) for c in _box_corners(lo, hi)]
            return fl((np.array([min(ts)]), np.array([max(ts)])))

    return FunctionOracle(
        dim=dim,
        value=lambda x: f.value(t_of(x)),
        gradient=lambda x: float(f.gradient(t_of(x))[0]) * u,
        hessian_at=hessian_at,
        is_differentiable2=lambda x: f.is_differentiable2(t_of(x)),
        exact_hessian_set=exact,
        lipschitz_grad_bound=lip,
        name=f"embed({f.name})")


def without_hessian(f: FunctionOracle) -> FunctionOracle:
    """Copy of an oracle stripped to value/gradient information only."""
    return replace(f, hessian_at=None, exact_hessian_set=None)


def check_convex_on_segment(f: FunctionOracle, p, q, n: int = 64) -> bool:
    """Gradient-monotonicity convexity probe on the segment [p, q].

    Samples n points (endpoints included) and requires
    <grad f(y) - grad f(z), y - z> >= -CONVEXITY_TOL * |y - z|^2
    for every pair.  A True answer is evidence, not proof.
    """
    if n < 2:
        raise ValueError("need at least two sample points")
    p = np.asarray(p, dtype=float).reshape(-1)
    q = np.asarray(q, dtype=float).reshape(-1)
    if p.shape[0] != f.dim or q.shape[0] != f.dim:
        raise ValueError("segment endpoints must match the oracle dimension")
    ts = np.linspace(0.0, 1.0, n)
    pts = [(1.0 - t) * p + t * q for t in ts]
    grads = [f.gradient(y) for y in pts]
    for i in range(n):
        for j in range(i + 1, n):
            dy = pts[i] - pts[j]
            inner = float((grads[i] - grads[j]) @ dy)
            if inner < -CONVEXITY_TOL * float(dy @ dy):
                return False
    return True
