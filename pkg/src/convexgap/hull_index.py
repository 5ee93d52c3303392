"""Interval nonconvexity indices over finite vertex lists of Hessian hulls.

A hull is described by finitely many symmetric vertices; the object of
interest is the range of ell over their convex hull.  The upper endpoint
is exact: ell is convex (it is the nuclear-norm distance to the convex PSD
cone), so its supremum over a compact convex hull is attained at an extreme
point, hence at one of the vertices.  The lower endpoint is a convex
minimization over the weight simplex, handled by a linear-minimization
(Frank-Wolfe style) descent with the standard 2/(k+2) step.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from . import spectral
from .spectral import FLAT_TOL, SymMatrix, as_sym_matrix

if TYPE_CHECKING:  # pragma: no cover
    from .hessian_set import HessianVertexList

# Frank-Wolfe duality-gap stopping threshold and iteration cap.
FW_GAP_TOL = 1e-8
FW_MAX_ITER = 10_000
# Slack allowed on closed-form index identities.
INDEX_TOL = 1e-8
# Slack allowed when sampled convex combinations probe an interval.
INTERVAL_SLACK = 1e-3
# Slack for the upper-semicontinuity spot checks.
USC_TOL = 1e-6
# Interior probes drawn when estimating normalized bounds on general hulls.
N_DIRICHLET = 512

_SEGMENT_GRID_STEP = 1e-4
_PROJECTION_MAX_ITER = 4000


class ConvergenceWarning(UserWarning):
    """Raised (as a warning) when an optimizer returns its best iterate."""


@dataclass(frozen=True, eq=False)
class SimplexWeights:
    """Convex-combination weights: nonnegative, summing to one."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if w.size == 0 or not np.isfinite(w).all():
            raise ValueError("weights must be a nonempty finite vector")
        if w.min() < -1e-12:
            raise ValueError(f"negative weight {w.min():.3e}")
        w = np.clip(w, 0.0, None)
        total = w.sum()
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {total!r}, not 1")
        w = w / total
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)


@dataclass(frozen=True)
class NlocBounds:
    low: float
    high: float
    approximate: bool


@dataclass(frozen=True)
class NonconvexityInterval:
    """Pointwise nonconvexity summary of one Hessian hull.

    loc_low/loc_high bound ell over the hull; nloc_low/nloc_high bound the
    normalized ratio; conv_* = 1 - nloc_*; rho is the weak-convexity
    modulus (largest negative eigenvalue magnitude over the hull).
    """

    loc_low: float
    loc_high: float
    nloc_low: float
    nloc_high: float
    conv_low: float
    conv_high: float
    rho: float
    argmin_weights: tuple[float, ...]
    argmax_vertex: int
    exact: bool
    approximate_nloc: bool

    def __post_init__(self):
        if self.loc_low < -1e-12 or self.loc_low > self.loc_high + 1e-9:
            raise ValueError("inconsistent endpoints: "
                             f"[{self.loc_low}, {self.loc_high}]")
        for name in ("nloc_low", "nloc_high", "conv_low", "conv_high"):
            v = getattr(self, name)
            if not -1e-12 <= v <= 1.0 + 1e-12:
                raise ValueError(f"{name}={v} outside [0, 1]")
        if self.rho < 0.0:
            raise ValueError(f"negative modulus {self.rho}")

    def to_dict(self) -> dict:
        return {
            "loc_low": self.loc_low,
            "loc_high": self.loc_high,
            "nloc_low": self.nloc_low,
            "nloc_high": self.nloc_high,
            "conv_low": self.conv_low,
            "conv_high": self.conv_high,
            "rho": self.rho,
            "exact": self.exact,
            "approximate_nloc": self.approximate_nloc,
            "argmin_weights": list(self.argmin_weights),
            "argmax_vertex": self.argmax_vertex,
        }


def project_to_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort-based)."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    ks = np.arange(1, v.size + 1)
    feasible = u - (css - 1.0) / ks > 0
    k = ks[feasible][-1]
    tau = (css[k - 1] - 1.0) / k
    return np.maximum(v - tau, 0.0)


def _quad_obj(p: np.ndarray, b: np.ndarray, w: np.ndarray) -> float:
    return float(w @ p @ w - 2.0 * (b @ w))


def _polish_support(p: np.ndarray, b: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Active-set refinement of a simplex-constrained least-squares point."""
    m = w.size
    support = np.flatnonzero(w > 1e-10)
    if support.size == 0:
        support = np.array([int(np.argmax(w))])
    best = w
    for _ in range(2 * m + 2):
        k = support.size
        kkt = np.zeros((k + 1, k + 1))
        kkt[:k, :k] = 2.0 * p[np.ix_(support, support)]
        kkt[:k, k] = 1.0
        kkt[k, :k] = 1.0
        rhs = np.concatenate([2.0 * b[support], [1.0]])
        sol, *_ = np.linalg.lstsq(kkt, rhs, rcond=None)
        ws = sol[:k]
        if ws.min() < -1e-12:
            if k == 1:
                break
            support = np.delete(support, int(np.argmin(ws)))
            continue
        cand = np.zeros(m)
        cand[support] = np.clip(ws, 0.0, None)
        total = cand.sum()
        if total <= 0.0:
            break
        cand /= total
        if _quad_obj(p, b, cand) > _quad_obj(p, b, best) + 1e-15:
            break
        best = cand
        grad = 2.0 * (p @ cand - b)
        mu = -float(np.mean(grad[support]))
        off = np.setdiff1d(np.arange(m), support, assume_unique=False)
        if off.size == 0:
            break
        slack = grad[off] + mu
        worst = int(np.argmin(slack))
        if slack[worst] >= -1e-9 * (1.0 + abs(mu)):
            break
        support = np.sort(np.append(support, off[worst]))
    return best


def project_onto_hull(vertices: Sequence, target) -> tuple[float, np.ndarray]:
    """Frobenius least-squares projection of a matrix onto a vertex hull.

    Returns (distance, weights): the minimal Frobenius distance from the
    target to a convex combination of the vertices, and weights attaining
    it.  Accelerated projected gradient over the simplex plus an
    active-set polish; accurate to near machine precision on the small
    hulls this package works with.
    """
    mats = [np.asarray(v.entries if isinstance(v, SymMatrix) else v, dtype=float)
            for v in vertices]
    if not mats:
        raise ValueError("cannot project onto an empty hull")
    q = np.asarray(target.entries if isinstance(target, SymMatrix) else target,
                   dtype=float).ravel()
    a = np.stack([m.ravel() for m in mats])
    m = a.shape[0]
    if a.shape[1] != q.size:
        raise ValueError("dimension mismatch between hull and target")
    if m == 1:
        return float(np.linalg.norm(a[0] - q)), np.array([1.0])
    p = a @ a.T
    b = a @ q
    lip = 2.0 * max(float(np.linalg.norm(p)), 1e-30)
    w = np.full(m, 1.0 / m)
    y = w.copy()
    t = 1.0
    f_best = _quad_obj(p, b, w)
    w_best = w.copy()
    for _ in range(_PROJECTION_MAX_ITER):
        grad = 2.0 * (p @ y - b)
        w_new = project_to_simplex(y - grad / lip)
        f_new = _quad_obj(p, b, w_new)
        if f_new < f_best:
            f_best, w_best = f_new, w_new.copy()
        move = float(np.max(np.abs(w_new - w)))
        if f_new > _quad_obj(p, b, w) + 1e-18:
            # momentum overshoot: restart acceleration
            t = 1.0
            y = w_new.copy()
        else:
            t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
            y = w_new + ((t - 1.0) / t_new) * (w_new - w)
            t = t_new
        w = w_new
        if move <= 1e-15:
            break
    w = _polish_support(p, b, w_best)
    if _quad_obj(p, b, w) > f_best:
        w = w_best
    residual = a.T @ w - q
    return float(np.linalg.norm(residual)), w


def loc_upper(hull: "HessianVertexList") -> tuple[float, int]:
    """Maximum of ell over the hull and the attaining vertex index.

    Exact on the vertex list: ell is convex, so its supremum over the
    convex hull is attained at an extreme point.  Ties keep the lowest
    vertex index.
    """
    best = -math.inf
    idx = 0
    for i, v in enumerate(hull.vertices):
        val = spectral.ell(v)
        if val > best:
            best, idx = val, i
    if not hull.vertices:
        raise ValueError("empty hull")
    return best, idx


def _golden_min(g, lo: float, hi: float, tol: float = 1e-11
                ) -> tuple[float, float]:
    """Minimum of a convex scalar function over [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = float(lo), float(hi)
    h = b - a
    if h <= tol:
        t = (a + b) / 2.0
        return t, g(t)
    # fixed step count: the width test alone can spin forever once the
    # interval reaches the rounding floor of large endpoints
    steps = int(math.ceil(math.log(h / tol) / math.log(1.0 / invphi))) + 2
    c = b - invphi * h
    d = a + invphi * h
    gc, gd = g(c), g(d)
    for _ in range(steps):
        if b - a <= tol:
            break
        if gc < gd:
            b = d
            d, gd = c, gc
            c = b - invphi * (b - a)
            gc = g(c)
        else:
            a = c
            c, gc = d, gd
            d = a + invphi * (b - a)
            gd = g(d)
    return (c, gc) if gc < gd else (d, gd)


_POLISH_MAX_ROUNDS = 120
_FW_STALL_WINDOW = 300


def _edge_scan(verts: np.ndarray) -> tuple[np.ndarray, float]:
    """Exact minimum of the objective over all vertices and simplex edges.

    Every 1D restriction of the objective is convex, so golden-section
    search resolves each edge; for two-vertex hulls this is exhaustive.
    """
    m = verts.shape[0]
    best_val = math.inf
    best_w = None
    for j in range(m):
        vj = spectral._ell_raw(verts[j])
        if vj < best_val:
            best_val = vj
            best_w = np.zeros(m)
            best_w[j] = 1.0
    for i in range(m):
        for j in range(i + 1, m):
            delta = verts[j] - verts[i]

            def slice_val(t, base=verts[i], delta=delta):
                return spectral._ell_raw(base + t * delta)

            t_star, v_star = _golden_min(slice_val, 0.0, 1.0)
            if v_star < best_val:
                best_val = v_star
                best_w = np.zeros(m)
                best_w[i] = 1.0 - t_star
                best_w[j] = t_star
    return best_w, best_val


def _polish_from(verts: np.ndarray, w0: np.ndarray, v0: float
                 ) -> tuple[np.ndarray, float, bool]:
    """Exact-line-search descent refining one weight vector on the simplex.

    Directions are rays through each vertex (both senses, over the full
    feasible range) and pairwise weight transfers; every 1D slice of the
    objective is convex, so golden-section search resolves it.  Returns
    (weights, value, stable) where stable means a full round of searches
    produced no further improvement.
    """
    m = verts.shape[0]
    w = w0.copy()
    val = v0
    if m == 1:
        return w, val, True
    stable = False
    for _ in range(_POLISH_MAX_ROUNDS):
        base = np.einsum("i,ijk->jk", w, verts)
        best_gain = 1e-15 * (1.0 + abs(val))
        best_w = None
        best_val = val
        moves = []
        for j in range(m):
            # parameterize the full ray through vertex j from the opposite
            # face: the raw ray parameter -w_j/(1-w_j) blows up as w_j -> 1
            # and the huge bracket turns into cancellation in the slice
            face = w.copy()
            face[j] = 0.0
            s_face = face.sum()
            if s_face <= 1e-15:
                continue
            face /= s_face
            face_base = np.einsum("i,ijk->jk", face, verts)

            def ray_w(s, face=face, j=j):
                out = (1.0 - s) * face
                out[j] += s
                return out

            moves.append((face_base, verts[j] - face_base, 0.0, 1.0, ray_w))
        for i in range(m):
            for j in range(i + 1, m):
                lo, hi = -w[j], w[i]
                if hi - lo <= 1e-14:
                    continue

                def pair_w(t, i=i, j=j):
                    out = w.copy()
                    out[i] -= t
                    out[j] += t
                    return out

                moves.append((base, verts[j] - verts[i], lo, hi, pair_w))
        for slice_base, delta, lo, hi, to_weights in moves:
            def slice_val(t, delta=delta, slice_base=slice_base):
                return spectral._ell_raw(slice_base + t * delta)

            t_star, v_star = _golden_min(slice_val, lo, hi)
            for t_cand, v_cand in ((t_star, v_star), (lo, slice_val(lo)),
                                   (hi, slice_val(hi))):
                if val - v_cand <= best_gain:
                    continue
                w_cand = np.clip(to_weights(t_cand), 0.0, None)
                total = w_cand.sum()
                if not total > 0.0:
                    continue
                w_cand /= total
                # confirm at the renormalized point so the recorded value
                # always belongs to the weights we return
                actual = spectral._ell_raw(
                    np.einsum("i,ijk->jk", w_cand, verts))
                if val - actual > best_gain:
                    best_gain = val - actual
                    best_val = actual
                    best_w = w_cand
        if best_w is None:
            stable = True
            break
        w = best_w
        improvement = val - best_val
        val = best_val
        # gains this small cannot move the value at test tolerances, so a
        # round that produces nothing larger counts as converged
        if improvement <= 1e-12 * (1.0 + abs(val)):
            stable = True
            break
    return w, val, stable


def _refine_lower(verts: np.ndarray, w_fw: np.ndarray, v_fw: float
                  ) -> tuple[np.ndarray, float, bool]:
    """Refine the linear-step iterate: edge scan plus multi-start polish.

    The fixed-step descent stalls near kinked minimizers and its best
    iterate can sit in the wrong face of the simplex, so the polish also
    starts from the exact edge-scan winner and from the centroid.
    """
    m = verts.shape[0]
    if m == 1:
        return w_fw, spectral._ell_raw(verts[0]), True
    edge_w, edge_v = _edge_scan(verts)
    center = np.full(m, 1.0 / m)
    center_v = spectral._ell_raw(np.einsum("i,ijk->jk", center, verts))
    starts = [(w_fw, v_fw), (edge_w, edge_v), (center, center_v)]
    best_w, best_val, best_stable = w_fw, v_fw, False
    seen: list[np.ndarray] = []
    for w0, v0 in starts:
        if any(float(np.max(np.abs(w0 - s))) < 1e-12 for s in seen):
            continue
        seen.append(w0)
        w, val, stable = _polish_from(verts, w0, v0)
        if val < best_val - 1e-15:
            best_w, best_val, best_stable = w, val, stable
        elif stable and val <= best_val + 1e-15:
            best_stable = True
    return best_w, best_val, best_stable


def loc_lower(hull: "HessianVertexList", gap_tol: float = FW_GAP_TOL,
              max_iter: int = FW_MAX_ITER) -> tuple[float, SimplexWeights]:
    """Minimum of ell over the hull via linear-minimization descent.

    ell is convex but kinked where an eigenvalue crosses zero; a
    subgradient suffices for the descent and for the duality gap, which
    upper-bounds the suboptimality at every iterate.  The linear-step
    loop stops when the gap drops below gap_tol or after max_iter steps;
    the fixed 2/(k+2) steps zigzag near kinked minimizers, so the best
    iterate is then refined by exact line searches along simplex
    directions.  A ConvergenceWarning is issued only if neither the gap
    certificate nor the refinement stabilizes.  The result is clamped
    into [0, loc_upper(hull)].
    """
    verts = hull.stack()
    m = verts.shape[0]
    w = np.full(m, 1.0 / m)
    best_val = math.inf
    best_w = w.copy()
    converged = False
    last_improve = 0
    for k in range(max_iter):
        q = np.einsum("i,ijk->jk", w, verts)
        val, sub = spectral._ell_subgrad_raw(q)
        if val < best_val:
            if best_val - val > 1e-10 * (1.0 + abs(val)):
                last_improve = k
            best_val, best_w = val, w.copy()
        lin = np.einsum("ijk,jk->i", verts, sub)
        j = int(np.argmin(lin))
        gap = float(w @ lin - lin[j])
        if gap < gap_tol:
            converged = True
            break
        if k - last_improve >= _FW_STALL_WINDOW:
            # zigzag regime: fixed steps stop improving near a kinked
            # minimizer; hand over to the line-search refinement
            break
        step = 2.0 / (k + 2.0)
        w = (1.0 - step) * w
        w[j] += step
    polished_w, polished_val, stable = _refine_lower(verts, best_w, best_val)
    if polished_val < best_val:
        best_val, best_w = polished_val, polished_w
    if not (converged or stable) and m > 1:
        warnings.warn(
            "descent did not reach the gap tolerance; returning best iterate",
            ConvergenceWarning)
    upper, _ = loc_upper(hull)
    # + 0.0 drops the sign of a negative zero produced by the clamp
    value = min(max(best_val, 0.0), upper) + 0.0
    return value, SimplexWeights(best_w)


def rho_modulus(hull: "HessianVertexList") -> float:
    """Weak-convexity modulus: worst negative eigenvalue over the hull.

    The map Q -> max(0, -lambda_min(Q)) is convex, so the hull supremum is
    attained at a vertex.
    """
    if not hull.vertices:
        raise ValueError("empty hull")
    best = 0.0
    for v in hull.vertices:
        evals = spectral.eigenvalues(v)
        lam_min = float(evals[-1])
        tol = spectral.psd_tol(v.frobenius())
        gap = -lam_min if lam_min < -tol else 0.0
        if gap > best:
            best = gap
    return best


def _ratio_or_none(entries: np.ndarray) -> float | None:
    neg, total = spectral._classified_sums(entries)
    if total <= FLAT_TOL:
        return None
    return neg / total


def _segment_ratio_range(a: np.ndarray, b: np.ndarray) -> tuple[float, float]:
    """Exhaustive ratio scan over the segment [a, b], flat points skipped."""
    n = int(round(1.0 / _SEGMENT_GRID_STEP))
    lo, hi = math.inf, -math.inf
    if a.shape[0] == 1:
        # scalar segment: the ratio is 1 on the negative side, 0 on the
        # positive side, undefined at zero
        ts = np.linspace(0.0, 1.0, n + 1)
        qs = (1.0 - ts) * a[0, 0] + ts * b[0, 0]
        tol = FLAT_TOL
        neg_any = np.any(qs < -tol)
        pos_any = np.any(qs > tol)
        vals = []
        if neg_any:
            vals.append(1.0)
        if pos_any:
            vals.append(0.0)
        if not vals:
            return 0.0, 0.0
        return min(vals), max(vals)
    for i in range(n + 1):
        t = i / n
        r = _ratio_or_none((1.0 - t) * a + t * b)
        if r is None:
            continue
        lo = min(lo, r)
        hi = max(hi, r)
    if lo is math.inf:
        return 0.0, 0.0
    return lo, hi


def _refine_ratio(verts: np.ndarray, w0: np.ndarray, sign: float,
                  start: float) -> float:
    """Coordinate-wise local search moving weight mass toward each vertex."""
    m = verts.shape[0]
    w = w0.copy()
    best = start
    for step in (0.25, 0.05, 0.01, 2e-3):
        for _ in range(40):
            improved = False
            for i in range(m):
                cand = (1.0 - step) * w
                cand[i] += step
                r = _ratio_or_none(np.einsum("i,ijk->jk", cand, verts))
                if r is not None and sign * (r - best) > 1e-12:
                    w, best, improved = cand, r, True
            if not improved:
                break
    return best


def nloc_bounds(hull: "HessianVertexList", seed: int = 0) -> NlocBounds:
    """Bounds on the normalized nonconvexity ratio over the hull.

    Flat hulls (every vertex within FLAT_TOL of zero) return (0, 0) by
    convention.  Singletons and segments are resolved by direct evaluation
    or an exhaustive 1D grid and are not flagged approximate.  General
    hulls are probed at vertices, pairwise midpoints, and Dirichlet-random
    interior points, then refined by coordinate-wise search; those bounds
    carry approximate=True (an upper bound on the infimum, a lower bound
    on the supremum).
    """
    verts = hull.stack()
    m = verts.shape[0]
    if all(float(np.linalg.norm(v)) <= FLAT_TOL for v in verts):
        return NlocBounds(0.0, 0.0, False)
    if m == 1:
        r = spectral.normalized_ratio(hull.vertices[0])
        return NlocBounds(r, r, False)
    if hull.dim == 1 and m > 2:
        scalars = [float(v[0, 0]) for v in verts]
        a = np.array([[min(scalars)]])
        b = np.array([[max(scalars)]])
        lo, hi = _segment_ratio_range(a, b)
        return NlocBounds(lo, hi, False)
    if m == 2:
        lo, hi = _segment_ratio_range(verts[0], verts[1])
        return NlocBounds(lo, hi, False)

    rng = np.random.default_rng([abs(int(seed)), 211])
    candidates = [np.eye(m)[i] for i in range(m)]
    for i in range(m):
        for j in range(i + 1, m):
            mid = np.zeros(m)
            mid[i] = mid[j] = 0.5
            candidates.append(mid)
    candidates.extend(rng.dirichlet(np.ones(m), N_DIRICHLET))
    lo = math.inf
    hi = -math.inf
    w_lo = w_hi = None
    for w in candidates:
        r = _ratio_or_none(np.einsum("i,ijk->jk", w, verts))
        if r is None:
            continue
        if r < lo:
            lo, w_lo = r, w
        if r > hi:
            hi, w_hi = r, w
    if w_lo is None:
        return NlocBounds(0.0, 0.0, True)
    lo = _refine_ratio(verts, w_lo, -1.0, lo)
    hi = _refine_ratio(verts, w_hi, +1.0, hi)
    return NlocBounds(lo, hi, True)


def interval_from_hull(hull: "HessianVertexList", seed: int = 0) -> NonconvexityInterval:
    """Assemble the full index record for an already-built hull."""
    low, weights = loc_lower(hull)
    high, idx = loc_upper(hull)
    low = min(low, high)
    nb = nloc_bounds(hull, seed=seed)
    rho = rho_modulus(hull)
    return NonconvexityInterval(
        loc_low=low, loc_high=high,
        nloc_low=nb.low, nloc_high=nb.high,
        conv_low=1.0 - nb.high, conv_high=1.0 - nb.low,
        rho=rho,
        argmin_weights=tuple(float(x) for x in weights.weights),
        argmax_vertex=idx,
        exact=hull.exact,
        approximate_nloc=nb.approximate)


def compute_interval(f, x, cfg=None) -> NonconvexityInterval:
    """Sample (or fetch) the Hessian hull of f at x and index it."""
    from .hessian_set import SamplingConfig, sample_hessian_set
    if cfg is None:
        cfg = SamplingConfig()
    hull = sample_hessian_set(f, x, cfg)
    return interval_from_hull(hull, seed=cfg.seed)
