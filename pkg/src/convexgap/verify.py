"""Property suites: numerical evidence for the identities the package claims.

Each suite pits the package implementation against an independent route:
numpy/scipy eigensolvers, dense grid search over the weight simplex,
brute-force minimization over the PSD cone, or closed-form values of the
built-in families.  Suites are deterministic for a fixed seed and report
the worst observed slack next to the tolerance they enforce.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import minimize

from . import spectral
from .functions import check_convex_on_segment, compose_sum, make_builtin
from .hessian_set import HessianVertexList, minkowski_sum
from .hull_index import (INDEX_TOL, INTERVAL_SLACK, USC_TOL, interval_from_hull,
                         loc_lower, loc_upper, rho_modulus)
from .smoothing import MollifierConfig, mollification_membership_check
from .spectral import SymMatrix, ell, nuclear_norm

DEFAULT_SEED = 1234

# Hull scales for the randomized suites.  Grid search with step 1e-2 and
# 1e4-point interval probes resolve optima only up to slope * spacing, so
# the hulls are scaled to keep those oracle errors well below the enforced
# tolerances while leaving them orders of magnitude above machine noise.
_OPTIMIZER_SCALE = 0.01
_INTERVAL_SCALE = 0.02


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    worst_slack: float
    tolerance: float
    detail: str
    seconds: float


def _finish(name: str, t0: float, worst: float, tol: float, detail: str,
            passed: bool | None = None) -> SuiteResult:
    if passed is None:
        passed = worst <= tol
    return SuiteResult(name=name, passed=bool(passed), worst_slack=float(worst),
                       tolerance=float(tol), detail=detail,
                       seconds=time.perf_counter() - t0)


def _sym(rng: np.random.Generator, d: int, scale: float = 1.0) -> np.ndarray:
    a = rng.standard_normal((d, d))
    return scale * (a + a.T) / 2.0


def _psd(rng: np.random.Generator, d: int, scale: float = 1.0) -> np.ndarray:
    b = rng.standard_normal((d, d))
    return scale * (b @ b.T)


def _orthogonal(rng: np.random.Generator, d: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    return q * np.sign(np.diag(r))


def _random_hull(rng: np.random.Generator, d: int, m: int,
                 scale: float = 1.0) -> HessianVertexList:
    return HessianVertexList.from_matrices(
        [_sym(rng, d, scale) for _ in range(m)])


def _ell_batch(qs: np.ndarray) -> np.ndarray:
    """Reference ell over a stack of symmetric matrices.

    Closed-form eigenvalues for d <= 3 keep dense grid oracles fast;
    larger sizes fall back to numpy's batched solver.  Entirely
    independent of the package's own eigensolver.
    """
    d = qs.shape[-1]
    if d == 1:
        v = qs[..., 0, 0]
        return np.where(v < 0.0, -v, 0.0)
    if d == 2:
        half_tr = (qs[..., 0, 0] + qs[..., 1, 1]) / 2.0
        rad = np.sqrt(((qs[..., 0, 0] - qs[..., 1, 1]) / 2.0) ** 2
                      + qs[..., 0, 1] ** 2)
        lam = np.stack([half_tr - rad, half_tr + rad], axis=-1)
    elif d == 3:
        lam = _eig3_batch(qs)
    else:
        lam = np.linalg.eigvalsh(qs)
    return np.where(lam < 0.0, -lam, 0.0).sum(axis=-1)


def _eig3_batch(qs: np.ndarray) -> np.ndarray:
    """Eigenvalues of many symmetric 3x3 matrices, trigonometric method."""
    a00, a11, a22 = qs[..., 0, 0], qs[..., 1, 1], qs[..., 2, 2]
    a01, a02, a12 = qs[..., 0, 1], qs[..., 0, 2], qs[..., 1, 2]
    q = (a00 + a11 + a22) / 3.0
    p2 = ((a00 - q) ** 2 + (a11 - q) ** 2 + (a22 - q) ** 2
          + 2.0 * (a01 ** 2 + a02 ** 2 + a12 ** 2))
    p = np.sqrt(p2 / 6.0)
    safe = np.where(p > 0.0, p, 1.0)
    b00, b11, b22 = (a00 - q) / safe, (a11 - q) / safe, (a22 - q) / safe
    b01, b02, b12 = a01 / safe, a02 / safe, a12 / safe
    detb = (b00 * (b11 * b22 - b12 ** 2) - b01 * (b01 * b22 - b12 * b02)
            + b02 * (b01 * b12 - b11 * b02))
    r = np.clip(detb / 2.0, -1.0, 1.0)
    phi = np.arccos(r) / 3.0
    lam_hi = q + 2.0 * p * np.cos(phi)
    lam_lo = q + 2.0 * p * np.cos(phi + 2.0 * np.pi / 3.0)
    lam_mid = 3.0 * q - lam_hi - lam_lo
    return np.stack([lam_lo, lam_mid, lam_hi], axis=-1)


_GRID_CACHE: dict[tuple[int, int], np.ndarray] = {}


def _simplex_grid(m: int, steps: int) -> np.ndarray:
    """All weight vectors with coordinates i/steps summing to one."""
    key = (m, steps)
    if key not in _GRID_CACHE:
        rows: list[tuple[int, ...]] = []

        def rec(prefix: tuple[int, ...], remaining: int, parts: int):
            if parts == 1:
                rows.append(prefix + (remaining,))
                return
            for i in range(remaining + 1):
                rec(prefix + (i,), remaining - i, parts - 1)

        rec((), steps, m)
        grid = np.array(rows, dtype=float) / steps
        grid.setflags(write=False)
        _GRID_CACHE[key] = grid
    return _GRID_CACHE[key]


def grid_min_ell(hull: HessianVertexList, step: float = 1e-2) -> float:
    """Dense simplex grid-search oracle for the lower endpoint."""
    verts = hull.stack()
    w = _simplex_grid(verts.shape[0], int(round(1.0 / step)))
    qs = np.einsum("nm,mij->nij", w, verts)
    return float(_ell_batch(qs).min())


def brute_force_dist_to_psd(q: np.ndarray, rng: np.random.Generator,
                            restarts: int = 8) -> float:
    """Minimize the nuclear distance to the PSD cone over factors L L^T."""
    d = q.shape[0]

    def value_and_grad(lvec: np.ndarray):
        lmat = lvec.reshape(d, d)
        s = q - lmat @ lmat.T
        evals, vecs = np.linalg.eigh(s)
        val = float(np.sum(np.abs(evals)))
        w = (vecs * np.sign(evals)) @ vecs.T
        return val, (-2.0 * w @ lmat).ravel()

    scale = math.sqrt(max(1.0, float(np.linalg.norm(q))))
    best_val = math.inf
    best_x = None
    for _ in range(restarts):
        x0 = scale * rng.standard_normal(d * d)
        res = minimize(value_and_grad, x0, jac=True, method="L-BFGS-B",
                       options={"maxiter": 500, "ftol": 1e-15, "gtol": 1e-12})
        if res.fun < best_val:
            best_val, best_x = float(res.fun), res.x
    polish = minimize(lambda v: value_and_grad(v)[0], best_x, method="Powell",
                      options={"maxiter": 4000, "xtol": 1e-12, "ftol": 1e-14})
    return min(best_val, float(polish.fun))


def suite_lemma_distance(seed: int = DEFAULT_SEED) -> SuiteResult:
    """Nuclear-distance identity: attainment, cone lower bound, brute force."""
    t0 = time.perf_counter()
    rng = np.random.default_rng([seed, 1])
    worst_attain = 0.0
    worst_bound = 0.0
    for d in (1, 2, 3, 5):
        for _ in range(1000):
            q = SymMatrix.from_array(_sym(rng, d, 2.0))
            val = ell(q)
            split = spectral.eigendecompose(q)
            attained = nuclear_norm(q - split.positive_part)
            worst_attain = max(worst_attain, abs(attained - val))
            m = SymMatrix.from_array(_psd(rng, d))
            worst_bound = max(worst_bound, val - nuclear_norm(q - m))
    worst_brute = 0.0
    for d in (1, 2, 3):
        for _ in range(4):
            q = _sym(rng, d, 2.0)
            brute = brute_force_dist_to_psd(q, rng)
            worst_brute = max(worst_brute, abs(brute - ell(q)))
    worst = max(worst_attain, worst_bound / 100.0, worst_brute / 100.0)
    passed = worst_attain <= 1e-10 and worst_bound <= 1e-8 and worst_brute <= 1e-6
    return _finish(
        "lemma-distance", t0, worst_attain, 1e-10,
        f"attainment {worst_attain:.2e} (tol 1e-10), cone bound "
        f"{worst_bound:.2e} (tol 1e-8), brute force {worst_brute:.2e} (tol 1e-6)",
        passed=passed)


def suite_table1(seed: int = DEFAULT_SEED) -> SuiteResult:
    """Closed-form indices of the built-in families, exact hulls."""
    t0 = time.perf_counter()
    rng = np.random.default_rng([seed, 2])
    worst = 0.0

    def check(observed: float, expected: float):
        nonlocal worst
        worst = max(worst, abs(observed - expected))

    kink = make_builtin("kink")
    iv = interval_from_hull(kink.exact_hessian_set(np.zeros(1)))
    for obs, exp in ((iv.loc_low, 1.0), (iv.loc_high, 3.0), (iv.nloc_low, 1.0),
                     (iv.nloc_high, 1.0), (iv.rho, 3.0)):
        check(obs, exp)

    mixed = make_builtin("mixed")
    iv = interval_from_hull(mixed.exact_hessian_set(np.zeros(1)))
    for obs, exp in ((iv.loc_low, 0.0), (iv.loc_high, 1.0), (iv.nloc_low, 0.0),
                     (iv.nloc_high, 1.0), (iv.rho, 1.0)):
        check(obs, exp)

    convex = make_builtin("pw_quad", {"a": 2.0, "b": 3.0})
    iv = interval_from_hull(convex.exact_hessian_set(np.zeros(1)))
    for obs in (iv.loc_low, iv.loc_high, iv.nloc_low, iv.nloc_high, iv.rho):
        check(obs, 0.0)

    concave = make_builtin("pw_quad", {"a": -2.0, "b": -5.0})
    iv = interval_from_hull(concave.exact_hessian_set(np.zeros(1)))
    for obs, exp in ((iv.loc_low, 2.0), (iv.loc_high, 5.0)):
        check(obs, exp)

    ncs = make_builtin("neg_cos_sum")
    points = [np.array([math.pi / 2 + 0.1, 0.0])]
    points.extend(rng.uniform(-3.0, 3.0, size=(5, 2)))
    for x in points:
        expected = max(0.0, -math.cos(x[0])) + max(0.0, -math.cos(x[1]))
        iv = interval_from_hull(ncs.exact_hessian_set(x))
        check(iv.loc_low, expected)
        check(iv.loc_high, expected)
    return _finish("table1", t0, worst, 1e-9,
                   f"closed-form index values, worst {worst:.2e} (tol 1e-9)")


def suite_smooth_reduction(seed: int = DEFAULT_SEED) -> SuiteResult:
    """Singleton hulls collapse the interval to the single ell value."""
    t0 = time.perf_counter()
    rng = np.random.default_rng([seed, 3])
    worst = 0.0
    for d in (1, 2, 3, 4):
        for _ in range(10):
            v = _sym(rng, d)
            hull = HessianVertexList.from_matrices([v])
            iv = interval_from_hull(hull)
            expected = ell(SymMatrix.from_array(v))
            ratio = spectral.normalized_ratio(SymMatrix.from_array(v))
            worst = max(worst, abs(iv.loc_low - expected),
                        abs(iv.loc_high - expected),
                        abs(iv.nloc_low - ratio), abs(iv.nloc_high - ratio))
    return _finish("smooth-reduction", t0, worst, 1e-12,
                   f"singleton collapse, worst {worst:.2e} (tol 1e-12)")


def suite_convex_vanishing(seed: int = DEFAULT_SEED) -> SuiteResult:
    """Hulls of PSD matrices carry identically zero indices."""
    t0 = time.perf_counter()
    rng = np.random.default_rng([seed, 4])
    worst = 0.0
    for d in (1, 2, 3):
        for _ in range(10):
            m = int(rng.integers(1, 5))
            hull = HessianVertexList.from_matrices(
                [_psd(rng, d) for _ in range(m)])
            iv = interval_from_hull(hull)
            worst = max(worst, iv.loc_low, iv.loc_high, iv.nloc_low,
                        iv.nloc_high, iv.rho)
    return _finish("convex-vanishing", t0, worst, 1e-12,
                   f"PSD hulls, worst index {worst:.2e} (tol 1e-12)")


def suite_orthogonal_invariance(seed: int = DEFAULT_SEED) -> SuiteResult:
    """Congruence by an orthogonal matrix leaves every field unchanged."""
    t0 = time.perf_counter()
    rng = np.random.default_rng([seed, 5])
    worst = 0.0
    for _ in range(20):
        d = int(rng.integers(1, 4))
        m = int(rng.integers(1, 5))
        hull = _random_hull(rng, d, m)
        u = _orthogonal(rng, d)
        rotated = HessianVertexList.from_matrices(
            [u.T @ v.entries @ u for v in hull.vertices])
        a = interval_from_hull(hull, seed=seed)
        b = interval_from_hull(rotated, seed=seed)
        for field in ("loc_low", "loc_high", "nloc_low", "nloc_high",
                      "conv_low", "conv_high", "rho"):
            worst = max(worst, abs(getattr(a, field) - getattr(b, field)))
    return _finish("orthogonal-invariance", t0, worst, INDEX_TOL,
                   f"congruence drift, worst {worst:.2e} (tol {INDEX_TOL:g})")


def suite_subadditivity(seed: int = DEFAULT_SEED) -> SuiteResult:
    """Upper endpoints are subadditive under Minkowski sums of hulls."""
    t0 = time.perf_counter()
    rng = np.random.default_rng([seed, 6])
    worst = -math.inf
    for _ in range(20):
        d = int(rng.integers(1, 3))
        h1 = _random_hull(rng, d, int(rng.integers(1, 4)))
        h2 = _random_hull(rng, d, int(rng.integers(1, 4)))
        total, _ = loc_upper(minkowski_sum(h1, h2))
        u1, _ = loc_upper(h1)
        u2, _ = loc_upper(h2)
        worst = max(worst, total - (u1 + u2))
    return _finish("subadditivity", t0, max(worst, 0.0), INDEX_TOL,
                   f"sum exceedance, worst {worst:.2e} (tol {INDEX_TOL:g})")


def suite_sandwich(seed: int = DEFAULT_SEED) -> SuiteResult:
    """rho <= loc_high <= d * rho for every hull."""
    t0 = time.perf_counter()
    rng = np.random.default_rng([seed, 7])
    worst = -math.inf
    for d in (1, 2, 3, 5):
        for _ in range(15):
            hull = _random_hull(rng, d, int(rng.integers(1, 5)))
            hi, _ = loc_upper(hull)
            rho = rho_modulus(hull)
            worst = max(worst, rho - hi, hi - d * rho)
    return _finish("sandwich", t0, max(worst, 0.0), INDEX_TOL,
                   f"modulus sandwich, worst {worst:.2e} (tol {INDEX_TOL:g})")


def suite_quadratic_shift(seed: int = DEFAULT_SEED) -> SuiteResult:
    """Adding (rho/2)|t|^2 restores convexity, hull-wise and pointwise."""
    t0 = time.perf_counter()
    worst = -math.inf
    failures = []
    for family, rho in (("kink", 3.0), ("mixed", 1.0)):
        f = make_builtin(family)
        hull = f.exact_hessian_set(np.zeros(1))
        for v in hull.vertices:
            shifted = v.shifted(rho)
            lam_min = float(spectral.eigenvalues(shifted)[-1])
            worst = max(worst, -lam_min)
        shifted_f = compose_sum(f, make_builtin("quadratic", {"q": rho}))
        if not check_convex_on_segment(shifted_f, [-1.0], [1.0], 64):
            failures.append(f"{family}+quadratic not convex on segment")
    if check_convex_on_segment(make_builtin("kink"), [-1.0], [1.0], 64):
        failures.append("kink wrongly reported convex")
    passed = not failures and max(worst, 0.0) <= spectral.psd_tol(3.0)
    detail = (f"shifted hulls PSD, worst eigenvalue deficit {worst:.2e}"
              + (f"; {'; '.join(failures)}" if failures else ""))
    return _finish("quadratic-shift", t0, max(worst, 0.0),
                   spectral.psd_tol(3.0), detail, passed=passed)


def suite_usc(seed: int = DEFAULT_SEED) -> SuiteResult:
    """Upper endpoint is upper semicontinuous along sequences into a kink."""
    t0 = time.perf_counter()
    worst = -math.inf
    for family in ("kink", "mixed"):
        f = make_builtin(family)
        hi0, _ = loc_upper(f.exact_hessian_set(np.zeros(1)))
        for k in range(1, 13):
            for sign in (-1.0, 1.0):
                x = np.array([sign * 2.0 ** -k])
                hi, _ = loc_upper(f.exact_hessian_set(x))
                worst = max(worst, hi - hi0)
    return _finish("usc", t0, max(worst, 0.0), USC_TOL,
                   f"limsup exceedance, worst {worst:.2e} (tol {USC_TOL:g})")


def suite_interval_structure(seed: int = DEFAULT_SEED) -> SuiteResult:
    """Convex combinations fill [loc_low, loc_high] and never leave it."""
    t0 = time.perf_counter()
    rng = np.random.default_rng([seed, 8])
    worst = 0.0
    for d in (1, 2, 3):
        for m in (2, 3):
            hull = _random_hull(rng, d, m, scale=_INTERVAL_SCALE)
            lo, _ = loc_lower(hull)
            hi, _ = loc_upper(hull)
            weights = np.vstack([rng.dirichlet(np.ones(m), 5000),
                                 rng.dirichlet(0.2 * np.ones(m), 5000)])
            qs = np.einsum("nm,mij->nij", weights, hull.stack())
            vals = _ell_batch(qs)
            worst = max(worst, abs(float(vals.min()) - lo),
                        abs(float(vals.max()) - hi))
    return _finish("interval-structure", t0, worst, INTERVAL_SLACK,
                   f"endpoint fill gap, worst {worst:.2e} (tol {INTERVAL_SLACK:g})")


def suite_optimizer(seed: int = DEFAULT_SEED) -> SuiteResult:
    """Lower-endpoint descent agrees with dense simplex grid search."""
    t0 = time.perf_counter()
    rng = np.random.default_rng([seed, 9])
    worst = 0.0
    for i in range(100):
        d = 1 + i % 3
        m = 2 + (i // 3) % 3
        hull = _random_hull(rng, d, m, scale=_OPTIMIZER_SCALE)
        fw, _ = loc_lower(hull)
        ref = grid_min_ell(hull)
        worst = max(worst, abs(fw - ref))
    return _finish("optimizer", t0, worst, 1e-4,
                   f"descent vs grid over 100 hulls, worst {worst:.2e} (tol 1e-4)")


def suite_mollification(seed: int = DEFAULT_SEED) -> SuiteResult:
    """Mollified Hessians limit into the hull with in-interval ell values."""
    t0 = time.perf_counter()
    cfg = MollifierConfig()
    worst = 0.0
    failures = []
    cases = [
        (make_builtin("pw_quad", {"a": -1.0, "b": -3.0}), np.zeros(1)),
        (make_builtin("mixed"), np.zeros(1)),
        (make_builtin("quadratic", {"q": 1.0}), np.zeros(1)),
        (make_builtin("neg_cos_sum"), np.zeros(2)),
    ]
    for f, x in cases:
        report = mollification_membership_check(f, x, cfg)
        worst = max(worst, report.samples[-1].distance)
        if not report.passed:
            failures.append(f.name)
    detail = (f"final membership distance, worst {worst:.2e} (tol 1e-6)"
              + (f"; failed: {', '.join(failures)}" if failures else ""))
    return _finish("mollification", t0, worst, 1e-6, detail,
                   passed=not failures and worst <= 1e-6)


SUITES: dict[str, Callable[[int], SuiteResult]] = {
    "lemma-distance": suite_lemma_distance,
    "table1": suite_table1,
    "smooth-reduction": suite_smooth_reduction,
    "convex-vanishing": suite_convex_vanishing,
    "orthogonal-invariance": suite_orthogonal_invariance,
    "subadditivity": suite_subadditivity,
    "sandwich": suite_sandwich,
    "quadratic-shift": suite_quadratic_shift,
    "usc": suite_usc,
    "interval-structure": suite_interval_structure,
    "optimizer": suite_optimizer,
    "mollification": suite_mollification,
}


def run_suites(names, seed: int = DEFAULT_SEED) -> list[SuiteResult]:
    """Run the named suites ('all' expands to every suite, in order)."""
    if isinstance(names, str):
        names = [names]
    expanded: list[str] = []
    for name in names:
        if name == "all":
            expanded.extend(SUITES)
        elif name in SUITES:
            expanded.append(name)
        else:
            raise ValueError(f"unknown verify suite {name!r}; "
                             f"choose from {['all', *SUITES]}")
    return [SUITES[name](seed) for name in expanded]
