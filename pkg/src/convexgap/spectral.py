"""Symmetric spectral splits and the negative-part curvature functional.

Every quantity in this package reduces to splitting a symmetric matrix Q
into its positive and negative spectral parts, Q = Q+ - Q-.  The central
scalar is

    ell(Q) = trace(Q-) = sum_i max(0, -lambda_i(Q)),

the total mass of negative curvature.  It equals the nuclear-norm distance
from Q to the cone of positive semidefinite matrices; the infimum over the
cone is attained at Q+.  The test suite checks that distance interpretation
against brute-force minimization rather than trusting the identity.

Eigenwork is done by cyclic Jacobi rotation sweeps: dependency-free,
accurate to roundoff, and fast for the small dimensions (d <= ~50) this
package targets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EigenSolverError

# Max-entry tolerance for U U^T vs the identity.
ORTH_TOL = 1e-10
# Eigenvalues with |lambda| <= PSD_TOL_BASE * (1 + fro(Q)) count as zero and
# contribute to neither spectral part.
PSD_TOL_BASE = 1e-10
# Max-entry tolerance for the reconstruction Q+ - Q- vs Q, same scaling.
RECONSTRUCTION_TOL_BASE = 1e-10
# Below this nuclear norm a matrix is treated as flat (no curvature at all).
FLAT_TOL = 1e-12

_JACOBI_SWEEP_TOL = 1e-12
_JACOBI_MAX_SWEEPS = 100


@dataclass(frozen=True, eq=False)
class SymMatrix:
    """Dense real symmetric matrix, the carrier of all curvature data.

    The wrapped array is float64, exactly symmetric entry-by-entry, finite,
    and marked read-only.  Use from_array() to build one from arbitrary
    input; the raw constructor rejects anything not already symmetric.
    """

    entries: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise ValueError("expected a nonempty square matrix, got shape "
                             f"{a.shape}")
        if not np.isfinite(a).all():
            raise ValueError("matrix entries must be finite")
        if not np.array_equal(a, a.T):
            raise ValueError("matrix is not exactly symmetric; build it via "
                             "SymMatrix.from_array(..., symmetrize=True)")
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @classmethod
    def from_array(cls, a, symmetrize: bool = True) -> "SymMatrix":
        arr = np.array(a, dtype=float)
        if arr.ndim == 0:
            arr = arr.reshape(1, 1)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise ValueError("matrix entries must be finite")
        if not np.array_equal(arr, arr.T):
            if not symmetrize:
                raise ValueError("asymmetric input rejected (symmetrize=False)")
            arr = (arr + arr.T) / 2.0
        return cls(arr)

    @classmethod
    def diagonal(cls, values) -> "SymMatrix":
        return cls(np.diag(np.asarray(values, dtype=float)))

    @classmethod
    def zeros(cls, dim: int) -> "SymMatrix":
        return cls(np.zeros((dim, dim)))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def frobenius(self) -> float:
        return float(np.linalg.norm(self.entries))

    def __array__(self, dtype=None, copy=None):
        return np.array(self.entries, dtype=dtype)

    def __add__(self, other: "SymMatrix") -> "SymMatrix":
        return SymMatrix(self.entries + other.entries)

    def __sub__(self, other: "SymMatrix") -> "SymMatrix":
        return SymMatrix(self.entries - other.entries)

    def __neg__(self) -> "SymMatrix":
        return SymMatrix(-self.entries)

    def __rmul__(self, scale: float) -> "SymMatrix":
        return SymMatrix(float(scale) * self.entries)

    def shifted(self, tau: float) -> "SymMatrix":
        """Return self + tau * identity."""
        return SymMatrix(self.entries + float(tau) * np.eye(self.dim))

    def __repr__(self) -> str:
        return f"SymMatrix({self.entries.tolist()!r})"


def as_sym_matrix(q) -> SymMatrix:
    """Coerce a SymMatrix, array, nested list, or scalar into a SymMatrix."""
    if isinstance(q, SymMatrix):
        return q
    return SymMatrix.from_array(q)


def psd_tol(frobenius_norm: float) -> float:
    """Scale-relative threshold below which an eigenvalue counts as zero."""
    return PSD_TOL_BASE * (1.0 + frobenius_norm)


@dataclass(frozen=True, eq=False)
class SpectralSplit:
    """Eigendecomposition of a symmetric matrix plus its spectral parts.

    eigenvalues are sorted descending; eigenvectors holds the matching
    orthonormal columns.  positive_part and negative_part are both PSD and
    reconstruct the input as positive_part - negative_part up to the
    snapping of near-zero eigenvalues.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    positive_part: SymMatrix
    negative_part: SymMatrix


def _offdiag_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a - np.diag(np.diag(a))))


def _rotate(a: np.ndarray, v: np.ndarray, p: int, q: int) -> None:
    """One Jacobi rotation zeroing a[p, q], accumulated into v."""
    apq = a[p, q]
    if apq == 0.0:
        return
    theta = (a[q, q] - a[p, p]) / (2.0 * apq)
    t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(1.0, theta))
    c = 1.0 / math.sqrt(1.0 + t * t)
    s = t * c
    app, aqq = a[p, p], a[q, q]
    a[p, p] = app - t * apq
    a[q, q] = aqq + t * apq
    a[p, q] = 0.0
    a[q, p] = 0.0
    idx = [i for i in range(a.shape[0]) if i != p and i != q]
    if idx:
        aip = a[idx, p].copy()
        aiq = a[idx, q].copy()
        new_p = c * aip - s * aiq
        new_q = s * aip + c * aiq
        a[idx, p] = new_p
        a[p, idx] = new_p
        a[idx, q] = new_q
        a[q, idx] = new_q
    vp = v[:, p].copy()
    vq = v[:, q].copy()
    v[:, p] = c * vp - s * vq
    v[:, q] = s * vp + c * vq


def _jacobi(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi diagonalization.

    Returns (eigenvalues, eigenvector columns), unsorted.  Converges when
    the off-diagonal Frobenius mass drops below 1e-12 times the input norm,
    within at most 100 sweeps; otherwise raises EigenSolverError.
    """
    a = np.array(matrix, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    threshold = _JACOBI_SWEEP_TOL * np.linalg.norm(a)
    for _ in range(_JACOBI_MAX_SWEEPS):
        if _offdiag_norm(a) <= threshold:
            return np.diag(a).copy(), v
        for p in range(n - 1):
            for q in range(p + 1, n):
                _rotate(a, v, p, q)
    off = _offdiag_norm(a)
    if off <= threshold:
        return np.diag(a).copy(), v
    raise EigenSolverError(
        f"Jacobi sweeps stalled: off-diagonal mass {off:.3e} above "
        f"threshold {threshold:.3e} after {_JACOBI_MAX_SWEEPS} sweeps",
        sweeps=_JACOBI_MAX_SWEEPS, offdiag=off, threshold=threshold)


def eigenvalues(q) -> np.ndarray:
    """Raw eigenvalues of a symmetric matrix, sorted descending."""
    qm = as_sym_matrix(q)
    evals, _ = _jacobi(qm.entries)
    return np.sort(evals)[::-1].copy()


def eigendecompose(q) -> SpectralSplit:
    """Full spectral split Q = Q+ - Q- with orthonormal eigenvectors.

    Eigenvalues within psd_tol of zero are snapped to zero and belong to
    neither part, so both parts are PSD by construction and the
    reconstruction error stays within RECONSTRUCTION_TOL_BASE scaling.
    """
    qm = as_sym_matrix(q)
    evals, vecs = _jacobi(qm.entries)
    order = np.argsort(-evals, kind="stable")
    evals = evals[order]
    vecs = vecs[:, order]
    gram_err = float(np.max(np.abs(vecs @ vecs.T - np.eye(qm.dim))))
    if gram_err > ORTH_TOL:
        raise EigenSolverError(
            f"eigenvector matrix lost orthogonality: max deviation {gram_err:.3e}")
    tol = psd_tol(qm.frobenius())
    pos = np.where(evals > tol, evals, 0.0)
    neg = np.where(evals < -tol, -evals, 0.0)
    positive_part = SymMatrix.from_array(vecs @ (pos[:, None] * vecs.T))
    negative_part = SymMatrix.from_array(vecs @ (neg[:, None] * vecs.T))
    return SpectralSplit(eigenvalues=evals, eigenvectors=vecs,
                         positive_part=positive_part,
                         negative_part=negative_part)


def _classified_sums(entries: np.ndarray) -> tuple[float, float]:
    """(negative mass, total mass) of the spectrum after zero-snapping."""
    evals, _ = _jacobi(entries)
    tol = psd_tol(float(np.linalg.norm(entries)))
    neg = float(np.sum(np.where(evals < -tol, -evals, 0.0)))
    total = float(np.sum(np.where(np.abs(evals) > tol, np.abs(evals), 0.0)))
    return neg, total


def _ell_raw(entries: np.ndarray) -> float:
    """ell on a bare, already-symmetric array; skips wrapper validation.

    For hot optimization loops that evaluate thousands of exactly
    symmetric combinations; everything else should call ell().
    """
    return _classified_sums(entries)[0]


def ell(q) -> float:
    """Total negative curvature: sum of magnitudes of negative eigenvalues."""
    qm = as_sym_matrix(q)
    neg, _ = _classified_sums(qm.entries)
    return neg


def nuclear_norm(q) -> float:
    """Sum of absolute eigenvalues; equals ell(Q) + ell(-Q)."""
    qm = as_sym_matrix(q)
    _, total = _classified_sums(qm.entries)
    return total


def dist_to_psd(q) -> float:
    """Nuclear-norm distance from Q to the PSD cone.

    Computed as ell(Q): the nearest PSD matrix in nuclear norm is the
    positive part Q+, so the distance is the negative mass.  The test
    suite validates this against direct minimization over the cone.
    """
    return ell(q)


def normalized_ratio(q) -> float:
    """Fraction of total curvature mass that is negative, in [0, 1].

    Matrices with nuclear norm at or below FLAT_TOL are flat and return 0
    by convention.
    """
    qm = as_sym_matrix(q)
    neg, total = _classified_sums(qm.entries)
    if total <= FLAT_TOL:
        return 0.0
    return neg / total


def ell_and_subgradient(q) -> tuple[float, np.ndarray]:
    """ell(Q) together with the subgradient -U_neg U_neg^T.

    U_neg stacks eigenvectors of eigenvalues classified as negative;
    eigenvalues snapped to zero are treated as nonnegative and excluded.
    """
    qm = as_sym_matrix(q)
    return _ell_subgrad_raw(qm.entries)


def _ell_subgrad_raw(entries: np.ndarray) -> tuple[float, np.ndarray]:
    evals, vecs = _jacobi(entries)
    tol = psd_tol(float(np.linalg.norm(entries)))
    mask = evals < -tol
    value = float(-np.sum(evals[mask]))
    if mask.any():
        u = vecs[:, mask]
        grad = -(u @ u.T)
    else:
        grad = np.zeros_like(entries)
    return value, grad
