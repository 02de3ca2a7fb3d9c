"""Dense symmetric eigenvalue kernels, tridiagonal bisection, pivoted Cholesky.

Symmetric matrices are plain numpy arrays; callers are expected to pass
(numerically) symmetric input and entries are symmetrized on entry where
it matters. Dense eigenvalue work is delegated to LAPACK through numpy;
the tridiagonal path is a Sturm-sequence bisection, which gives
guaranteed bracketing for the extremal-root experiments. All functions
are pure and deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg


class NotPositiveDefiniteError(ValueError):
    """B (or a pivot) is not positive definite within tolerance."""


class IndefiniteMatrixError(ValueError):
    """Matrix is indefinite beyond the pivoted-Cholesky tolerance."""


@dataclass(frozen=True)
class EigResult:
    value: float
    vector: np.ndarray
    residual: float


def sym(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


def _check_finite_square(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def _fix_sign(v: np.ndarray) -> np.ndarray:
    """Deterministic eigenvector sign: largest-magnitude entry positive."""
    i = int(np.argmax(np.abs(v)))
    if v[i] < 0:
        return -v
    return v


def eig_min_sym(a: np.ndarray) -> EigResult:
    """Smallest eigenvalue and unit eigenvector of a symmetric matrix."""
    a = sym(_check_finite_square(a))
    vals, vecs = np.linalg.eigh(a)
    lam = float(vals[0])
    v = _fix_sign(vecs[:, 0])
    v = v / np.linalg.norm(v)
    residual = float(np.linalg.norm(a @ v - lam * v))
    bound = 1e-9 * (1.0 + (np.max(np.abs(a)) if a.size else 0.0) * a.shape[0])
    if residual > bound:
        raise ArithmeticError(
            f"eigen residual {residual:.3e} exceeds contract bound {bound:.3e}"
        )
    return EigResult(value=lam, vector=v, residual=residual)


def _sturm_counts(d: np.ndarray, e2: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Number of eigenvalues strictly below each x, via the LDL^T sign count."""
    n = d.size
    xs = np.atleast_1d(xs)
    # LAPACK-style minimum pivot magnitude; an exactly-zero pivot is
    # treated as negative so that counts stay consistent
    pivmin = np.finfo(float).tiny * max(1.0, float(np.max(e2)) if e2.size else 1.0)
    q = d[0] - xs
    q = np.where(np.abs(q) < pivmin, -pivmin, q)
    count = (q < 0.0).astype(np.int64)
    for i in range(1, n):
        q = d[i] - xs - e2[i - 1] / q
        q = np.where(np.abs(q) < pivmin, -pivmin, q)
        count += q < 0.0
    return count


def eig_all_sym_tridiag(
    diag: np.ndarray, offdiag: np.ndarray, count: int | None = None
) -> np.ndarray:
    """Eigenvalues of a symmetric tridiagonal matrix, ascending.

    Uses bisection with Sturm sequences. ``count`` limits the output to
    the smallest that many eigenvalues.
    """
    d = np.asarray(diag, dtype=float).copy()
    e = np.asarray(offdiag, dtype=float).copy()
    n = d.size
    if e.size != max(n - 1, 0):
        raise ValueError("offdiag length must be diag length - 1")
    if n == 0:
        return np.zeros(0)
    if n == 1:
        return d.copy()
    want = n if count is None else min(count, n)
    e2 = e * e
    # Gershgorin bounds
    radius = np.zeros(n)
    radius[:-1] += np.abs(e)
    radius[1:] += np.abs(e)
    lo = float(np.min(d - radius))
    hi = float(np.max(d + radius))
    spread = max(hi - lo, 1e-300)
    lo -= 1e-12 * spread + 1e-300
    hi += 1e-12 * spread
    eps = np.finfo(float).eps
    lows = np.full(want, lo)
    highs = np.full(want, hi)
    idx = np.arange(1, want + 1)
    for _ in range(200):
        widths = highs - lows
        tol = eps * np.maximum(np.abs(lows), np.abs(highs)) * 2.0 + 1e-300
        if np.all(widths <= tol):
            break
        mids = 0.5 * (lows + highs)
        counts = _sturm_counts(d, e2, mids)
        go_left = counts >= idx
        highs = np.where(go_left, mids, highs)
        lows = np.where(go_left, lows, mids)
    return 0.5 * (lows + highs)


def gen_eig_min(a: np.ndarray, b: np.ndarray) -> EigResult:
    """Smallest lambda with A v = lambda B v for symmetric A and positive
    definite B, via the Cholesky reduction B = L L^T."""
    a = sym(_check_finite_square(a))
    b = sym(_check_finite_square(b))
    if a.shape != b.shape:
        raise ValueError("A and B must have matching shapes")
    n = a.shape[0]
    bmax = float(np.max(np.abs(b))) if b.size else 0.0
    tol = 1e-12 * n * max(bmax, 1e-300)
    try:
        low = np.linalg.cholesky(b)
    except np.linalg.LinAlgError:
        raise NotPositiveDefiniteError(
            "B is not positive definite; reduce the order r"
        ) from None
    if np.min(np.diag(low)) ** 2 <= tol:
        raise NotPositiveDefiniteError(
            f"B pivot below tolerance {tol:.3e}; reduce the order r"
        )
    li_a = scipy.linalg.solve_triangular(low, a, lower=True)
    c = scipy.linalg.solve_triangular(low, li_a.T, lower=True)
    vals, vecs = np.linalg.eigh(sym(c))
    lam = float(vals[0])
    w = vecs[:, 0]
    v = scipy.linalg.solve_triangular(low.T, w, lower=False)
    v = _fix_sign(v / np.linalg.norm(v))
    residual = float(np.linalg.norm(a @ v - lam * (b @ v)))
    return EigResult(value=lam, vector=v, residual=residual)


def cholesky_pivoted(a: np.ndarray, tol: float) -> tuple[np.ndarray, int, np.ndarray]:
    """Pivoted Cholesky P^T A P ~= L L^T for positive semidefinite A.

    Returns (L, rank, permutation) with L of shape (n, rank) and
    ``permutation`` the pivot order (A[perm][:, perm] ~= L L^T). ``tol``
    is relative to the largest diagonal entry. Raises
    IndefiniteMatrixError when a Schur-complement diagonal is negative
    beyond tolerance.
    """
    a = sym(_check_finite_square(a)).copy()
    n = a.shape[0]
    perm = np.arange(n)
    diag_scale = float(np.max(np.abs(np.diag(a)))) if n else 0.0
    if diag_scale == 0.0:
        return np.zeros((n, 0)), 0, perm
    threshold = tol * diag_scale
    low = np.zeros((n, n))
    rank = 0
    for k in range(n):
        dsub = np.diag(a)[k:]
        j = k + int(np.argmax(dsub))
        dmax = a[j, j]
        if dmax <= threshold:
            if np.min(dsub) < -10.0 * threshold - 1e-300:
                raise IndefiniteMatrixError(
                    f"negative Schur diagonal {np.min(dsub):.3e} beyond tolerance"
                )
            break
        if j != k:
            a[[k, j], :] = a[[j, k], :]
            a[:, [k, j]] = a[:, [j, k]]
            low[[k, j], :] = low[[j, k], :]
            perm[[k, j]] = perm[[j, k]]
        piv = np.sqrt(dmax)
        low[k, k] = piv
        if k + 1 < n:
            col = a[k + 1 :, k] / piv
            low[k + 1 :, k] = col
            a[k + 1 :, k + 1 :] -= np.outer(col, col)
        rank += 1
    return low[:, :rank], rank, perm
