"""Univariate orthonormal polynomials for Jacobi-type weights on [-1, 1].

The weight is w(x) = (1-x)^lam * (1+x)^lam_prime with both exponents > -1.
Recurrence coefficients come from the classical closed forms for the monic
Jacobi family and are converted to the orthonormal normalization, so that
the associated operator of multiplication by x is symmetric tridiagonal
and its eigenvalues are exactly the roots of the orthogonal polynomials.

Normalization: polynomials are orthonormal with respect to the raw
(unnormalized) weight, so P_0 = 1/sqrt(m0) with m0 the weight's total
mass. All functions are pure.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import lgamma, exp, sqrt

import numpy as np

from . import linalg


@dataclass(frozen=True)
class JacobiWeight:
    """Weight (1-x)^lam (1+x)^lam_prime on [-1, 1]; both exponents > -1."""

    lam: float
    lam_prime: float

    def __post_init__(self):
        if not (self.lam > -1.0 and self.lam_prime > -1.0):
            raise ValueError(
                f"Jacobi exponents must exceed -1, got ({self.lam}, {self.lam_prime})"
            )

    @property
    def is_symmetric(self) -> bool:
        return self.lam == self.lam_prime

    def mass(self) -> float:
        """Total mass of the raw weight: 2^(a+b+1) * B(a+1, b+1)."""
        a, b = self.lam, self.lam_prime
        return exp(
            (a + b + 1.0) * np.log(2.0)
            + lgamma(a + 1.0)
            + lgamma(b + 1.0)
            - lgamma(a + b + 2.0)
        )


def chebyshev_weight() -> JacobiWeight:
    return JacobiWeight(-0.5, -0.5)


def legendre_weight() -> JacobiWeight:
    return JacobiWeight(0.0, 0.0)


def gegenbauer_weight(dimension: int) -> JacobiWeight:
    """Weight (1-t^2)^((n-3)/2) tied to the unit sphere in R^n."""
    lam = (dimension - 3) / 2.0
    return JacobiWeight(lam, lam)


@dataclass(frozen=True)
class RecurrenceCoeffs:
    """Orthonormal three-term recurrence data.

    x P_k = a[k-1] P_{k-1} + b[k] P_k + a[k] P_{k+1}, with all a[k] > 0.
    ``mass`` is the weight's total mass (the monic beta_0).
    """

    a: np.ndarray
    b: np.ndarray
    mass: float


def _monic_alpha_beta(w: JacobiWeight, kmax: int) -> tuple[np.ndarray, np.ndarray]:
    """Monic recurrence p_{k+1} = (x - alpha_k) p_k - beta_k p_{k-1}."""
    a, b = w.lam, w.lam_prime
    alpha = np.zeros(kmax + 1)
    beta = np.zeros(kmax + 1)
    beta[0] = w.mass()
    alpha[0] = (b - a) / (a + b + 2.0)
    for k in range(1, kmax + 1):
        s = 2.0 * k + a + b
        alpha[k] = (b * b - a * a) / (s * (s + 2.0))
        if k == 1:
            # cancelled form; the generic one is 0/0 when a + b = -1
            beta[1] = 4.0 * (a + 1.0) * (b + 1.0) / ((a + b + 2.0) ** 2 * (a + b + 3.0))
        else:
            beta[k] = (
                4.0 * k * (k + a) * (k + b) * (k + a + b) / (s * s * (s * s - 1.0))
            )
    return alpha, beta


def recurrence_coefficients(w: JacobiWeight, kmax: int) -> RecurrenceCoeffs:
    """Orthonormal recurrence coefficients a_0..a_kmax and b_0..b_kmax."""
    if kmax < 0:
        raise ValueError("kmax must be >= 0")
    alpha, beta = _monic_alpha_beta(w, kmax + 1)
    a = np.sqrt(beta[1 : kmax + 2])
    b = alpha[: kmax + 1].copy()
    if w.is_symmetric:
        b[:] = 0.0  # exact by parity
    return RecurrenceCoeffs(a=a, b=b, mass=beta[0])


def eval_basis(w: JacobiWeight, r: int, t) -> np.ndarray:
    """Values P_0(t)..P_r(t) by forward recurrence.

    Accepts a scalar (returns shape (r+1,)) or an array of points
    (returns shape (npts, r+1)).
    """
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    rc = recurrence_coefficients(w, max(r, 1))
    out = np.zeros((ts.size, r + 1))
    out[:, 0] = 1.0 / sqrt(rc.mass)
    if r >= 1:
        out[:, 1] = (ts - rc.b[0]) * out[:, 0] / rc.a[0]
    for k in range(1, r):
        out[:, k + 1] = (
            (ts - rc.b[k]) * out[:, k] - rc.a[k - 1] * out[:, k - 1]
        ) / rc.a[k]
    if np.isscalar(t) or np.asarray(t).ndim == 0:
        return out[0]
    return out


def jacobi_operator(w: JacobiWeight, r: int) -> np.ndarray:
    """The (r+1)x(r+1) symmetric tridiagonal operator of multiplication by x."""
    rc = recurrence_coefficients(w, r)
    m = np.diag(rc.b)
    if r >= 1:
        off = rc.a[:r]
        m += np.diag(off, 1) + np.diag(off, -1)
    return m


def jacobi_diagonals(w: JacobiWeight, r: int) -> tuple[np.ndarray, np.ndarray]:
    """(diagonal, off-diagonal) of the order-r Jacobi operator."""
    rc = recurrence_coefficients(w, r)
    return rc.b[: r + 1].copy(), rc.a[:r].copy()


def smallest_root(w: JacobiWeight, k: int) -> float:
    """Smallest root of the degree-k orthogonal polynomial; lies in (-1, 1)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    d, e = jacobi_diagonals(w, k - 1)
    return linalg.eig_all_sym_tridiag(d, e, count=1)[0]


def gauss_rule(w: JacobiWeight, npoints: int, normalized: bool = True):
    """Gauss quadrature nodes and weights for the Jacobi weight.

    Exact for polynomials of degree <= 2*npoints - 1. With
    ``normalized=True`` the weights sum to 1 (probability measure);
    otherwise they sum to the weight's mass.
    """
    if npoints < 1:
        raise ValueError("npoints must be >= 1")
    d, e = jacobi_diagonals(w, npoints - 1)
    if npoints == 1:
        nodes = d.copy()
        weights = np.array([1.0])
    else:
        m = np.diag(d) + np.diag(e, 1) + np.diag(e, -1)
        vals, vecs = np.linalg.eigh(m)
        nodes = vals
        weights = vecs[0, :] ** 2
        weights = weights / weights.sum()  # exact unit sum
    if not normalized:
        weights = weights * w.mass()
    return nodes, weights


def shifted_gauss_rule_01(lam: float, lam_prime: float, npoints: int):
    """Gauss rule on [0, 1] for the weight x^lam_prime (1-x)^lam, normalized.

    Obtained from the Jacobi rule on [-1, 1] via x = (1+s)/2.
    """
    nodes, weights = gauss_rule(JacobiWeight(lam, lam_prime), npoints)
    return (1.0 + nodes) / 2.0, weights
