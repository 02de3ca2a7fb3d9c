"""Reference measures with closed-form moments and orthonormal bases.

Supported (X, mu) pairs: the box [-1,1]^n with per-coordinate Jacobi
weights, the unit ball with weight (1-|x|^2)^lam, the full-dimensional
standard simplex with Lebesgue measure, and the unit sphere with the
uniform surface measure. Every measure is normalized to a probability
measure; moments come from Beta/Gamma identities evaluated in log space.

Moments are memoized per measure instance. Under CPython the cache is a
plain dict, which is safe for concurrent reads with single-writer
insertion; all other operations are pure.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg
from scipy.special import gammaln

from .linalg import IndefiniteMatrixError
from .poly import Exponent, Polynomial, monomials_upto
from . import orthopoly

_LGAMMA_HALF = float(gammaln(0.5))


class Measure:
    """Base class: a probability measure on a compact set in R^nvars."""

    kind = "abstract"

    def __init__(self, nvars: int, mass: float = 1.0):
        if nvars < 1:
            raise ValueError("nvars must be >= 1")
        self.nvars = int(nvars)
        # mass != 1 is a testing hook for the scaling-invariance property;
        # production measures are always probability measures.
        self.mass = float(mass)
        self._moment_cache: dict[Exponent, float] = {}

    # subclasses implement _moments_bulk on an (m, nvars) integer array
    def _moments_bulk(self, alphas: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def moment(self, alpha: Iterable[int]) -> float:
        alpha = tuple(int(a) for a in alpha)
        if len(alpha) != self.nvars:
            raise ValueError(f"alpha has length {len(alpha)}, expected {self.nvars}")
        cached = self._moment_cache.get(alpha)
        if cached is None:
            cached = float(
                self._moments_bulk(np.asarray([alpha], dtype=np.int64))[0]
            )
            self._moment_cache[alpha] = cached
        return cached

    def moments_bulk(self, alphas: np.ndarray) -> np.ndarray:
        alphas = np.asarray(alphas, dtype=np.int64)
        if alphas.ndim != 2 or alphas.shape[1] != self.nvars:
            raise ValueError(f"expected shape (m, {self.nvars})")
        return self._moments_bulk(alphas)

    def integrate(self, p: Polynomial) -> float:
        if p.nvars != self.nvars:
            raise ValueError("polynomial/measure dimension mismatch")
        return float(
            sum(c * self.moment(alpha) for alpha, c in p.sorted_terms())
        )

    def inner_product(self, p: Polynomial, q: Polynomial) -> float:
        return self.integrate(p.multiply(q))

    def label(self) -> str:
        return f"{self.kind}({self.nvars})"


class BoxJacobi(Measure):
    """Box [-1,1]^n with weight prod_i (1-x_i)^lam_i (1+x_i)^lam'_i.

    ``lambdas`` gives one exponent per coordinate; a scalar entry lam
    means the symmetric weight (1-x_i^2)^lam, a pair means a general
    Jacobi weight for that coordinate.
    """

    kind = "box"

    def __init__(self, nvars: int, lambdas, mass: float = 1.0):
        super().__init__(nvars, mass)
        if isinstance(lambdas, (int, float)):
            lambdas = [float(lambdas)] * nvars
        lambdas = list(lambdas)
        if len(lambdas) != nvars:
            raise ValueError("need one Jacobi exponent (or pair) per coordinate")
        self.weights: list[orthopoly.JacobiWeight] = []
        for item in lambdas:
            if isinstance(item, (tuple, list)):
                lam, lam_prime = float(item[0]), float(item[1])
            else:
                lam = lam_prime = float(item)
            self.weights.append(orthopoly.JacobiWeight(lam, lam_prime))
        self._rules: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]] = {}

    def _moment_1d(self, i: int, ks: np.ndarray) -> np.ndarray:
        w = self.weights[i]
        out = np.zeros(ks.shape, dtype=float)
        if w.is_symmetric:
            even = ks % 2 == 0
            j = ks[even] // 2
            lam = w.lam
            log_m = (
                gammaln(j + 0.5)
                - gammaln(j + lam + 1.5)
                - _LGAMMA_HALF
                + gammaln(lam + 1.5)
            )
            out[even] = np.exp(log_m)
            return out
        kmax = int(ks.max(initial=0))
        npts = kmax // 2 + 1
        key = (i, npts)
        if key not in self._rules:
            self._rules[key] = orthopoly.gauss_rule(w, npts)
        nodes, wts = self._rules[key]
        powers = nodes[None, :] ** ks[:, None]
        return powers @ wts

    def _moments_bulk(self, alphas: np.ndarray) -> np.ndarray:
        vals = np.full(alphas.shape[0], self.mass)
        for i in range(self.nvars):
            vals *= self._moment_1d(i, alphas[:, i])
        return vals

    def label(self) -> str:
        tags = []
        for w in self.weights:
            tags.append(
                f"{w.lam:g}" if w.is_symmetric else f"({w.lam:g},{w.lam_prime:g})"
            )
        return f"box({self.nvars};lam={','.join(tags)})"


class BallMeasure(Measure):
    """Unit ball with weight (1 - |x|^2)^lam, lam >= 0."""

    kind = "ball"

    def __init__(self, nvars: int, lam: float = 0.0, mass: float = 1.0):
        super().__init__(nvars, mass)
        if lam < 0:
            raise ValueError("ball weight exponent must be >= 0")
        self.lam = float(lam)

    def _moments_bulk(self, alphas: np.ndarray) -> np.ndarray:
        vals = np.zeros(alphas.shape[0])
        even = np.all(alphas % 2 == 0, axis=1)
        if np.any(even):
            beta = alphas[even] // 2
            total = beta.sum(axis=1)
            n2 = self.nvars / 2.0
            log_m = (
                np.sum(gammaln(beta + 0.5) - _LGAMMA_HALF, axis=1)
                + gammaln(n2 + self.lam + 1.0)
                - gammaln(n2 + self.lam + 1.0 + total)
            )
            vals[even] = np.exp(log_m)
        return vals * self.mass

    def label(self) -> str:
        return f"ball({self.nvars};lam={self.lam:g})"


class SimplexMeasure(Measure):
    """Full-dimensional simplex {x >= 0, sum x <= 1} with Lebesgue measure."""

    kind = "simplex"

    def _moments_bulk(self, alphas: np.ndarray) -> np.ndarray:
        n = self.nvars
        total = alphas.sum(axis=1)
        log_m = (
            gammaln(n + 1.0)
            + np.sum(gammaln(alphas + 1.0), axis=1)
            - gammaln(total + n + 1.0)
        )
        return np.exp(log_m) * self.mass


class SphereMeasure(Measure):
    """Unit sphere S^(nvars-1) with the uniform (normalized) surface measure."""

    kind = "sphere"

    def __init__(self, nvars: int, mass: float = 1.0):
        if nvars < 2:
            raise ValueError("sphere measure needs nvars >= 2")
        super().__init__(nvars, mass)

    def _moments_bulk(self, alphas: np.ndarray) -> np.ndarray:
        vals = np.zeros(alphas.shape[0])
        even = np.all(alphas % 2 == 0, axis=1)
        if np.any(even):
            beta = alphas[even] // 2
            total = beta.sum(axis=1)
            n2 = self.nvars / 2.0
            log_m = (
                np.sum(gammaln(beta + 0.5) - _LGAMMA_HALF, axis=1)
                + gammaln(n2)
                - gammaln(n2 + total)
            )
            vals[even] = np.exp(log_m)
        return vals * self.mass


def moment(m: Measure, alpha: Iterable[int]) -> float:
    return m.moment(alpha)


def integrate(p: Polynomial, m: Measure) -> float:
    return m.integrate(p)


def inner_product(p: Polynomial, q: Polynomial, m: Measure) -> float:
    return m.inner_product(p, q)


def gram(m: Measure, d: int) -> np.ndarray:
    """Moment matrix of the monomial basis up to degree d, graded-lex order."""
    exps = np.asarray(monomials_upto(m.nvars, d), dtype=np.int64)
    n = exps.shape[0]
    sums = (exps[:, None, :] + exps[None, :, :]).reshape(n * n, m.nvars)
    return m.moments_bulk(sums).reshape(n, n)


@dataclass
class OrthoBasis:
    """Graded orthonormal basis of R[X]_d with respect to a measure.

    ``exponents`` lists the pivot monomials actually used; row i of
    ``coeff`` gives the expansion of P_i over those monomials (lower
    triangular in the graded pivot order). On sets with a variety
    relation (the sphere) the rank is strictly below the monomial count.
    """

    measure: Measure
    degree: int
    exponents: list[Exponent]
    coeff: np.ndarray
    rank: int

    @cached_property
    def polys(self) -> list[Polynomial]:
        out = []
        for i in range(self.rank):
            terms = {
                self.exponents[j]: self.coeff[i, j]
                for j in range(i + 1)
                if self.coeff[i, j] != 0.0
            }
            out.append(Polynomial(self.measure.nvars, terms))
        return out

    def eval_many(self, points: np.ndarray) -> np.ndarray:
        """Values of all basis polynomials at each row of points; (m, rank)."""
        pts = np.asarray(points, dtype=float)
        mono = np.ones((pts.shape[0], self.rank))
        for j, alpha in enumerate(self.exponents):
            col = np.ones(pts.shape[0])
            for i, a in enumerate(alpha):
                if a:
                    col *= pts[:, i] ** a
            mono[:, j] = col
        return mono @ self.coeff.T


def orthonormal_basis(m: Measure, d: int, null_tol: float = 1e-10) -> OrthoBasis:
    """Orthonormalize the monomial basis against gram(m, d).

    Pivoted Cholesky with the pivot search restricted to one total-degree
    block at a time, which keeps the basis graded. Directions whose
    Schur-complement diagonal falls below ``null_tol`` times the largest
    initial diagonal are dropped (these are exactly the variety relations
    on the sphere at desk scale). Raises IndefiniteMatrixError when the
    Gram matrix is indefinite beyond tolerance, which signals a moment
    bug upstream.
    """
    exps = monomials_upto(m.nvars, d)
    g = gram(m, d)
    n = len(exps)
    degrees = np.array([sum(a) for a in exps])
    # diagonal equilibration keeps the pivot search scale-free
    scale = np.sqrt(np.diag(g))
    a = g / np.outer(scale, scale)
    thresh = null_tol
    lfac = np.zeros((n, n))
    order: list[int] = []
    for deg in range(d + 1):
        block = [j for j in range(n) if degrees[j] == deg]
        remaining = set(block)
        while remaining:
            cand = list(remaining)
            diag = a[cand, cand]
            jloc = int(np.argmax(diag))
            j = cand[jloc]
            if diag[jloc] <= thresh:
                if float(np.min(diag)) < -100.0 * thresh:
                    raise IndefiniteMatrixError(
                        "Gram matrix indefinite beyond tolerance; "
                        "moment computation is inconsistent"
                    )
                break
            piv = np.sqrt(a[j, j])
            col = a[:, j] / piv
            lfac[:, len(order)] = col
            order.append(j)
            a -= np.outer(col, col)
            remaining.discard(j)
    rank = len(order)
    sel = np.asarray(order, dtype=int)
    lsel = lfac[sel, :rank]
    # row i of coeff expands P_i over the selected (unscaled) monomials
    coeff = scipy.linalg.solve_triangular(lsel, np.eye(rank), lower=True)
    coeff = coeff / scale[sel][None, :]
    # one refinement pass against the exact Gram wipes out the first-order
    # orthonormalization error from an ill-conditioned monomial Gram
    gsel = g[np.ix_(sel, sel)]
    g2 = coeff @ gsel @ coeff.T
    try:
        l2 = np.linalg.cholesky(0.5 * (g2 + g2.T))
        coeff = scipy.linalg.solve_triangular(l2, coeff, lower=True)
    except np.linalg.LinAlgError:
        pass  # keep the unrefined factor; Gram check downstream will flag it
    sel_exps = [exps[j] for j in order]
    return OrthoBasis(measure=m, degree=d, exponents=sel_exps, coeff=coeff, rank=rank)
