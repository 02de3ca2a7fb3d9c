"""Measure-based upper bounds through the eigenvalue reformulation.

The order-r bound is the smallest eigenvalue of the operator matrix
(int f P_a P_b dmu) over a graded orthonormal basis of the degree-r
polynomials on the support. Three interchangeable assembly backends are
provided:

* ``tensor`` (product box measures): entries come from powers of the
  univariate Jacobi operators, exact and stable at any order;
* ``quadrature`` (any measure): basis and matrix are built on an exact
  Gauss-type cubature grid, which avoids the catastrophic conditioning
  of monomial Gram matrices at high order;
* ``moment`` (any measure, small order): literal moment-expansion over
  measures.orthonormal_basis, kept as an independent cross-check.

All integrals in every backend are of polynomials within the rules'
exactness degree, so the backends agree up to roundoff.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import cubature, linalg, measures, orthopoly
from .cheb import chebyshev_values
from .domains import domain_of_measure, grid_minimum
from .measures import BallMeasure, BoxJacobi, Measure, SimplexMeasure, SphereMeasure
from .poly import Polynomial, monomials_upto


class DegenerateMomentMatrixError(ValueError):
    """Push-forward Hankel matrix is numerically singular; reduce r."""


class CubatureExactnessError(ValueError):
    """Supplied rule fails the polynomial exactness precondition."""


# ---------------------------------------------------------------------------
# basis representations


class TensorJacobiBasis:
    """Products of univariate orthonormal Jacobi polynomials on the box."""

    def __init__(self, m: BoxJacobi, degree: int):
        self.measure = m
        self.degree = degree
        self.indices = np.asarray(monomials_upto(m.nvars, degree), dtype=np.int64)
        self.rank = self.indices.shape[0]
        self._norm = np.prod([w.mass() for w in m.weights]) / m.mass

    def eval_many(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        scale = np.sqrt(self._norm)
        tables = [
            orthopoly.eval_basis(w, self.degree, pts[:, i])
            for i, w in enumerate(self.measure.weights)
        ]
        out = np.ones((pts.shape[0], self.rank))
        for i in range(self.measure.nvars):
            out *= tables[i][:, self.indices[:, i]]
        return out * scale


class QuadratureBasis:
    """Orthonormal basis represented by candidate-function combinations.

    ``coeff`` maps the (stable-to-evaluate) candidate functions to the
    orthonormal basis: P = candidates @ coeff. Candidates are tensor
    Chebyshev products, shifted to [0,1] coordinates on the simplex and
    restricted to last-variable degree <= 1 on the sphere.
    """

    def __init__(self, m: Measure, degree: int, multidegrees: np.ndarray, coeff: np.ndarray):
        self.measure = m
        self.degree = degree
        self.multidegrees = multidegrees
        self.coeff = coeff
        self.rank = coeff.shape[1]

    def eval_many(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        cand = _candidate_values(self.measure, self.multidegrees, pts)
        return cand @ self.coeff


class MomentBasis:
    """Adapter exposing measures.OrthoBasis through the common interface."""

    def __init__(self, basis: measures.OrthoBasis):
        self.inner = basis
        self.measure = basis.measure
        self.degree = basis.degree
        self.rank = basis.rank

    def eval_many(self, points: np.ndarray) -> np.ndarray:
        return self.inner.eval_many(points)


def _candidate_multidegrees(m: Measure, degree: int) -> np.ndarray:
    if isinstance(m, SphereMeasure):
        full = monomials_upto(m.nvars, degree)
        keep = [a for a in full if a[-1] <= 1]
        return np.asarray(keep, dtype=np.int64)
    return np.asarray(monomials_upto(m.nvars, degree), dtype=np.int64)


def _candidate_values(m: Measure, multidegrees: np.ndarray, pts: np.ndarray) -> np.ndarray:
    n = m.nvars
    kmax = int(multidegrees.max(initial=0))
    if isinstance(m, SimplexMeasure):
        coords = 2.0 * pts - 1.0  # simplex coordinates live in [0, 1]
    else:
        coords = pts
    tables = [chebyshev_values(coords[:, i], kmax) for i in range(n)]
    out = np.ones((pts.shape[0], multidegrees.shape[0]))
    for i in range(n):
        out *= tables[i][:, multidegrees[:, i]]
    return out


def _quadrature_basis(
    m: Measure, degree: int, extra_degree: int = 0, rank_tol: float = 1e-10
) -> tuple[QuadratureBasis, np.ndarray, np.ndarray]:
    """Graded orthonormalization of candidate functions on an exact rule.

    Returns the basis plus the rule nodes and the weighted node-value
    matrix B (columns orthonormal: B.T @ B = I).
    """
    multidegrees = _candidate_multidegrees(m, degree)
    pts, wts = cubature.rule(m, 2 * degree + extra_degree)
    cand = _candidate_values(m, multidegrees, pts)
    z = cand * np.sqrt(wts)[:, None]
    degrees = multidegrees.sum(axis=1)
    ncand = multidegrees.shape[0]
    npts = pts.shape[0]
    qmat = np.zeros((npts, 0))
    cmat = np.zeros((ncand, 0))
    colscale = float(np.max(np.linalg.norm(z, axis=0))) or 1.0
    for deg in range(degree + 1):
        sel = np.where(degrees == deg)[0]
        if sel.size == 0:
            continue
        zb = z[:, sel].copy()
        cb = np.zeros((ncand, sel.size))
        cb[sel, np.arange(sel.size)] = 1.0
        for _ in range(2):  # twice-is-enough reorthogonalization
            if qmat.shape[1]:
                proj = qmat.T @ zb
                zb -= qmat @ proj
                cb -= cmat @ proj
        q, rmat, piv = scipy.linalg.qr(zb, mode="economic", pivoting=True)
        rdiag = np.abs(np.diag(rmat))
        keep = int(np.sum(rdiag > rank_tol * colscale))
        if keep:
            rkeep = rmat[:keep, :keep]
            # enforce positive diagonal for determinism
            signs = np.sign(np.diag(rkeep))
            signs[signs == 0] = 1.0
            q = q[:, :keep] * signs
            rkeep = signs[:, None] * rkeep
            # q = zb[:, piv[:keep]] @ inv(rkeep); carry the same combination
            # on the candidate-coefficient side
            cnew = scipy.linalg.solve_triangular(
                rkeep.T, cb[:, piv[:keep]].T, lower=True
            ).T
            qmat = np.concatenate([qmat, q], axis=1)
            cmat = np.concatenate([cmat, cnew], axis=1)
    basis = QuadratureBasis(m, degree, multidegrees, cmat)
    # columns of qmat are sqrt(w)-weighted basis values: qmat.T @ qmat = I
    return basis, pts, qmat, wts


# ---------------------------------------------------------------------------
# operator assembly


def _assemble_tensor(f: Polynomial, m: BoxJacobi, r: int) -> tuple[np.ndarray, TensorJacobiBasis]:
    basis = TensorJacobiBasis(m, r)
    idx = basis.indices
    n = m.nvars
    powers: list[dict[int, np.ndarray]] = []
    for i, w in enumerate(m.weights):
        gmax = f.degree_in(i)
        jop = orthopoly.jacobi_operator(w, r + gmax)
        table = {0: np.eye(r + 1)}
        acc = np.eye(jop.shape[0])
        for g in range(1, gmax + 1):
            acc = acc @ jop
            table[g] = acc[: r + 1, : r + 1]
        powers.append(table)
    nbasis = idx.shape[0]
    mat = np.zeros((nbasis, nbasis))
    for alpha, c in f.sorted_terms():
        term = np.full((nbasis, nbasis), c)
        for i in range(n):
            u = powers[i][alpha[i]]
            term *= u[np.ix_(idx[:, i], idx[:, i])]
        mat += term
    return linalg.sym(mat), basis


def _assemble_quadrature(f: Polynomial, m: Measure, r: int) -> tuple[np.ndarray, QuadratureBasis]:
    basis, pts, bmat, wts = _quadrature_basis(m, r, extra_degree=max(f.degree, 0))
    fvals = f.evaluate_many(pts)
    mat = bmat.T @ (fvals[:, None] * bmat)
    return linalg.sym(mat), basis


def _assemble_moment(f: Polynomial, m: Measure, r: int) -> tuple[np.ndarray, MomentBasis]:
    basis = measures.orthonormal_basis(m, r)
    polys = basis.polys
    n = basis.rank
    mat = np.zeros((n, n))
    for i in range(n):
        fi = f.multiply(polys[i])
        for j in range(i + 1):
            mat[i, j] = mat[j, i] = m.integrate(fi.multiply(polys[j]))
    return mat, MomentBasis(basis)


def _pick_method(m: Measure, method: str) -> str:
    if method != "auto":
        return method
    return "tensor" if isinstance(m, BoxJacobi) else "quadrature"


def assemble_operator_matrix(
    f: Polynomial, m: Measure, r: int, method: str = "auto"
) -> np.ndarray:
    """Matrix (int f P_a P_b dmu) over the orthonormal basis of degree r."""
    mat, _ = _assemble(f, m, r, method)
    return mat


def _assemble(f: Polynomial, m: Measure, r: int, method: str = "auto"):
    if f.nvars != m.nvars:
        raise ValueError("polynomial/measure dimension mismatch")
    if r < 0:
        raise ValueError("order r must be >= 0")
    picked = _pick_method(m, method)
    if picked == "tensor":
        if not isinstance(m, BoxJacobi):
            raise ValueError("tensor backend requires a box measure")
        return _assemble_tensor(f, m, r)
    if picked == "quadrature":
        return _assemble_quadrature(f, m, r)
    if picked == "moment":
        return _assemble_moment(f, m, r)
    raise ValueError(f"unknown assembly method {method!r}")


@dataclass
class UpperBoundResult:
    """Bound value with the optimal-density payload sigma = (sum v_a P_a)^2."""

    value: float
    order: int
    basis: object
    density_coeffs: np.ndarray

    def density_values(self, points: np.ndarray) -> np.ndarray:
        vals = self.basis.eval_many(np.asarray(points, dtype=float))
        return (vals @ self.density_coeffs) ** 2

    def density_integral(self) -> float:
        """Quadrature check of int sigma dmu; equals 1 up to roundoff."""
        pts, wts = cubature.rule(self.basis.measure, 2 * self.order)
        return float(np.dot(wts, self.density_values(pts)))


def ub(f: Polynomial, m: Measure, r: int, method: str = "auto") -> UpperBoundResult:
    """Order-r upper bound: smallest eigenvalue of the operator matrix."""
    mat, basis = _assemble(f, m, r, method)
    eig = linalg.eig_min_sym(mat)
    return UpperBoundResult(
        value=eig.value, order=r, basis=basis, density_coeffs=eig.vector
    )


# ---------------------------------------------------------------------------
# push-forward bounds


@dataclass
class PushforwardMoments:
    """Raw moments m_k = int f^k dmu of the push-forward measure."""

    values: np.ndarray

    def hankel(self, shift: int = 0) -> np.ndarray:
        r = (self.values.size - 1 - shift) // 2
        idx = np.arange(r + 1)
        return self.values[idx[:, None] + idx[None, :] + shift]


def pushforward_moments(f: Polynomial, m: Measure, kmax: int) -> PushforwardMoments:
    if kmax < 0:
        raise ValueError("kmax must be >= 0")
    pts, wts = cubature.rule(m, kmax * max(f.degree, 1))
    fvals = f.evaluate_many(pts)
    out = np.empty(kmax + 1)
    acc = np.ones_like(fvals)
    out[0] = wts.sum()
    for k in range(1, kmax + 1):
        acc = acc * fvals
        out[k] = float(np.dot(wts, acc))
    return PushforwardMoments(values=out)


def ub_pushforward(f: Polynomial, m: Measure, r: int) -> float:
    """Upper bound restricted to densities s(f(x)) with s univariate SOS.

    Computed as the smallest generalized eigenvalue of the pencil of
    multiplication-by-t against the push-forward Gram. The push-forward
    variable is affinely rescaled into [-1, 1] and the pencil is formed
    in the Chebyshev basis; the value is basis- and scaling-invariant,
    matching the raw-moment Hankel pencil exactly.
    """
    if r < 0:
        raise ValueError("order r must be >= 0")
    degree_needed = (2 * r + 2) * max(f.degree, 1)
    pts, wts = cubature.rule(m, degree_needed)
    fvals = f.evaluate_many(pts)
    lo, hi = float(fvals.min()), float(fvals.max())
    if hi - lo < 1e-14 * (1.0 + abs(hi)):
        return 0.5 * (hi + lo)
    pad = 1e-12 * (hi - lo)
    center = 0.5 * (hi + lo)
    half = 0.5 * (hi - lo) + pad
    tvals = (fvals - center) / half
    cheb = chebyshev_values(tvals, 2 * r + 2)
    c = cheb.T @ wts  # c_k = int T_k(f~) dmu, exact
    idx = np.arange(r + 1)

    def csym(k: np.ndarray) -> np.ndarray:
        return c[np.abs(k)]

    s = idx[:, None] + idx[None, :]
    d = np.abs(idx[:, None] - idx[None, :])
    h0 = 0.5 * (csym(s) + csym(d))
    h1 = 0.25 * (csym(s + 1) + csym(s - 1) + csym(d + 1) + csym(d - 1))
    try:
        pencil = linalg.gen_eig_min(h1, h0)
    except linalg.NotPositiveDefiniteError as exc:
        raise DegenerateMomentMatrixError(
            f"push-forward Gram is numerically singular at r={r}; reduce r"
        ) from exc
    return center + half * pencil.value


# ---------------------------------------------------------------------------
# cubature sandwich


@dataclass
class CubatureReport:
    ub_value: float
    node_min: float
    grid_min: float
    chain_holds: bool


def cubature_check(
    f: Polynomial,
    m: Measure,
    r: int,
    nodes: np.ndarray,
    weights: np.ndarray,
    grid_points: int = 100_000,
) -> CubatureReport:
    """Verify ub_r >= min over cubature nodes >= grid estimate of f_min.

    The rule must be exact for the measure at degree deg(f) + 2r; this is
    checked on all monomials up to that degree within 1e-8 and a
    CubatureExactnessError is raised on failure.
    """
    nodes = np.asarray(nodes, dtype=float)
    weights = np.asarray(weights, dtype=float)
    degree = f.degree + 2 * r
    for alpha in monomials_upto(m.nvars, degree):
        v = np.ones(nodes.shape[0])
        for i, a in enumerate(alpha):
            if a:
                v = v * nodes[:, i] ** a
        err = abs(float(np.dot(weights, v)) - m.moment(alpha))
        if err > 1e-8:
            raise CubatureExactnessError(
                f"rule misses moment {alpha} by {err:.3e}; "
                f"needs exactness at degree {degree}"
            )
    bound = ub(f, m, r).value
    node_min = float(np.min(f.evaluate_many(nodes)))
    gmin, _ = grid_minimum(f, domain_of_measure(m), npoints=grid_points)
    slack = 1e-9 * (1.0 + abs(bound))
    chain = bound >= node_min - slack and node_min >= gmin - slack
    if not chain:
        raise AssertionError(
            f"cubature sandwich violated: ub={bound!r} node_min={node_min!r} "
            f"grid_min={gmin!r}"
        )
    return CubatureReport(
        ub_value=bound, node_min=node_min, grid_min=gmin, chain_holds=chain
    )
