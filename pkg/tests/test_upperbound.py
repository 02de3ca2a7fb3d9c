import numpy as np
import pytest

from soslab.cubature import rule
from soslab.domains import Domain, grid_minimum
from soslab.measures import BallMeasure, BoxJacobi, SimplexMeasure, SphereMeasure
from soslab.poly import Polynomial, parse_polynomial, random_polynomial
from soslab.upperbound import (
    CubatureExactnessError,
    assemble_operator_matrix,
    cubature_check,
    pushforward_moments,
    ub,
    ub_pushforward,
)

CHEB1 = BoxJacobi(1, -0.5)
X1 = parse_polynomial("x1", 1)
X1SQ = parse_polynomial("x1^2", 1)


def test_assemble_constant_is_identity():
    for m, method in [
        (CHEB1, "tensor"),
        (BallMeasure(2), "quadrature"),
        (SphereMeasure(3), "quadrature"),
        (SimplexMeasure(2), "moment"),
    ]:
        one = Polynomial.constant(m.nvars, 1.0)
        mat = assemble_operator_matrix(one, m, 3, method=method)
        assert np.max(np.abs(mat - np.eye(mat.shape[0]))) < 1e-12


def test_assemble_x_is_jacobi_operator():
    from soslab.orthopoly import chebyshev_weight, jacobi_operator

    mat = assemble_operator_matrix(X1, CHEB1, 6)
    assert np.allclose(mat, jacobi_operator(chebyshev_weight(), 6), atol=1e-14)


def test_assemble_x2_pentadiagonal():
    mat = assemble_operator_matrix(X1SQ, CHEB1, 8)
    off_band = mat - np.triu(np.tril(mat, 2), -2)
    assert np.max(np.abs(off_band)) == 0.0


def test_ub_chebyshev_root_formula():
    for r in range(1, 30):
        v = ub(X1, CHEB1, r).value
        assert v == pytest.approx(-np.cos(np.pi / (2 * (r + 1))), abs=1e-12)


def test_ub_constant():
    c = Polynomial.constant(2, 3.25)
    m = BoxJacobi(2, -0.5)
    for r in (0, 2, 4):
        assert ub(c, m, r).value == pytest.approx(3.25, abs=1e-12)


def test_ub_x2_order_zero():
    assert ub(X1SQ, CHEB1, 0).value == pytest.approx(0.5, abs=1e-13)


def test_backends_agree_box():
    rng = np.random.default_rng(0)
    m = BoxJacobi(2, [-0.5, 0.0])
    for _ in range(3):
        f = random_polynomial(rng, 2, 3)
        for r in (1, 3):
            vt = ub(f, m, r, method="tensor").value
            vq = ub(f, m, r, method="quadrature").value
            vm = ub(f, m, r, method="moment").value
            assert vt == pytest.approx(vq, abs=1e-9)
            assert vt == pytest.approx(vm, abs=1e-8)


def test_backends_agree_other_kinds():
    rng = np.random.default_rng(1)
    for m in [BallMeasure(2, 0.5), SphereMeasure(2), SimplexMeasure(2)]:
        f = random_polynomial(rng, m.nvars, 2)
        for r in (1, 3):
            vq = ub(f, m, r, method="quadrature").value
            vm = ub(f, m, r, method="moment").value
            assert vq == pytest.approx(vm, abs=1e-8), m.label()


def test_monotone_in_r():
    rng = np.random.default_rng(2)
    cases = [
        (BoxJacobi(2, -0.5), random_polynomial(rng, 2, 3)),
        (BallMeasure(2), random_polynomial(rng, 2, 4)),
        (SphereMeasure(3), random_polynomial(rng, 3, 2)),
        (SimplexMeasure(2), random_polynomial(rng, 2, 3)),
    ]
    for m, f in cases:
        vals = [ub(f, m, r).value for r in range(0, 6)]
        for a, b in zip(vals, vals[1:]):
            assert b <= a + 1e-9


def test_sandwich_against_grid():
    rng = np.random.default_rng(3)
    for m in [BoxJacobi(2, -0.5), BallMeasure(2)]:
        f = random_polynomial(rng, 2, 3)
        gmin, _ = grid_minimum(f, Domain(m.kind, 2), npoints=20_000)
        for r in (2, 5):
            assert ub(f, m, r).value >= gmin - 1e-6


def test_estimator_comparison_property():
    # f <= g on X with equal minima implies the ub error of f is no worse
    f = parse_polynomial("x1^2 + x1", 1)
    fmin = -0.25
    for c in (0.4, 1.3):
        # (x + 1/2)^2 vanishes at the shared minimizer, so g = f + c*sq
        # dominates f and keeps the same minimum
        sq = parse_polynomial("x1^2 + x1 + 0.25", 1)
        g = f + sq.scale(c)
        for r in (2, 4, 8):
            ef = ub(f, CHEB1, r).value - fmin
            eg = ub(g, CHEB1, r).value - fmin
            assert ef <= eg + 1e-8


def test_scale_invariance_of_ub():
    f = parse_polynomial("x1^2 + x1*x2", 2)
    base = BoxJacobi(2, -0.5)
    scaled = BoxJacobi(2, -0.5, mass=7.3)
    for r in (1, 3):
        assert ub(f, base, r).value == pytest.approx(
            ub(f, scaled, r).value, abs=1e-9
        )
    mb, ms = BallMeasure(2), BallMeasure(2, mass=0.2)
    assert ub(f, mb, 3, method="quadrature").value == pytest.approx(
        ub(f, ms, 3, method="quadrature").value, abs=1e-9
    )


def test_density_normalized_and_nonnegative():
    rng = np.random.default_rng(4)
    for m, method in [
        (BoxJacobi(2, -0.5), "tensor"),
        (BallMeasure(2), "quadrature"),
        (SphereMeasure(3), "quadrature"),
    ]:
        f = random_polynomial(rng, m.nvars, 2)
        res = ub(f, m, 4, method=method)
        assert res.density_integral() == pytest.approx(1.0, abs=1e-8)
        pts = rng.uniform(-1, 1, size=(1000, m.nvars))
        assert np.all(res.density_values(pts) >= 0.0)


def test_pushforward_moment_basics():
    mom = pushforward_moments(X1, CHEB1, 8)
    assert mom.values[0] == pytest.approx(1.0, abs=1e-14)
    assert mom.values[1] == pytest.approx(0.0, abs=1e-14)
    assert mom.values[2] == pytest.approx(0.5, abs=1e-14)
    assert np.linalg.eigvalsh(mom.hankel()).min() > -1e-12


def test_pushforward_moments_nonnegative_integrand():
    mom = pushforward_moments(parse_polynomial("x1^2", 2), BoxJacobi(2, 0.0), 6)
    assert np.all(mom.values >= 0.0)


def test_pushforward_identity_equals_ub():
    for r in (1, 4, 9):
        assert ub_pushforward(X1, CHEB1, r) == pytest.approx(
            ub(X1, CHEB1, r).value, abs=1e-11
        )


def test_pushforward_constant():
    c = Polynomial.constant(2, -1.5)
    assert ub_pushforward(c, BallMeasure(2), 3) == pytest.approx(-1.5, abs=1e-12)


def test_pushforward_x2_small_r_oracle():
    # brute force over s = (a + b t)^2 with the normalization constraint:
    # minimize int x^2 s(x^2) dmu on a fine parameter grid
    mom = pushforward_moments(X1SQ, CHEB1, 4)
    m = mom.values

    def objective(theta):
        a, b = np.cos(theta), np.sin(theta)
        num = a * a * m[1] + 2 * a * b * m[2] + b * b * m[3]
        den = a * a * m[0] + 2 * a * b * m[1] + b * b * m[2]
        return num / den

    thetas = np.linspace(0, np.pi, 20001)[:-1]
    vals = [objective(t) for t in thetas]
    ref = min(vals)
    got = ub_pushforward(X1SQ, CHEB1, 1)
    assert got == pytest.approx(ref, abs=1e-6)


def test_pushforward_dominates_ub():
    rng = np.random.default_rng(5)
    cases = []
    for m in [BoxJacobi(2, -0.5), BallMeasure(2)]:
        cases.append((m, random_polynomial(rng, 2, 2), 5))
        cases.append((m, random_polynomial(rng, 2, 4), 2))
    for m, f, r in cases:
        d = f.degree
        assert ub(f, m, r * d).value <= ub_pushforward(f, m, r) + 1e-8


def test_cubature_check_chain():
    nodes, weights = rule(CHEB1, 25)
    for f in (X1, X1SQ):
        for r in (1, 5, 10):
            rep = cubature_check(f, CHEB1, r, nodes, weights, grid_points=20_000)
            assert rep.chain_holds
            assert rep.ub_value >= rep.node_min - 1e-9
            assert rep.node_min >= rep.grid_min - 1e-9


def test_cubature_check_constant_all_equal():
    nodes, weights = rule(CHEB1, 9)
    c = Polynomial.constant(1, 2.0)
    rep = cubature_check(c, CHEB1, 2, nodes, weights, grid_points=5_000)
    assert rep.ub_value == pytest.approx(2.0, abs=1e-10)
    assert rep.node_min == pytest.approx(2.0, abs=1e-12)
    assert rep.grid_min == pytest.approx(2.0, abs=1e-12)


def test_cubature_check_rejects_inexact_rule():
    nodes, weights = rule(CHEB1, 3)  # far too coarse for r = 10
    with pytest.raises(CubatureExactnessError):
        cubature_check(X1SQ, CHEB1, 10, nodes, weights)


def test_sphere_reduced_rank():
    mat = assemble_operator_matrix(parse_polynomial("x1", 2), SphereMeasure(2), 4)
    assert mat.shape[0] == 2 * 4 + 1  # dim of degree-4 polynomials on the circle
