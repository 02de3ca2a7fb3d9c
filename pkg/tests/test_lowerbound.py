import numpy as np
import pytest

from soslab.cheb import ChebPoly
from soslab.lowerbound import (
    EQ0,
    GEQ0,
    PUTINAR,
    SCHMUDGEN,
    LowerBoundResult,
    SetConstraint,
    SetDescription,
    assemble_putinar,
    assemble_schmudgen,
    builtin_set,
    certify_sos,
    lb,
    verify_certificate,
)
from soslab.poly import Polynomial, parse_polynomial, random_polynomial, affine_map_to_unit_box

MOTZKIN = parse_polynomial("x1^4*x2^2 + x1^2*x2^4 - 3*x1^2*x2^2 + 1", 2)
ROBINSON = parse_polynomial(
    "x1^6 + x2^6 + x3^6 - x1^4*x2^2 - x1^2*x2^4 - x1^4*x3^2 - x1^2*x3^4"
    " - x2^4*x3^2 - x2^2*x3^4 + 3*x1^2*x2^2*x3^2",
    3,
)


def test_builtin_box():
    sd = builtin_set("box", 2)
    assert len(sd.constraints) == 2
    assert all(c.relation == GEQ0 for c in sd.constraints)
    assert sd.constraints[0].g.terms == {(0, 0): 1.0, (2, 0): -1.0}


def test_builtin_sphere_equality():
    sd = builtin_set("sphere", 3)
    assert len(sd.constraints) == 1
    assert sd.constraints[0].relation == EQ0


def test_builtin_ball_membership_boundary():
    sd = builtin_set("ball", 2)
    assert sd.constraints[0].g.evaluate((0.6, 0.8)) == pytest.approx(0.0, abs=1e-15)
    assert sd.contains((0.6, 0.8))
    assert not sd.contains((0.8, 0.8))


def test_builtin_unknown_name():
    with pytest.raises(ValueError):
        builtin_set("torus", 2)


def test_lb_linear_on_box():
    res = lb(parse_polynomial("x1", 1), builtin_set("box", 1), 1, PUTINAR)
    assert res.value == pytest.approx(-1.0, abs=1e-6)
    assert res.verified


def test_lb_constant():
    res = lb(Polynomial.constant(2, 2.5), builtin_set("ball", 2), 1, PUTINAR)
    assert res.value == pytest.approx(2.5, abs=1e-6)
    assert res.verified


def test_lb_sos_objective_on_ball():
    res = lb(parse_polynomial("x1^2", 1), builtin_set("ball", 1), 1, PUTINAR)
    assert res.value == pytest.approx(0.0, abs=1e-6)


def test_lb_linear_on_sphere():
    res = lb(parse_polynomial("x1", 2), builtin_set("sphere", 2), 1, PUTINAR)
    assert res.value == pytest.approx(-1.0, abs=1e-6)
    assert res.verified
    assert 0 in res.free_multipliers  # the equality got a free multiplier


def test_schmudgen_single_constraint_equals_putinar():
    f = parse_polynomial("x1^2 + x1", 1)
    sd = builtin_set("box", 1)
    a = lb(f, sd, 2, PUTINAR).value
    b = lb(f, sd, 2, SCHMUDGEN).value
    assert a == pytest.approx(b, abs=1e-6)


def test_schmudgen_block_count_box2():
    p = assemble_schmudgen(parse_polynomial("x1*x2", 2), builtin_set("box", 2), 2)
    assert len(p.blocks) == 4  # subsets {}, {1}, {2}, {1,2}


def test_schmudgen_dominates_putinar():
    rng = np.random.default_rng(0)
    sd = builtin_set("box", 2)
    for _ in range(3):
        f = random_polynomial(rng, 2, 2)
        for r in (2, 3):
            vp = lb(f, sd, r, PUTINAR).value
            vs = lb(f, sd, r, SCHMUDGEN).value
            assert vs >= vp - 1e-7


def test_lb_monotone_in_r():
    rng = np.random.default_rng(1)
    sd = builtin_set("ball", 2)
    f = random_polynomial(rng, 2, 2)
    vals = [lb(f, sd, r, PUTINAR).value for r in range(1, 5)]
    for a, b in zip(vals, vals[1:]):
        assert b >= a - 1e-7


def test_motzkin_lower_bounds_on_scaled_box():
    # Motzkin on [-2, 2]^2 pulled back to the unit box; f_min = 0 at
    # (+-1, +-1), so the bounds must increase toward 0 from below
    f = affine_map_to_unit_box(MOTZKIN, np.array([-2.0, -2.0]), np.array([2.0, 2.0]))
    sd = builtin_set("box", 2)
    vals = []
    for r in (3, 4, 5):
        res = lb(f, sd, r, PUTINAR)
        assert res.verified
        vals.append(res.value)
    for a, b in zip(vals, vals[1:]):
        assert b >= a - 1e-7
    assert all(v <= 1e-7 for v in vals)
    assert vals[-1] > -0.3


def test_degree_too_small_rejected():
    with pytest.raises(ValueError):
        assemble_putinar(MOTZKIN, builtin_set("box", 2), 2)


def test_preordering_cap():
    sd = builtin_set("box", 9)
    with pytest.raises(ValueError):
        assemble_schmudgen(parse_polynomial("x1", 9), sd, 1)


def test_certify_sos_explicit_square():
    res = certify_sos(parse_polynomial("x1^4 + 1", 1))
    assert res.is_sos is True
    assert np.linalg.eigvalsh(res.gram).min() >= -1e-7


def test_certify_sos_motzkin():
    res = certify_sos(MOTZKIN)
    assert res.is_sos is False
    y = res.moment_certificate
    assert y is not None
    assert res.separation_value < 0


def test_certify_sos_robinson():
    res = certify_sos(ROBINSON)
    assert res.is_sos is False


def test_certify_sos_odd_degree_rejected():
    with pytest.raises(ValueError):
        certify_sos(parse_polynomial("x1^3", 1))


def test_verify_rejects_perturbed_gram():
    f = parse_polynomial("x1^2 + x1", 1)
    sd = builtin_set("box", 1)
    res = lb(f, sd, 2, PUTINAR)
    assert res.verified
    label = ()
    res.gram_blocks[label] = res.gram_blocks[label].copy()
    res.gram_blocks[label][0, 0] += 1e-3
    assert not verify_certificate(res, f, sd)


def test_verify_handbuilt_certificate():
    # 1 + x = 0.5 (1+x)^2 + 0.5 (1 - x^2) on the box, i.e. lambda = -1
    sd = builtin_set("box", 1)
    f = parse_polynomial("x1", 1)
    grams = {
        (): np.array([[0.5, 0.5], [0.5, 0.5]]),
        (0,): np.array([[0.5]]),
    }
    bases = {(): [(0,), (1,)], (0,): [(0,)]}
    res = LowerBoundResult(
        value=-1.0,
        order=1,
        kind=PUTINAR,
        set_description=sd,
        gram_blocks=grams,
        block_bases=bases,
        free_multipliers={},
    )
    assert verify_certificate(res, f, sd)


def test_certificate_json_export():
    res = lb(parse_polynomial("x1", 2), builtin_set("sphere", 2), 1, PUTINAR)
    import json

    payload = json.loads(res.to_json())
    assert payload["kind"] == PUTINAR
    assert payload["verified"] is True
    assert len(payload["blocks"]) >= 1
    assert payload["value"] == pytest.approx(-1.0, abs=1e-6)


def test_set_description_validation():
    with pytest.raises(ValueError):
        SetDescription(nvars=2, constraints=[])
    with pytest.raises(ValueError):
        SetDescription(
            nvars=2,
            constraints=[SetConstraint(parse_polynomial("x1", 1), GEQ0)],
        )
    with pytest.raises(ValueError):
        SetConstraint(parse_polynomial("x1", 1), "bogus")


def test_schmudgen_convergence_trend_quadratics():
    # error to the grid minimum shrinks with r and is below 1e-2 by r = 6
    from soslab.domains import grid_minimum
    from soslab.lowerbound import set_domain

    rng = np.random.default_rng(9)
    for name, n in (("box", 2), ("ball", 2), ("simplex", 2), ("sphere", 2)):
        sd = builtin_set(name, n)
        f = random_polynomial(rng, n, 2, density=1.0)
        gmin, _ = grid_minimum(f, set_domain(sd), npoints=40_000)
        errs = [gmin - lb(f, sd, r, SCHMUDGEN).value for r in (2, 4, 6)]
        # 1e-6 slack: once a bound reaches the true minimum the residual
        # error is solver noise, not hierarchy error
        assert errs[-1] <= min(errs[0], errs[1]) + 1e-6, (name, errs)
        assert errs[-1] < 1e-2, (name, errs)
