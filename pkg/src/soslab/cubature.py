"""Exact positive cubature rules for the supported measures.

Each rule integrates every polynomial up to the requested total degree
exactly (in exact arithmetic) against the probability measure: weights
are positive and sum to one. Construction is by Gauss product rules:
per-coordinate Gauss-Jacobi for the box, a radial-times-spherical split
for the ball, a recursive polar split for the sphere, and collapsed
(Duffy) coordinates with Jacobi weights absorbing the Jacobian for the
simplex.
"""

from __future__ import annotations

import numpy as np

from . import orthopoly
from .measures import BallMeasure, BoxJacobi, Measure, SimplexMeasure, SphereMeasure


def rule(m: Measure, degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes (M, nvars) and weights (M,) exact at the given total degree."""
    if degree < 0:
        raise ValueError("degree must be >= 0")
    if isinstance(m, BoxJacobi):
        pts, wts = _box_rule(m, degree)
    elif isinstance(m, BallMeasure):
        pts, wts = _ball_rule(m.nvars, m.lam, degree)
    elif isinstance(m, SphereMeasure):
        pts, wts = _sphere_rule(m.nvars, degree)
    elif isinstance(m, SimplexMeasure):
        pts, wts = _simplex_rule(m.nvars, degree)
    else:
        raise TypeError(f"no cubature rule for measure kind {m.kind!r}")
    return pts, wts * m.mass


def _box_rule(m: BoxJacobi, degree: int):
    npts = degree // 2 + 1
    nodes_1d = []
    weights_1d = []
    for w in m.weights:
        x, wt = orthopoly.gauss_rule(w, npts)
        nodes_1d.append(x)
        weights_1d.append(wt)
    return _product(nodes_1d, weights_1d)


def _product(nodes_1d, weights_1d):
    grids = np.meshgrid(*nodes_1d, indexing="ij")
    pts = np.column_stack([g.ravel() for g in grids])
    wgrids = np.meshgrid(*weights_1d, indexing="ij")
    wts = np.ones(pts.shape[0])
    for g in wgrids:
        wts = wts * g.ravel()
    return pts, wts


def _sphere_rule(n: int, degree: int):
    """Surface rule on S^(n-1), exact at the given degree, weights sum 1."""
    if n == 1:
        return np.array([[-1.0], [1.0]]), np.array([0.5, 0.5])
    if n == 2:
        k = degree + 2  # any count > degree works; even keeps antipodal symmetry
        theta = 2.0 * np.pi * (np.arange(k) + 0.5) / k
        pts = np.column_stack([np.cos(theta), np.sin(theta)])
        return pts, np.full(k, 1.0 / k)
    t, wt = orthopoly.gauss_rule(orthopoly.gegenbauer_weight(n), degree // 2 + 1)
    sub_pts, sub_wts = _sphere_rule(n - 1, degree)
    s = np.sqrt(np.maximum(1.0 - t * t, 0.0))
    pts = np.concatenate(
        [
            (s[:, None, None] * sub_pts[None, :, :]).reshape(-1, n - 1),
            np.repeat(t, sub_pts.shape[0])[:, None],
        ],
        axis=1,
    )
    wts = (wt[:, None] * sub_wts[None, :]).ravel()
    return pts, wts


def _ball_rule(n: int, lam: float, degree: int):
    """Rule on the unit ball for the weight (1-|x|^2)^lam.

    Only even powers of the radius survive the exact spherical average,
    so the radial factor reduces to a Gauss-Jacobi rule in u = r^2 with
    weight u^(n/2-1) (1-u)^lam on [0, 1].
    """
    k_rad = (degree // 2) // 2 + 1
    u, wu = orthopoly.shifted_gauss_rule_01(lam, n / 2.0 - 1.0, k_rad)
    r = np.sqrt(u)
    sph_pts, sph_wts = _sphere_rule(n, degree)
    pts = (r[:, None, None] * sph_pts[None, :, :]).reshape(-1, n)
    wts = (wu[:, None] * sph_wts[None, :]).ravel()
    return pts, wts


def _simplex_rule(n: int, degree: int):
    """Collapsed-coordinate rule on {x >= 0, sum x <= 1}, Lebesgue measure.

    Under x_i = t_i * prod_{l<i} (1 - t_l) the Jacobian is
    prod_i (1-t_i)^(n-i), which is absorbed into per-direction Jacobi
    weights on [0, 1].
    """
    npts = degree // 2 + 1
    nodes_1d = []
    weights_1d = []
    for i in range(1, n + 1):
        x, wt = orthopoly.shifted_gauss_rule_01(float(n - i), 0.0, npts)
        nodes_1d.append(x)
        weights_1d.append(wt)
    tpts, wts = _product(nodes_1d, weights_1d)
    pts = np.empty_like(tpts)
    shrink = np.ones(tpts.shape[0])
    for i in range(n):
        pts[:, i] = tpts[:, i] * shrink
        shrink = shrink * (1.0 - tpts[:, i])
    return pts, wts


def integrate_on_rule(values: np.ndarray, weights: np.ndarray) -> float:
    return float(np.dot(weights, values))
