"""Geometry helpers for the supported feasible sets.

Provides deterministic low-discrepancy sampling and coordinate-wise
polishing used to estimate reference minima when no closed form is
available. Sampling uses an unscrambled Halton sequence, so repeated
runs produce identical estimates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc

from .measures import BallMeasure, BoxJacobi, Measure, SimplexMeasure, SphereMeasure
from .poly import Polynomial

KINDS = ("box", "ball", "simplex", "sphere")


@dataclass(frozen=True)
class Domain:
    kind: str
    nvars: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown domain kind {self.kind!r}")

    def contains(self, x: np.ndarray, tol: float = 1e-9) -> bool:
        x = np.asarray(x, dtype=float)
        if self.kind == "box":
            return bool(np.all(np.abs(x) <= 1.0 + tol))
        if self.kind == "ball":
            return bool(x @ x <= 1.0 + tol)
        if self.kind == "simplex":
            return bool(np.all(x >= -tol) and x.sum() <= 1.0 + tol)
        return bool(abs(x @ x - 1.0) <= tol)


def domain_of_measure(m: Measure) -> Domain:
    if isinstance(m, BoxJacobi):
        return Domain("box", m.nvars)
    if isinstance(m, BallMeasure):
        return Domain("ball", m.nvars)
    if isinstance(m, SimplexMeasure):
        return Domain("simplex", m.nvars)
    if isinstance(m, SphereMeasure):
        return Domain("sphere", m.nvars)
    raise TypeError(f"no domain for measure kind {m.kind!r}")


def sample_points(dom: Domain, count: int) -> np.ndarray:
    """Deterministic quasi-random points inside the domain; shape (<=count, n)."""
    n = dom.nvars
    halton = qmc.Halton(d=n, scramble=False, seed=0)
    u = halton.random(count)
    u = np.clip(u, 1e-12, 1.0 - 1e-12)
    if dom.kind == "box":
        return 2.0 * u - 1.0
    if dom.kind == "ball":
        x = 2.0 * u - 1.0
        keep = np.einsum("ij,ij->i", x, x) <= 1.0
        return x[keep]
    if dom.kind == "simplex":
        # spacings of sorted uniforms are uniform on the face simplex in
        # n+1 coordinates; dropping the last gives the full-dimensional one
        halton = qmc.Halton(d=n, scramble=False, seed=0)
        u = np.clip(halton.random(count), 1e-12, 1 - 1e-12)
        s = np.sort(u, axis=1)
        bounds = np.concatenate(
            [np.zeros((count, 1)), s, np.ones((count, 1))], axis=1
        )
        diffs = np.diff(bounds, axis=1)
        return diffs[:, :n]
    # sphere: Gaussianize then normalize (exactly uniform in distribution)
    z = ndtri(u)
    norms = np.linalg.norm(z, axis=1, keepdims=True)
    good = norms[:, 0] > 1e-8
    return z[good] / norms[good]


def _segment_minimize(fun, lo: float, hi: float, iters: int = 45) -> float:
    """Golden-section minimum of a scalar function on [lo, hi]."""
    if hi - lo < 1e-15:
        return lo
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fun(d)
    xs = [a, b, c, d]
    vals = [fun(x) for x in xs]
    return xs[int(np.argmin(vals))]


def polish(f: Polynomial, dom: Domain, x0: np.ndarray, sweeps: int = 50) -> np.ndarray:
    """Coordinate-descent polish staying inside the domain."""
    x = np.asarray(x0, dtype=float).copy()
    n = dom.nvars
    if dom.kind == "sphere":
        # plane rotations preserve the sphere exactly
        for _ in range(sweeps):
            for i in range(n):
                for j in range(i + 1, n):
                    xi, xj = x[i], x[j]
                    radius = float(np.hypot(xi, xj))
                    if radius < 1e-14:
                        continue
                    base = np.arctan2(xj, xi)

                    def fun(theta):
                        y = x.copy()
                        y[i] = radius * np.cos(base + theta)
                        y[j] = radius * np.sin(base + theta)
                        return f.evaluate(y)

                    t = _segment_minimize(fun, -np.pi, np.pi, iters=40)
                    x[i] = radius * np.cos(base + t)
                    x[j] = radius * np.sin(base + t)
        return x
    for _ in range(sweeps):
        for i in range(n):
            if dom.kind == "box":
                lo, hi = -1.0, 1.0
            elif dom.kind == "ball":
                rest = float(x @ x - x[i] * x[i])
                room = np.sqrt(max(1.0 - rest, 0.0))
                lo, hi = -room, room
            else:  # simplex
                rest = float(x.sum() - x[i])
                lo, hi = 0.0, max(1.0 - rest, 0.0)

            def fun(t):
                y = x.copy()
                y[i] = t
                return f.evaluate(y)

            x[i] = _segment_minimize(fun, lo, hi)
    return x


def grid_minimum(
    f: Polynomial, dom: Domain, npoints: int = 100_000, sweeps: int = 50
) -> tuple[float, np.ndarray]:
    """Quasi-random grid estimate of min f over the domain, with polish."""
    pts = sample_points(dom, npoints)
    vals = f.evaluate_many(pts)
    order = np.argsort(vals)[: min(8, len(vals))]
    best_val = np.inf
    best_x = pts[order[0]]
    for idx in order:
        x = polish(f, dom, pts[idx], sweeps=sweeps)
        v = f.evaluate(x)
        if v < best_val:
            best_val, best_x = v, x
    return float(best_val), best_x
