"""Tensor-product Chebyshev polynomial representation.

Coefficients live on multi-degree tuples (k_1,...,k_n) indexing the
products T_{k_1}(x_1) ... T_{k_n}(x_n). Products expand through
T_a T_b = (T_{a+b} + T_{|a-b|})/2 coordinate by coordinate, so all
structure constants are dyadic and multiplication is numerically exact
for the coefficient sizes used here. This basis conditions the Gram
blocks of the lower-bound hierarchy far better than raw monomials.
"""

from __future__ import annotations

from typing import Iterable, Mapping

import numpy as np

from .poly import Exponent, Polynomial


def _mono_to_cheb_1d(k: int) -> dict[int, float]:
    """Chebyshev coefficients of x^k; all entries positive (stable)."""
    cur = {0: 1.0}
    for _ in range(k):
        nxt: dict[int, float] = {}
        for j, c in cur.items():
            if j == 0:
                nxt[1] = nxt.get(1, 0.0) + c
            else:
                nxt[j + 1] = nxt.get(j + 1, 0.0) + 0.5 * c
                nxt[j - 1] = nxt.get(j - 1, 0.0) + 0.5 * c
        cur = nxt
    return cur


def _cheb_to_mono_1d(k: int) -> np.ndarray:
    """Monomial coefficient vector of T_k (length k+1)."""
    if k == 0:
        return np.array([1.0])
    prev = np.array([1.0])
    cur = np.array([0.0, 1.0])
    for _ in range(k - 1):
        nxt = np.zeros(cur.size + 1)
        nxt[1:] = 2.0 * cur
        nxt[: prev.size] -= prev
        prev, cur = cur, nxt
    return cur


class ChebPoly:
    """Sparse polynomial in the tensor Chebyshev basis."""

    __slots__ = ("nvars", "coeffs")

    def __init__(self, nvars: int, coeffs: Mapping[Exponent, float] | None = None):
        self.nvars = int(nvars)
        clean: dict[Exponent, float] = {}
        if coeffs:
            for key, c in coeffs.items():
                c = float(c)
                if c != 0.0:
                    clean[tuple(int(k) for k in key)] = c
        self.coeffs = clean

    @classmethod
    def zero(cls, nvars: int) -> "ChebPoly":
        return cls(nvars, {})

    @classmethod
    def constant(cls, nvars: int, c: float) -> "ChebPoly":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def basis_term(cls, nvars: int, key: Iterable[int]) -> "ChebPoly":
        return cls(nvars, {tuple(key): 1.0})

    @classmethod
    def from_polynomial(cls, p: Polynomial) -> "ChebPoly":
        out: dict[Exponent, float] = {}
        tables: dict[int, dict[int, float]] = {}
        for alpha, c in p.sorted_terms():
            parts: list[tuple[Exponent, float]] = [((), c)]
            for a in alpha:
                tab = tables.get(a)
                if tab is None:
                    tab = _mono_to_cheb_1d(a)
                    tables[a] = tab
                parts = [
                    (key + (j,), v * cj) for key, v in parts for j, cj in tab.items()
                ]
            for key, v in parts:
                s = out.get(key, 0.0) + v
                if s == 0.0:
                    out.pop(key, None)
                else:
                    out[key] = s
        return cls(p.nvars, out)

    def to_polynomial(self) -> Polynomial:
        total = Polynomial.zero(self.nvars)
        for key, c in sorted(self.coeffs.items()):
            term = Polynomial.constant(self.nvars, c)
            for i, k in enumerate(key):
                if k:
                    vec = _cheb_to_mono_1d(k)
                    uni = Polynomial(
                        self.nvars,
                        {
                            tuple(j if ii == i else 0 for ii in range(self.nvars)): v
                            for j, v in enumerate(vec)
                            if v != 0.0
                        },
                    )
                    term = term.multiply(uni)
            total = total.add(term)
        return total

    @property
    def degree(self) -> int:
        if not self.coeffs:
            return 0
        return max(sum(k) for k in self.coeffs)

    def add(self, other: "ChebPoly") -> "ChebPoly":
        acc = dict(self.coeffs)
        for key, c in other.coeffs.items():
            s = acc.get(key, 0.0) + c
            if s == 0.0:
                acc.pop(key, None)
            else:
                acc[key] = s
        out = ChebPoly(self.nvars)
        out.coeffs = acc
        return out

    def scale(self, c: float) -> "ChebPoly":
        c = float(c)
        if c == 0.0:
            return ChebPoly.zero(self.nvars)
        out = ChebPoly(self.nvars)
        out.coeffs = {k: c * v for k, v in self.coeffs.items()}
        return out

    def multiply(self, other: "ChebPoly") -> "ChebPoly":
        acc: dict[Exponent, float] = {}
        for ka, ca in self.coeffs.items():
            for kb, cb in other.coeffs.items():
                _accumulate_product(acc, ka, kb, ca * cb)
        out = ChebPoly(self.nvars)
        out.coeffs = {k: v for k, v in acc.items() if v != 0.0}
        return out

    def eval_many(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != self.nvars:
            raise ValueError(f"expected shape (m, {self.nvars})")
        if not self.coeffs:
            return np.zeros(pts.shape[0])
        kmax = [max(k[i] for k in self.coeffs) for i in range(self.nvars)]
        tables = [chebyshev_values(pts[:, i], kmax[i]) for i in range(self.nvars)]
        out = np.zeros(pts.shape[0])
        for key, c in self.coeffs.items():
            v = np.full(pts.shape[0], c)
            for i, k in enumerate(key):
                if k:
                    v = v * tables[i][:, k]
            out += v
        return out


def _accumulate_product(
    acc: dict[Exponent, float], ka: Exponent, kb: Exponent, c: float
) -> None:
    parts: list[tuple[tuple[int, ...], float]] = [((), c)]
    for a, b in zip(ka, kb):
        hi, lo = a + b, abs(a - b)
        if hi == lo:
            parts = [(key + (hi,), v) for key, v in parts]
        else:
            parts = [
                entry
                for key, v in parts
                for entry in ((key + (hi,), 0.5 * v), (key + (lo,), 0.5 * v))
            ]
    for key, v in parts:
        s = acc.get(key, 0.0) + v
        if s == 0.0:
            acc.pop(key, None)
        else:
            acc[key] = s


def chebyshev_values(x: np.ndarray, kmax: int) -> np.ndarray:
    """T_0..T_kmax at each entry of x; shape (len(x), kmax+1)."""
    x = np.asarray(x, dtype=float)
    out = np.empty((x.size, kmax + 1))
    out[:, 0] = 1.0
    if kmax >= 1:
        out[:, 1] = x
    for k in range(1, kmax):
        out[:, k + 1] = 2.0 * x * out[:, k] - out[:, k - 1]
    return out
