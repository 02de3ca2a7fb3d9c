"""Classic test instances and the stability-number program.

Includes the two standard nonnegative-but-not-SOS polynomials, the
quadratic program whose minimum over the probability simplex equals the
reciprocal stability number of a graph, and a brute-force stability
oracle for small graphs.
"""

from __future__ import annotations

import numpy as np

from .poly import Polynomial, parse_polynomial, substitute

MAX_BRUTE_FORCE_VERTICES = 12


def motzkin() -> Polynomial:
    """Bivariate degree-6 polynomial, nonnegative but not a sum of squares."""
    return parse_polynomial("x1^4*x2^2 + x1^2*x2^4 - 3*x1^2*x2^2 + 1", 2)


def robinson() -> Polynomial:
    """Trivariate degree-6 polynomial, nonnegative but not a sum of squares."""
    return parse_polynomial(
        "x1^6 + x2^6 + x3^6 - x1^4*x2^2 - x1^2*x2^4 - x1^4*x3^2 - x1^2*x3^4"
        " - x2^4*x3^2 - x2^2*x3^4 + 3*x1^2*x2^2*x3^2",
        3,
    )


def parse_edge_list(text: str) -> tuple[int, list[tuple[int, int]]]:
    """Edge list with one 1-based ``u v`` pair per line; blank lines skipped."""
    edges = []
    nmax = 0
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'u v', got {line!r}")
        u, v = int(parts[0]), int(parts[1])
        if u < 1 or v < 1 or u == v:
            raise ValueError(f"line {lineno}: bad edge ({u}, {v})")
        edges.append((min(u, v), max(u, v)))
        nmax = max(nmax, u, v)
    return nmax, sorted(set(edges))


def cycle_graph(n: int) -> tuple[int, list[tuple[int, int]]]:
    return n, [(i, i % n + 1) for i in range(1, n + 1)]


def brute_force_alpha(n: int, edges: list[tuple[int, int]]) -> int:
    """Largest independent set by bitmask enumeration; n <= 12."""
    if n > MAX_BRUTE_FORCE_VERTICES:
        raise ValueError(f"brute force capped at {MAX_BRUTE_FORCE_VERTICES} vertices")
    masks = [(1 << (u - 1)) | (1 << (v - 1)) for u, v in edges]
    best = 0
    for subset in range(1 << n):
        if any((subset & mk) == mk for mk in masks):
            continue
        best = max(best, bin(subset).count("1"))
    return best


def stability_objective(n: int, edges: list[tuple[int, int]]) -> Polynomial:
    """x^T (I + A_G) x in n variables; its minimum over the probability
    simplex is 1/alpha(G)."""
    adj = np.eye(n)
    for u, v in edges:
        adj[u - 1, v - 1] = adj[v - 1, u - 1] = 1.0
    terms: dict[tuple[int, ...], float] = {}
    for i in range(n):
        for j in range(n):
            if adj[i, j] != 0.0:
                key = [0] * n
                key[i] += 1
                key[j] += 1
                key = tuple(key)
                terms[key] = terms.get(key, 0.0) + adj[i, j]
    return Polynomial(n, terms)


def stability_objective_reduced(n: int, edges: list[tuple[int, int]]) -> Polynomial:
    """The simplex-face program in n-1 variables.

    The stability program constrains sum x_i = 1; eliminating x_n maps it
    onto the full-dimensional simplex in n-1 variables, which is the form
    the box/simplex machinery here works with.
    """
    f = stability_objective(n, edges)
    m = n - 1
    reps = [Polynomial.variable(m, i) for i in range(m)]
    last = Polynomial.constant(m, 1.0)
    for i in range(m):
        last = last - Polynomial.variable(m, i)
    reps.append(last)
    return substitute(f, reps)
