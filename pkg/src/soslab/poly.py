"""Sparse multivariate polynomials with double coefficients.

Terms are stored in a map from exponent tuples to nonzero coefficients.
The global term ordering used throughout the package is graded
lexicographic: sort by total degree first, then lexicographically on the
exponent tuple. Polynomials are immutable after construction and all
operations are pure functions, so instances can be shared freely across
threads.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Mapping

import numpy as np

Exponent = tuple[int, ...]


class PolynomialSyntaxError(ValueError):
    """Raised on malformed polynomial text; carries the offending position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


def grlex_key(alpha: Exponent) -> tuple[int, Exponent]:
    """Sort key implementing the graded lexicographic order."""
    return (sum(alpha), alpha)


def monomials_exact(nvars: int, degree: int) -> list[Exponent]:
    """All exponent tuples with total degree == degree, lexicographically sorted."""
    exact: list[Exponent] = []

    def rec(prefix: list[int], remaining: int, slots: int) -> None:
        if slots == 1:
            exact.append(tuple(prefix + [remaining]))
            return
        for k in range(remaining + 1):
            rec(prefix + [k], remaining - k, slots - 1)

    rec([], degree, nvars)
    return exact


def monomials_upto(nvars: int, degree: int) -> list[Exponent]:
    """All exponent tuples with total degree <= degree, in graded-lex order."""
    if nvars < 1:
        raise ValueError("nvars must be >= 1")
    out: list[Exponent] = []
    for d in range(degree + 1):
        out.extend(monomials_exact(nvars, d))
    return out


class Polynomial:
    """A sparse multivariate polynomial over the reals.

    Invariants: no stored coefficient is exactly zero, every exponent tuple
    has length ``nvars``, and the zero polynomial has degree 0 by
    convention.
    """

    __slots__ = ("nvars", "_terms")

    def __init__(self, nvars: int, terms: Mapping[Exponent, float] | None = None):
        if nvars < 1:
            raise ValueError("nvars must be >= 1")
        self.nvars = int(nvars)
        clean: dict[Exponent, float] = {}
        if terms:
            for alpha, c in terms.items():
                alpha = tuple(int(a) for a in alpha)
                if len(alpha) != nvars:
                    raise ValueError(
                        f"exponent {alpha} has length {len(alpha)}, expected {nvars}"
                    )
                if any(a < 0 for a in alpha):
                    raise ValueError(f"negative exponent in {alpha}")
                c = float(c)
                if c != 0.0:
                    clean[alpha] = clean.get(alpha, 0.0) + c
                    if clean[alpha] == 0.0:
                        del clean[alpha]
        self._terms = clean

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, nvars: int) -> "Polynomial":
        return cls(nvars, {})

    @classmethod
    def constant(cls, nvars: int, c: float) -> "Polynomial":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def monomial(cls, nvars: int, alpha: Iterable[int], c: float = 1.0) -> "Polynomial":
        return cls(nvars, {tuple(alpha): c})

    @classmethod
    def variable(cls, nvars: int, i: int) -> "Polynomial":
        """The variable x_i (0-based index)."""
        if not 0 <= i < nvars:
            raise ValueError(f"variable index {i} out of range for nvars={nvars}")
        alpha = [0] * nvars
        alpha[i] = 1
        return cls(nvars, {tuple(alpha): 1.0})

    # -- accessors ----------------------------------------------------

    @property
    def terms(self) -> dict[Exponent, float]:
        """Copy of the term map (the internal map is never exposed)."""
        return dict(self._terms)

    def coefficient(self, alpha: Iterable[int]) -> float:
        return self._terms.get(tuple(alpha), 0.0)

    @property
    def degree(self) -> int:
        if not self._terms:
            return 0
        return max(sum(a) for a in self._terms)

    def degree_in(self, i: int) -> int:
        """Largest exponent of variable i across stored terms."""
        if not self._terms:
            return 0
        return max(a[i] for a in self._terms)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    def sorted_terms(self) -> list[tuple[Exponent, float]]:
        return sorted(self._terms.items(), key=lambda kv: grlex_key(kv[0]))

    def __iter__(self) -> Iterator[tuple[Exponent, float]]:
        return iter(self.sorted_terms())

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Polynomial)
            and self.nvars == other.nvars
            and self._terms == other._terms
        )

    def __hash__(self) -> int:
        return hash((self.nvars, frozenset(self._terms.items())))

    def __repr__(self) -> str:
        return f"Polynomial({self.nvars}, {self.to_string()!r})"

    # -- arithmetic ---------------------------------------------------

    def _check_compatible(self, other: "Polynomial") -> None:
        if self.nvars != other.nvars:
            raise ValueError(
                f"variable count mismatch: {self.nvars} vs {other.nvars}"
            )

    def add(self, other: "Polynomial") -> "Polynomial":
        self._check_compatible(other)
        acc = dict(self._terms)
        for alpha, c in other._terms.items():
            s = acc.get(alpha, 0.0) + c
            if s == 0.0:
                acc.pop(alpha, None)
            else:
                acc[alpha] = s
        out = Polynomial(self.nvars)
        out._terms = acc
        return out

    def scale(self, c: float) -> "Polynomial":
        c = float(c)
        if c == 0.0:
            return Polynomial.zero(self.nvars)
        out = Polynomial(self.nvars)
        out._terms = {a: c * v for a, v in self._terms.items()}
        return out

    def multiply(self, other: "Polynomial") -> "Polynomial":
        self._check_compatible(other)
        acc: dict[Exponent, float] = {}
        for a1, c1 in self._terms.items():
            for a2, c2 in other._terms.items():
                alpha = tuple(x + y for x, y in zip(a1, a2))
                s = acc.get(alpha, 0.0) + c1 * c2
                if s == 0.0:
                    acc.pop(alpha, None)
                else:
                    acc[alpha] = s
        out = Polynomial(self.nvars)
        out._terms = acc
        return out

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = Polynomial.constant(self.nvars, other)
        return self.add(other)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return self.scale(-1.0)

    def __sub__(self, other):
        if isinstance(other, (int, float)):
            other = Polynomial.constant(self.nvars, other)
        return self.add(other.scale(-1.0))

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return self.scale(other)
        return self.multiply(other)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Polynomial":
        if k < 0:
            raise ValueError("negative powers are not supported")
        result = Polynomial.constant(self.nvars, 1.0)
        base = self
        while k:
            if k & 1:
                result = result.multiply(base)
            base = base.multiply(base) if k > 1 else base
            k >>= 1
        return result

    # -- evaluation ---------------------------------------------------

    def evaluate(self, point: Iterable[float]) -> float:
        pt = tuple(float(x) for x in point)
        if len(pt) != self.nvars:
            raise ValueError(
                f"point has dimension {len(pt)}, expected {self.nvars}"
            )
        total = 0.0
        for alpha, c in self._terms.items():
            v = c
            for x, a in zip(pt, alpha):
                if a:
                    v *= x**a
            total += v
        return total

    def evaluate_many(self, points: np.ndarray) -> np.ndarray:
        """Evaluate at each row of an (m, nvars) array."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != self.nvars:
            raise ValueError(f"expected shape (m, {self.nvars}), got {pts.shape}")
        out = np.zeros(pts.shape[0])
        for alpha, c in self._terms.items():
            v = np.full(pts.shape[0], c)
            for i, a in enumerate(alpha):
                if a:
                    v *= pts[:, i] ** a
            out += v
        return out

    # -- printing -----------------------------------------------------

    def to_string(self) -> str:
        if not self._terms:
            return "0"
        parts: list[str] = []
        for alpha, c in self.sorted_terms():
            factors = [
                f"x{i + 1}" if a == 1 else f"x{i + 1}^{a}"
                for i, a in enumerate(alpha)
                if a > 0
            ]
            mag = abs(c)
            if not factors:
                body = _fmt_num(mag)
            elif mag == 1.0:
                body = "*".join(factors)
            else:
                body = _fmt_num(mag) + "*" + "*".join(factors)
            if not parts:
                parts.append(body if c > 0 else "-" + body)
            else:
                parts.append(("+ " if c > 0 else "- ") + body)
        return " ".join(parts)


def _fmt_num(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def print_polynomial(p: Polynomial) -> str:
    """Render a polynomial in the text grammar accepted by parse_polynomial."""
    return p.to_string()


# -- parsing ---------------------------------------------------------


def parse_polynomial(text: str, nvars: int) -> Polynomial:
    """Parse polynomial text such as ``-3*x1^2*x2^2 + 1``.

    Grammar: terms separated by ``+``/``-``; a term is a number, a
    monomial, or ``number*monomial``; a monomial is one or more
    ``x<i>[^<k>]`` factors joined by ``*`` with 1-based variable indices.
    Whitespace is ignored. Raises PolynomialSyntaxError with the
    character position on malformed input, and on variable indices
    outside ``1..nvars``.
    """
    terms: dict[Exponent, float] = {}
    i = 0
    n = len(text)

    def skip_ws(j: int) -> int:
        while j < n and text[j].isspace():
            j += 1
        return j

    i = skip_ws(i)
    if i >= n:
        raise PolynomialSyntaxError("empty polynomial text", i)

    first = True
    while i < n:
        i = skip_ws(i)
        if i >= n:
            break
        sign = 1.0
        if text[i] in "+-":
            if text[i] == "-":
                sign = -1.0
            i = skip_ws(i + 1)
        elif not first:
            raise PolynomialSyntaxError("expected '+' or '-' between terms", i)
        first = False
        coeff, alpha, i = _parse_term(text, i, nvars)
        alpha_t = tuple(alpha)
        s = terms.get(alpha_t, 0.0) + sign * coeff
        if s == 0.0:
            terms.pop(alpha_t, None)
        else:
            terms[alpha_t] = s
        i = skip_ws(i)
    return Polynomial(nvars, terms)


def _parse_term(text: str, i: int, nvars: int) -> tuple[float, list[int], int]:
    n = len(text)
    coeff = 1.0
    alpha = [0] * nvars
    saw_factor = False

    if i < n and (text[i].isdigit() or text[i] == "."):
        coeff, i = _parse_number(text, i)
        saw_factor = True
        j = _skip_ws(text, i)
        if j < n and text[j] == "*":
            i = _skip_ws(text, j + 1)
        else:
            return coeff, alpha, i

    while True:
        if i >= n or text[i] != "x":
            if saw_factor:
                raise PolynomialSyntaxError("expected variable factor", i)
            raise PolynomialSyntaxError("expected a term", i)
        i += 1
        idx, i = _parse_int(text, i, "variable index")
        if not 1 <= idx <= nvars:
            raise PolynomialSyntaxError(
                f"variable index {idx} out of range 1..{nvars}", i - 1
            )
        power = 1
        if i < n and text[i] == "^":
            power, i = _parse_int(text, i + 1, "exponent")
        alpha[idx - 1] += power
        saw_factor = True
        j = _skip_ws(text, i)
        if j < n and text[j] == "*":
            i = _skip_ws(text, j + 1)
        else:
            return coeff, alpha, i


def _skip_ws(text: str, j: int) -> int:
    while j < len(text) and text[j].isspace():
        j += 1
    return j


def _parse_int(text: str, i: int, what: str) -> tuple[int, int]:
    start = i
    while i < len(text) and text[i].isdigit():
        i += 1
    if i == start:
        raise PolynomialSyntaxError(f"expected {what}", start)
    return int(text[start:i]), i


def _parse_number(text: str, i: int) -> tuple[float, int]:
    start = i
    n = len(text)
    while i < n and (text[i].isdigit() or text[i] == "."):
        i += 1
    if i < n and text[i] in "eE":
        j = i + 1
        if j < n and text[j] in "+-":
            j += 1
        if j < n and text[j].isdigit():
            i = j
            while i < n and text[i].isdigit():
                i += 1
    try:
        return float(text[start:i]), i
    except ValueError:
        raise PolynomialSyntaxError("malformed number", start) from None


# -- composition and substitution ------------------------------------


def compose_univariate(s: Polynomial, f: Polynomial) -> Polynomial:
    """Expand s(f(x)) for univariate s; the result has f's variables."""
    if s.nvars != 1:
        raise ValueError("s must be univariate")
    deg = s.degree
    coeffs = [s.coefficient((k,)) for k in range(deg + 1)]
    # Horner in polynomial arithmetic.
    result = Polynomial.constant(f.nvars, coeffs[deg])
    for k in range(deg - 1, -1, -1):
        result = result.multiply(f)
        if coeffs[k] != 0.0:
            result = result + coeffs[k]
    return result


def substitute(p: Polynomial, replacements: list[Polynomial]) -> Polynomial:
    """Substitute variable i by replacements[i]; all replacements share nvars."""
    if len(replacements) != p.nvars:
        raise ValueError("need one replacement polynomial per variable")
    m = replacements[0].nvars
    if any(r.nvars != m for r in replacements):
        raise ValueError("replacement polynomials must share a variable count")
    powers: list[dict[int, Polynomial]] = [dict() for _ in range(p.nvars)]

    def power_of(i: int, k: int) -> Polynomial:
        cache = powers[i]
        if k not in cache:
            cache[k] = replacements[i] ** k
        return cache[k]

    total = Polynomial.zero(m)
    for alpha, c in p.sorted_terms():
        term = Polynomial.constant(m, c)
        for i, a in enumerate(alpha):
            if a:
                term = term.multiply(power_of(i, a))
        total = total.add(term)
    return total


def affine_map_to_unit_box(p: Polynomial, lo: np.ndarray, hi: np.ndarray) -> Polynomial:
    """Pull back p from the box [lo, hi]^n to [-1, 1]^n coordinates.

    Returns q with q(t) = p(lo + (hi - lo) * (t + 1) / 2).
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    reps = []
    for i in range(p.nvars):
        c0 = (hi[i] + lo[i]) / 2.0
        c1 = (hi[i] - lo[i]) / 2.0
        reps.append(Polynomial(p.nvars, {(0,) * p.nvars: c0}) + Polynomial.variable(p.nvars, i).scale(c1))
    return substitute(p, reps)


def random_polynomial(
    rng: np.random.Generator, nvars: int, degree: int, density: float = 0.6
) -> Polynomial:
    """Random polynomial with N(0,1) coefficients; used by tests and sweeps."""
    terms = {}
    for alpha in monomials_upto(nvars, degree):
        if rng.random() < density:
            terms[alpha] = float(rng.standard_normal())
    if not terms:
        terms[(0,) * nvars] = float(rng.standard_normal())
    return Polynomial(nvars, terms)
