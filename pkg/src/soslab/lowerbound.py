"""Positivstellensatz lower bounds and SOS certification via SDP.

The order-r bound maximizes lambda subject to f - lambda lying in the
degree-2r truncation of either the quadratic module (one SOS multiplier
per constraint) or the preordering (one per subset of the inequality
constraints). Equality constraints receive free polynomial multipliers.
Gram blocks and coefficient matching are expressed in a tensor-Chebyshev
basis, which keeps the SDP data well conditioned at the orders used
here; the simplex is handled in shifted coordinates mapping it inside
[-1, 1]^n. Every bound returned is re-verified from its certificate by
an independent reconstruction before it is reported.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import sdp
from .cheb import ChebPoly
from .poly import Polynomial, monomials_upto, substitute
from .domains import Domain

GEQ0 = "geq0"
EQ0 = "eq0"
PUTINAR = "putinar"
SCHMUDGEN = "schmudgen"

MAX_PREORDERING_CONSTRAINTS = 8


class LowerBoundError(RuntimeError):
    """SDP did not reach a usable optimum; carries solver diagnostics."""

    def __init__(self, message: str, solution=None):
        super().__init__(message)
        self.solution = solution


@dataclass(frozen=True)
class SetConstraint:
    g: Polynomial
    relation: str  # GEQ0 or EQ0

    def __post_init__(self):
        if self.relation not in (GEQ0, EQ0):
            raise ValueError(f"unknown relation {self.relation!r}")


@dataclass
class SetDescription:
    """Basic closed semialgebraic set {g >= 0} cap {h = 0}."""

    nvars: int
    constraints: list[SetConstraint]
    name: str | None = None

    def __post_init__(self):
        if not self.constraints:
            raise ValueError("a set description needs at least one constraint")
        for c in self.constraints:
            if c.g.nvars != self.nvars:
                raise ValueError("constraint variable count mismatch")

    @property
    def inequalities(self) -> list[Polynomial]:
        return [c.g for c in self.constraints if c.relation == GEQ0]

    @property
    def equalities(self) -> list[Polynomial]:
        return [c.g for c in self.constraints if c.relation == EQ0]

    def contains(self, x, tol: float = 1e-9) -> bool:
        for c in self.constraints:
            v = c.g.evaluate(x)
            if c.relation == GEQ0 and v < -tol:
                return False
            if c.relation == EQ0 and abs(v) > tol:
                return False
        return True


def builtin_set(name: str, n: int) -> SetDescription:
    """Built-in descriptions: box, ball, simplex (full-dimensional), sphere."""
    if n < 1:
        raise ValueError("n must be >= 1")
    one = Polynomial.constant(n, 1.0)
    xs = [Polynomial.variable(n, i) for i in range(n)]
    sumsq = Polynomial.zero(n)
    for x in xs:
        sumsq = sumsq.add(x.multiply(x))
    if name == "box":
        cons = [SetConstraint(one - x.multiply(x), GEQ0) for x in xs]
    elif name == "ball":
        cons = [SetConstraint(one - sumsq, GEQ0)]
    elif name == "simplex":
        total = Polynomial.zero(n)
        for x in xs:
            total = total.add(x)
        cons = [SetConstraint(x, GEQ0) for x in xs]
        cons.append(SetConstraint(one - total, GEQ0))
    elif name == "sphere":
        cons = [SetConstraint(one - sumsq, EQ0)]
    else:
        raise ValueError(f"unknown built-in set {name!r}")
    return SetDescription(nvars=n, constraints=cons, name=f"{name}({n})")


def set_domain(sd: SetDescription) -> Domain:
    """Domain (for grid minima) of a built-in set; by leading name."""
    if sd.name:
        kind = sd.name.split("(")[0]
        return Domain(kind, sd.nvars)
    raise ValueError("grid domain available only for built-in sets")


# ---------------------------------------------------------------------------
# assembly


@dataclass
class _Assembly:
    problem: sdp.SdpProblem
    keys: list[tuple[int, ...]]
    block_labels: list[tuple]  # () for sigma_0, (j,) or subsets for others
    block_bases: list[list[tuple[int, ...]]]
    block_mults: list[ChebPoly]  # the g_J in internal coordinates
    free_layout: list[tuple[int, tuple[int, ...]]]  # (equality idx, basis key)
    eq_mults: list[ChebPoly]  # equality g_e in internal coordinates
    shift_simplex: bool
    f_internal: ChebPoly


def _internal_coords(sd: SetDescription) -> tuple[bool, list[Polynomial]]:
    """Simplex sets are shifted to live inside [-1, 1]^n for conditioning."""
    shift = bool(sd.name and sd.name.startswith("simplex"))
    if not shift:
        return False, []
    n = sd.nvars
    reps = []
    for i in range(n):
        reps.append(
            Polynomial(n, {(0,) * n: 0.5}).add(
                Polynomial.variable(n, i).scale(0.5)
            )
        )
    return True, reps


def _to_internal(p: Polynomial, shift: bool, reps: list[Polynomial]) -> Polynomial:
    return substitute(p, reps) if shift else p


def _pair_products(
    basis: list[tuple[int, ...]], mult: ChebPoly
) -> dict[tuple[int, int], ChebPoly]:
    out = {}
    n = mult.nvars
    for i, a in enumerate(basis):
        phi_a = ChebPoly.basis_term(n, a)
        for j in range(i, len(basis)):
            prod = phi_a.multiply(ChebPoly.basis_term(n, basis[j]))
            out[(i, j)] = prod.multiply(mult)
    return out


def _assemble(f: Polynomial, sd: SetDescription, r: int, kind: str) -> _Assembly:
    if f.nvars != sd.nvars:
        raise ValueError("objective/set variable count mismatch")
    if 2 * r < f.degree:
        raise ValueError(f"order r={r} too small for degree {f.degree}")
    n = sd.nvars
    shift, reps = _internal_coords(sd)
    f_int = ChebPoly.from_polynomial(_to_internal(f, shift, reps))
    ineqs = [_to_internal(g, shift, reps) for g in sd.inequalities]
    eqs = [_to_internal(g, shift, reps) for g in sd.equalities]

    if kind == PUTINAR:
        labels: list[tuple] = [()] + [(j,) for j in range(len(ineqs))]
    elif kind == SCHMUDGEN:
        m = len(ineqs)
        if m > MAX_PREORDERING_CONSTRAINTS:
            raise ValueError(
                f"preordering assembly capped at {MAX_PREORDERING_CONSTRAINTS} "
                f"inequalities (got {m}: 2^m Gram blocks)"
            )
        labels = []
        for size in range(m + 1):
            labels.extend(combinations(range(m), size))
    else:
        raise ValueError(f"unknown hierarchy kind {kind!r}")

    keys = [tuple(k) for k in monomials_upto(n, 2 * r)]
    key_index = {k: i for i, k in enumerate(keys)}
    nkeys = len(keys)

    block_labels = []
    block_bases = []
    block_mults = []
    a_blocks = []
    dims = []
    for label in labels:
        mult = ChebPoly.constant(n, 1.0)
        deg = 0
        for j in label:
            mult = mult.multiply(ChebPoly.from_polynomial(ineqs[j]))
            deg += ineqs[j].degree
        d_j = (deg + 1) // 2
        bdeg = r - d_j
        if bdeg < 0:
            continue
        basis = [tuple(k) for k in monomials_upto(n, bdeg)]
        nb = len(basis)
        amat = np.zeros((nkeys, nb, nb))
        for (i, j), prod in _pair_products(basis, mult).items():
            for kkey, c in prod.coeffs.items():
                row = key_index[kkey]
                amat[row, i, j] += c
                if i != j:
                    amat[row, j, i] += c
        block_labels.append(label)
        block_bases.append(basis)
        block_mults.append(mult)
        a_blocks.append(amat)
        dims.append(nb)

    # free columns: lambda first, then equality-multiplier coefficients
    free_layout: list[tuple[int, tuple[int, ...]]] = []
    eq_mults = [ChebPoly.from_polynomial(g) for g in eqs]
    cols: list[np.ndarray] = []
    lam_col = np.zeros(nkeys)
    lam_col[key_index[(0,) * n]] = 1.0
    cols.append(lam_col)
    for e, g in enumerate(eqs):
        bdeg = 2 * r - g.degree
        if bdeg < 0:
            continue
        gcheb = eq_mults[e]
        for beta in monomials_upto(n, bdeg):
            col = np.zeros(nkeys)
            prod = ChebPoly.basis_term(n, tuple(beta)).multiply(gcheb)
            for kkey, c in prod.coeffs.items():
                col[key_index[kkey]] += c
            cols.append(col)
            free_layout.append((e, tuple(beta)))

    free_cons = np.column_stack(cols)
    free_obj = np.zeros(free_cons.shape[1])
    free_obj[0] = 1.0
    b = np.zeros(nkeys)
    for kkey, c in f_int.coeffs.items():
        b[key_index[kkey]] = c

    problem = sdp.SdpProblem(
        blocks=dims,
        c_blocks=[np.zeros((k, k)) for k in dims],
        a_blocks=a_blocks,
        b=b,
        free_cons=free_cons,
        free_obj=free_obj,
    )
    return _Assembly(
        problem=problem,
        keys=keys,
        block_labels=block_labels,
        block_bases=block_bases,
        block_mults=block_mults,
        free_layout=free_layout,
        eq_mults=eq_mults,
        shift_simplex=shift,
        f_internal=f_int,
    )


def assemble_putinar(f: Polynomial, sd: SetDescription, r: int) -> sdp.SdpProblem:
    return _assemble(f, sd, r, PUTINAR).problem


def assemble_schmudgen(f: Polynomial, sd: SetDescription, r: int) -> sdp.SdpProblem:
    return _assemble(f, sd, r, SCHMUDGEN).problem


# ---------------------------------------------------------------------------
# bounds with certificates


@dataclass
class LowerBoundResult:
    value: float
    order: int
    kind: str
    set_description: SetDescription
    gram_blocks: dict[tuple, np.ndarray]
    block_bases: dict[tuple, list[tuple[int, ...]]]
    free_multipliers: dict[int, ChebPoly]
    verified: bool = False
    status: str = "optimal"
    diagnostics: dict = field(default_factory=dict)

    @property
    def certificate(self) -> dict:
        return {
            "grams": self.gram_blocks,
            "free_multipliers": self.free_multipliers,
        }

    def to_json(self) -> str:
        payload = {
            "value": self.value,
            "order": self.order,
            "kind": self.kind,
            "set": self.set_description.name,
            "verified": self.verified,
            "blocks": [
                {
                    "label": list(label),
                    "basis": [list(k) for k in self.block_bases[label]],
                    "gram": self.gram_blocks[label].tolist(),
                }
                for label in self.gram_blocks
            ],
            "free_multipliers": [
                {
                    "equality": e,
                    "cheb_coeffs": {
                        ",".join(map(str, k)): v for k, v in q.coeffs.items()
                    },
                }
                for e, q in self.free_multipliers.items()
            ],
        }
        return json.dumps(payload)


def lb(
    f: Polynomial, sd: SetDescription, r: int, kind: str = PUTINAR
) -> LowerBoundResult:
    """Order-r lower bound on min f over the set, with verified certificate."""
    asm = _assemble(f, sd, r, kind)
    # tighter-than-default targets: monotonicity and domination properties
    # downstream are asserted at 1e-7, so the bound values need headroom
    sol = sdp.solve(asm.problem, sdp.SolveOptions(gap_tol=1e-9, feas_tol=1e-10))
    # A stalled solve may still carry a verifiable certificate (degenerate
    # optimal faces are common here); the certificate check below is what
    # establishes soundness of the returned value, so only refuse outright
    # when the iterate is far from optimal or the problem is infeasible.
    acceptable = sol.status == sdp.OPTIMAL or (
        sol.status == sdp.MAX_ITERATIONS
        and sol.gap <= 1e-3
        and sol.residual_primal <= 1e-6
    )
    if not acceptable:
        raise LowerBoundError(
            f"SDP ended with status {sol.status} (gap={sol.gap:.2e}, "
            f"residuals={sol.residual_primal:.2e}/{sol.residual_dual:.2e}); "
            "the relaxation order may be too small",
            solution=sol,
        )
    value = float(sol.primal_objective)
    grams = {}
    bases = {}
    for label, basis, x in zip(asm.block_labels, asm.block_bases, sol.x_blocks):
        grams[label] = 0.5 * (x + x.T)
        bases[label] = basis
    frees: dict[int, ChebPoly] = {}
    for (e, beta), val in zip(asm.free_layout, sol.free_values[1:]):
        if val != 0.0:
            cur = frees.setdefault(e, ChebPoly.zero(sd.nvars))
            frees[e] = cur.add(
                ChebPoly.basis_term(sd.nvars, beta).scale(float(val))
            )
    for e in range(len(asm.eq_mults)):
        frees.setdefault(e, ChebPoly.zero(sd.nvars))
    result = LowerBoundResult(
        value=value,
        order=r,
        kind=kind,
        set_description=sd,
        gram_blocks=grams,
        block_bases=bases,
        free_multipliers=frees,
        diagnostics={
            "sdp_status": sol.status,
            "sdp_gap": sol.gap,
            "sdp_iterations": sol.iterations,
            "residual_primal": sol.residual_primal,
            "residual_dual": sol.residual_dual,
        },
    )
    result.verified = verify_certificate(result, f, sd)
    if not result.verified:
        result.status = "unknown"
    elif sol.status != sdp.OPTIMAL:
        result.status = "stalled_verified"
    return result


def _reconstruct(result: LowerBoundResult, sd: SetDescription) -> ChebPoly:
    """Rebuild sum_J sigma_J g_J + sum_e q_e g_e + value from the payload.

    Uses fresh ChebPoly arithmetic rather than the assembly matrices, so
    it is an independent route from the SDP data path.
    """
    n = sd.nvars
    shift, reps = _internal_coords(sd)
    ineqs = [_to_internal(g, shift, reps) for g in sd.inequalities]
    eqs = [_to_internal(g, shift, reps) for g in sd.equalities]
    total = ChebPoly.constant(n, result.value)
    for label, gram in result.gram_blocks.items():
        basis = result.block_bases[label]
        mult = ChebPoly.constant(n, 1.0)
        for j in label:
            mult = mult.multiply(ChebPoly.from_polynomial(ineqs[j]))
        sigma = ChebPoly.zero(n)
        for i, a in enumerate(basis):
            phi_a = ChebPoly.basis_term(n, a)
            for j in range(i, len(basis)):
                c = gram[i, j] * (1.0 if i == j else 2.0)
                if c == 0.0:
                    continue
                sigma = sigma.add(
                    phi_a.multiply(ChebPoly.basis_term(n, basis[j])).scale(c)
                )
        total = total.add(sigma.multiply(mult))
    for e, q in result.free_multipliers.items():
        total = total.add(q.multiply(ChebPoly.from_polynomial(eqs[e])))
    return total


def verify_certificate(
    result: LowerBoundResult,
    f: Polynomial,
    sd: SetDescription,
    coeff_tol: float = 1e-6,
    psd_tol: float = 1e-8,
) -> bool:
    """Independent certificate check: PSD Grams, coefficient identity, and
    pointwise agreement at 100 deterministic pseudo-random points."""
    diagnostics = result.diagnostics
    min_eig = np.inf
    for gram in result.gram_blocks.values():
        if gram.size:
            min_eig = min(min_eig, float(np.linalg.eigvalsh(gram)[0]))
    diagnostics["gram_min_eigenvalue"] = min_eig
    if min_eig < -psd_tol:
        diagnostics["verify_failure"] = "gram_not_psd"
        return False

    shift, reps = _internal_coords(sd)
    f_int = ChebPoly.from_polynomial(_to_internal(f, shift, reps))
    recon = _reconstruct(result, sd)
    diff = recon.add(f_int.scale(-1.0))
    fscale = 1.0 + max((abs(c) for c in f.terms.values()), default=0.0)
    coeff_err = max((abs(c) for c in diff.coeffs.values()), default=0.0)
    diagnostics["certificate_coeff_error"] = coeff_err
    if coeff_err > coeff_tol * fscale:
        diagnostics["verify_failure"] = "coefficient_mismatch"
        return False

    rng = np.random.default_rng(2024)
    pts = rng.uniform(-1.0, 1.0, size=(100, sd.nvars))
    lhs = f_int.eval_many(pts)
    rhs = recon.eval_many(pts)
    escale = 1.0 + float(np.max(np.abs(lhs)))
    point_err = float(np.max(np.abs(lhs - rhs)))
    diagnostics["certificate_point_error"] = point_err
    if point_err > coeff_tol * escale:
        diagnostics["verify_failure"] = "pointwise_mismatch"
        return False
    return True


# ---------------------------------------------------------------------------
# SOS certification of a single polynomial


@dataclass
class SosResult:
    is_sos: bool | None  # None means inconclusive
    gram: np.ndarray | None
    gram_basis: list[tuple[int, ...]]
    moment_certificate: np.ndarray | None
    moment_keys: list[tuple[int, ...]]
    separation_value: float
    diagnostics: dict = field(default_factory=dict)


def certify_sos(f: Polynomial, tol: float = 1e-7) -> SosResult:
    """Decide membership in the SOS cone through the separation program.

    Minimizes L_y(f) over unit-trace moment matrices M(y) >= 0 in the
    tensor-Chebyshev basis. A strictly negative optimum yields the
    separating functional (f is not SOS); otherwise the constraint
    multipliers assemble the Gram matrix of an SOS decomposition. Both
    payloads are verified independently before a verdict is returned;
    an unconverged solve reports is_sos=None, never a false verdict.
    """
    if f.degree % 2 != 0:
        raise ValueError("certify_sos needs an even-degree polynomial")
    n = f.nvars
    d = f.degree // 2
    basis = [tuple(k) for k in monomials_upto(n, d)]
    nb = len(basis)
    keys = [tuple(k) for k in monomials_upto(n, 2 * d)]
    key_index = {k: i for i, k in enumerate(keys)}
    nkeys = len(keys)
    f_cheb = ChebPoly.from_polynomial(f)
    fvec = np.zeros(nkeys)
    for kkey, c in f_cheb.coeffs.items():
        fvec[key_index[kkey]] = c

    bmats = np.zeros((nkeys, nb, nb))
    for (i, j), prod in _pair_products(basis, ChebPoly.constant(n, 1.0)).items():
        for kkey, c in prod.coeffs.items():
            row = key_index[kkey]
            bmats[row, i, j] += c
            if i != j:
                bmats[row, j, i] += c

    pairs = [(i, j) for i in range(nb) for j in range(i, nb)]
    m = len(pairs) + 1
    a_block = np.zeros((m, nb, nb))
    free_cons = np.zeros((m, nkeys))
    b = np.zeros(m)
    for p, (i, j) in enumerate(pairs):
        if i == j:
            a_block[p, i, i] = 1.0
        else:
            a_block[p, i, j] = a_block[p, j, i] = 0.5
        free_cons[p] = -bmats[:, i, j]
    a_block[-1] = np.eye(nb)
    b[-1] = 1.0
    problem = sdp.SdpProblem(
        blocks=[nb],
        c_blocks=[np.zeros((nb, nb))],
        a_blocks=[a_block],
        b=b,
        free_cons=free_cons,
        free_obj=-fvec,
    )
    sol = sdp.solve(problem)
    diagnostics = {
        "sdp_status": sol.status,
        "sdp_gap": sol.gap,
        "sdp_iterations": sol.iterations,
    }
    fscale = 1.0 + float(np.max(np.abs(fvec)))
    if sol.status != sdp.OPTIMAL:
        return SosResult(
            is_sos=None,
            gram=None,
            gram_basis=basis,
            moment_certificate=None,
            moment_keys=keys,
            separation_value=float("nan"),
            diagnostics=diagnostics,
        )
    rho = -float(sol.primal_objective)
    diagnostics["separation_value"] = rho

    if rho < -tol * fscale:
        # moment functional separating f from the SOS cone
        y = sol.free_values.copy()
        momy = np.einsum("k,kab->ab", y, bmats)
        lam_min = float(np.linalg.eigvalsh(0.5 * (momy + momy.T))[0])
        value = float(fvec @ y)
        diagnostics["moment_matrix_min_eig"] = lam_min
        diagnostics["functional_value"] = value
        ok = lam_min >= -tol * max(1.0, float(np.abs(momy).max())) and value < 0
        if ok:
            return SosResult(
                is_sos=False,
                gram=None,
                gram_basis=basis,
                moment_certificate=y,
                moment_keys=keys,
                separation_value=rho,
                diagnostics=diagnostics,
            )
        diagnostics["verify_failure"] = "separation_certificate_invalid"
        return SosResult(
            is_sos=None,
            gram=None,
            gram_basis=basis,
            moment_certificate=y,
            moment_keys=keys,
            separation_value=rho,
            diagnostics=diagnostics,
        )

    # Gram candidate from the pair-constraint multipliers
    gram = np.zeros((nb, nb))
    for p, (i, j) in enumerate(pairs):
        if i == j:
            gram[i, i] = sol.y[p]
        else:
            gram[i, j] = gram[j, i] = 0.5 * sol.y[p]
    lam_min = float(np.linalg.eigvalsh(gram)[0])
    recon = ChebPoly.zero(n)
    for i, a in enumerate(basis):
        phi_a = ChebPoly.basis_term(n, a)
        for j in range(i, nb):
            c = gram[i, j] * (1.0 if i == j else 2.0)
            if c == 0.0:
                continue
            recon = recon.add(
                phi_a.multiply(ChebPoly.basis_term(n, basis[j])).scale(c)
            )
    diff = recon.add(f_cheb.scale(-1.0))
    coeff_err = max((abs(c) for c in diff.coeffs.values()), default=0.0)
    diagnostics["gram_min_eig"] = lam_min
    diagnostics["gram_coeff_error"] = coeff_err
    if lam_min >= -tol * max(1.0, float(np.abs(gram).max())) and coeff_err <= tol * fscale:
        return SosResult(
            is_sos=True,
            gram=gram,
            gram_basis=basis,
            moment_certificate=None,
            moment_keys=keys,
            separation_value=rho,
            diagnostics=diagnostics,
        )
    diagnostics["verify_failure"] = "gram_reconstruction_failed"
    return SosResult(
        is_sos=None,
        gram=gram,
        gram_basis=basis,
        moment_certificate=None,
        moment_keys=keys,
        separation_value=rho,
        diagnostics=diagnostics,
    )
