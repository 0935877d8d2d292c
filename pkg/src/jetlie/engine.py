"""Linearized symmetry condition on the solution manifold.

A candidate characteristic Q is a symmetry iff

    D_x D_t Q  -  sum_sigma (dF/du_sigma) D_sigma Q  =  0

identically on the reduced jet space.  The engine computes that residual
exactly, generates determining systems for an opaque Q, solves finite
ansatz families through the exact nullspace machinery, and runs bounded
nonexistence scans.  Every solution the solver reports is re-verified by an
independent residual computation before it is returned.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from . import symbols as sy
from .expr import Expr, ZERO, as_expr, constant, monomial, sqrt, symbol
from .jets import Manifold
from .linsolve import linear_solve, nullspace
from .printer import pretty


class EngineError(ValueError):
    pass


class BasisTooLargeError(EngineError):
    def __init__(self, size: int, limit: int):
        super().__init__(
            f"ansatz basis of {size} monomials exceeds the configured limit {limit}"
        )
        self.size = size
        self.limit = limit


# ---------------------------------------------------------------------------
# residual
# ---------------------------------------------------------------------------


@dataclass
class ResidualReport:
    value: Expr
    is_zero: bool
    free_coordinates: List[sy.Sym]


def frechet_derivative(man: Manifold, q: Expr) -> Expr:
    """Linearization of the equation's right side in the direction q."""
    total = ZERO
    dx_cache = {0: q}

    def dx_power(n: int) -> Expr:
        if n not in dx_cache:
            dx_cache[n] = man.total_dx(dx_power(n - 1))
        return dx_cache[n]

    for s in sorted(man.rhs.free_symbols(), key=lambda s: s.sort_key()):
        if s.kind != sy.K_JET:
            continue
        i, j = s.jet_orders
        assert j == 0
        total = total + man.rhs.diff(s) * dx_power(i)
    return total


def residual(man: Manifold, q: Expr) -> ResidualReport:
    order = q.max_jet_order()
    if order > man.max_order - 2:
        raise EngineError(
            f"characteristic order {order} exceeds max_order - 2 = {man.max_order - 2}"
        )
    value = man.total_dx(man.total_dt(q)) - frechet_derivative(man, q)
    free = sorted(
        (s for s in value.free_symbols() if s.kind == sy.K_JET),
        key=lambda s: s.sort_key(),
    )
    return ResidualReport(value=value, is_zero=value.is_zero(), free_coordinates=free)


# ---------------------------------------------------------------------------
# numeric cross-checks (stratum-wise, exact rational points)
# ---------------------------------------------------------------------------


@dataclass
class SpotCheck:
    points: int
    agrees: bool
    witness: Optional[Dict[str, str]] = None


def _random_point(syms, rng: random.Random):
    return {s: Fraction(rng.randint(-9, 9), rng.randint(1, 7)) for s in syms}


def spot_check(value: Expr, claims_zero: bool, points: int, rng: random.Random) -> SpotCheck:
    """Evaluate each radical stratum at random rational points.

    For a zero claim every stratum must vanish everywhere sampled; for a
    nonzero claim some stratum must be nonzero at some sampled point.
    """
    strata = value.strata() if value.terms else {0: ZERO}
    syms = sorted(
        {s for p in strata.values() for s in p.free_symbols()},
        key=lambda s: s.sort_key(),
    )
    found_nonzero = None
    for _ in range(points):
        pt = _random_point(syms, rng)
        for k, p in strata.items():
            val = p.eval_at(pt)
            if val != 0:
                found_nonzero = (pt, k, val)
                break
        if found_nonzero and not claims_zero:
            break
    if claims_zero:
        agrees = found_nonzero is None
        witness = None
        if found_nonzero:
            pt, k, val = found_nonzero
            witness = {
                "stratum": str(k),
                "value": str(val),
                "point": ", ".join(f"{s.pretty()}={v}" for s, v in pt.items()),
            }
        return SpotCheck(points=points, agrees=agrees, witness=witness)
    agrees = found_nonzero is not None
    return SpotCheck(points=points, agrees=agrees, witness=None)


# ---------------------------------------------------------------------------
# determining systems for an opaque characteristic
# ---------------------------------------------------------------------------


@dataclass
class DeterminingSystem:
    arity: Tuple[sy.Sym, ...]
    collected_by: Tuple[sy.Sym, ...]
    equations: List[Expr]
    raw_coefficients: List[Expr]

    def contains(self, equation: Expr) -> bool:
        prim = equation.primitive()
        return any(eq == prim or eq == (-equation).primitive() for eq in self.equations)


def opaque_q(arity: Sequence[sy.Sym], multi: Optional[Sequence[int]] = None) -> Expr:
    arity = tuple(arity)
    if multi is None:
        multi = (0,) * len(arity)
    return symbol(sy.opaque("Q", arity, tuple(multi)))


def _parameter_strata(e: Expr, params: Tuple[sy.Sym, ...]) -> List[Expr]:
    groups = e.collect(lambda s: s in params)
    return [coeff * Expr({(mono, 0): Fraction(1)}, None) for mono, coeff in groups.items()]


def _single_opaque_collapse(e: Expr) -> Expr:
    ops = set()
    for (m, _k) in e.terms:
        hits = [s for s in m.symbols() if s.kind == sy.K_OPAQUE]
        if len(hits) != 1:
            return e
        ops.add(hits[0])
    if len(ops) == 1:
        return symbol(ops.pop())
    return e


def determining_system(
    man: Manifold,
    arity: Sequence[sy.Sym],
    collect_in: Sequence[sy.Sym],
) -> DeterminingSystem:
    """Coefficient equations of the residual for an opaque Q(arity).

    The residual is collected as a polynomial in `collect_in`; each raw
    coefficient is then further stratified by the equation parameters (valid
    because the opaque Q carries no parameter dependence), every stratum is
    content-normalized, and equations whose terms all share one opaque
    derivative collapse to that derivative.  All granularities are reported,
    deduplicated, coarsest alongside finest.
    """
    arity = tuple(arity)
    collect_in = tuple(collect_in)
    overlap = [s for s in collect_in if s in arity]
    if overlap:
        raise EngineError(
            "collect_in symbols appear in the opaque arity: "
            + ", ".join(s.pretty() for s in overlap)
        )
    res = residual(man, opaque_q(arity))
    collect_set = set(collect_in)
    groups = res.value.collect(lambda s: s in collect_set)
    raw = [coeff for _mono, coeff in sorted(groups.items(), key=lambda kv: str(kv[0]))]
    raw = [c for c in raw if not c.is_zero()]

    params = (sy.ALPHA, sy.BETA)
    subsets = [(), (sy.ALPHA,), (sy.BETA,), params]
    equations: List[Expr] = []
    seen = set()
    for coeff in raw:
        for subset in subsets:
            for stratum in _parameter_strata(coeff, subset):
                eq = _single_opaque_collapse(stratum.primitive())
                eq = eq.primitive()
                if eq.is_zero():
                    continue
                if eq not in seen:
                    seen.add(eq)
                    equations.append(eq)
    equations.sort(key=lambda e: (len(e.terms), pretty(e)))
    return DeterminingSystem(
        arity=arity,
        collected_by=collect_in,
        equations=equations,
        raw_coefficients=raw,
    )


# ---------------------------------------------------------------------------
# finite-ansatz solving
# ---------------------------------------------------------------------------


@dataclass
class AnsatzResult:
    basis: List[Expr]
    characteristics: List[Expr]
    vectors: List[Dict[int, Expr]]  # basis-index -> coefficient (param polynomial)
    assumptions: List[str]
    dependent_directions: int = 0  # ansatz combinations that vanish identically

    @property
    def dimension(self) -> int:
        return len(self.characteristics)


def ansatz_solve(man: Manifold, basis: Sequence[Expr]) -> AnsatzResult:
    basis = [as_expr(b) for b in basis]
    for b in basis:
        if any(s.kind == sy.K_CONST for s in b.free_symbols()):
            raise EngineError("ansatz basis must not contain unknown constants")
    unknowns = [sy.unknown(k + 1) for k in range(len(basis))]
    combined = ZERO
    for c, b in zip(unknowns, basis):
        combined = combined + symbol(c) * residual(man, b).value
    solution = linear_solve([combined], unknowns)
    pairs = []
    for vec in solution.basis:
        q = ZERO
        entries: Dict[int, Expr] = {}
        for k, c_sym in enumerate(unknowns):
            entry = vec.get(c_sym)
            if entry is None or entry.is_zero():
                continue
            entries[k] = entry
            q = q + entry * basis[k]
        pairs.append((q, entries))
    pairs, dependent = _function_space_reduce(pairs)
    characteristics: List[Expr] = []
    vectors: List[Dict[int, Expr]] = []
    for q, entries in pairs:
        check = residual(man, q)
        if not check.is_zero:
            raise EngineError(
                "solver returned a non-symmetry; residual "
                f"{pretty(check.value)}"
            )
        characteristics.append(q)
        vectors.append(entries)
    result = AnsatzResult(
        basis=basis,
        characteristics=characteristics,
        vectors=vectors,
        assumptions=solution.assumptions,
        dependent_directions=dependent,
    )
    _canonicalize_rational_solutions(result)
    return result


def _function_space_reduce(pairs):
    """Reduce solutions to a basis of the characteristic *function* space.

    Nullspace directions along which the ansatz basis itself is linearly
    dependent produce the zero characteristic; those are dropped (counted),
    and the rest is put in reduced row echelon form over the term
    coordinates, so the reported dimension is the dimension of the space of
    symmetry functions.
    """
    from .linsolve import rational_rref

    pairs = [(q, entries) for q, entries in pairs]
    if not pairs:
        return [], 0
    keys = sorted(
        {key for q, _ in pairs for key in q.terms},
        key=lambda key: (_term_sort_key(key[0]), key[1]),
    )
    n = len(pairs)
    rows = []
    for i, (q, _) in enumerate(pairs):
        row = [q.terms.get(key, Fraction(0)) for key in keys]
        row += [Fraction(1 if j == i else 0) for j in range(n)]
        rows.append(row)
    rref, pivots = rational_rref(rows, pivot_cols=len(keys))
    out = []
    dependent = 0
    for row in rref:
        left = row[: len(keys)]
        combo = row[len(keys):]
        if not any(combo):
            continue
        if not any(left):
            dependent += 1
            continue
        q = ZERO
        entries: Dict[int, Expr] = {}
        for j, c in enumerate(combo):
            if not c:
                continue
            q = q + constant(c) * pairs[j][0]
            for k, e in pairs[j][1].items():
                entries[k] = entries.get(k, ZERO) + constant(c) * e
        entries = {k: e for k, e in entries.items() if not e.is_zero()}
        out.append((q, entries))
    return out, dependent


def _term_sort_key(m):
    from .expr import _mono_sort_key

    return _mono_sort_key(m)


def _canonicalize_rational_solutions(result: AnsatzResult):
    """Present rational solution spaces in reduced row echelon form."""
    from .linsolve import rational_rref

    n = len(result.basis)
    rows = []
    for entries in result.vectors:
        row = [Fraction(0)] * n
        for k, e in entries.items():
            try:
                row[k] = e.as_fraction()
            except Exception:
                return
        rows.append(row)
    if not rows:
        return
    rref, pivots = rational_rref(rows)
    rref = [row for row in rref if any(row)]
    characteristics = []
    vectors = []
    for row in rref:
        q = ZERO
        entries = {}
        for k, c in enumerate(row):
            if c:
                entries[k] = constant(c)
                q = q + constant(c) * result.basis[k]
        characteristics.append(q)
        vectors.append(entries)
    result.characteristics = characteristics
    result.vectors = vectors


# ---------------------------------------------------------------------------
# bounded nonexistence scans
# ---------------------------------------------------------------------------


@dataclass
class NonexistenceReport:
    order: int
    degree: int
    basis_size: int
    total_dimension: int
    new_dimension: int
    label: str
    assumptions: List[str]
    result: AnsatzResult

    @property
    def confirms_nonexistence(self) -> bool:
        return self.new_dimension == 0


def _term_beyond_known_class(mono, k: int, radicand, order: int) -> bool:
    """Is a single characteristic term outside the already-classified class?

    At order 1 the known class is the point class (affine in u_x, u_t), so
    anything of jet degree >= 2 in the jets counts as proper contact.  At
    higher orders a term is new when it carries a jet of that order,
    including inside the radical kernel.
    """
    max_jet = 0
    jet_degree = 0
    for s, e in mono.powers:
        if s.kind == sy.K_JET:
            max_jet = max(max_jet, s.jet_order)
            if s.jet_order >= 1:
                jet_degree += e
    if k != 0 and radicand is not None:
        max_jet = max(max_jet, radicand.max_jet_order())
    if order == 1:
        return max_jet >= 2 or jet_degree >= 2
    return max_jet >= order


def new_dimension_count(characteristics: Sequence[Expr], order: int) -> int:
    """Dimension of the solution span along terms beyond the known class."""
    high_keys = []
    seen = set()
    for q in characteristics:
        for (m, k) in q.terms:
            if (m, k) in seen:
                continue
            seen.add((m, k))
            if _term_beyond_known_class(m, k, q.radicand, order):
                high_keys.append((m, k))
    if not high_keys:
        return 0
    high_keys.sort(key=lambda key: (_term_sort_key(key[0]), key[1]))
    rows = [
        [q.terms.get(key, Fraction(0)) for key in high_keys]
        for q in characteristics
    ]
    from .linsolve import rational_rref

    _, pivots = rational_rref(rows)
    return len(pivots)


def jet_monomial_basis(order: int, degree: int) -> List[Expr]:
    """Monomials of total degree <= degree in the reduced jets of order <= order,
    each multiplied by 1, x and t."""
    jets = [sy.U]
    for i in range(1, order + 1):
        jets.append(sy.jet(i, 0))
        jets.append(sy.jet(0, i))
    combos = []
    for total in range(degree + 1):
        for combo in itertools.combinations_with_replacement(jets, total):
            combos.append(combo)
    out = []
    seen = set()
    for combo in combos:
        base = monomial([(s, 1) for s in combo])
        for extra in (None, sy.X, sy.T):
            m = base if extra is None else monomial(base.powers + ((extra, 1),))
            if m not in seen:
                seen.add(m)
                out.append(Expr({(m, 0): Fraction(1)}, None))
    return out


def bounded_nonexistence(
    man: Manifold,
    order: int,
    degree: int = 3,
    basis_limit: int = 600,
    extra_elements: Sequence[Expr] = (),
) -> NonexistenceReport:
    """Ansatz-bounded scan for new symmetries at the given jet order.

    Reports the dimension of the solution space and the number of dimensions
    not accounted for by characteristics of strictly lower order.  A zero in
    the latter is a bounded confirmation only: it rules out candidates inside
    the scanned ansatz, nothing more.
    """
    if order not in (1, 2, 3, 4):
        raise EngineError("bounded scans support orders 1 through 4")
    basis = jet_monomial_basis(order, degree) + list(extra_elements)
    if len(basis) > basis_limit:
        raise BasisTooLargeError(len(basis), basis_limit)
    result = ansatz_solve(man, basis)
    new_dim = new_dimension_count(result.characteristics, order)
    return NonexistenceReport(
        order=order,
        degree=degree,
        basis_size=len(basis),
        total_dimension=result.dimension,
        new_dimension=new_dim,
        label="ansatz-bounded",
        assumptions=result.assumptions,
        result=result,
    )


# ---------------------------------------------------------------------------
# built-in ansatz families
# ---------------------------------------------------------------------------

POINT_AFFINE_BASIS_NAMES = (
    "u[1,0]",
    "u[0,1]",
    "x*u[1,0]",
    "x*u[0,1]",
    "t*u[1,0]",
    "t*u[0,1]",
    "u",
    "x*u",
    "t*u",
    "1",
)


def point_affine_basis() -> List[Expr]:
    from .parser import parse

    return [parse(text) for text in POINT_AFFINE_BASIS_NAMES]


def order3_claimed_basis(interp: str = "third") -> List[Expr]:
    """Claimed-family scan: the affine point basis plus every monomial of the
    claimed third-order family (under one reading) and its radical member."""
    from . import claims

    ux = symbol(sy.jet(1, 0))
    uxx = symbol(sy.jet(2, 0))
    extras = [
        claims.x3(interp),
        claims.t3(interp),
        uxx ** 6 * claims.x3(interp),
        ux * uxx ** 4,
        ux ** 3,
        claims.v4(interp),
    ]
    out: List[Expr] = []
    for b in point_affine_basis() + extras:
        if b not in out:
            out.append(b)
    return out


def order3_derived_kernel() -> Expr:
    """First-derivative kernel 2 beta u_x^2 + alpha."""
    return (
        constant(2) * symbol(sy.BETA) * symbol(sy.jet(1, 0)) ** 2
        + symbol(sy.ALPHA)
    )


def order3_derived_basis() -> List[Expr]:
    """Radical scan over the first-derivative kernel, where a genuine
    third-order symmetry lives."""
    from .expr import sqrt

    ux = symbol(sy.jet(1, 0))
    uxx = symbol(sy.jet(2, 0))
    ux3 = symbol(sy.jet(3, 0))
    u = symbol(sy.U)
    rk = sqrt(order3_derived_kernel())
    return [
        symbol(sy.jet(1, 0)),
        symbol(sy.jet(0, 1)),
        u,
        ux3 * rk ** -1,
        ux3 * rk ** -3,
        ux3 * rk ** -5,
        ux * uxx ** 2 * rk ** -3,
        ux * uxx ** 2 * rk ** -5,
        uxx ** 2 * rk ** -3,
        ux ** 3 * rk ** -1,
        ux * rk ** -1,
        u * uxx * rk ** -3,
    ]


BUILTIN_BASES = ("point-affine", "order-2", "order-3", "order-3-derived", "order-4")


def builtin_basis(name: str, interp: str = "third") -> List[Expr]:
    if name == "point-affine":
        return point_affine_basis()
    if name == "order-2":
        return jet_monomial_basis(2, 3)
    if name == "order-3":
        return order3_claimed_basis(interp)
    if name == "order-3-derived":
        return order3_derived_basis()
    if name == "order-4":
        return jet_monomial_basis(4, 2)
    raise EngineError(f"unknown basis family {name!r}")


# ---------------------------------------------------------------------------
# derived point algebra
# ---------------------------------------------------------------------------


@dataclass
class DerivedPointAlgebra:
    result: AnsatzResult
    characteristics: List[Expr]  # ordered v1 (x-translation), v2, v3 (scaling)
    weight: Fraction  # derived scaling weight c* in x u_x - t u_t - c* u

    @property
    def dimension(self) -> int:
        return self.result.dimension


def derive_point_algebra(man: Manifold) -> DerivedPointAlgebra:
    """Solve the affine point ansatz and identify the canonical basis."""
    result = ansatz_solve(man, point_affine_basis())
    ux = symbol(sy.jet(1, 0))
    ut = symbol(sy.jet(0, 1))
    if result.dimension != 3 or ux not in result.characteristics or ut not in result.characteristics:
        raise EngineError(
            "derived point algebra is not the generic 3-dimensional family "
            f"(dimension {result.dimension}); table and adjoint commands "
            "need the generic parameter case"
        )
    scaling = next(
        q for q in result.characteristics if q not in (ux, ut)
    )
    weight = -scaling.coefficient(
        monomial(((sy.U, 1),)), lambda s: s == sy.U
    ).as_fraction()
    expected = (
        symbol(sy.X) * ux - symbol(sy.T) * ut - constant(weight) * symbol(sy.U)
    )
    if scaling != expected:
        raise EngineError("derived scaling generator has an unexpected shape")
    return DerivedPointAlgebra(
        result=result,
        characteristics=[ux, ut, scaling],
        weight=weight,
    )
